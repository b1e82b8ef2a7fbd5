#include "kreinlab/quad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

namespace kreinlab {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
double mag(const T& v) {
  return std::abs(v);
}

template <class T>
bool finite(const T& v) {
  if constexpr (std::is_same_v<T, double>) {
    return std::isfinite(v);
  } else {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  }
}

Transform stronger(Transform a, Transform b) {
  auto rank = [](Transform t) { return t == Transform::ExpTail ? 2 : t == Transform::DoubleExponential ? 1 : 0; };
  return rank(a) >= rank(b) ? a : b;
}

template <class T>
struct Piece {
  T value{};
  double err = 0.0;
  bool ok = false;
};

template <class T, class F>
Piece<T> gauss_kronrod15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
  const T fc = f(c);
  T resk = fc * kWgk[7];
  T resg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = hw * kXgk[j];
    const T f1 = f(c - dx), f2 = f(c + dx);
    resk += (f1 + f2) * kWgk[j];
    if (j % 2 == 1) resg += (f1 + f2) * kWg[j / 2];
  }
  Piece<T> p;
  p.value = resk * hw;
  p.err = mag(T((resk - resg) * hw));
  p.ok = finite(p.value);
  return p;
}

// Tanh-sinh on the finite interval [a, b]. Abscissae are generated as offsets
// from the nearer endpoint so that nodes can approach a singular endpoint
// without rounding onto it.
template <class T, class F>
Piece<T> tanh_sinh(const F& f, double a, double b, double rel_tol, double abs_tol, int max_level) {
  const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
  auto term = [&](double t, bool& stop) -> T {
    const double u = kHalfPi * std::sinh(t);
    const double au = std::abs(u);
    if (au > 350.0) {
      stop = true;
      return T{};
    }
    const double e2 = std::exp(2.0 * au);
    const double d = hw * 2.0 / (e2 + 1.0);  // distance from the nearer endpoint
    const double ch = std::cosh(u);
    const double w = hw * kHalfPi * std::cosh(t) / (ch * ch);
    double x;
    if (t > 0) {
      x = b - d;
      if (x >= b) { stop = true; return T{}; }
    } else if (t < 0) {
      x = a + d;
      if (x <= a) { stop = true; return T{}; }
    } else {
      x = c;
    }
    if (d <= 0.0 || w == 0.0) {
      stop = true;
      return T{};
    }
    T v = f(x) * w;
    if (!finite(v)) throw NumericError("tanh-sinh: non-finite integrand value");
    return v;
  };

  auto sweep = [&](double h, bool odd_only, double scale) -> T {
    T sum{};
    for (int dir : {1, -1}) {
      int small = 0;
      for (int j = (odd_only ? 1 : (dir == 1 ? 0 : 1));; j += (odd_only ? 2 : 1)) {
        const double t = dir * j * h;
        bool stop = false;
        const T v = term(t, stop);
        if (stop) break;
        sum += v;
        if (mag(v) <= 1e-22 * (scale + mag(sum))) {
          if (++small >= 3 && std::abs(t) > 1.0) break;
        } else {
          small = 0;
        }
        if (std::abs(t) > 7.0) break;
      }
    }
    return sum;
  };

  double h = 1.0;
  T s = sweep(h, false, 0.0);
  T prev = s * h;
  Piece<T> out;
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    s += sweep(h, true, mag(s));
    const T cur = s * h;
    const double diff = mag(T(cur - prev));
    out.value = cur;
    out.err = diff;
    if (level >= 3 && diff <= std::max(rel_tol * mag(cur), abs_tol)) {
      out.ok = true;
      return out;
    }
    prev = cur;
  }
  out.ok = false;
  return out;
}

// Exp-sinh on [a, inf): x = a + exp(pi/2 sinh t).
template <class T, class F>
Piece<T> exp_sinh(const F& f, double a, double rel_tol, double abs_tol, int max_level) {
  auto term = [&](double t, bool& stop) -> T {
    const double u = kHalfPi * std::sinh(t);
    if (u > 700.0 || u < -740.0) {
      stop = true;
      return T{};
    }
    const double d = std::exp(u);
    const double x = a + d;
    if (t < 0 && x <= a) {
      stop = true;
      return T{};
    }
    const double w = kHalfPi * std::cosh(t) * d;
    T v = f(x) * w;
    if (!finite(v)) {
      if (x > 1e100) {
        stop = true;
        return T{};
      }
      throw NumericError("exp-sinh: non-finite integrand value");
    }
    return v;
  };
  auto sweep = [&](double h, bool odd_only, double scale) -> T {
    T sum{};
    for (int dir : {1, -1}) {
      int small = 0;
      for (int j = (odd_only ? 1 : (dir == 1 ? 0 : 1));; j += (odd_only ? 2 : 1)) {
        const double t = dir * j * h;
        bool stop = false;
        const T v = term(t, stop);
        if (stop) break;
        sum += v;
        if (mag(v) <= 1e-22 * (scale + mag(sum))) {
          if (++small >= 3 && std::abs(t) > 1.0) break;
        } else {
          small = 0;
        }
        if (std::abs(t) > 8.0) break;
      }
    }
    return sum;
  };
  double h = 1.0;
  T s = sweep(h, false, 0.0);
  T prev = s * h;
  Piece<T> out;
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    s += sweep(h, true, mag(s));
    const T cur = s * h;
    const double diff = mag(T(cur - prev));
    out.value = cur;
    out.err = diff;
    if (level >= 3 && diff <= std::max(rel_tol * mag(cur), abs_tol)) {
      out.ok = true;
      return out;
    }
    prev = cur;
  }
  out.ok = false;
  return out;
}

template <class T>
struct Totals {
  T value{};
  double err = 0.0;
  int panels = 0;
  Transform transform = Transform::None;
};

template <class T, class F>
void adaptive_gk(const F& f, double a, double b, double target, int budget, Totals<T>& tot) {
  struct Item {
    double a, b;
    Piece<T> p;
    bool operator<(const Item& o) const { return p.err < o.p.err; }
  };
  std::priority_queue<Item> heap;
  Item first{a, b, gauss_kronrod15<T>(f, a, b)};
  T value = first.p.value;
  double err = first.p.err;
  heap.push(first);
  int panels = 1;
  while (err > target && panels < budget) {
    Item it = heap.top();
    heap.pop();
    const double m = 0.5 * (it.a + it.b);
    if (!(m > it.a && m < it.b)) {
      heap.push(it);
      break;
    }
    Item l{it.a, m, gauss_kronrod15<T>(f, it.a, m)};
    Item r{m, it.b, gauss_kronrod15<T>(f, m, it.b)};
    value += l.p.value + r.p.value - it.p.value;
    err += l.p.err + r.p.err - it.p.err;
    heap.push(l);
    heap.push(r);
    ++panels;
  }
  // Recompute the error sum to shed accumulated rounding in `err`.
  double e = 0.0;
  T v{};
  while (!heap.empty()) {
    v += heap.top().p.value;
    e += heap.top().p.err;
    heap.pop();
  }
  tot.value += v;
  tot.err += e;
  tot.panels += panels;
  (void)value;
  (void)err;
}

template <class T, class F>
void integrate_segment(const F& f, double a, double b, bool sing_a, bool sing_b, const QuadOptions& opt,
                       double target, int depth, Totals<T>& tot) {
  const bool tail = std::isinf(b);
  if (tail) {
    Piece<T> p = exp_sinh<T>(f, a, opt.rel_tol, target, opt.max_level);
    tot.transform = stronger(tot.transform, Transform::ExpTail);
    if (p.ok || depth > 6 || tot.panels >= opt.max_panels) {
      tot.value += p.value;
      tot.err += p.err;
      tot.panels += 1;
      return;
    }
    const double m = a + 4.0 * std::max(1.0, std::abs(a));
    integrate_segment<T>(f, a, m, sing_a, false, opt, 0.5 * target, depth + 1, tot);
    integrate_segment<T>(f, m, kInf, false, false, opt, 0.5 * target, depth + 1, tot);
    return;
  }
  if (sing_a || sing_b) {
    Piece<T> p = tanh_sinh<T>(f, a, b, opt.rel_tol, target, opt.max_level);
    tot.transform = stronger(tot.transform, Transform::DoubleExponential);
    if (p.ok || depth > 12 || tot.panels >= opt.max_panels) {
      tot.value += p.value;
      tot.err += p.err;
      tot.panels += 1;
      return;
    }
    const double m = 0.5 * (a + b);
    integrate_segment<T>(f, a, m, sing_a, false, opt, 0.5 * target, depth + 1, tot);
    integrate_segment<T>(f, m, b, false, sing_b, opt, 0.5 * target, depth + 1, tot);
    return;
  }
  adaptive_gk<T>(f, a, b, target, std::max(1, opt.max_panels - tot.panels), tot);
}

template <class T, class F>
QuadResult<T> integrate_impl(const F& f, double a, double b, std::span<const double> singular_points,
                             const QuadOptions& opt) {
  if (std::isnan(a) || std::isnan(b)) throw InputError("integrate: NaN bounds");
  if (!(opt.rel_tol > 0) || !(opt.abs_tol > 0)) throw InputError("integrate: tolerances must be positive");
  QuadResult<T> res;
  if (a == b) {
    res.panels_used = 1;
    return res;
  }
  if (a > b) {
    auto r = integrate_impl<T>(f, b, a, singular_points, opt);
    r.value = -r.value;
    return r;
  }
  if (std::isinf(a) && a > 0) throw InputError("integrate: lower bound is +infinity");

  auto is_singular = [&](double x) {
    return std::find(singular_points.begin(), singular_points.end(), x) != singular_points.end();
  };
  std::vector<double> cuts;
  cuts.push_back(a);
  std::vector<double> inner;
  for (double s : singular_points)
    if (s > a && s < b) inner.push_back(s);
  std::sort(inner.begin(), inner.end());
  inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
  if (std::isinf(a) && std::isinf(b) && inner.empty()) inner.push_back(0.0);
  cuts.insert(cuts.end(), inner.begin(), inner.end());
  cuts.push_back(b);

  Totals<T> tot;
  // Segments are summed in a fixed order so results are reproducible.
  std::vector<Totals<T>> parts;
  const int nseg = static_cast<int>(cuts.size()) - 1;
  for (int s = 0; s < nseg; ++s) {
    const double lo = cuts[s], hi = cuts[s + 1];
    const bool sing_lo = (s > 0) || is_singular(lo);
    const bool sing_hi = (s < nseg - 1) || is_singular(hi);
    Totals<T> part;
    part.transform = Transform::None;
    const double target = opt.abs_tol / nseg;
    if (std::isinf(lo)) {
      auto g = [&](double x) { return f(-x); };
      integrate_segment<T>(g, -hi, kInf, sing_hi, false, opt, target, 0, part);
    } else {
      integrate_segment<T>(f, lo, hi, sing_lo, sing_hi, opt, target, 0, part);
    }
    tot.value += part.value;
    tot.err += part.err;
    tot.panels += part.panels;
    tot.transform = stronger(tot.transform, part.transform);
  }
  res.value = tot.value;
  res.abs_error_estimate = tot.err;
  res.panels_used = std::max(1, tot.panels);
  res.transform_used = tot.transform;
  const double allowed = std::max(opt.rel_tol * mag(res.value), opt.abs_tol);
  if (!finite(res.value)) throw NumericError("integrate: non-finite result");
  if (res.abs_error_estimate > allowed) {
    std::ostringstream os;
    os << "integrate: tolerance not met on (" << a << ", " << b << "): error estimate "
       << res.abs_error_estimate << " > " << allowed;
    if constexpr (std::is_same_v<T, double>) {
      throw AccuracyError(os.str(), res.value);
    } else {
      throw AccuracyError(os.str(), mag(res.value));
    }
  }
  return res;
}

}  // namespace

QuadResult<double> integrate_real(const RealFn& f, double a, double b, std::span<const double> singular_points,
                                  const QuadOptions& opt) {
  return integrate_impl<double>(f, a, b, singular_points, opt);
}

QuadResult<std::complex<double>> integrate_complex(const ComplexFn& f, double a, double b,
                                                   std::span<const double> singular_points,
                                                   const QuadOptions& opt) {
  return integrate_impl<std::complex<double>>(f, a, b, singular_points, opt);
}

}  // namespace kreinlab
