#include "kreinlab/hardy.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "kreinlab/krein.hpp"

namespace kreinlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Below this log mu the sample is stored as exactly zero.
constexpr double kLogUnderflow = -800.0;

std::vector<double> sorted_points(std::vector<double> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// First-kind Chebyshev interpolant on [a, b] with barycentric weights.
struct ChebPanel {
  static constexpr int N = 24;
  double a, b;
  double x[N];
  double w[N];
  cplx f[N];

  ChebPanel(double a_, double b_) : a(a_), b(b_) {
    for (int k = 0; k < N; ++k) {
      double th = (2 * k + 1) * kPi / (2 * N);
      x[k] = 0.5 * (a + b) + 0.5 * (b - a) * std::cos(th);
      w[k] = ((k % 2) ? -1.0 : 1.0) * std::sin(th);
    }
  }

  cplx operator()(double t) const {
    cplx num = 0;
    double den = 0;
    for (int k = 0; k < N; ++k) {
      double d = t - x[k];
      if (d == 0) return f[k];
      double c = w[k] / d;
      num += c * f[k];
      den += c;
    }
    return num / den;
  }
};

}  // namespace

double FrequencyGrid::dt() const { return 2 * kPi / (static_cast<double>(n) * domega); }

FrequencyGrid grid_from_dt(long n, double dt) {
  if (n < 8 || n % 4 != 0) throw InputError("grid: n must be a multiple of 4 and at least 8");
  if (!(dt > 0)) throw InputError("grid: dt must be positive");
  FrequencyGrid g;
  g.n = n;
  g.domega = 2 * kPi / (static_cast<double>(n) * dt);
  return g;
}

OuterFunction make_outer(std::function<double(double)> log_mu, std::vector<double> breakpoints, std::string label) {
  OuterFunction o;
  o.log_mu = std::move(log_mu);
  o.breakpoints = sorted_points(std::move(breakpoints));
  o.label = std::move(label);
  return o;
}

OuterFunction outer_for_weight(const WeightSpec& spec) {
  if (!spec.is_full_line()) throw InputError("outer_for_weight: weight must be full-line (use even_extension)");
  validate(spec);
  auto k0 = krein_value(spec, KreinVariant::K0);
  if (!k0.convergent())
    throw InputError("outer_for_weight: int |log mu| / (1 + s^2) diverges for " + spec.name());
  auto prof = singularity_profile(spec);
  std::vector<double> bps = prof.breakpoints;
  for (const auto& s : prof.interior_points) bps.push_back(s.location);
  bps.push_back(0.0);
  WeightSpec w = spec;
  auto o = make_outer(
      [w](double s) {
        double lr = eval_log_weight(w, s);
        double a = std::abs(s);
        double l1 = a > 1 ? 2 * std::log(a) + std::log1p(1 / (a * a)) : std::log1p(a * a);
        return lr - l1;
      },
      std::move(bps), spec.name());
  o.log_mu_over_s = [w](double v, int sign) {
    double emv = std::exp(-v);
    double l = log_density_over_w(w, v) - (2 * v + std::log1p(emv * emv)) * emv;
    if (sign < 0) l += w.log_negative_scale * emv;
    return l;
  };
  return o;
}

cplx outer_log(const OuterFunction& outer, cplx z) {
  const double delta = z.real();
  const double om = z.imag();
  if (!(delta >= outer.delta_min) || !std::isfinite(delta) || !std::isfinite(om))
    throw InputError("outer_from_modulus: need Re z >= delta_min");
  // p = -i z lies in the lower half-plane; 1 - i s z = 1 + s p.
  const cplx p(om, -delta);
  double l0 = outer.log_mu(om);
  if (!std::isfinite(l0)) l0 = 0.0;
  const cplx coef(0.0, 1.0 / kPi);
  auto f = [&](double s) -> cplx {
    double l = outer.log_mu(s);
    if (!std::isfinite(l)) return 0.0;
    double d = l - l0;
    if (d == 0) return 0.0;
    cplx k = (1.0 + s * p) / (s - p);
    double q = 1.0 + s * s;
    if (!std::isfinite(q)) return 0.0;
    return coef * d * k / q;
  };
  // |s| > S is integrated in v = log|s| with u = 1/s, so tails like
  // 1/(s log^2 s) are reached far beyond the double range of s.
  double S = std::max(8.0, 4 * std::abs(om));
  for (double b : outer.breakpoints) S = std::max(S, 2 * std::abs(b));
  const double V = std::log(S);
  auto tail = [&](int sign) {
    return [&, sign](double v) -> cplx {
      double u = sign * std::exp(-v);
      double lam;  // log mu(s) / s
      if (outer.log_mu_over_s) {
        lam = sign * outer.log_mu_over_s(v, sign);
      } else {
        double s = sign * std::exp(v);
        if (!std::isfinite(s)) return 0.0;
        lam = outer.log_mu(s) * u;
      }
      if (!std::isfinite(lam)) return 0.0;
      // ds = |s| dv = sign s dv; K s^2 with K = (1 + s p) / ((s - p)(1 + s^2)).
      cplx ks2 = (u + p) / ((1.0 - p * u) * (1.0 + u * u));
      return coef * double(sign) * (lam - l0 * u) * ks2;
    };
  };
  std::vector<double> pts;
  for (double b : outer.breakpoints)
    if (std::abs(b) < S) pts.push_back(b);
  pts.push_back(om);
  pts.push_back(-S);
  pts.push_back(S);
  pts = sorted_points(std::move(pts));
  auto total = [&](const QuadOptions& o) {
    return integrate(f, -S, S, pts, o).value + integrate(tail(1), V, kInf, {}, o).value +
           integrate(tail(-1), V, kInf, {}, o).value;
  };
  // Where mu is tiny the exponent is large; accuracy is judged relative to it.
  QuadOptions opt = outer.quad;
  opt.abs_tol *= std::max(1.0, std::abs(l0));
  try {
    return l0 + total(opt);
  } catch (const AccuracyError&) {
    // The error estimates are conservative near log-type singularities; one
    // retry with a hundredfold looser tolerance before giving up.
    QuadOptions loose = opt;
    loose.rel_tol *= 100;
    loose.abs_tol *= 100;
    loose.max_panels *= 2;
    return l0 + total(loose);
  }
}

cplx outer_from_modulus(const OuterFunction& outer, cplx z) { return std::exp(outer_log(outer, z)); }

BoundarySamples boundary_samples(const OuterFunction& outer, const FrequencyGrid& grid) {
  const auto key = std::make_pair(grid.n, grid.domega);
  {
    std::lock_guard<std::mutex> lk(outer.cache->m);
    auto it = outer.cache->samples.find(key);
    if (it != outer.cache->samples.end()) return *it->second;
  }

  const long n = grid.n;
  BoundarySamples bs;
  bs.grid = grid;
  bs.X.assign(n, 0.0);
  bs.mu.assign(n, 0.0);
  std::vector<double> lg(n);
  for (long j = 0; j < n; ++j) {
    lg[j] = outer.log_mu(grid.omega(j));
    bs.mu[j] = std::exp(lg[j]);
  }

  // Remainder R(w) = log X(delta + i w) - log mu(w); smooth between breakpoints.
  auto remainder = [&](double w) { return outer_log(outer, cplx(outer.delta_min, w)) - outer.log_mu(w); };
  auto store = [&](long j, cplx R) {
    if (lg[j] < kLogUnderflow) return;
    bs.X[j] = std::exp(lg[j] + R);
  };
  auto needed = [&](long j) { return std::isfinite(lg[j]) && lg[j] >= kLogUnderflow; };

  constexpr long kDirect = 32;
  constexpr double kTol = 1e-10;
  // Grid indices with omega in [a, b).
  auto first_index = [&](double a) {
    double r = a / grid.domega + 0.5 * static_cast<double>(n) - 0.5;
    long j = static_cast<long>(std::ceil(r));
    while (j > 0 && grid.omega(j - 1) >= a) --j;
    while (j < n && grid.omega(j) < a) ++j;
    return std::clamp(j, 0L, n);
  };

  std::function<void(double, double, long, long)> fill = [&](double a, double b, long j0, long j1) {
    long active = 0;
    for (long j = j0; j < j1; ++j) active += needed(j);
    if (active == 0) return;
    if (j1 - j0 <= kDirect) {
      for (long j = j0; j < j1; ++j)
        if (needed(j)) store(j, remainder(grid.omega(j)));
      return;
    }
    // Off-grid nodes next to a singular breakpoint may defeat the quadrature;
    // such a panel is simply split further.
    auto trial = [&](double w) {
      try {
        return remainder(w);
      } catch (const AccuracyError&) {
        return cplx(std::nan(""), 0.0);
      }
    };
    ChebPanel P(a, b);
    bool ok = true;
    for (int k = 0; k < ChebPanel::N && ok; ++k) {
      P.f[k] = trial(P.x[k]);
      ok = std::isfinite(P.f[k].real());
    }
    for (double frac : {0.013, 0.31, 0.67, 0.987}) {
      if (!ok) break;
      double t = a + frac * (b - a);
      ok = std::abs(P(t) - trial(t)) <= kTol * std::max(1.0, std::abs(outer.log_mu(t)));
    }
    if (ok) {
      for (long j = j0; j < j1; ++j)
        if (needed(j)) store(j, P(grid.omega(j)));
      return;
    }
    double m = 0.5 * (a + b);
    long jm = first_index(m);
    fill(a, m, j0, jm);
    fill(m, b, jm, j1);
  };

  const double lo = grid.omega(0), hi = grid.omega(n - 1);
  std::vector<double> cuts{lo};
  for (double b : outer.breakpoints)
    if (b > lo && b < hi) cuts.push_back(b);
  cuts.push_back(std::nextafter(hi, kInf));
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    long j0 = first_index(cuts[i]);
    long j1 = first_index(cuts[i + 1]);
    fill(cuts[i], cuts[i + 1], j0, j1);
  }

  auto shared = std::make_shared<const BoundarySamples>(bs);
  std::lock_guard<std::mutex> lk(outer.cache->m);
  outer.cache->samples.emplace(key, shared);
  return bs;
}

FrequencyGrid default_grid(const OuterFunction& outer, long n, double min_omega, double tail_fraction) {
  auto mu2 = [&](double s) {
    double l = outer.log_mu(s);
    return std::isfinite(l) ? std::exp(2 * l) : 0.0;
  };
  auto pts = outer.breakpoints;
  double total = integrate(mu2, -kInf, kInf, pts, 1e-12).value;
  if (!(total > 0)) throw InputError("default_grid: mu vanishes");
  auto tail = [&](double om) {
    std::vector<double> right, left;
    for (double b : pts) {
      if (b > om) right.push_back(b);
      if (b < -om) left.push_back(b);
    }
    right.push_back(om);
    left.push_back(-om);
    return integrate(mu2, om, kInf, right, 1e-13).value + integrate(mu2, -kInf, -om, left, 1e-13).value;
  };
  // Half the requested fraction leaves room for the edge-based tail estimate
  // in inverse_fourier.
  const double target = 0.5 * tail_fraction * total;
  double hi = 1.0;
  while (tail(hi) > target) {
    hi *= 2;
    if (hi > 1e8) throw AccuracyError("default_grid: mu^2 tail does not fall below the requested fraction");
  }
  double lo = hi / 2;
  for (int it = 0; it < 40 && hi - lo > 1e-6 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (tail(mid) > target ? lo : hi) = mid;
  }
  double om = std::max(hi, min_omega);
  return grid_from_dt(n, kPi / om);
}

BoundaryCheck boundary_modulus_check(const OuterFunction& outer, const std::vector<double>& omegas,
                                     const std::vector<double>& ladder) {
  if (ladder.empty()) throw InputError("boundary_modulus_check: empty delta ladder");
  for (size_t k = 0; k < ladder.size(); ++k) {
    if (!(ladder[k] >= outer.delta_min)) throw InputError("boundary_modulus_check: delta below delta_min");
    if (k && !(ladder[k] < ladder[k - 1])) throw InputError("boundary_modulus_check: ladder must decrease");
  }
  BoundaryCheck bc;
  bc.deltas = ladder;
  bc.omegas = omegas;
  for (double w : omegas) {
    double l = outer.log_mu(w);
    if (!std::isfinite(l) || l < kLogUnderflow)
      throw InputError("boundary_modulus_check: grid point where mu = 0");
  }
  for (double d : ladder) {
    std::vector<double> row;
    double mx = 0;
    for (double w : omegas) {
      // |X| / mu - 1 = exp(Re log X - log mu) - 1
      double e = outer_log(outer, cplx(d, w)).real() - outer.log_mu(w);
      double r = std::expm1(e);
      row.push_back(r);
      mx = std::max(mx, std::abs(r));
    }
    bc.rel_dev.push_back(std::move(row));
    bc.max_abs_dev.push_back(mx);
  }
  bc.max_rel_deviation = bc.max_abs_dev.back();
  for (size_t k = 1; k < ladder.size(); ++k) {
    if (bc.max_abs_dev[k] > bc.max_abs_dev[k - 1] * 1.1 + 1e-12) bc.monotone = false;
  }
  if (ladder.size() >= 2) {
    size_t k = ladder.size() - 1;
    double ex = 0;
    for (size_t j = 0; j < omegas.size(); ++j) {
      double r1 = bc.rel_dev[k - 1][j], r2 = bc.rel_dev[k][j];
      double r0 = r2 - ladder[k] * (r1 - r2) / (ladder[k - 1] - ladder[k]);
      ex = std::max(ex, std::abs(r0));
    }
    bc.extrapolated_deviation = ex;
  } else {
    bc.extrapolated_deviation = bc.max_rel_deviation;
  }
  if (!bc.monotone) throw NumericError("boundary_modulus_check: deviation does not shrink along the delta ladder");
  return bc;
}

long TimeDomainSignal::index_of(double t) const {
  long m = std::lround((t - t0) / dt);
  return std::clamp(m, 0L, n - 1);
}

double TimeDomainSignal::l2_norm() const {
  double s = 0;
  for (const auto& v : samples) s += std::norm(v);
  return std::sqrt(s * dt);
}

double frequency_l2_norm(const FrequencyGrid& grid, const std::vector<cplx>& X) {
  double s = 0;
  for (const auto& v : X) s += std::norm(v);
  return std::sqrt(s * grid.domega / (2 * kPi));
}

TimeDomainSignal inverse_fourier(const FrequencyGrid& grid, const std::vector<cplx>& X, double tail_fraction) {
  const long n = grid.n;
  if (static_cast<long>(X.size()) != n) throw InputError("inverse_fourier: sample count does not match grid");
  if (n % 4 != 0) throw InputError("inverse_fourier: n must be a multiple of 4");
  for (const auto& v : X)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw InputError("inverse_fourier: non-finite sample");

  double xmax = 0;
  for (const auto& v : X) xmax = std::max(xmax, std::abs(v));

  // 1/(i w) decay at both window edges means x jumps at t = 0.
  const long e0 = 0, e1 = n - 1, h0 = n / 4, h1 = 3 * n / 4 - 1;
  auto decay = [&](long e, long h) {
    double ae = std::abs(X[e]), ah = std::abs(X[h]);
    if (ae == 0 || ah == 0) return kInf;
    return std::log(ah / ae) / std::log(std::abs(grid.omega(e)) / std::abs(grid.omega(h)));
  };
  cplx J = 0.0;
  if (xmax > 0 && std::abs(decay(e0, h0) - 1) < 0.05 && std::abs(decay(e1, h1) - 1) < 0.05) {
    J = 0.5 * (X[e0] * cplx(1, grid.omega(e0)) + X[e1] * cplx(1, grid.omega(e1)));
  }
  std::vector<cplx> R(X);
  if (J != 0.0)
    for (long j = 0; j < n; ++j) R[j] -= J / cplx(1, grid.omega(j));

  double rmax = 0, total = 0;
  for (const auto& v : R) {
    rmax = std::max(rmax, std::abs(v));
    total += std::norm(v) * grid.domega;
  }
  if (rmax > 1e-13 * xmax) {
    // Envelope of |R|^2 on two adjacent blocks just inside each edge; block
    // maxima keep oscillating spectra (bump transforms) from faking a slope.
    const long k = std::max(1L, n / 64);
    auto side_tail = [&](long e, long dir) {
      double m1 = 0, m2 = 0;
      for (long i = 0; i < k; ++i) {
        m1 = std::max(m1, std::norm(R[e + dir * i]));
        m2 = std::max(m2, std::norm(R[e + dir * (k + i)]));
      }
      const double we = std::abs(grid.omega(e));
      const double w1 = std::abs(grid.omega(e + dir * (k / 2))), w2 = std::abs(grid.omega(e + dir * (k + k / 2)));
      if (m1 <= 1e-30 * rmax * rmax) return m1 * we;
      if (!(m2 > m1)) return kInf;
      double p = std::log(m2 / m1) / std::log(w1 / w2);
      if (!(p > 1.05)) return kInf;
      // envelope carried from the block centre out to the edge
      return m1 * std::pow(w1 / we, p) * we / (p - 1);
    };
    double tail = side_tail(e0, 1) + side_tail(e1, -1);
    if (!(tail <= tail_fraction * total))
      throw AccuracyError("inverse_fourier: |X|^2 tail beyond the window exceeds the allowed fraction", tail / total);
  }

  std::vector<cplx> buf(n);
  for (long j = 0; j < n; ++j) buf[j] = (j % 2 ? -1.0 : 1.0) * R[j];
  auto* data = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  TimeDomainSignal x;
  x.n = n;
  x.dt = grid.dt();
  x.t0 = grid.t0();
  x.jump = J;
  x.samples.resize(n);
  const double scale = grid.domega / (2 * kPi);
  for (long m = 0; m < n; ++m) {
    double ph = kPi * (static_cast<double>(m) - 0.5 * static_cast<double>(n)) / static_cast<double>(n);
    cplx v = scale * (m % 2 ? -1.0 : 1.0) * std::polar(1.0, ph) * buf[m];
    double t = x.time(m);
    if (J != 0.0 && t >= 0) v += J * std::exp(-t);
    x.samples[m] = v;
  }
  return x;
}

TimeDomainSignal inverse_fourier(const BoundarySamples& s, double tail_fraction) {
  return inverse_fourier(s.grid, s.X, tail_fraction);
}

double causality_defect(const TimeDomainSignal& x) {
  double neg = 0, all = 0;
  for (long m = 0; m < x.n; ++m) {
    double v = std::norm(x.samples[m]);
    all += v;
    if (x.time(m) < 0) neg += v;
  }
  if (!(all > 0)) throw InputError("causality_defect: zero signal");
  return std::sqrt(neg / all);
}

std::string boundary_csv(const BoundarySamples& s, long stride, double omega_limit) {
  std::string out = "omega,re_X,im_X,abs_X,mu\n";
  char line[160];
  for (long j = 0; j < s.grid.n; j += std::max(1L, stride)) {
    double w = s.grid.omega(j);
    if (std::abs(w) > omega_limit) continue;
    const cplx v = s.X[j];
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n", w, v.real(), v.imag(), std::abs(v),
                  s.mu.empty() ? 0.0 : s.mu[j]);
    out += line;
  }
  return out;
}

}  // namespace kreinlab
