#include "kreinlab/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace kreinlab {

namespace {

constexpr int kRuleNodes = 16;
constexpr double kDropNats = 80.0;

void gauss_legendre_double(int m, std::vector<double>& x, std::vector<double>& w) {
  x.assign(m, 0.0);
  w.assign(m, 0.0);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (m + 0.5)), pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1, p2 = 0;
      for (int j = 0; j < m; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2 * j + 1) * z * p2 - j * p3) / (j + 1);
      }
      pp = m * (z * p1 - p2) / (z * z - 1);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[m - 1 - i] = z;
    w[i] = w[m - 1 - i] = 2 / ((1 - z * z) * pp * pp);
  }
}

// Multiplication by an exact power of i without rounding.
cplx times_ipow(cplx v, int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return v;
    case 1: return {-v.imag(), v.real()};
    case 2: return {-v.real(), -v.imag()};
    default: return {v.imag(), -v.real()};
  }
}

void require_half_line(const WeightSpec& spec) {
  if (spec.is_full_line()) throw InputError("approximation is posed on the half line; got " + spec.name());
}

// c_k = sum_j W_j e^{i w_j T} p^_k(w_j), k = 0..d.
std::vector<cplx> project(const RecurrenceTable& table, const GaussRule& rule, double T, int d) {
  std::vector<long double> re(d + 1, 0.0L), im(d + 1, 0.0L);
  std::vector<double> p(d + 1);
  for (size_t j = 0; j < rule.nodes.size(); ++j) {
    const double w = rule.nodes[j];
    eval_orthonormal_all(table, d, w, p.data());
    const double c = std::cos(w * T), s = std::sin(w * T);
    for (int k = 0; k <= d; ++k) {
      const double v = rule.weights[j] * p[k];
      if (!std::isfinite(v)) throw AccuracyError("projection: orthonormal polynomial overflow on the rule");
      re[k] += v * c;
      im[k] += v * s;
    }
  }
  std::vector<cplx> out(d + 1);
  for (int k = 0; k <= d; ++k) out[k] = {static_cast<double>(re[k]), static_cast<double>(im[k])};
  return out;
}

void fill_forms(PolyApproximant& a, const RecurrenceTable& table) {
  a.coeffs_real_axis = orthonormal_to_monomial(table, a.orthonormal_coeffs);
  a.coeffs_iaxis = to_iaxis(a.coeffs_real_axis);
}

}  // namespace

cplx PolyApproximant::eval_real_axis(double w) const {
  cplx acc = 0;
  for (int k = static_cast<int>(coeffs_real_axis.size()) - 1; k >= 0; --k) acc = acc * w + coeffs_real_axis[k];
  return acc;
}

cplx PolyApproximant::eval_iaxis(cplx z) const {
  cplx acc = 0;
  for (int k = static_cast<int>(coeffs_iaxis.size()) - 1; k >= 0; --k) acc = acc * z + coeffs_iaxis[k];
  return acc;
}

std::vector<cplx> to_iaxis(std::span<const cplx> real_axis) {
  std::vector<cplx> a(real_axis.size());
  for (size_t k = 0; k < a.size(); ++k) a[k] = times_ipow(real_axis[k], -static_cast<int>(k));
  return a;
}

std::vector<cplx> to_real_axis(std::span<const cplx> iaxis) {
  std::vector<cplx> a(iaxis.size());
  for (size_t k = 0; k < a.size(); ++k) a[k] = times_ipow(iaxis[k], static_cast<int>(k));
  return a;
}

std::vector<cplx> orthonormal_to_monomial(const RecurrenceTable& table, std::span<const cplx> c) {
  const int d = static_cast<int>(c.size()) - 1;
  if (d < 0) return {};
  if (d > table.n) throw InputError("orthonormal_to_monomial: table too short");
  using LD = long double;
  std::vector<LD> prev(d + 1, 0.0L), cur(d + 1, 0.0L), next(d + 1);
  cur[0] = 1.0L / std::sqrt(static_cast<LD>(table.beta[0]));
  std::vector<std::complex<LD>> acc(d + 1, 0.0L);
  for (int k = 0;; ++k) {
    for (int j = 0; j <= k; ++j) acc[j] += std::complex<LD>(c[k].real(), c[k].imag()) * cur[j];
    if (k == d) break;
    const LD a = table.alpha[k];
    const LD sb = k == 0 ? 0.0L : std::sqrt(static_cast<LD>(table.beta[k]));
    const LD sbn = std::sqrt(static_cast<LD>(k + 1 < table.n ? table.beta[k + 1] : table.beta_next));
    for (int j = 0; j <= k + 1; ++j) {
      const LD shifted = j > 0 ? cur[j - 1] : 0.0L;
      next[j] = (shifted - a * cur[j] - sb * prev[j]) / sbn;
    }
    prev = cur;
    cur = next;
  }
  std::vector<cplx> out(d + 1);
  for (int j = 0; j <= d; ++j) out[j] = {static_cast<double>(acc[j].real()), static_cast<double>(acc[j].imag())};
  return out;
}

GaussRule resolving_rule(const WeightSpec& spec, double T, int d, int refine, long max_nodes) {
  require_half_line(spec);
  if (!(T >= 0) || !std::isfinite(T)) throw InputError("resolving_rule: T must be a finite nonnegative real");
  if (d < 0) throw InputError("resolving_rule: d must be >= 0");
  // Window in x = log w for the zeroth-moment integrand.
  auto g = [&](double x) { return x + half_line_log_density(spec, std::exp(x)); };
  double peak = -100, best = -std::numeric_limits<double>::infinity();
  for (double x = -100; x <= 700; x += 0.25)
    if (g(x) > best) best = g(x), peak = x;
  if (peak > 690) throw InputError("resolving_rule: weight has infinite mass");
  double xhi = peak, xlo = peak;
  while (xhi < 705 && g(xhi) > best - kDropNats) xhi += 0.25;
  while (xlo > -700 && g(xlo) > best - kDropNats) xlo -= 0.25;
  const double wmin = std::exp(xlo), wmax = std::exp(xhi);

  std::vector<double> cuts;
  const auto prof = singularity_profile(spec);
  for (const auto& s : prof.interior_points)
    if (s.location > wmin && s.location < wmax) cuts.push_back(s.location);
  for (double b : prof.breakpoints)
    if (b > wmin && b < wmax) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());

  const double shrink = std::ldexp(1.0, -refine);
  const double rel = 0.25 * shrink;
  const double cap = T > 0 ? 3.0 / T * shrink : std::numeric_limits<double>::infinity();
  std::vector<double> edges{0.0, wmin};
  double a = wmin;
  size_t ci = 0;
  while (a < wmax) {
    double b = a + std::min(rel * a, cap);
    while (ci < cuts.size() && cuts[ci] <= a) ++ci;
    if (ci < cuts.size() && cuts[ci] < b) b = cuts[ci];
    b = std::min(b, wmax);
    edges.push_back(b);
    a = b;
    if (static_cast<long>(edges.size()) * kRuleNodes > max_nodes)
      throw AccuracyError("resolving_rule: oscillation of e^{iwT} needs more than " + std::to_string(max_nodes) +
                          " nodes; reduce T or raise the budget");
  }
  std::vector<double> gx, gw;
  gauss_legendre_double(kRuleNodes, gx, gw);
  GaussRule rule;
  for (size_t p = 0; p + 1 < edges.size(); ++p) {
    const double lo = edges[p], hi = edges[p + 1];
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    for (int j = 0; j < kRuleNodes; ++j) {
      const double w = c + h * gx[j];
      const double lr = half_line_log_density(spec, w);
      const double W = h * gw[j] * std::exp(lr);
      if (W > 0) {
        rule.nodes.push_back(w);
        rule.weights.push_back(W);
      }
    }
  }
  if (static_cast<int>(rule.nodes.size()) < 4 * (d + 1)) throw AccuracyError("resolving_rule: too few nodes");
  return rule;
}

PolyApproximant best_l2(const WeightSpec& spec, double T, int d) {
  return best_l2(spec, recurrence(spec, d + 1), T, d);
}

PolyApproximant best_l2(const WeightSpec& spec, const RecurrenceTable& table, double T, int d) {
  require_half_line(spec);
  if (d < 0) throw InputError("best_l2: d must be >= 0");
  if (!(T >= 0)) throw InputError("best_l2: T must be >= 0");
  if (table.n < d) throw InputError("best_l2: recurrence table too short");
  const double scale = std::sqrt(table.beta[0]);
  std::vector<cplx> c = project(table, resolving_rule(spec, T, d, 0), T, d);
  bool ok = false;
  for (int refine = 1; refine <= 4 && !ok; ++refine) {
    std::vector<cplx> c2 = project(table, resolving_rule(spec, T, d, refine), T, d);
    double diff = 0;
    for (int k = 0; k <= d; ++k) diff = std::max(diff, std::abs(c2[k] - c[k]));
    ok = diff <= 1e-13 * scale;
    c = std::move(c2);
  }
  if (!ok) throw AccuracyError("best_l2: projection did not stabilize under rule refinement");

  PolyApproximant a;
  a.degree = d;
  a.T = T;
  a.weight = spec;
  if (T == 0) {
    // the target is the constant 1 = sqrt(m_0) p^_0
    c.assign(d + 1, cplx(0));
    c[0] = scale;
  }
  long double sum = 0;
  for (const auto& v : c) sum += static_cast<long double>(std::norm(v));
  a.bessel_residual = static_cast<double>(static_cast<long double>(table.beta[0]) - sum);
  a.eps_l2 = std::sqrt(std::max(0.0, a.bessel_residual));
  a.orthonormal_coeffs = c;
  fill_forms(a, table);
  return a;
}

PolyApproximant best_l1(const WeightSpec& spec, double T, int d, const GaussRule& grid) {
  return best_l1(spec, recurrence(spec, d + 1), T, d, grid);
}

PolyApproximant best_l1(const WeightSpec& spec, const RecurrenceTable& table, double T, int d, const GaussRule& grid,
                        std::span<const cplx> warm_start) {
  require_half_line(spec);
  if (d < 0) throw InputError("best_l1: d must be >= 0");
  if (!(T >= 0)) throw InputError("best_l1: T must be >= 0");
  if (table.n < d) throw InputError("best_l1: recurrence table too short");
  if (static_cast<int>(grid.nodes.size()) < 4 * (d + 1)) throw InputError("best_l1: grid order below 4(d+1)");
  const double m0 = table.beta[0];
  const int n = d + 1;

  // Keep nodes whose weight can matter for polynomials with O(1) coefficients.
  std::vector<double> W, wnode;
  std::vector<double> rows;
  std::vector<double> p(n);
  for (size_t j = 0; j < grid.nodes.size(); ++j) {
    eval_orthonormal_all(table, d, grid.nodes[j], p.data());
    double mag = 1.0;
    for (double v : p) mag += std::abs(v);
    if (grid.weights[j] * mag < 1e-18 * m0) continue;
    W.push_back(grid.weights[j]);
    wnode.push_back(grid.nodes[j]);
    rows.insert(rows.end(), p.begin(), p.end());
  }
  const int N = static_cast<int>(W.size());
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> P(rows.data(), N, n);
  Eigen::VectorXcd f(N);
  for (int j = 0; j < N; ++j) f[j] = T == 0 ? cplx(1) : std::exp(cplx(0, wnode[j] * T));
  Eigen::Map<const Eigen::VectorXd> Wv(W.data(), N);

  auto objective = [&](const Eigen::VectorXcd& a, Eigen::VectorXcd* resid) {
    Eigen::VectorXcd r = f - P.cast<cplx>() * a;
    double J = 0;
    for (int j = 0; j < N; ++j) J += W[j] * std::abs(r[j]);
    if (resid) *resid = std::move(r);
    return J;
  };
  // Starting candidates: discrete L2 projection and the optional warm start.
  Eigen::VectorXcd a = P.transpose().cast<cplx>() * (Wv.cast<cplx>().asDiagonal() * f);
  double J = objective(a, nullptr);
  if (!warm_start.empty()) {
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n);
    for (int k = 0; k < std::min<int>(n, warm_start.size()); ++k) b[k] = warm_start[k];
    const double Jb = objective(b, nullptr);
    if (Jb < J) a = b, J = Jb;
  }
  Eigen::VectorXcd best = a;
  double Jbest = J;
  const double delta = 1e-9 * m0;
  bool converged = false;
  int it = 0;
  Eigen::VectorXcd r;
  objective(a, &r);
  for (; it < 200; ++it) {
    Eigen::VectorXd u(N);
    for (int j = 0; j < N; ++j) u[j] = W[j] / std::max(std::abs(r[j]), delta);
    const Eigen::MatrixXd G = P.transpose() * u.asDiagonal() * P;
    const Eigen::VectorXcd rhs = P.transpose().cast<cplx>() * (u.cast<cplx>().asDiagonal() * f);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    Eigen::VectorXcd next(n);
    next.real() = ldlt.solve(rhs.real());
    next.imag() = ldlt.solve(rhs.imag());
    const double Jn = objective(next, &r);
    if (Jn < Jbest) Jbest = Jn, best = next;
    const bool small = std::abs(J - Jn) <= 1e-10 * std::max(Jn, 1e-300);
    J = Jn;
    if (small || Jn == 0) {
      converged = true;
      ++it;
      break;
    }
  }

  PolyApproximant out;
  out.degree = d;
  out.T = T;
  out.weight = spec;
  out.eps_l1 = Jbest;
  out.l1_converged = converged;
  out.l1_iterations = it;
  out.orthonormal_coeffs.assign(best.data(), best.data() + n);
  fill_forms(out, table);
  return out;
}

std::vector<CurvePoint> error_curve(const WeightSpec& spec, double T, const std::vector<int>& degrees, Norm norm) {
  if (degrees.empty()) return {};
  for (size_t i = 0; i < degrees.size(); ++i) {
    if (degrees[i] < 0) throw InputError("error_curve: negative degree");
    if (i > 0 && degrees[i] <= degrees[i - 1]) throw InputError("error_curve: degrees must be increasing");
  }
  const int dmax = degrees.back();
  const RecurrenceTable table = recurrence(spec, dmax + 1);
  std::vector<CurvePoint> out;
  if (norm == Norm::L2) {
    const PolyApproximant full = best_l2(spec, table, T, dmax);
    const auto& c = full.orthonormal_coeffs;
    for (int d : degrees) {
      long double sum = 0;
      for (int k = 0; k <= d; ++k) sum += static_cast<long double>(std::norm(c[k]));
      const double res = static_cast<double>(static_cast<long double>(table.beta[0]) - sum);
      out.push_back({d, T == 0 ? 0.0 : std::sqrt(std::max(0.0, res))});
    }
  } else {
    const GaussRule grid = resolving_rule(spec, T, dmax);
    std::vector<cplx> warm;
    for (int d : degrees) {
      PolyApproximant a = best_l1(spec, table, T, d, grid, warm);
      warm = a.orthonormal_coeffs;
      out.push_back({d, a.eps_l1});
    }
  }
  for (size_t i = 1; i < out.size(); ++i)
    if (out[i].eps > out[i - 1].eps * (1 + 1e-12) + 1e-300)
      throw NumericError("error_curve: eps increased from d=" + std::to_string(out[i - 1].d) +
                         " to d=" + std::to_string(out[i].d));
  return out;
}

double weighted_norm(const GaussRule& rule, std::span<const cplx> samples, double p) {
  if (samples.size() != rule.nodes.size()) throw InputError("weighted_norm: sample count differs from rule size");
  if (!(p >= 1)) throw InputError("weighted_norm: p must be >= 1");
  long double acc = 0;
  for (size_t j = 0; j < samples.size(); ++j) {
    const double m = std::abs(samples[j]);
    acc += rule.weights[j] * (p == 1 ? m : p == 2 ? m * m : std::pow(m, p));
  }
  const double s = static_cast<double>(acc);
  return p == 1 ? s : p == 2 ? std::sqrt(s) : std::pow(s, 1.0 / p);
}

}  // namespace kreinlab
