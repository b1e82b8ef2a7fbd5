#include "kreinlab/kernels.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "kreinlab/quad.hpp"

namespace kreinlab {

namespace {

constexpr double kPi = std::numbers::pi;

struct Rule {
  std::vector<double> x, w;
};

// Full-interval nodes on [-1, 1] from boost's half-range tables.
template <int N>
Rule gauss_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  Rule r;
  const auto& a = G::abscissa();
  const auto& w = G::weights();
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      r.x.push_back(0.0);
      r.w.push_back(w[i]);
      continue;
    }
    r.x.push_back(-a[i]);
    r.w.push_back(w[i]);
    r.x.push_back(a[i]);
    r.w.push_back(w[i]);
  }
  return r;
}

const Rule& conv_rule() {
  static const Rule r = gauss_rule<20>();
  return r;
}

const Rule& transfer_rule() {
  static const Rule r = gauss_rule<15>();
  return r;
}

// Panel edges on [-1, 1], graded geometrically toward +-1: kappa^{(k)} lives
// on a scale (1 - |u|)^2 there and is negligible below 1 - |u| = 2^{-11}.
const std::vector<double>& conv_edges() {
  static const std::vector<double> e = [] {
    std::vector<double> v{0.0};
    for (int j = 1; j <= 11; ++j) {
      v.push_back(1 - std::ldexp(1.0, -j));
      v.push_back(-(1 - std::ldexp(1.0, -j)));
    }
    v.push_back(1.0);
    v.push_back(-1.0);
    std::sort(v.begin(), v.end());
    return v;
  }();
  return e;
}

// Taylor coefficients f_k of exp(-u^2/(1-u^2)) at u, so that the k-th
// derivative is k! f_k. -u^2/(1-u^2) = 1 - 1/(1-u^2) and 1/(1 - (u+e)^2) is
// expanded through the recurrence of its quadratic denominator.
void bump_jet(double u, int kmax, std::vector<double>& f) {
  f.assign(kmax + 1, 0.0);
  const double a0 = 1 - u * u;
  if (!(a0 > 0)) return;
  const double a1 = -2 * u, a2 = -1;
  std::vector<double> b(kmax + 1), phi(kmax + 1);
  b[0] = 1 / a0;
  for (int k = 1; k <= kmax; ++k) {
    double s = a1 * b[k - 1];
    if (k >= 2) s += a2 * b[k - 2];
    b[k] = -s / a0;
  }
  phi[0] = 1 - b[0];
  for (int k = 1; k <= kmax; ++k) phi[k] = -b[k];
  f[0] = std::exp(phi[0]);
  if (f[0] == 0.0) return;
  for (int k = 1; k <= kmax; ++k) {
    double s = 0;
    for (int j = 1; j <= k; ++j) s += j * phi[j] * f[k - j];
    f[k] = s / k;
  }
}

// kappa_1^{(k)}(u), k = 0..kmax.
void kappa1_derivatives(double u, int kmax, std::vector<double>& out) {
  bump_jet(u, kmax, out);
  const double c = sobolev_normalization();
  double fact = 1;
  for (int k = 0; k <= kmax; ++k) {
    if (k > 0) fact *= k;
    out[k] *= c * fact;
  }
}

// x(tau) for tau >= 0 by 12-point Lagrange interpolation on the lattice,
// with the stencil kept on t >= 0 (x may jump at the origin).
cplx interp_x(const TimeDomainSignal& x, double tau) {
  constexpr int P = 12;
  const long m0 = x.n / 2;
  const double pos = (tau - x.t0) / x.dt;
  long start = static_cast<long>(std::floor(pos)) - P / 2 + 1;
  start = std::max(start, m0);
  start = std::min(start, x.n - P);
  const double r = pos - static_cast<double>(start);
  // exact hit avoids 0/0 in the weights
  for (int i = 0; i < P; ++i)
    if (r == i) return x.samples[start + i];
  cplx sum = 0;
  for (int i = 0; i < P; ++i) {
    double w = 1;
    for (int j = 0; j < P; ++j)
      if (j != i) w *= (r - j) / static_cast<double>(i - j);
    sum += w * x.samples[start + i];
  }
  return sum;
}

// sum_k eps^{-k} int kappa_1^{(k)}(u) 1(t - eps u) g(t - eps u) du for k = 0..kmax.
void convolve_stack(const TimeDomainSignal& x, double inv_norm2, double T, double eps, double t, int kmax,
                    std::vector<cplx>& out) {
  out.assign(kmax + 1, 0.0);
  // s = t - eps u must lie in [-T + eps, -eps]
  double ulo = std::max(-1.0, (t + eps) / eps);
  double uhi = std::min(1.0, (t + T - eps) / eps);
  if (!(uhi > ulo)) return;
  const Rule& R = conv_rule();
  const auto& E = conv_edges();
  std::vector<double> jet;
  for (size_t p = 0; p + 1 < E.size(); ++p) {
    const double a = std::max(E[p], ulo), c = std::min(E[p + 1], uhi);
    if (!(c > a)) continue;
    const double hw = c - a;
    for (size_t q = 0; q < R.x.size(); ++q) {
      const double u = a + 0.5 * hw * (R.x[q] + 1);
      const double wq = 0.5 * hw * R.w[q];
      kappa1_derivatives(u, kmax, jet);
      if (jet[0] == 0.0) continue;
      const double s = t - eps * u;
      const cplx g = std::conj(interp_x(x, -s)) * inv_norm2;
      for (int k = 0; k <= kmax; ++k) out[k] += wq * jet[k] * g;
    }
  }
  double scale = 1;
  for (int k = 1; k <= kmax; ++k) {
    scale /= eps;
    out[k] *= scale;
  }
}

double norm2_T(const TimeDomainSignal& x, long M) {
  const long m0 = x.n / 2;
  double s = 0;
  for (long i = 0; i <= M; ++i) {
    double w = (i == 0 || i == M) ? 0.5 : 1.0;
    s += w * std::norm(x.samples[m0 + i]);
  }
  return s * x.dt;
}

// Anti-periodic lattice access: x(t + n dt) = -x(t).
cplx wrapped(const std::vector<cplx>& v, long m) {
  const long n = static_cast<long>(v.size());
  long k = m % (2 * n);
  if (k < 0) k += 2 * n;
  return k < n ? v[k] : -v[k - n];
}

}  // namespace

double sobolev_normalization() {
  static const double c = [] {
    const double pts[] = {-1.0, 1.0};
    auto r = integrate([](double t) { return std::abs(t) < 1 ? std::exp(-t * t / (1 - t * t)) : 0.0; }, -1.0,
                       1.0, pts, 1e-15);
    return 1 / r.value;
  }();
  return c;
}

double sobolev_kernel(double eps, double t) {
  if (!(eps > 0)) throw InputError("sobolev_kernel: eps must be positive");
  const double u = t / eps;
  if (!(std::abs(u) < 1)) return 0.0;
  return sobolev_normalization() / eps * std::exp(-u * u / (1 - u * u));
}

std::vector<double> sobolev_kernel_derivatives(double eps, double t, int kmax) {
  if (!(eps > 0)) throw InputError("sobolev_kernel_derivatives: eps must be positive");
  if (kmax < 0) throw InputError("sobolev_kernel_derivatives: kmax must be nonnegative");
  std::vector<double> d;
  kappa1_derivatives(t / eps, kmax, d);
  double scale = 1 / eps;
  for (int k = 0; k <= kmax; ++k) {
    d[k] *= scale;
    scale /= eps;
  }
  return d;
}

KernelBundle make_kernels(const TimeDomainSignal& x, double T, double eps, int d_max) {
  if (!(T > 0)) throw InputError("make_kernels: T must be positive");
  if (!(eps > 0) || !(eps < T / 2)) throw InputError("make_kernels: need 0 < eps < T/2");
  if (d_max < 0) throw InputError("make_kernels: d_max must be nonnegative");
  if (x.n < 16 || x.n % 2 != 0 || !(x.dt > 0)) throw InputError("make_kernels: malformed time signal");
  const double Mr = T / x.dt;
  const long M = std::lround(Mr);
  if (std::abs(Mr - static_cast<double>(M)) > 1e-9 * Mr) throw InputError("make_kernels: T must be a multiple of dt");
  if (x.dt > eps / 4) throw InputError("make_kernels: time step too coarse for the mollifier width");
  const long m0 = x.n / 2;
  if (std::abs(x.time(m0)) > 1e-9 * x.dt) throw InputError("make_kernels: lattice must contain t = 0");
  if (m0 + M + 12 > x.n) throw InputError("make_kernels: time window shorter than T");

  KernelBundle b;
  b.T = T;
  b.eps_mollify = eps;
  b.x = x;
  const double n2 = norm2_T(x, M);
  if (!(n2 > 0)) throw InputError("make_kernels: x vanishes on [0, T]");
  b.x_norm_T = std::sqrt(n2);
  const double inv = 1 / n2;

  b.t.resize(M + 1);
  b.g.resize(M + 1);
  b.dh.assign(d_max + 1, std::vector<cplx>(M + 1));
  std::vector<cplx> stack;
  for (long i = 0; i <= M; ++i) {
    const double t = -static_cast<double>(i) * x.dt;
    b.t[i] = t;
    b.g[i] = std::conj(x.samples[m0 + i]) * inv;
    convolve_stack(x, inv, T, eps, t, d_max, stack);
    for (int k = 0; k <= d_max; ++k) b.dh[k][i] = stack[k];
  }
  // Same trapezoid rule as the normalization, so h = g would give y0 = 1.
  cplx y0 = 0;
  double xi2 = 0;
  for (long i = 0; i <= M; ++i) {
    double w = (i == 0 || i == M) ? 0.5 : 1.0;
    y0 += w * b.dh[0][i] * x.samples[m0 + i];
    xi2 += w * std::norm(b.dh[0][i] - b.g[i]);
  }
  b.y0 = y0 * x.dt;
  b.xi_norm = std::sqrt(xi2 * x.dt);
  b.xi_ratio = b.x_norm_T * b.xi_norm;
  return b;
}

KernelBundle make_kernels_auto(const TimeDomainSignal& x, double T, int d_max, const std::vector<double>& fractions,
                               double target) {
  if (fractions.empty()) throw InputError("make_kernels_auto: no mollifier widths given");
  KernelBundle b;
  for (double f : fractions) {
    b = make_kernels(x, T, f * T, d_max);
    if (b.xi_ratio < target) return b;
  }
  b.eps_criterion_met = false;
  return b;
}

cplx kernel_value(const KernelBundle& b, double t, int k) {
  if (k < 0) throw InputError("kernel_value: negative derivative order");
  std::vector<cplx> s;
  convolve_stack(b.x, 1 / (b.x_norm_T * b.x_norm_T), b.T, b.eps_mollify, t, k, s);
  return s[k];
}

TransferSamples transfer_functions(const KernelBundle& b, const FrequencyGrid& grid) {
  const Rule& R = transfer_rule();
  // e^{-i Omega t} turns about 8 rad per 15-node panel at the window edge.
  const int panels = std::max(32, static_cast<int>(std::ceil(grid.omega_max() * b.T / 8)));
  const double hw = b.T / panels;
  std::vector<double> s_nodes, w_nodes;
  std::vector<cplx> h_nodes;
  for (int p = 0; p < panels; ++p) {
    const double a = -b.T + p * hw;
    for (size_t q = 0; q < R.x.size(); ++q) {
      const double tau = a + 0.5 * hw * (R.x[q] + 1);
      cplx h = kernel_value(b, tau, 0);
      if (h == 0.0) continue;
      s_nodes.push_back(tau + b.T);  // q(s) = h(s - T)
      w_nodes.push_back(0.5 * hw * R.w[q]);
      h_nodes.push_back(h);
    }
  }
  TransferSamples out;
  out.Q.assign(grid.n, 0.0);
  constexpr long kReseed = 4096;
  for (size_t v = 0; v < s_nodes.size(); ++v) {
    const double s = s_nodes[v];
    const cplx c = w_nodes[v] * h_nodes[v];
    const cplx step = std::polar(1.0, -grid.domega * s);
    cplx ph;
    for (long j = 0; j < grid.n; ++j) {
      if (j % kReseed == 0) ph = std::polar(1.0, -grid.omega(j) * s);
      out.Q[j] += c * ph;
      ph *= step;
    }
  }
  out.H.resize(grid.n);
  for (long j = 0; j < grid.n; ++j) out.H[j] = out.Q[j] * std::polar(1.0, grid.omega(j) * b.T);
  return out;
}

HatYResult hat_y(const KernelBundle& b, const PolyApproximant& psi, const BoundarySamples& X,
                 const TransferSamples* Q) {
  const FrequencyGrid& g = X.grid;
  if (g.n != b.x.n || std::abs(g.dt() - b.x.dt) > 1e-12 * b.x.dt || static_cast<long>(X.X.size()) != g.n)
    throw InputError("hat_y: boundary samples and kernel bundle are on different grids");
  if (static_cast<int>(psi.coeffs_iaxis.size()) != psi.degree + 1)
    throw InputError("hat_y: polynomial lacks imaginary-axis coefficients");
  TransferSamples local;
  if (!Q) {
    local = transfer_functions(b, g);
    Q = &local;
  }
  std::vector<cplx> Y(g.n);
  for (long j = 0; j < g.n; ++j) Y[j] = psi.eval_iaxis(cplx(0, g.omega(j))) * Q->Q[j] * X.X[j];

  HatYResult r;
  r.y_hat = inverse_fourier(g, Y);

  // y(t_m) = int_{-T}^0 h(u) x(t_m - u) du on the lattice (u = -i dt).
  const long M = static_cast<long>(b.t.size()) - 1;
  const auto& h = b.h();
  const auto& xs = b.x.samples;
  r.y.assign(g.n, 0.0);
  for (long m = 0; m < g.n; ++m) {
    cplx s = 0;
    if (m + M < g.n) {
      for (long i = 1; i < M; ++i) s += h[i] * xs[m + i];
      s += 0.5 * (h[0] * xs[m] + h[M] * xs[m + M]);
    } else {
      for (long i = 0; i <= M; ++i) s += ((i == 0 || i == M) ? 0.5 : 1.0) * h[i] * wrapped(xs, m + i);
    }
    r.y[m] = s * b.x.dt;
  }

  const long m0 = g.n / 2;
  for (long m = 0; m < g.n; ++m) {
    const double a = std::abs(r.y_hat.samples[m]);
    r.y_hat_max = std::max(r.y_hat_max, a);
    if (m <= m0) r.causal_residual = std::max(r.causal_residual, a);
    r.sup_dev = std::max(r.sup_dev, std::abs(r.y_hat.samples[m] - r.y[m]));
  }
  r.y_hat_at_0 = r.y_hat.samples[m0];
  return r;
}

std::vector<cplx> hat_h_from_derivatives(const KernelBundle& b, const PolyApproximant& psi) {
  if (psi.degree > b.d_max()) throw InputError("hat_h_from_derivatives: derivative stack shorter than the degree");
  const size_t M = b.t.size();
  std::vector<cplx> out(M, 0.0);
  for (int k = 0; k <= psi.degree; ++k)
    for (size_t i = 0; i < M; ++i) out[i] += psi.coeffs_iaxis[k] * b.dh[k][i];
  return out;
}

namespace {

// int_0^inf |target(w) - poly(w)| rho(w) dw
double half_line_l1(const WeightSpec& half, const std::function<cplx(double)>& diff) {
  auto prof = singularity_profile(half);
  // Dyadic cuts keep each piece short against the oscillation of e^{iwT}.
  std::vector<double> pts{0.0};
  for (int k = -6; k <= 16; ++k) pts.push_back(std::ldexp(1.0, k));
  for (double p : prof.breakpoints)
    if (p > 0) pts.push_back(p);
  for (const auto& ip : prof.interior_points)
    if (ip.location > 0) pts.push_back(ip.location);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  QuadOptions opt;
  opt.rel_tol = 1e-13;
  opt.abs_tol = 1e-300;
  opt.max_panels = 20000;
  auto f = [&](double w) {
    double lr = eval_log_weight(half, w);
    if (!std::isfinite(lr) || lr < -745) return 0.0;
    return std::abs(diff(w)) * std::exp(lr);
  };
  try {
    return integrate(f, 0.0, std::numeric_limits<double>::infinity(), pts, opt).value;
  } catch (const AccuracyError&) {
    opt.rel_tol = 1e-12;
    return integrate(f, 0.0, std::numeric_limits<double>::infinity(), pts, opt).value;
  }
}

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const AccuracyError& e) {
    throw AccuracyError(std::string("certificate stage '") + name + "': " + e.what(), e.best_estimate());
  } catch (const InputError& e) {
    throw InputError(std::string("certificate stage '") + name + "': " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(std::string("certificate stage '") + name + "': " + e.what());
  }
}

struct GridRun {
  BoundarySamples X;
  KernelBundle bundle;
  TransferSamples Q;
  HatYResult hy;
};

GridRun run_on_grid(const OuterFunction& outer, const PolyApproximant& psi, double T, long n, int per_T,
                    const CertificateParams& p) {
  GridRun g;
  auto grid = grid_from_dt(n, T / per_T);
  g.X = stage("outer samples", [&] { return boundary_samples(outer, grid); });
  auto x = stage("inverse transform of X", [&] { return inverse_fourier(g.X); });
  g.bundle = stage("kernels", [&] { return make_kernels_auto(x, T, psi.degree, p.eps_fractions, p.xi_target); });
  g.Q = stage("transfer functions", [&] { return transfer_functions(g.bundle, grid); });
  g.hy = stage("output y^", [&] { return hat_y(g.bundle, psi, g.X, &g.Q); });
  return g;
}

}  // namespace

CertificateReport certificate(const WeightSpec& spec, const PolyApproximant& psi, double T,
                              const CertificateParams& params, CertificateArtifacts* artifacts) {
  if (spec.is_full_line()) throw InputError("certificate: weight must be given on the half line");
  validate(spec);
  if (!(T > 0)) throw InputError("certificate: T must be positive");
  if (static_cast<int>(psi.coeffs_iaxis.size()) != psi.degree + 1 || psi.coeffs_iaxis.empty())
    throw InputError("certificate: polynomial lacks imaginary-axis coefficients");
  if (params.n < 1024 || params.n % 4 != 0 || params.samples_per_T < 16)
    throw InputError("certificate: grid parameters out of range");

  CertificateReport r;
  r.weight = spec.name();
  r.degree = psi.degree;
  r.T = T;

  r.eps = stage("eps on R+", [&] {
    return half_line_l1(spec, [&](double w) { return std::polar(1.0, w * T) - psi.eval_real_axis(w); });
  });
  r.L = stage("L on R-", [&] {
    return half_line_l1(spec, [&](double w) { return std::polar(1.0, -w * T) - psi.eval_real_axis(-w); });
  });
  if (!(r.eps > 0) || !(r.L > 0)) throw InputError("certificate: polynomial reproduces e^{iwT} exactly");
  const WeightSpec rho_psi = make_rescaled(spec, r.eps, r.L);

  // alpha from the imaginary-axis form psi(i w) over both half lines.
  r.alpha = stage("alpha", [&] {
    auto pos = [&](double w) { return psi.eval_iaxis(cplx(0, w)) - std::polar(1.0, w * T); };
    auto neg = [&](double w) { return psi.eval_iaxis(cplx(0, -w)) - std::polar(1.0, -w * T); };
    const double scale = std::exp(rho_psi.log_negative_scale);
    return half_line_l1(spec, pos) + scale * half_line_l1(spec, neg);
  });
  r.alpha_rel_err = std::abs(r.alpha - 2 * r.eps) / (2 * r.eps);

  auto outer = stage("outer function", [&] { return outer_for_weight(rho_psi); });
  GridRun main = run_on_grid(outer, psi, T, params.n, params.samples_per_T, params);
  const auto& grid = main.X.grid;
  r.n = grid.n;
  r.dt = grid.dt();
  r.omega_max = grid.omega_max();
  r.causality_defect_x = causality_defect(main.bundle.x);
  r.eps_mollify = main.bundle.eps_mollify;
  r.xi_ratio = main.bundle.xi_ratio;
  r.eps_criterion_met = main.bundle.eps_criterion_met;
  r.x_norm_T = main.bundle.x_norm_T;
  r.y0 = main.bundle.y0;
  r.sup_dev = main.hy.sup_dev;
  r.hat_y_at_0 = main.hy.y_hat_at_0;
  r.causal_residual = main.hy.causal_residual;
  r.y_hat_max = main.hy.y_hat_max;

  // beta: definition on the grid and through |X| = mu = rho / (1 + w^2).
  for (long j = 0; j < grid.n; ++j) {
    const double w = grid.omega(j);
    const double aq = std::abs(main.Q.Q[j]);
    r.beta_modulus = std::max(r.beta_modulus, aq / (1 + w * w));
    const double lr = eval_log_weight(rho_psi, w);
    if (main.X.mu[j] > 1e-280 && lr > -700) r.beta = std::max(r.beta, aq * std::abs(main.X.X[j]) / std::exp(lr));
  }
  r.beta_rel_diff = std::abs(r.beta - r.beta_modulus) / r.beta_modulus;
  r.bound = r.alpha * r.beta / (2 * kPi);
  r.chain_ok = std::abs(r.y0) <= r.sup_dev + params.chain_tol && r.sup_dev <= r.bound + params.chain_tol;
  r.lower_bound = kPi * std::abs(r.y0) / r.beta;

  if (!r.eps_criterion_met)
    r.notes.push_back("no mollifier width met ||h-g||/||g|| < target; the narrowest one was used");
  if (params.confirm_density) {
    GridRun fine = run_on_grid(outer, psi, T, 2 * params.n, 2 * params.samples_per_T, params);
    r.sup_dev_refined = fine.hy.sup_dev;
    r.density_stable = std::abs(r.sup_dev_refined - r.sup_dev) <= 1e-3 * r.sup_dev;
    if (!r.density_stable) r.notes.push_back("sup_dev moved by more than 1e-3 relative when the density was doubled");
  }
  if (artifacts) {
    artifacts->X = std::move(main.X);
    artifacts->bundle = std::move(main.bundle);
    artifacts->hy = std::move(main.hy);
  }
  return r;
}

nlohmann::json to_json(const CertificateReport& r) {
  auto c = [](cplx z) { return nlohmann::json::array({z.real(), z.imag()}); };
  nlohmann::json j;
  j["weight"] = r.weight;
  j["degree"] = r.degree;
  j["T"] = r.T;
  j["eps"] = r.eps;
  j["L"] = r.L;
  j["alpha"] = r.alpha;
  j["alpha_rel_err"] = r.alpha_rel_err;
  j["beta"] = r.beta;
  j["beta_modulus"] = r.beta_modulus;
  j["beta_rel_diff"] = r.beta_rel_diff;
  j["y0"] = c(r.y0);
  j["abs_y0"] = std::abs(r.y0);
  j["sup_dev"] = r.sup_dev;
  j["sup_dev_refined"] = r.sup_dev_refined;
  j["density_stable"] = r.density_stable;
  j["hat_y_at_0"] = c(r.hat_y_at_0);
  j["causal_residual"] = r.causal_residual;
  j["y_hat_max"] = r.y_hat_max;
  j["bound"] = r.bound;
  j["chain_ok"] = r.chain_ok;
  j["lower_bound"] = r.lower_bound;
  j["eps_mollify"] = r.eps_mollify;
  j["xi_ratio"] = r.xi_ratio;
  j["eps_criterion_met"] = r.eps_criterion_met;
  j["x_norm_T"] = r.x_norm_T;
  j["causality_defect_x"] = r.causality_defect_x;
  j["omega_max"] = r.omega_max;
  j["dt"] = r.dt;
  j["n"] = r.n;
  j["notes"] = r.notes;
  return j;
}

}  // namespace kreinlab
