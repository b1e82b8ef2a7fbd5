#pragma once

// Time-domain side of the contradiction argument: the normalized Sobolev
// mollifier, the kernels g_d and h_d = kappa_eps * (1 g_d) with their
// derivative stack, y_d, the transfer functions Q_d and H_d, the output
// y^_d of psi_d(z) Q_d(z) X_d(z), and the certificate that checks
//   |y_d(0)| <= sup_t |y^_d - y_d| <= (1/2pi) alpha_d beta_d.

#include <complex>
#include <string>
#include <vector>

#include <json.hpp>

#include "kreinlab/approx.hpp"
#include "kreinlab/hardy.hpp"

namespace kreinlab {

// c = 1 / int_{-1}^{1} exp(-t^2/(1-t^2)) dt.
double sobolev_normalization();

// kappa_eps(t) = c eps^{-1} exp(-(t/eps)^2 / (1 - (t/eps)^2)) for |t| < eps, else 0.
double sobolev_kernel(double eps, double t);

// kappa_eps^{(k)}(t) for k = 0..kmax (Taylor-mode jets of the bump).
std::vector<double> sobolev_kernel_derivatives(double eps, double t, int kmax);

struct KernelBundle {
  double T = 0.0;
  double eps_mollify = 0.0;
  TimeDomainSignal x;
  double x_norm_T = 0.0;  // ||x restricted to [0, T]||
  // Lattice t_i = -i dt, i = 0..M, covering [-T, 0].
  std::vector<double> t;
  std::vector<cplx> g;
  std::vector<std::vector<cplx>> dh;  // dh[k][i] = h^{(k)}(t_i), k = 0..d_max
  cplx y0 = 0.0;
  double xi_norm = 0.0;  // ||h(-.) - g(-.)|| on [0, T]
  // ||h - g|| / ||g|| = x_norm_T * xi_norm, the measured constant C.
  double xi_ratio = 0.0;
  bool eps_criterion_met = true;

  const std::vector<cplx>& h() const { return dh.front(); }
  int d_max() const { return static_cast<int>(dh.size()) - 1; }
};

// g(t) = ||x|_[0,T]||^{-2} conj(x(-t)), h = kappa_eps * (1_{[-T+eps,-eps]} g).
// Requires T to be a multiple of x.dt, eps < T/2 and x.dt <= eps/4.
KernelBundle make_kernels(const TimeDomainSignal& x, double T, double eps, int d_max);

// Tries eps = f T for f in fractions (in order) and keeps the first bundle
// with xi_ratio < target; falls back to the last one with
// eps_criterion_met = false.
KernelBundle make_kernels_auto(const TimeDomainSignal& x, double T, int d_max,
                               const std::vector<double>& fractions = {0.2, 0.1, 0.05, 0.025},
                               double target = 0.1);

// h^{(k)}(t) at an arbitrary t, by the defining convolution.
cplx kernel_value(const KernelBundle& b, double t, int k);

struct TransferSamples {
  std::vector<cplx> Q;  // Q(i w_j) = int_0^T e^{-i w t} h(t - T) dt
  std::vector<cplx> H;  // Q e^{i w T}
};

TransferSamples transfer_functions(const KernelBundle& b, const FrequencyGrid& grid);

struct HatYResult {
  TimeDomainSignal y_hat;  // F^{-1}[psi(i w) Q(i w) X(i w)]
  std::vector<cplx> y;     // int_t^{t+T} h(t - s) x(s) ds on the same lattice
  double sup_dev = 0.0;    // max_t |y^ - y|
  double causal_residual = 0.0;  // max_{t<=0} |y^|
  double y_hat_max = 0.0;        // max_t |y^|
  cplx y_hat_at_0 = 0.0;
};

// X must be sampled on the grid that produced bundle.x.
HatYResult hat_y(const KernelBundle& b, const PolyApproximant& psi, const BoundarySamples& X,
                 const TransferSamples* Q = nullptr);

// y^ through the derivative stack: sum_k a_k h^{(k)}(t - T) on the lattice
// t = T + t_i, i.e. over [0, T].
std::vector<cplx> hat_h_from_derivatives(const KernelBundle& b, const PolyApproximant& psi);

struct CertificateParams {
  // x_psi decays like 1/t (log mu_psi jumps at w = 0 unless eps = L), so the
  // anti-periodic window n dt must be long for the causality residual.
  long n = 1L << 21;
  int samples_per_T = 256;
  std::vector<double> eps_fractions{0.2, 0.1, 0.05, 0.025};
  double xi_target = 0.1;
  double chain_tol = 1e-6;
  // Repeat with twice the time resolution and compare sup_dev.
  bool confirm_density = true;
};

struct CertificateReport {
  std::string weight;
  int degree = 0;
  double T = 0.0;
  double eps = 0.0;  // ||e^{iT.} - psi~||_{L1(rho), R+}
  double L = 0.0;    // same on R- for the even extension
  double alpha = 0.0;
  double alpha_rel_err = 0.0;  // |alpha - 2 eps| / (2 eps)
  double beta = 0.0;           // ess sup rho_psi^{-1} |Q X| on the grid
  double beta_modulus = 0.0;   // sup |Q| / (1 + w^2) on the grid
  double beta_rel_diff = 0.0;
  cplx y0 = 0.0;
  double sup_dev = 0.0;
  double sup_dev_refined = 0.0;  // with doubled density (0 when not run)
  bool density_stable = true;
  cplx hat_y_at_0 = 0.0;
  double causal_residual = 0.0;
  double y_hat_max = 0.0;
  double bound = 0.0;  // alpha beta / (2 pi)
  bool chain_ok = false;
  double lower_bound = 0.0;  // pi |y0| / beta
  double eps_mollify = 0.0;
  double xi_ratio = 0.0;
  bool eps_criterion_met = true;
  double x_norm_T = 0.0;
  double causality_defect_x = 0.0;
  double omega_max = 0.0;
  double dt = 0.0;
  long n = 0;
  std::vector<std::string> notes;
};

struct CertificateArtifacts {
  BoundarySamples X;
  KernelBundle bundle;
  HatYResult hy;
};

// Throws the failing stage's error with the stage named in the message.
CertificateReport certificate(const WeightSpec& spec, const PolyApproximant& psi, double T,
                              const CertificateParams& params = {}, CertificateArtifacts* artifacts = nullptr);

nlohmann::json to_json(const CertificateReport& r);

}  // namespace kreinlab
