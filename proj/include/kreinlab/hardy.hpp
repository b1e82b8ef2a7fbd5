#pragma once

// Right half-plane Hardy-space tools: the outer function with boundary
// modulus mu, boundary-modulus verification along a delta ladder, the
// continuous inverse Fourier transform on a uniform grid, and a causality
// measure.
//
// Conventions: X(i w) = int e^{-i w t} x(t) dt, x(t) = (1/2pi) int e^{i w t} X dw.

#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "kreinlab/quad.hpp"
#include "kreinlab/weights.hpp"

namespace kreinlab {

using cplx = std::complex<double>;

// n samples at w_j = (j - n/2 + 1/2) dw. The half shift keeps w = 0 off the
// grid and makes the sampled time signal anti-periodic with period n dt.
struct FrequencyGrid {
  long n = 1L << 18;
  double domega = 0.0;

  double omega(long j) const { return (static_cast<double>(j) - 0.5 * static_cast<double>(n) + 0.5) * domega; }
  double omega_max() const { return 0.5 * static_cast<double>(n) * domega; }
  double dt() const;
  double t0() const { return -0.5 * static_cast<double>(n) * dt(); }
};

// Grid with the given time step: Omega = pi / dt.
FrequencyGrid grid_from_dt(long n, double dt);

struct BoundarySamples {
  FrequencyGrid grid;
  std::vector<cplx> X;
  std::vector<double> mu;  // boundary modulus at the grid points (0 when unknown)
};

struct OuterFunction {
  std::function<double(double)> log_mu;
  // Optional: log mu(sign e^v) e^{-v} for large v, evaluated without
  // overflow. Used on |s| > S where the integrand is written in v = log|s|.
  std::function<double(double, int)> log_mu_over_s;
  // Points where log mu is not smooth, jumps or is singular.
  std::vector<double> breakpoints;
  // Smallest admissible Re z; boundary samples are taken at Re z = delta_min.
  double delta_min = 1e-12;
  QuadOptions quad{1e-10, 1e-10, 4000, 11};
  std::string label;

  double mu(double w) const { return std::exp(log_mu(w)); }

  // Write-once cache of boundary samples keyed by (n, domega).
  struct Cache {
    std::mutex m;
    std::map<std::pair<long, double>, std::shared_ptr<const BoundarySamples>> samples;
  };
  std::shared_ptr<Cache> cache = std::make_shared<Cache>();
};

OuterFunction make_outer(std::function<double(double)> log_mu, std::vector<double> breakpoints,
                         std::string label = "custom");

// mu = rho / (1 + w^2) for a full-line weight. Throws InputError when the
// weight is half-line only or int |log rho| / (1 + w^2) diverges.
OuterFunction outer_for_weight(const WeightSpec& full_line);

// X(z) = exp[(i/pi) int (1 - i s z) log mu(s) / ((s + i z)(1 + s^2)) ds].
// log mu(Im z) is subtracted inside the integral (the kernel integrates to
// -i pi), so the integrand stays bounded as Re z -> 0.
cplx outer_from_modulus(const OuterFunction& outer, cplx z);

// The exponent above.
cplx outer_log(const OuterFunction& outer, cplx z);

// X(delta_min + i w_j) on the grid. The phase remainder is built from
// piecewise Chebyshev interpolants that are checked against direct
// evaluations; short panels are evaluated directly. Cached per grid.
BoundarySamples boundary_samples(const OuterFunction& outer, const FrequencyGrid& grid);

// Smallest Omega with int_{|w|>Omega} mu^2 < tail_fraction * int mu^2 / 2, turned
// into a grid with n points and dt = pi / max(Omega, min_omega).
FrequencyGrid default_grid(const OuterFunction& outer, long n = 1L << 18, double min_omega = 0.0,
                           double tail_fraction = 1e-10);

struct BoundaryCheck {
  std::vector<double> deltas;
  std::vector<double> omegas;
  // rel_dev[k][j] = |X(delta_k + i w_j)| / mu(w_j) - 1 (signed).
  std::vector<std::vector<double>> rel_dev;
  std::vector<double> max_abs_dev;  // per delta
  double max_rel_deviation = 0.0;   // at the smallest delta
  // Richardson step on the last two rungs, assuming dev ~ C delta.
  double extrapolated_deviation = 0.0;
  bool monotone = true;
};

// Throws NumericError when the deviation grows along the ladder beyond
// 10% of the previous rung (plus 1e-12).
BoundaryCheck boundary_modulus_check(const OuterFunction& outer, const std::vector<double>& omegas,
                                     const std::vector<double>& delta_ladder);

struct TimeDomainSignal {
  std::vector<cplx> samples;
  double t0 = 0.0;
  double dt = 0.0;
  long n = 0;
  // Amplitude J of the split-off J e^{-t} 1_{t>=0} part (see inverse_fourier).
  cplx jump = 0.0;

  double time(long m) const { return t0 + static_cast<double>(m) * dt; }
  // Index of the sample nearest to t.
  long index_of(double t) const;
  double l2_norm() const;
};

// x = F^{-1} X with the continuous-transform scaling, by FFT. When the window
// edges behave like J/(1 + i w) (both edge samples and the half-window samples
// agree on J to 1e-6), J/(1 + i w) is subtracted before the transform and
// J e^{-t} 1_{t>=0} added back exactly. Throws AccuracyError when the
// estimated |X|^2 tail beyond the window (of the remainder) exceeds 1e-10 of
// the total.
TimeDomainSignal inverse_fourier(const FrequencyGrid& grid, const std::vector<cplx>& X,
                                 double tail_fraction = 1e-10);
TimeDomainSignal inverse_fourier(const BoundarySamples& samples, double tail_fraction = 1e-10);

// (2pi)^{-1/2} (sum |X_j|^2 dw)^{1/2}.
double frequency_l2_norm(const FrequencyGrid& grid, const std::vector<cplx>& X);

// ||x 1_{t<0}|| / ||x||. Throws InputError for the zero signal.
double causality_defect(const TimeDomainSignal& x);

// CSV with header omega,re_X,im_X,abs_X,mu; every stride-th sample with
// |omega| <= omega_limit.
std::string boundary_csv(const BoundarySamples& s, long stride = 1, double omega_limit = 1e300);

}  // namespace kreinlab
