#pragma once

// Best weighted polynomial approximation of e^{i w T} on the half line in
// L2(rho) and L1(rho), error curves, and the real-axis <-> imaginary-axis
// coefficient transform a_k = at_k i^{-k}.

#include <complex>
#include <span>
#include <vector>

#include "kreinlab/orthopoly.hpp"
#include "kreinlab/weights.hpp"

namespace kreinlab {

using cplx = std::complex<double>;

struct PolyApproximant {
  int degree = 0;
  double T = 0.0;
  std::vector<cplx> coeffs_real_axis;  // at_k: psi~(w) = sum at_k w^k
  std::vector<cplx> coeffs_iaxis;      // a_k:  psi(z) = sum a_k z^k
  std::vector<cplx> orthonormal_coeffs;  // c_k in psi~ = sum c_k p^_k (L2 or L1 solution)
  double eps_l2 = 0.0;
  double eps_l1 = 0.0;
  // m_0 - sum |c_k|^2 before clamping (L2 only).
  double bessel_residual = 0.0;
  bool l1_converged = true;
  int l1_iterations = 0;
  WeightSpec weight;

  cplx eval_real_axis(double w) const;  // psi~(w)
  cplx eval_iaxis(cplx z) const;        // psi(z)
};

// Composite Gauss-Legendre rule on [0, Omega] that resolves e^{i w T} and
// the degree-d orthonormal polynomials: panels graded geometrically toward 0,
// width <= 3/T elsewhere, Omega where the mass of rho beyond it is below
// e^{-80} m_0. Throws AccuracyError when more than max_nodes are needed.
GaussRule resolving_rule(const WeightSpec& spec, double T, int d, int refine = 0, long max_nodes = 4000000);

PolyApproximant best_l2(const WeightSpec& spec, double T, int d);
PolyApproximant best_l2(const WeightSpec& spec, const RecurrenceTable& table, double T, int d);

// IRLS on the grid with smoothing floor 1e-9 m_0, 200 iterations, relative
// objective tolerance 1e-10. eps_l1 is the discretized objective, an upper
// bound on the continuum infimum up to grid error.
PolyApproximant best_l1(const WeightSpec& spec, double T, int d, const GaussRule& grid);
PolyApproximant best_l1(const WeightSpec& spec, const RecurrenceTable& table, double T, int d, const GaussRule& grid,
                        std::span<const cplx> warm_start = {});

enum class Norm { L1, L2 };

struct CurvePoint {
  int d = 0;
  double eps = 0.0;
};

// Nonincreasing in d by construction of the exact problem; a violation
// beyond 1e-12 relative raises NumericError.
std::vector<CurvePoint> error_curve(const WeightSpec& spec, double T, const std::vector<int>& degrees, Norm norm);

// (sum_j W_j |u_j|^p)^{1/p} on the rule.
double weighted_norm(const GaussRule& rule, std::span<const cplx> samples, double p);

// a_k = at_k i^{-k}.
std::vector<cplx> to_iaxis(std::span<const cplx> real_axis);
// at_k = a_k i^k.
std::vector<cplx> to_real_axis(std::span<const cplx> iaxis);

// Monomial coefficients of sum_k c_k p^_k.
std::vector<cplx> orthonormal_to_monomial(const RecurrenceTable& table, std::span<const cplx> c);

}  // namespace kreinlab
