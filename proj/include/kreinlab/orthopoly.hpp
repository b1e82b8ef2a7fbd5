#pragma once

// Orthonormal polynomials for rho(w) dw: moments, three-term recurrence by
// discretized Stieltjes in extended precision, Gauss rules via Golub-Welsch.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/multiprecision/mpfr.hpp>

#include "kreinlab/errors.hpp"
#include "kreinlab/weights.hpp"

namespace kreinlab {

using mpreal = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                             boost::multiprecision::et_off>;

// Monic recurrence p_{k+1} = (w - alpha_k) p_k - beta_k p_{k-1}, beta_0 = m_0.
struct RecurrenceTable {
  int n = 0;
  std::vector<double> alpha, beta;
  int precision_digits = 0;
  std::vector<mpreal> alpha_mp, beta_mp;
  // beta_n, needed to normalize p^_n.
  double beta_next = 0.0;
  int discretization_nodes = 0;
};

struct GaussRule {
  std::vector<double> nodes;    // strictly increasing
  std::vector<double> weights;  // positive, summing to m_0
};

// Working precision for recurrence generation: KREINLAB_PRECISION_DIGITS if
// set (minimum 20), else 40.
int default_precision_digits();

// m_k = int w^k rho(w) dw over the weight's domain, k = 0..kmax.
std::vector<double> moments(const WeightSpec& spec, int kmax);

RecurrenceTable recurrence(const WeightSpec& spec, int n, int precision_digits = 0);

GaussRule gauss_rule(const RecurrenceTable& table, int n);

// p^_k(w) by the normalized forward recurrence.
double eval_orthonormal(const RecurrenceTable& table, int k, double w);

// p^_0(w) .. p^_kmax(w) into out (size kmax + 1).
void eval_orthonormal_all(const RecurrenceTable& table, int kmax, double w, double* out);

// CSV rows "k,alpha_k,beta_k".
std::string recurrence_csv(const RecurrenceTable& table);

// Implicit QL for a symmetric tridiagonal matrix. d: diagonal (n), e:
// off-diagonal (e[i] couples i and i+1; size n, last entry ignored). On
// return d holds the eigenvalues in ascending order and z0 the first
// components of the matching unit eigenvectors, made nonnegative.
template <class Real>
void tridiagonal_ql(std::vector<Real>& d, std::vector<Real> e, std::vector<Real>& z0, const Real& eps,
                    int max_iter = 60) {
  using std::abs;
  using std::sqrt;
  const int n = static_cast<int>(d.size());
  e.resize(n);
  e[n - 1] = 0;
  z0.assign(n, Real(0));
  if (n == 0) return;
  z0[0] = 1;
  auto hyp = [](const Real& a, const Real& b) {
    const Real aa = abs(a), bb = abs(b);
    if (aa > bb) {
      const Real t = bb / aa;
      return Real(aa * sqrt(1 + t * t));
    }
    if (bb == 0) return Real(0);
    const Real t = aa / bb;
    return Real(bb * sqrt(1 + t * t));
  };
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const Real dd = abs(d[m]) + abs(d[m + 1]);
        if (abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == max_iter) throw NumericError("tridiagonal QL: no convergence");
        Real g = (d[l + 1] - d[l]) / (2 * e[l]);
        Real r = hyp(g, Real(1));
        g = d[m] - d[l] + e[l] / (g + (g >= 0 ? Real(abs(r)) : Real(-abs(r))));
        Real s = 1, c = 1, p = 0;
        int i;
        for (i = m - 1; i >= l; --i) {
          Real f = s * e[i];
          const Real b = c * e[i];
          r = hyp(f, g);
          e[i + 1] = r;
          if (r == 0) {
            d[i + 1] -= p;
            e[m] = 0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          f = z0[i + 1];
          z0[i + 1] = s * z0[i] + c * f;
          z0[i] = c * z0[i] - s * f;
        }
        if (r == 0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0;
      }
    } while (m != l);
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
  std::vector<Real> ds(n), zs(n);
  for (int i = 0; i < n; ++i) {
    ds[i] = d[order[i]];
    zs[i] = abs(z0[order[i]]);
  }
  d.swap(ds);
  z0.swap(zs);
}

}  // namespace kreinlab
