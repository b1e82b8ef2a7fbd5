#include "kreinlab/orthopoly.hpp"

#include <cstdio>
#include <cstdlib>
#include <limits>

#include "kreinlab/krein.hpp"

namespace kreinlab {

namespace {

constexpr int kPanelNodes = 20;
constexpr double kDropNats = 80.0;

class PrecisionScope {
 public:
  explicit PrecisionScope(int digits) : saved_(mpreal::default_precision()) { mpreal::default_precision(digits); }
  ~PrecisionScope() { mpreal::default_precision(saved_); }

 private:
  unsigned saved_;
};

// Gauss-Legendre nodes/weights on [-1, 1] at the current mpfr precision.
void gauss_legendre(int m, std::vector<mpreal>& x, std::vector<mpreal>& w) {
  x.assign(m, mpreal(0));
  w.assign(m, mpreal(0));
  const mpreal pi = acos(mpreal(-1));
  const mpreal tol = pow(mpreal(10), -static_cast<int>(mpreal::default_precision()) + 2);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    mpreal z = cos(pi * (i + mpreal(0.75)) / (m + mpreal(0.5)));
    mpreal pp;
    for (int it = 0; it < 100; ++it) {
      mpreal p1 = 1, p2 = 0;
      for (int j = 0; j < m; ++j) {
        const mpreal p3 = p2;
        p2 = p1;
        p1 = ((2 * j + 1) * z * p2 - j * p3) / (j + 1);
      }
      pp = m * (z * p1 - p2) / (z * z - 1);
      const mpreal dz = p1 / pp;
      z -= dz;
      if (abs(dz) < tol) break;
    }
    x[i] = -z;
    x[m - 1 - i] = z;
    w[i] = w[m - 1 - i] = 2 / ((1 - z * z) * pp * pp);
  }
}

struct Discretization {
  std::vector<mpreal> nodes, weights;
};

double scan_edge(const std::function<double(double)>& g, double from, double dir, double drop, double limit) {
  const double top = g(from);
  double x = from;
  while ((dir > 0 ? x < limit : x > limit)) {
    x += dir * 0.25;
    if (g(x) < top - drop) return x;
  }
  return limit;
}

// Composite Gauss-Legendre in x = log|w| with panel width h.
Discretization discretize(const WeightSpec& spec, double xlo, double xhi, const std::vector<double>& cuts_x, double h,
                          const std::vector<mpreal>& glx, const std::vector<mpreal>& glw) {
  std::vector<double> cuts{xlo};
  for (double c : cuts_x)
    if (c > xlo && c < xhi) cuts.push_back(c);
  cuts.push_back(xhi);
  Discretization D;
  const bool full = spec.is_full_line();
  const mpreal neg_scale = exp(mpreal(spec.log_negative_scale));
  for (size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double a = cuts[s], b = cuts[s + 1];
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / h)));
    const mpreal width = (mpreal(b) - a) / panels;
    for (int p = 0; p < panels; ++p) {
      const mpreal c = mpreal(a) + width * (p + mpreal(0.5));
      for (size_t j = 0; j < glx.size(); ++j) {
        const mpreal x = c + width / 2 * glx[j];
        const mpreal w = exp(x);
        const mpreal lr = half_line_log_density(spec, w);
        if (isinf(lr)) continue;
        const mpreal W = width / 2 * glw[j] * exp(x + lr);
        if (W == 0) continue;
        D.nodes.push_back(w);
        D.weights.push_back(W);
        if (full) {
          D.nodes.push_back(-w);
          D.weights.push_back(W * neg_scale);
        }
      }
    }
  }
  return D;
}

// Stieltjes procedure in orthonormal form on a discrete measure.
void stieltjes(const Discretization& D, int n, bool even, std::vector<mpreal>& alpha, std::vector<mpreal>& beta) {
  const size_t N = D.nodes.size();
  if (static_cast<size_t>(n) >= N) throw AccuracyError("discretization has too few nodes", static_cast<double>(N));
  alpha.assign(n, mpreal(0));
  beta.assign(n, mpreal(0));
  std::vector<mpreal> qprev(N, mpreal(0)), q(N), r(N);
  mpreal m0 = 0;
  for (size_t i = 0; i < N; ++i) m0 += D.weights[i];
  beta[0] = m0;
  const mpreal q0 = 1 / sqrt(m0);
  for (size_t i = 0; i < N; ++i) q[i] = q0;
  for (int k = 0; k < n; ++k) {
    mpreal a = 0;
    if (!even)
      for (size_t i = 0; i < N; ++i) a += D.weights[i] * D.nodes[i] * q[i] * q[i];
    alpha[k] = a;
    if (k + 1 == n) break;
    const mpreal sb = k == 0 ? mpreal(0) : sqrt(beta[k]);
    mpreal b = 0;
    for (size_t i = 0; i < N; ++i) {
      r[i] = (D.nodes[i] - a) * q[i] - sb * qprev[i];
      b += D.weights[i] * r[i] * r[i];
    }
    if (!(b > 0)) throw AccuracyError("Stieltjes: beta lost all significant digits", k + 1);
    beta[k + 1] = b;
    const mpreal sbn = sqrt(b);
    for (size_t i = 0; i < N; ++i) {
      qprev[i] = q[i];
      q[i] = r[i] / sbn;
    }
  }
}

}  // namespace

int default_precision_digits() {
  if (const char* env = std::getenv("KREINLAB_PRECISION_DIGITS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 20 && v <= 1000) return static_cast<int>(v);
    throw InputError("KREINLAB_PRECISION_DIGITS must be an integer in [20, 1000]");
  }
  return 40;
}

std::vector<double> moments(const WeightSpec& spec, int kmax) {
  if (kmax < 0) throw InputError("moments: kmax must be >= 0");
  validate(spec);
  std::vector<double> m(kmax + 1);
  const double neg = spec.is_full_line() ? std::exp(spec.log_negative_scale) : 0.0;
  for (int k = 0; k <= kmax; ++k) {
    if (spec.is_even() && k % 2 == 1) {
      m[k] = 0.0;
      continue;
    }
    const double lm = log_moment(spec, k);
    if (!std::isfinite(lm)) throw InputError("moments: moment of order " + std::to_string(k) + " diverges");
    const double side = (k % 2 == 0) ? 1.0 + neg : 1.0 - neg;
    m[k] = std::exp(lm) * side;
  }
  return m;
}

RecurrenceTable recurrence(const WeightSpec& spec, int n, int precision_digits) {
  if (n < 1) throw InputError("recurrence: n must be >= 1");
  validate(spec);
  if (precision_digits == 0) precision_digits = default_precision_digits();
  if (precision_digits < 20) throw InputError("recurrence: precision below 20 digits");
  const SingularityProfile prof = singularity_profile(spec);

  // Integration window in x = log w: wide enough that the degree-2n
  // integrand and the zeroth moment both lose kDropNats below their peaks.
  auto g_hi = [&](double x) { return (2 * n + 2) * x + half_line_log_density(spec, std::exp(x)); };
  auto g_lo = [&](double x) { return x + half_line_log_density(spec, std::exp(x)); };
  double peak_hi = 0, best = -std::numeric_limits<double>::infinity();
  for (double x = -100; x <= 700; x += 0.25)
    if (g_hi(x) > best) best = g_hi(x), peak_hi = x;
  if (peak_hi > 690) throw InputError("recurrence: moments of order 2n are not finite for " + spec.name());
  double peak_lo = 0;
  best = -std::numeric_limits<double>::infinity();
  for (double x = -100; x <= 700; x += 0.25)
    if (g_lo(x) > best) best = g_lo(x), peak_lo = x;
  const double xhi = scan_edge(g_hi, peak_hi, 1.0, kDropNats, 705.0);
  const double xlo = scan_edge(g_lo, std::min(peak_lo, peak_hi), -1.0, kDropNats, -700.0);
  std::vector<double> cuts;
  for (const auto& s : prof.interior_points)
    if (s.location > 0) cuts.push_back(std::log(s.location));
  for (double b : prof.breakpoints)
    if (b > 0) cuts.push_back(std::log(b));
  std::sort(cuts.begin(), cuts.end());

  PrecisionScope scope(precision_digits);
  std::vector<mpreal> glx, glw;
  gauss_legendre(kPanelNodes, glx, glw);
  const bool even = spec.is_even();
  const mpreal tol = mpreal(1e-15);

  std::vector<mpreal> alpha, beta, alpha_prev, beta_prev;
  double h = 1.0;
  int nodes = 0;
  for (int level = 0; level < 10; ++level, h /= 2) {
    const Discretization D = discretize(spec, xlo, xhi, cuts, h, glx, glw);
    nodes = static_cast<int>(D.nodes.size());
    stieltjes(D, n + 1, even, alpha, beta);
    if (level > 0) {
      int stable = 0;
      for (; stable <= n; ++stable) {
        const mpreal scale = abs(alpha[stable]) + sqrt(beta[stable]);
        if (abs(alpha[stable] - alpha_prev[stable]) > tol * scale) break;
        if (abs(beta[stable] - beta_prev[stable]) > tol * beta[stable]) break;
      }
      if (stable > n) break;
      if (level == 9)
        throw AccuracyError(
            "recurrence: coefficients did not stabilize; max usable n = " + std::to_string(std::min(stable, n)),
            std::min(stable, n));
    }
    alpha_prev = alpha;
    beta_prev = beta;
  }

  RecurrenceTable t;
  t.n = n;
  t.precision_digits = precision_digits;
  t.discretization_nodes = nodes;
  t.alpha_mp.assign(alpha.begin(), alpha.begin() + n);
  t.beta_mp.assign(beta.begin(), beta.begin() + n);
  t.beta_next = static_cast<double>(beta[n]);
  for (int k = 0; k < n; ++k) {
    t.alpha.push_back(static_cast<double>(alpha[k]));
    t.beta.push_back(static_cast<double>(beta[k]));
  }
  return t;
}

GaussRule gauss_rule(const RecurrenceTable& table, int n) {
  if (n < 1 || n > table.n) throw InputError("gauss_rule: need 1 <= n <= table.n");
  const int digits = std::max(table.precision_digits, 20);
  PrecisionScope scope(digits);
  std::vector<mpreal> d(n), e(n, mpreal(0)), z;
  for (int i = 0; i < n; ++i) {
    d[i] = table.alpha_mp.empty() ? mpreal(table.alpha[i]) : table.alpha_mp[i];
    if (i + 1 < n) e[i] = sqrt(table.beta_mp.empty() ? mpreal(table.beta[i + 1]) : table.beta_mp[i + 1]);
  }
  const mpreal eps = pow(mpreal(2), -static_cast<int>(std::ceil(digits * 3.3219280948873623)));
  tridiagonal_ql(d, e, z, eps, 200);
  const mpreal m0 = table.beta_mp.empty() ? mpreal(table.beta[0]) : table.beta_mp[0];
  GaussRule g;
  for (int i = 0; i < n; ++i) {
    g.nodes.push_back(static_cast<double>(d[i]));
    g.weights.push_back(static_cast<double>(m0 * z[i] * z[i]));
  }
  return g;
}

void eval_orthonormal_all(const RecurrenceTable& table, int kmax, double w, double* out) {
  if (kmax < 0 || kmax > table.n) throw InputError("eval_orthonormal: k out of range");
  out[0] = 1.0 / std::sqrt(table.beta[0]);
  if (kmax == 0) return;
  double prev = 0.0, cur = out[0];
  for (int k = 0; k < kmax; ++k) {
    const double sb = k == 0 ? 0.0 : std::sqrt(table.beta[k]);
    const double next = ((w - table.alpha[k]) * cur - sb * prev) / std::sqrt(k + 1 < table.n ? table.beta[k + 1] : table.beta_next);
    prev = cur;
    cur = next;
    out[k + 1] = cur;
  }
}

double eval_orthonormal(const RecurrenceTable& table, int k, double w) {
  std::vector<double> v(k + 1);
  eval_orthonormal_all(table, k, w, v.data());
  return v[k];
}

std::string recurrence_csv(const RecurrenceTable& table) {
  std::string out = "k,alpha_k,beta_k\n";
  char buf[96];
  for (int k = 0; k < table.n; ++k) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", k, table.alpha[k], table.beta[k]);
    out += buf;
  }
  return out;
}

}  // namespace kreinlab
