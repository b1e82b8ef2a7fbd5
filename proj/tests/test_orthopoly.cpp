#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "kreinlab/krein.hpp"
#include "kreinlab/orthopoly.hpp"

using namespace kreinlab;

TEST_CASE("Laguerre recurrence from the generic procedure") {
  const auto t = recurrence(pure_exp(1), 21);
  CHECK(t.beta[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (int k = 0; k <= 20; ++k) {
    CHECK(std::abs(t.alpha[k] - (2 * k + 1)) <= 1e-10 * (2 * k + 1));
    if (k >= 1) CHECK(std::abs(t.beta[k] - k * k) <= 1e-10 * k * k);
  }
}

TEST_CASE("moments") {
  auto m = moments(pure_exp(1), 3);
  CHECK(m[3] == doctest::Approx(6.0).epsilon(1e-12));
  m = moments(stretched_exp(1, 0.5), 0);
  CHECK(m[0] == doctest::Approx(2.0).epsilon(1e-12));
  m = moments(even_extension(pure_exp(1)), 5);
  CHECK(m[1] == 0.0);
  CHECK(m[5] == 0.0);
  CHECK(m[4] == doctest::Approx(48.0).epsilon(1e-12));
  m = moments(make_rescaled(pure_exp(1), 0.5, 1.0), 1);
  CHECK(m[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(m[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("small Gauss rules for e^{-w}") {
  const auto t = recurrence(pure_exp(1), 4);
  auto g = gauss_rule(t, 1);
  CHECK(g.nodes[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g.weights[0] == doctest::Approx(1.0).epsilon(1e-14));
  g = gauss_rule(t, 2);
  double s = 0;
  for (int i = 0; i < 2; ++i) s += g.weights[i] * std::pow(g.nodes[i], 3);
  CHECK(std::abs(s / 6.0 - 1) < 1e-12);
}

TEST_CASE("orthonormal evaluation") {
  const auto t = recurrence(pure_exp(1), 16);
  CHECK(eval_orthonormal(t, 0, 3.7) == doctest::Approx(1.0));
  CHECK(std::abs(eval_orthonormal(t, 1, 1.0)) < 1e-14);
  // leading coefficients are positive: p^_1(w) = w - 1
  CHECK(eval_orthonormal(t, 1, 0.0) == doctest::Approx(-1.0));
  // Gram identity on the 16-point rule
  const auto g = gauss_rule(t, 16);
  std::vector<double> v(16);
  double worst = 0;
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b) {
      double s = 0;
      for (int i = 0; i < 16; ++i) s += g.weights[i] * eval_orthonormal(t, a, g.nodes[i]) * eval_orthonormal(t, b, g.nodes[i]);
      worst = std::max(worst, std::abs(s - (a == b)));
    }
  CHECK(worst < 1e-10);
}

TEST_CASE("catalog rules: exactness, mass, interlacing, symmetry") {
  const WeightSpec catalog[] = {log_squared(), stretched_exp(1, 0.5), stretched_exp(2, 0.8),
                                damped_stretched_exp(1, 1, 2), pure_exp(1), excluded_damped()};
  for (const auto& s : catalog) {
    CAPTURE(s.name());
    const auto t = recurrence(s, 21);
    for (int k = 0; k < 21; ++k) CHECK(t.beta[k] > 0);
    std::vector<double> lm;
    for (int k = 0; k <= 40; ++k) lm.push_back(log_moment(s, k));
    for (int n : {1, 5, 10, 20}) {
      const auto g = gauss_rule(t, n);
      double mass = 0;
      for (double w : g.weights) mass += w;
      CHECK(std::abs(mass / std::exp(lm[0]) - 1) < 1e-12);
      for (int i = 0; i + 1 < n; ++i) CHECK(g.nodes[i] < g.nodes[i + 1]);
      CHECK(g.nodes[0] > 0);
      double worst = 0;
      for (int p = 0; p <= 2 * n - 1; ++p) {
        double acc = 0;
        for (int i = 0; i < n; ++i) acc += g.weights[i] * std::exp(p * std::log(g.nodes[i]) - lm[p]);
        worst = std::max(worst, std::abs(acc - 1));
      }
      CAPTURE(n);
      CHECK(worst < 1e-12);
      if (n < 20) {
        const auto g1 = gauss_rule(t, n + 1);
        for (int i = 0; i < n; ++i) CHECK((g1.nodes[i] < g.nodes[i] && g.nodes[i] < g1.nodes[i + 1]));
      }
    }
  }
  const auto te = recurrence(even_extension(stretched_exp(1, 0.5)), 10);
  for (int k = 0; k < 10; ++k) CHECK(te.alpha[k] == 0.0);
  const auto ge = gauss_rule(te, 6);
  for (int i = 0; i < 6; ++i) CHECK(ge.nodes[i] == doctest::Approx(-ge.nodes[5 - i]));
}

TEST_CASE("QL eigensolver on a known matrix") {
  // tridiag(1, 2, 1) of size 5 has eigenvalues 2 + 2 cos(k pi / 6)
  std::vector<double> d(5, 2.0), e(5, 1.0), z;
  tridiagonal_ql(d, e, z, 1e-16);
  for (int k = 1; k <= 5; ++k) CHECK(d[5 - k] == doctest::Approx(2 + 2 * std::cos(k * std::numbers::pi / 6)));
  double s = 0;
  for (double v : z) {
    CHECK(v >= 0);
    s += v * v;
  }
  CHECK(s == doctest::Approx(1.0));
}

TEST_CASE("input errors") {
  CHECK_THROWS_AS(recurrence(pure_exp(1), 0), InputError);
  CHECK_THROWS_AS(recurrence(rational_modulus(1), 3), InputError);
  const auto t = recurrence(pure_exp(1), 3);
  CHECK_THROWS_AS(gauss_rule(t, 4), InputError);
  CHECK(recurrence_csv(t).rfind("k,alpha_k,beta_k\n0,", 0) == 0);
}
