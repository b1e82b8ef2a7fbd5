#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kreinlab/quad.hpp"

using namespace kreinlab;
constexpr double inf = std::numeric_limits<double>::infinity();

TEST_CASE("reference integrals") {
  const double zero[] = {0.0};
  auto r = integrate([](double w) { return std::exp(-w); }, 0.0, inf);
  CHECK(std::abs(r.value - 1.0) < 1e-10);
  CHECK(r.transform_used == Transform::ExpTail);
  CHECK(r.panels_used >= 1);

  r = integrate([](double w) { return std::sqrt(w) / (1 + w * w); }, 0.0, inf, zero);
  CHECK(std::abs(r.value - std::numbers::pi / std::sqrt(2.0)) < 1e-10);

  r = integrate([](double w) { return std::log(w) * std::log(w); }, 0.0, 1.0, zero);
  CHECK(std::abs(r.value - 2.0) < 1e-10);
  CHECK(r.transform_used == Transform::DoubleExponential);
}

TEST_CASE("polynomial times exponential against Gamma values") {
  for (int k = 0; k <= 10; ++k) {
    auto r = integrate([k](double w) { return std::pow(w, k) * std::exp(-w); }, 0.0, inf);
    CHECK(std::abs(r.value / std::tgamma(k + 1.0) - 1.0) < 1e-12);
  }
}

TEST_CASE("splitting invariance") {
  auto f = [](double w) { return std::exp(-std::sqrt(w)) * (1 + std::cos(w)); };
  const double zero[] = {0.0};
  auto whole = integrate(f, 0.0, inf, zero);
  for (double c : {0.3, 2.0, 17.0}) {
    auto left = integrate(f, 0.0, c, zero);
    auto right = integrate(f, c, inf);
    const double tol = whole.abs_error_estimate + left.abs_error_estimate + right.abs_error_estimate + 1e-12;
    CHECK(std::abs(left.value + right.value - whole.value) <= std::max(tol, 1e-10 * std::abs(whole.value)));
  }
}

TEST_CASE("complex integrand and full line") {
  auto r = integrate([](double w) { return std::exp(std::complex<double>(-w * w, w)); }, -inf, inf);
  const double exact = std::sqrt(std::numbers::pi) * std::exp(-0.25);
  CHECK(std::abs(r.value - exact) < 1e-10);
}

TEST_CASE("interior singular point") {
  const double pts[] = {1.0};
  auto r = integrate([](double w) { return std::log(std::abs(w - 1)); }, 0.0, 2.0, pts);
  CHECK(std::abs(r.value + 2.0) < 1e-10);
}

TEST_CASE("budget exhaustion raises AccuracyError") {
  QuadOptions opt;
  opt.max_panels = 3;
  opt.rel_tol = opt.abs_tol = 1e-14;
  CHECK_THROWS_AS(integrate([](double w) { return std::sin(1.0 / (w + 1e-3)); }, 0.0, 1.0, {}, opt), AccuracyError);
  CHECK_THROWS_AS(integrate([](double) { return 1.0; }, 0.0, 1.0, {}, -1.0), InputError);
}

TEST_CASE("classifier reference cases") {
  const double zero[] = {0.0};
  auto c = classify_improper([](double w) { return 1.0 / (1 + w); }, 0.0, {}, {});
  CHECK_FALSE(c.convergent());
  CHECK(c.rate == DivergenceRate::Log);
  CHECK(c.evidence.size() == 25);

  c = classify_improper([](double w) { return std::sqrt(w) / (1 + w * w); }, 0.0, zero, {});
  CHECK(c.convergent());
  CHECK(std::abs(c.value - 2.221441469079183) < 1e-9);

  c = classify_improper([](double w) { return 1.0 / (w * std::log(w)); }, 2.0, {}, {});
  CHECK_FALSE(c.convergent());
  CHECK(c.rate == DivergenceRate::LogLog);

  c = classify_improper([](double w) { return 1.0 / (w * std::log(w) * std::log(w)); }, 2.0, {}, {});
  CHECK(c.convergent());
  CHECK(c.value == doctest::Approx(1 / std::log(2.0)).epsilon(1e-3));

  c = classify_improper([](double w) { return std::pow(w, -0.8); }, 1.0, {}, {});
  CHECK(c.rate == DivergenceRate::Power);
  CHECK(c.exponent == doctest::Approx(0.2).epsilon(0.01));
}

TEST_CASE("symbolic verdict is corroborated by the ladder") {
  ClassifierHints h;
  h.tail = TailHint{-1.0, 0.0};
  auto c = classify_improper([](double w) { return 1.0 / (1 + w); }, 0.0, {}, h);
  CHECK(c.symbolic);
  CHECK(c.corroborated);
  CHECK(c.rate == DivergenceRate::Log);

  // interior pole of order one plus an integrable tail
  ClassifierHints h2;
  h2.tail = TailHint{-2.0, 0.0};
  h2.points.push_back({1.0, 1.0});
  const double one[] = {1.0};
  c = classify_improper([](double w) { return 1.0 / (std::abs(w - 1) * (1 + w * w)); }, 0.0, one, h2);
  CHECK_FALSE(c.convergent());
  CHECK(c.rate == DivergenceRate::Log);
  CHECK(c.corroborated);
}

TEST_CASE("evidence csv") {
  auto c = classify_improper([](double w) { return 1.0 / (1 + w); }, 0.0, {}, {});
  const auto csv = evidence_csv(c);
  CHECK(csv.rfind("k,B_k,partial\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 26);
}
