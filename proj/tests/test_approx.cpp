#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "kreinlab/approx.hpp"

using namespace kreinlab;

namespace {

nlohmann::json fixture() {
  std::ifstream in(KREINLAB_FIXTURE_DIR "/l2_error_curves.json");
  REQUIRE(in.good());
  return nlohmann::json::parse(in);
}

std::vector<int> range(int a, int b) {
  std::vector<int> v;
  for (int d = a; d <= b; ++d) v.push_back(d);
  return v;
}

}  // namespace

TEST_CASE("closed-form eps_0 for e^{-w}") {
  const auto a = best_l2(pure_exp(1), 1.0, 0);
  CHECK(std::abs(a.eps_l2 - 1 / std::sqrt(2.0)) < 1e-10);
  // c_0 = int e^{iw} e^{-w} dw = 1/(1 - i)
  CHECK(std::abs(a.orthonormal_coeffs[0] - cplx(0.5, 0.5)) < 1e-13);
}

TEST_CASE("T = 0 reproduces the constant") {
  for (const auto& s : {pure_exp(1), stretched_exp(1, 0.5)}) {
    const auto a = best_l2(s, 0.0, 3);
    CHECK(a.eps_l2 == 0.0);
    CHECK(std::abs(a.eval_real_axis(2.5) - cplx(1)) < 1e-12);
    const auto l1 = best_l1(s, 0.0, 3, resolving_rule(s, 0.0, 3));
    CHECK(l1.eps_l1 < 1e-12);
    for (auto p : error_curve(s, 0.0, {1, 2, 5}, Norm::L2)) CHECK(p.eps == 0.0);
  }
}

TEST_CASE("e^{-w} curve decays, d = 30 below 1e-3") {
  CHECK(best_l2(pure_exp(1), 1.0, 30).eps_l2 < 1e-3);
}

TEST_CASE("L2 curves against the Hankel oracle fixture") {
  const auto fx = fixture();
  const std::pair<WeightSpec, const char*> cases[] = {{pure_exp(1), "PureExp(r=1)"},
                                                      {stretched_exp(1, 0.5), "StretchedExp(r=1,q=0.5)"}};
  for (const auto& [spec, key] : cases) {
    const auto curve = error_curve(spec, 1.0, range(0, 32), Norm::L2);
    for (const auto& p : curve) {
      const double ref = std::stod(fx[key][p.d].get<std::string>());
      CAPTURE(key);
      CAPTURE(p.d);
      // eps^2 = m_0 - sum |c_k|^2 carries absolute rounding of about 1e-15 m_0
      CHECK(std::abs(p.eps * p.eps - ref * ref) < 1e-14);
      CHECK(std::abs(p.eps - ref) < 1e-5 * ref);
    }
  }
}

TEST_CASE("approximant invariants") {
  const WeightSpec catalog[] = {pure_exp(1), stretched_exp(1, 0.5), stretched_exp(1, 0.7), log_squared(),
                                damped_stretched_exp(1, 1, 2)};
  for (const auto& s : catalog) {
    CAPTURE(s.name());
    const auto table = recurrence(s, 9);
    for (int d : {0, 3, 8}) {
      const auto l2 = best_l2(s, table, 1.0, d);
      CHECK(l2.bessel_residual >= -1e-12);
      const auto grid = resolving_rule(s, 1.0, d);
      const auto l1 = best_l1(s, table, 1.0, d, grid);
      CHECK(l1.eps_l1 <= std::sqrt(table.beta[0]) * l2.eps_l2 * (1 + 1e-10));
      // L1 optimum no worse than the L2 polynomial's discretized L1 error
      std::vector<cplx> r(grid.nodes.size());
      for (size_t j = 0; j < r.size(); ++j)
        r[j] = std::exp(cplx(0, grid.nodes[j])) - l2.eval_real_axis(grid.nodes[j]);
      CHECK(l1.eps_l1 <= weighted_norm(grid, r, 1.0) * (1 + 1e-12));
      // psi(i w) = psi~(w) on a 100-point grid
      double worst = 0;
      for (int j = 0; j < 100; ++j) {
        const double w = 0.05 * j * (1 + d);
        const cplx a = l2.eval_iaxis(cplx(0, w)), b = l2.eval_real_axis(w);
        worst = std::max(worst, std::abs(a - b) / (1 + std::abs(b)));
      }
      CHECK(worst < 1e-12);
    }
  }
}

TEST_CASE("coefficient transform round trip") {
  std::vector<cplx> at = {{1, 2}, {3, -1}, {0.5, 0.25}, {-2, 7}, {1e-3, 4}};
  const auto a = to_iaxis(at);
  CHECK(a[1] == cplx(-1, -3));  // (3 - i)(-i)
  const auto back = to_real_axis(a);
  for (size_t k = 0; k < at.size(); ++k) CHECK(back[k] == at[k]);
}

TEST_CASE("weighted norms") {
  const auto s = stretched_exp(1, 0.5);
  const auto rule = resolving_rule(s, 1.0, 4);
  double m0 = 0;
  for (double w : rule.weights) m0 += w;
  CHECK(m0 == doctest::Approx(2.0).epsilon(1e-13));
  std::vector<cplx> one(rule.nodes.size(), cplx(1)), osc(rule.nodes.size());
  for (size_t j = 0; j < osc.size(); ++j) osc[j] = std::exp(cplx(0, rule.nodes[j]));
  CHECK(weighted_norm(rule, one, 1) == doctest::Approx(m0));
  CHECK(weighted_norm(rule, osc, 2) == doctest::Approx(std::sqrt(m0)));
  CHECK_THROWS_AS(weighted_norm(rule, std::vector<cplx>(3), 2), InputError);
  CHECK_THROWS_AS(weighted_norm(rule, one, 0.5), InputError);
}

TEST_CASE("monotone L1 curve") {
  const auto c = error_curve(stretched_exp(1, 0.5), 1.0, {0, 1, 2, 3, 4}, Norm::L1);
  for (size_t i = 1; i < c.size(); ++i) CHECK(c[i].eps <= c[i - 1].eps);
}

TEST_CASE("input errors") {
  CHECK_THROWS_AS(best_l2(even_extension(pure_exp(1)), 1.0, 2), InputError);
  CHECK_THROWS_AS(best_l2(pure_exp(1), -1.0, 2), InputError);
  CHECK_THROWS_AS(error_curve(pure_exp(1), 1.0, {3, 2}, Norm::L2), InputError);
  CHECK_THROWS_AS(resolving_rule(stretched_exp(1, 0.5), 1e6, 4), AccuracyError);
}
