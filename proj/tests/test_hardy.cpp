#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "kreinlab/hardy.hpp"

using namespace kreinlab;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<WeightSpec> catalog_even() {
  return {even_extension(log_squared(1)), even_extension(stretched_exp(1, 0.3)), even_extension(stretched_exp(1, 0.5)),
          even_extension(stretched_exp(1, 0.7)), even_extension(damped_stretched_exp(1, 1, 2))};
}

// (1/pi) int log mu(s) delta / ((s - w)^2 + delta^2) ds with boost's
// tanh-sinh on [-B, B] (split at breakpoints and w) and exp-sinh in
// v = log|s| beyond B.
double poisson_log_modulus(const OuterFunction& o, double delta, double w) {
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  const double B = 50;
  auto P = [&](double s) { return delta / ((s - w) * (s - w) + delta * delta); };
  std::vector<double> cuts{-B, w, B};
  for (double b : o.breakpoints) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double sum = 0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] < 1e-15) continue;
    sum += ts.integrate(
        [&](double s) {
          double l = o.log_mu(s);
          return std::isfinite(l) ? l * P(s) : 0.0;
        },
        cuts[i], cuts[i + 1]);
  }
  for (int sign : {1, -1}) {
    sum += es.integrate(
        [&](double v) {
          // log mu(s) |s| P(s) = (log mu(s) / |s|) s^2 P(s)
          double lam = o.log_mu_over_s(v, sign);
          double u = sign * std::exp(-v);  // 1/s
          return lam * delta / ((1 - w * u) * (1 - w * u) + delta * delta * u * u);
        },
        std::log(B), std::numeric_limits<double>::infinity());
  }
  return sum / kPi;
}

}  // namespace

TEST_CASE("unit modulus gives the constant outer function") {
  auto o = make_outer([](double) { return 0.0; }, {});
  for (cplx z : {cplx(1, 0), cplx(0.01, 3), cplx(2, -5)}) CHECK(std::abs(outer_from_modulus(o, z) - 1.0) < 1e-12);
}

TEST_CASE("rational modulus reproduces (1+z)^-2 at 20 points") {
  auto o = make_outer([](double s) { return -std::log1p(s * s); }, {});
  CHECK(std::abs(outer_from_modulus(o, 1.0) - 0.25) < 1e-12);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> re(1e-3, 3.0), im(-20, 20);
  for (int k = 0; k < 20; ++k) {
    cplx z(re(rng), im(rng));
    cplx ex = 1.0 / ((1.0 + z) * (1.0 + z));
    CHECK(std::abs(outer_from_modulus(o, z) - ex) / std::abs(ex) < 1e-6);
  }
}

TEST_CASE("log-modulus equals the Poisson average of log mu") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ld(-3, 0), wd(-6, 6);
  std::vector<WeightSpec> specs = catalog_even();
  specs.push_back(make_rescaled(stretched_exp(1, 0.5), 0.3, 1.0));
  for (const auto& spec : specs) {
    auto o = outer_for_weight(spec);
    for (int k = 0; k < 10; ++k) {
      double d = std::pow(10.0, ld(rng)), w = wd(rng);
      double a = outer_log(o, cplx(d, w)).real();
      double b = poisson_log_modulus(o, d, w);
      INFO(spec.name(), " delta=", d, " w=", w);
      CHECK(std::abs(a - b) < 1e-8 * std::max(1.0, std::abs(b)));
    }
  }
}

TEST_CASE("outer function has no zeros on the positive real axis") {
  for (const auto& spec : catalog_even()) {
    auto o = outer_for_weight(spec);
    for (double x : {0.1, 1.0, 10.0}) {
      cplx X = outer_from_modulus(o, x);
      CHECK(std::abs(X) > 0);
      CHECK(std::abs(X.imag()) < 1e-9 * std::abs(X));  // even mu: real on the real axis
    }
  }
}

TEST_CASE("boundary modulus along a delta ladder") {
  const std::vector<double> ladder{1e-2, 1e-3, 1e-4};
  const std::vector<double> grid{-3.1, -1.7, -0.45, 0.3, 0.8, 1.9, 4.4};

  SUBCASE("unit modulus") {
    auto o = make_outer([](double) { return 0.0; }, {});
    auto bc = boundary_modulus_check(o, grid, ladder);
    CHECK(bc.max_rel_deviation < 1e-12);
  }
  SUBCASE("rational modulus matches the closed form off the axis") {
    auto o = make_outer([](double s) { return -std::log1p(s * s); }, {});
    auto bc = boundary_modulus_check(o, grid, ladder);
    for (size_t k = 0; k < ladder.size(); ++k)
      for (size_t j = 0; j < grid.size(); ++j) {
        double d = ladder[k], w = grid[j];
        double exact = (1 + w * w) / ((1 + d) * (1 + d) + w * w) - 1;
        CHECK(std::abs(bc.rel_dev[k][j] - exact) < 1e-8);
      }
    CHECK(bc.extrapolated_deviation < 1e-6);
  }
  SUBCASE("catalog weights") {
    for (const auto& spec : catalog_even()) {
      auto o = outer_for_weight(spec);
      auto bc = boundary_modulus_check(o, grid, ladder);
      INFO(spec.name());
      CHECK(bc.monotone);
      CHECK(bc.max_abs_dev[1] < bc.max_abs_dev[0]);
      CHECK(bc.max_abs_dev[2] < bc.max_abs_dev[1]);
      CHECK(bc.max_rel_deviation < 2e-3);
      CHECK(bc.extrapolated_deviation < 1e-4);
    }
  }
  SUBCASE("delta below delta_min is rejected") {
    auto o = make_outer([](double) { return 0.0; }, {});
    CHECK_THROWS_AS(boundary_modulus_check(o, grid, {1e-13}), InputError);
    CHECK_THROWS_AS(outer_from_modulus(o, cplx(0.0, 1.0)), InputError);
  }
}

TEST_CASE("inverse transform of the causal and anti-causal exponentials") {
  SUBCASE("1/(1+iw) on the default grid") {
    auto g = grid_from_dt(1L << 18, 1.0 / 256);
    std::vector<cplx> X(g.n);
    for (long j = 0; j < g.n; ++j) X[j] = 1.0 / cplx(1, g.omega(j));
    auto x = inverse_fourier(g, X);
    double err = 0;
    for (long m = 0; m < x.n; ++m) {
      double t = x.time(m);
      if (std::abs(t) > 200) continue;
      double ex = t >= 0 ? std::exp(-t) : 0.0;
      err = std::max(err, std::abs(x.samples[m] - ex));
    }
    CHECK(err < 1e-6);
    CHECK(causality_defect(x) < 1e-6);
  }
  SUBCASE("1/(1-iw) is anti-causal") {
    auto g = grid_from_dt(1L << 18, 1.0 / 1024);
    std::vector<cplx> X(g.n);
    for (long j = 0; j < g.n; ++j) X[j] = 1.0 / cplx(1, -g.omega(j));
    auto x = inverse_fourier(g, X);
    double err = 0;
    for (long m = 0; m < x.n; ++m) {
      double t = x.time(m);
      if (std::abs(t) > 50 || std::abs(t) < 0.05) continue;
      double ex = t < 0 ? std::exp(t) : 0.0;
      err = std::max(err, std::abs(x.samples[m] - ex));
    }
    CHECK(err < 1e-3);
    CHECK(causality_defect(x) > 0.999);
  }
  SUBCASE("slow tails violate the window precondition") {
    auto g = grid_from_dt(1L << 16, 1.0 / 64);
    std::vector<cplx> X(g.n);
    for (long j = 0; j < g.n; ++j) X[j] = 1.0 / (1.0 + std::abs(g.omega(j)));
    CHECK_THROWS_AS(inverse_fourier(g, X), AccuracyError);
  }
  SUBCASE("zero signal has no causality defect") {
    TimeDomainSignal z;
    z.n = 8;
    z.dt = 1;
    z.t0 = -4;
    z.samples.assign(8, 0.0);
    CHECK_THROWS_AS(causality_defect(z), InputError);
  }
}

TEST_CASE("Parseval holds for the discrete transform") {
  auto g = grid_from_dt(1L << 16, 0.05);
  std::vector<cplx> X(g.n);
  for (long j = 0; j < g.n; ++j) {
    double w = g.omega(j);
    X[j] = std::exp(-0.5 * w * w) * std::polar(1.0, -2 * w);
  }
  auto x = inverse_fourier(g, X);
  CHECK(std::abs(x.l2_norm() / frequency_l2_norm(g, X) - 1) < 1e-8);
  // Gaussian centred at t = 2 with unit-variance envelope.
  long m = x.index_of(2.0);
  CHECK(std::abs(x.samples[m] - 1 / std::sqrt(2 * kPi)) < 1e-10);
}

TEST_CASE("outer functions of the catalog are causal on the default grid") {
  for (const auto& spec : catalog_even()) {
    auto o = outer_for_weight(spec);
    auto g = default_grid(o);
    auto bs = boundary_samples(o, g);
    auto x = inverse_fourier(bs);
    INFO(spec.name());
    CHECK(causality_defect(x) < 1e-3);
    CHECK(std::abs(x.l2_norm() / frequency_l2_norm(g, bs.X) - 1) < 1e-8);
    // interpolated samples agree with direct evaluation
    for (long j : {g.n / 2, g.n / 2 + 17, g.n / 3, 3 * g.n / 4 + 5}) {
      cplx d = outer_from_modulus(o, cplx(o.delta_min, g.omega(j)));
      CHECK(std::abs(bs.X[j] - d) <= 1e-9 * std::abs(d) + 1e-300);
    }
    // boundary modulus reproduced at delta_min
    double dev = 0;
    for (long j = 0; j < g.n; j += 997)
      if (bs.mu[j] > 1e-200) dev = std::max(dev, std::abs(std::abs(bs.X[j]) / bs.mu[j] - 1));
    CHECK(dev < 1e-8);
  }
}

TEST_CASE("frequency norms grow with the negative-side scale") {
  double prev = 0;
  for (double s : {0.25, 0.5, 1.0}) {
    auto o = outer_for_weight(make_rescaled(stretched_exp(1, 0.5), s, 1.0));
    auto bs = boundary_samples(o, default_grid(o));
    double nrm = frequency_l2_norm(bs.grid, bs.X);
    CHECK(nrm > prev);
    prev = nrm;
  }
}

TEST_CASE("non-integrable log modulus is rejected") {
  CHECK_THROWS_AS(outer_for_weight(even_extension(pure_exp(1))), InputError);
  CHECK_THROWS_AS(outer_for_weight(stretched_exp(1, 0.5)), InputError);
}

TEST_CASE("boundary CSV") {
  auto o = make_outer([](double s) { return -std::log1p(s * s); }, {});
  auto bs = boundary_samples(o, grid_from_dt(64, 0.5));
  auto csv = boundary_csv(bs, 16);
  CHECK(csv.rfind("omega,re_X,im_X,abs_X,mu\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
