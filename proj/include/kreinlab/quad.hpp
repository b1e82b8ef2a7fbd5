#pragma once

// Adaptive quadrature on finite and infinite intervals with caller-declared
// singular points, and a truncation-ladder classifier for improper integrals.

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "kreinlab/errors.hpp"

namespace kreinlab {

enum class Transform { None, DoubleExponential, ExpTail };

template <class T>
struct QuadResult {
  T value{};
  double abs_error_estimate = 0.0;
  int panels_used = 0;
  // Strongest transform applied on any segment (ExpTail > DoubleExponential > None).
  Transform transform_used = Transform::None;
};

struct QuadOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-10;
  int max_panels = 2000;
  int max_level = 11;  // DE step 2^{-max_level}
};

using RealFn = std::function<double(double)>;
using ComplexFn = std::function<std::complex<double>(double)>;

// Integrates f over (a, b); b may be +infinity and a may be -infinity. The
// interval is split at every singular point inside it; DE (tanh-sinh) is used
// on finite pieces that touch a singular point, exp-sinh on infinite tails,
// adaptive Gauss-Kronrod elsewhere. Endpoints a, b count as singular when
// they appear in singular_points. Throws AccuracyError carrying the best
// estimate when the panel budget runs out.
QuadResult<double> integrate_real(const RealFn& f, double a, double b,
                                  std::span<const double> singular_points,
                                  const QuadOptions& opt);
QuadResult<std::complex<double>> integrate_complex(const ComplexFn& f, double a, double b,
                                                   std::span<const double> singular_points,
                                                   const QuadOptions& opt);

template <class F>
auto integrate(F&& f, double a, double b, std::span<const double> singular_points = {},
               double tol = 1e-10) {
  QuadOptions opt;
  opt.rel_tol = tol;
  opt.abs_tol = tol;
  using R = std::decay_t<decltype(f(0.0))>;
  if constexpr (std::is_same_v<R, std::complex<double>>) {
    return integrate_complex(ComplexFn(std::forward<F>(f)), a, b, singular_points, opt);
  } else {
    return integrate_real(RealFn(std::forward<F>(f)), a, b, singular_points, opt);
  }
}

template <class F>
auto integrate(F&& f, double a, double b, std::span<const double> singular_points,
               const QuadOptions& opt) {
  using R = std::decay_t<decltype(f(0.0))>;
  if constexpr (std::is_same_v<R, std::complex<double>>) {
    return integrate_complex(ComplexFn(std::forward<F>(f)), a, b, singular_points, opt);
  } else {
    return integrate_real(RealFn(std::forward<F>(f)), a, b, singular_points, opt);
  }
}

// ---------------------------------------------------------------------------
// Improper-integral classification

enum class ImproperStatus { Convergent, Divergent };
enum class DivergenceRate { None, Power, Log, LogLog };

struct LadderRow {
  int k = 0;
  double bound = 0.0;    // truncation bound B_k (or distance to an interior point)
  double partial = 0.0;  // partial integral up to that bound
};

struct ImproperClass {
  ImproperStatus status = ImproperStatus::Convergent;
  double value = 0.0;  // Convergent: integral value
  DivergenceRate rate = DivergenceRate::None;
  double exponent = 0.0;  // Power rate exponent
  std::vector<LadderRow> evidence;
  // How the verdict was reached. When both routes ran, `corroborated` says
  // whether the numerical ladder agreed with the symbolic test.
  bool symbolic = false;
  bool ladder = false;
  bool corroborated = false;
  std::string note;

  bool convergent() const { return status == ImproperStatus::Convergent; }
};

// |f(w)| ~ C w^power (log w)^log_power as w -> infinity.
struct TailHint {
  double power = 0.0;
  double log_power = 0.0;
};

// |f(w)| ~ C |w - location|^{-power} near an interior point.
struct PointHint {
  double location = 0.0;
  double power = 0.0;
};

struct ClassifierHints {
  std::optional<TailHint> tail;
  std::vector<PointHint> points;
};

struct LadderOptions {
  double first_bound = 10.0;  // B_k = first_bound * 2^k
  int max_k = 24;
  int fit_window = 6;
  double r2_threshold = 0.999;
  double tol = 1e-10;
};

// Symbolic comparison test on hints alone; nullopt when no hint applies.
std::optional<ImproperClass> classify_symbolic(const ClassifierHints& hints);

// Numerical ladder of partial integrals on [a, B_k] (tail) or approaching an
// interior point. Throws InconclusiveError when no growth model fits.
ImproperClass classify_ladder(const RealFn& f, double a, std::span<const double> singular_points,
                              const ClassifierHints& hints, const LadderOptions& opt = {});

// Symbolic decision when hints apply, corroborated by the ladder; ladder
// alone otherwise. For Convergent results `value` is a full quadrature of
// the integral at opt.tol.
ImproperClass classify_improper(const RealFn& f, double a, std::span<const double> singular_points,
                                const ClassifierHints& hints, const LadderOptions& opt = {});

std::string to_string(const ImproperClass& c);

// Ladder evidence as CSV rows "k,B_k,partial".
std::string evidence_csv(const ImproperClass& c);

}  // namespace kreinlab
