#pragma once

// Weight catalog: the families e^{-(log w)^2}, e^{-r w^q}, e^{-r w^q/|log w|^p}
// and a few reference weights, with log-density evaluators that work in both
// double and extended precision.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "kreinlab/errors.hpp"

namespace kreinlab {

enum class Family {
  LogSquared,          // rho = exp(-r (log|w|)^2)
  StretchedExp,        // rho = exp(-r |w|^q), q in (0, 1]
  DampedStretchedExp,  // rho = exp(-r |w|^q / |log|w||^p), p >= 1
  ExcludedDamped,      // rho = exp(-r |w| / |log|w||)
  PureExp,             // rho = exp(-r |w|)
  RationalModulus,     // rho = (1 + w^2)^{-r}
  Custom
};

enum class Domain { HalfLine, FullLineEven };

// log rho ~ -c |w - location|^{-exponent} near an interior zero of rho.
struct InteriorSingularity {
  double location = 0.0;
  double exponent = 0.0;
};

enum class ZeroBehavior {
  Bounded,   // log rho(0+) finite
  LogPower,  // log rho ~ -c |log w|^power as w -> 0+
};

struct ZeroEndpoint {
  ZeroBehavior behavior = ZeroBehavior::Bounded;
  double power = 0.0;
};

enum class TailKind { Power, PowerLogDamped, LogSquared, Logarithmic };

// -log rho(w) ~ c w^growth_power (log w)^log_power as w -> infinity.
struct TailClass {
  TailKind kind = TailKind::Power;
  double growth_power = 1.0;
  double log_power = 0.0;
};

struct SingularityProfile {
  std::vector<InteriorSingularity> interior_points;
  // Points where log rho is continuous but not smooth (kinks, cusps) or
  // jumps; quadrature splits there.
  std::vector<double> breakpoints;
  ZeroEndpoint zero_endpoint;
  TailClass tail_class;
};

struct WeightSpec {
  Family family = Family::StretchedExp;
  double r = 1.0;
  double q = 1.0;
  double p = 1.0;
  Domain domain = Domain::HalfLine;
  // Replace |log w| by max(|log w|, 1) in the damping factor.
  bool regularize_log = true;
  // log of the factor applied on w < 0 for rescaled full-line weights;
  // zero for the plain even extension.
  double log_negative_scale = 0.0;
  // Custom family only: log-density as a function of |w|.
  std::function<double(double)> custom_log_density;
  std::shared_ptr<const SingularityProfile> custom_profile;

  bool is_full_line() const { return domain == Domain::FullLineEven; }
  bool is_even() const { return is_full_line() && log_negative_scale == 0.0; }
  std::string name() const;
};

// Catalog constructors (all validate their arguments).
WeightSpec log_squared(double r = 1.0);
WeightSpec stretched_exp(double r, double q);
WeightSpec damped_stretched_exp(double r, double q, double p, bool regularize_log = true);
WeightSpec excluded_damped(double r = 1.0, bool regularize_log = true);
WeightSpec pure_exp(double r = 1.0);
WeightSpec rational_modulus(double r = 1.0);
WeightSpec custom_weight(std::function<double(double)> log_density,
                         std::shared_ptr<const SingularityProfile> profile);

// Throws InputError when parameters violate the family's constraints.
void validate(const WeightSpec& spec);

WeightSpec even_extension(const WeightSpec& spec);

// Full-line weight equal to rho on w >= 0 and (eps/L) rho on w < 0.
WeightSpec make_rescaled(const WeightSpec& spec, double eps, double L);

SingularityProfile singularity_profile(const WeightSpec& spec);

// log rho(w) for w >= 0 of the underlying half-line density. Works for any
// floating type with ADL overloads of log/pow/abs/log1p (double, mpfr).
template <class Real>
Real half_line_log_density(const WeightSpec& spec, const Real& w) {
  using std::abs;
  using std::log;
  using std::log1p;
  using std::pow;
  const Real neg_inf = -std::numeric_limits<Real>::infinity();
  switch (spec.family) {
    case Family::LogSquared: {
      if (w == 0) return neg_inf;
      Real l = log(w);
      return -Real(spec.r) * l * l;
    }
    case Family::StretchedExp:
      return -Real(spec.r) * pow(w, Real(spec.q));
    case Family::PureExp:
      return -Real(spec.r) * w;
    case Family::DampedStretchedExp:
    case Family::ExcludedDamped: {
      const bool excluded = spec.family == Family::ExcludedDamped;
      const Real q = excluded ? Real(1) : Real(spec.q);
      const Real p = excluded ? Real(1) : Real(spec.p);
      if (w == 0) return Real(0);
      Real l = abs(log(w));
      if (spec.regularize_log && l < 1) l = 1;
      if (l == 0) return neg_inf;
      return -Real(spec.r) * pow(w, q) / pow(l, p);
    }
    case Family::RationalModulus:
      if (w > 1) return -Real(spec.r) * (2 * log(w) + log1p(1 / (w * w)));
      return -Real(spec.r) * log1p(w * w);
    case Family::Custom:
      return Real(spec.custom_log_density(static_cast<double>(w)));
  }
  return neg_inf;
}

// log rho(w) honoring the domain: HalfLine rejects w < 0; full-line weights
// are evaluated at |w| plus the negative-side rescaling. Returns -inf where
// rho vanishes.
double eval_log_weight(const WeightSpec& spec, double w);

// log rho(e^v) e^{-v} of the half-line density, without forming e^v where
// the family allows it (tails of integrals against 1/w^2).
double log_density_over_w(const WeightSpec& spec, double v);

inline double eval_weight(const WeightSpec& spec, double w) {
  return std::exp(eval_log_weight(spec, w));
}

// JSON object {"family","r","q","p","domain","regularize_log"}; unknown keys
// are rejected with InputError.
nlohmann::json to_json(const WeightSpec& spec);
WeightSpec weight_from_json(const nlohmann::json& j);

std::string to_string(Family family);
Family family_from_string(const std::string& name);

}  // namespace kreinlab
