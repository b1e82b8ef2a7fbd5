#include "kreinlab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace kreinlab {

namespace {

std::string format_param(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool uses_q(Family f) { return f == Family::StretchedExp || f == Family::DampedStretchedExp; }
bool uses_p(Family f) { return f == Family::DampedStretchedExp; }

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::LogSquared: return "LogSquared";
    case Family::StretchedExp: return "StretchedExp";
    case Family::DampedStretchedExp: return "DampedStretchedExp";
    case Family::ExcludedDamped: return "ExcludedDamped";
    case Family::PureExp: return "PureExp";
    case Family::RationalModulus: return "RationalModulus";
    case Family::Custom: return "Custom";
  }
  return "Unknown";
}

Family family_from_string(const std::string& name) {
  static const Family all[] = {Family::LogSquared,     Family::StretchedExp,
                               Family::DampedStretchedExp, Family::ExcludedDamped,
                               Family::PureExp,        Family::RationalModulus,
                               Family::Custom};
  for (Family f : all)
    if (to_string(f) == name) return f;
  throw InputError("unknown weight family '" + name + "'");
}

std::string WeightSpec::name() const {
  std::string s = to_string(family) + "(r=" + format_param(r);
  if (uses_q(family)) s += ",q=" + format_param(q);
  if (uses_p(family)) s += ",p=" + format_param(p);
  if (family == Family::DampedStretchedExp || family == Family::ExcludedDamped)
    s += regularize_log ? ",reg" : ",unreg";
  s += ")";
  if (is_full_line()) s += log_negative_scale == 0.0 ? "[even]" : "[rescaled]";
  return s;
}

void validate(const WeightSpec& spec) {
  auto fail = [&](const std::string& msg) { throw InputError(spec.name() + ": " + msg); };
  if (!std::isfinite(spec.log_negative_scale)) fail("negative-side scale must be finite");
  if (spec.family == Family::Custom) {
    if (!spec.custom_log_density) fail("custom weight needs a log-density");
    return;
  }
  if (!(spec.r > 0) || !std::isfinite(spec.r)) fail("r must be a positive real");
  if (spec.family == Family::StretchedExp || spec.family == Family::DampedStretchedExp) {
    if (!(spec.q > 0 && spec.q <= 1)) fail("q must lie in (0, 1]");
  }
  if (spec.family == Family::DampedStretchedExp) {
    if (!(spec.p >= 1) || !std::isfinite(spec.p)) fail("p must be >= 1");
  }
}

WeightSpec log_squared(double r) {
  WeightSpec s;
  s.family = Family::LogSquared;
  s.r = r;
  validate(s);
  return s;
}

WeightSpec stretched_exp(double r, double q) {
  WeightSpec s;
  s.family = Family::StretchedExp;
  s.r = r;
  s.q = q;
  validate(s);
  return s;
}

WeightSpec damped_stretched_exp(double r, double q, double p, bool regularize_log) {
  WeightSpec s;
  s.family = Family::DampedStretchedExp;
  s.r = r;
  s.q = q;
  s.p = p;
  s.regularize_log = regularize_log;
  validate(s);
  return s;
}

WeightSpec excluded_damped(double r, bool regularize_log) {
  WeightSpec s;
  s.family = Family::ExcludedDamped;
  s.r = r;
  s.q = 1.0;
  s.p = 1.0;
  s.regularize_log = regularize_log;
  validate(s);
  return s;
}

WeightSpec pure_exp(double r) {
  WeightSpec s;
  s.family = Family::PureExp;
  s.r = r;
  validate(s);
  return s;
}

WeightSpec rational_modulus(double r) {
  WeightSpec s;
  s.family = Family::RationalModulus;
  s.r = r;
  validate(s);
  return s;
}

WeightSpec custom_weight(std::function<double(double)> log_density,
                         std::shared_ptr<const SingularityProfile> profile) {
  WeightSpec s;
  s.family = Family::Custom;
  s.custom_log_density = std::move(log_density);
  s.custom_profile = std::move(profile);
  validate(s);
  return s;
}

WeightSpec even_extension(const WeightSpec& spec) {
  WeightSpec s = spec;
  s.domain = Domain::FullLineEven;
  return s;
}

WeightSpec make_rescaled(const WeightSpec& spec, double eps, double L) {
  if (!(eps > 0) || !std::isfinite(eps)) throw InputError("make_rescaled: eps must be positive");
  if (!(L > 0) || !std::isfinite(L)) throw InputError("make_rescaled: L must be positive");
  WeightSpec s = even_extension(spec);
  s.log_negative_scale = spec.log_negative_scale + std::log(eps) - std::log(L);
  return s;
}

double eval_log_weight(const WeightSpec& spec, double w) {
  if (std::isnan(w)) throw InputError("eval_log_weight: NaN argument");
  if (!spec.is_full_line()) {
    if (w < 0) throw InputError("eval_log_weight: w < 0 outside half-line domain");
    return half_line_log_density(spec, w);
  }
  double v = half_line_log_density(spec, std::abs(w));
  if (w < 0) v += spec.log_negative_scale;
  return v;
}

double log_density_over_w(const WeightSpec& spec, double v) {
  const double r = spec.r;
  const double emv = std::exp(-v);
  switch (spec.family) {
    case Family::LogSquared:
      return -r * v * v * emv;
    case Family::StretchedExp:
      return -r * std::exp((spec.q - 1) * v);
    case Family::PureExp:
      return -r;
    case Family::DampedStretchedExp:
    case Family::ExcludedDamped: {
      const bool excluded = spec.family == Family::ExcludedDamped;
      const double q = excluded ? 1.0 : spec.q;
      const double p = excluded ? 1.0 : spec.p;
      double l = std::abs(v);
      if (spec.regularize_log && l < 1) l = 1;
      return -r * std::exp((q - 1) * v) / std::pow(l, p);
    }
    case Family::RationalModulus:
      return -r * (2 * v + std::log1p(emv * emv)) * emv;
    case Family::Custom: {
      double w = std::exp(v);
      if (!std::isfinite(w)) return 0.0;
      return spec.custom_log_density(w) * emv;
    }
  }
  return 0.0;
}

SingularityProfile singularity_profile(const WeightSpec& spec) {
  SingularityProfile prof;
  switch (spec.family) {
    case Family::Custom:
      if (!spec.custom_profile)
        throw UnsupportedError("singularity_profile: custom weight without a profile");
      prof = *spec.custom_profile;
      break;
    case Family::LogSquared:
      prof.zero_endpoint = {ZeroBehavior::LogPower, 2.0};
      prof.tail_class = {TailKind::LogSquared, 0.0, 2.0};
      break;
    case Family::StretchedExp:
      prof.tail_class = {TailKind::Power, spec.q, 0.0};
      break;
    case Family::PureExp:
      prof.tail_class = {TailKind::Power, 1.0, 0.0};
      break;
    case Family::RationalModulus:
      prof.tail_class = {TailKind::Logarithmic, 0.0, 1.0};
      break;
    case Family::DampedStretchedExp:
    case Family::ExcludedDamped: {
      const bool excluded = spec.family == Family::ExcludedDamped;
      const double q = excluded ? 1.0 : spec.q;
      const double p = excluded ? 1.0 : spec.p;
      prof.tail_class = {TailKind::PowerLogDamped, q, -p};
      if (spec.regularize_log) {
        prof.breakpoints = {std::exp(-1.0), std::exp(1.0)};
      } else {
        // |log w| ~ |w - 1| near 1, so log rho ~ -r/|w-1|^p.
        prof.interior_points.push_back({1.0, p});
      }
      break;
    }
  }
  if (spec.is_full_line()) {
    std::vector<InteriorSingularity> mirrored;
    for (const auto& s : prof.interior_points) mirrored.push_back({-s.location, s.exponent});
    prof.interior_points.insert(prof.interior_points.end(), mirrored.begin(), mirrored.end());
    std::vector<double> bps = prof.breakpoints;
    for (double b : prof.breakpoints) bps.push_back(-b);
    bps.push_back(0.0);
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    prof.breakpoints = std::move(bps);
    std::sort(prof.interior_points.begin(), prof.interior_points.end(),
              [](const auto& a, const auto& b) { return a.location < b.location; });
  }
  return prof;
}

nlohmann::json to_json(const WeightSpec& spec) {
  if (spec.family == Family::Custom) throw UnsupportedError("custom weights are not serializable");
  return nlohmann::json{{"family", to_string(spec.family)},
                        {"r", spec.r},
                        {"q", spec.q},
                        {"p", spec.p},
                        {"domain", spec.domain == Domain::HalfLine ? "HalfLine" : "FullLineEven"},
                        {"regularize_log", spec.regularize_log}};
}

WeightSpec weight_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("weight spec must be a JSON object");
  static const std::set<std::string> known = {"family", "r", "q", "p", "domain", "regularize_log"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw InputError("weight spec: unknown field '" + key + "'");
  if (!j.contains("family")) throw InputError("weight spec: missing 'family'");

  auto number = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw InputError(std::string("weight spec: '") + key + "' must be a number");
    return j.at(key).get<double>();
  };

  WeightSpec s;
  if (!j.at("family").is_string()) throw InputError("weight spec: 'family' must be a string");
  s.family = family_from_string(j.at("family").get<std::string>());
  if (s.family == Family::Custom) throw UnsupportedError("custom weights cannot be read from JSON");
  s.r = number("r", 1.0);
  s.q = number("q", 1.0);
  s.p = number("p", 1.0);
  if (s.family == Family::ExcludedDamped) {
    s.q = 1.0;
    s.p = 1.0;
  }
  if (j.contains("domain")) {
    if (!j.at("domain").is_string()) throw InputError("weight spec: 'domain' must be a string");
    const auto d = j.at("domain").get<std::string>();
    if (d == "HalfLine") s.domain = Domain::HalfLine;
    else if (d == "FullLineEven") s.domain = Domain::FullLineEven;
    else throw InputError("weight spec: unknown domain '" + d + "'");
  }
  if (j.contains("regularize_log")) {
    if (!j.at("regularize_log").is_boolean())
      throw InputError("weight spec: 'regularize_log' must be a boolean");
    s.regularize_log = j.at("regularize_log").get<bool>();
  }
  validate(s);
  return s;
}

}  // namespace kreinlab
