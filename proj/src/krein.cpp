#include "kreinlab/krein.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace kreinlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> positive_split_points(const SingularityProfile& prof) {
  std::vector<double> pts;
  for (const auto& s : prof.interior_points)
    if (s.location > 0) pts.push_back(s.location);
  for (double b : prof.breakpoints)
    if (b > 0) pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// Families and parameter ranges that the printed catalog places in R+.
bool listed_in_R_plus(const WeightSpec& s) {
  switch (s.family) {
    case Family::LogSquared: return true;
    case Family::StretchedExp: return s.q > 0 && s.q <= 1;
    case Family::DampedStretchedExp: return s.q > 0 && s.q <= 1 && s.p >= 2;
    default: return false;
  }
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_string(KreinVariant v) {
  switch (v) {
    case KreinVariant::K0: return "K0";
    case KreinVariant::K1: return "K1";
    case KreinVariant::K2: return "K2";
  }
  return "?";
}

ClassifierHints krein_hints(const SingularityProfile& prof, KreinVariant variant) {
  ClassifierHints h;
  const auto& t = prof.tail_class;
  // -log rho ~ w^g (log w)^l, so the integrand behaves like w^{g-2} (K0, K2)
  // or w^{g-3/2} (K1) times (log w)^l.
  const double g = (t.kind == TailKind::LogSquared || t.kind == TailKind::Logarithmic) ? 0.0 : t.growth_power;
  h.tail = TailHint{g - (variant == KreinVariant::K1 ? 1.5 : 2.0), t.log_power};
  for (const auto& s : prof.interior_points)
    if (s.location > 0) h.points.push_back({s.location, s.exponent});
  return h;
}

ImproperClass krein_value(const WeightSpec& spec, KreinVariant variant, const LadderOptions& opt) {
  validate(spec);
  const SingularityProfile prof = singularity_profile(spec);
  const std::vector<double> pts = positive_split_points(prof);
  RealFn f;
  switch (variant) {
    case KreinVariant::K0: {
      if (!spec.is_full_line()) throw InputError("K0 needs a full-line weight");
      const double shift = spec.log_negative_scale;
      // log rho(w) + log rho(-w) folded onto w >= 0
      f = [spec, shift](double w) { return (2.0 * half_line_log_density(spec, w) + shift) / (1.0 + w * w); };
      break;
    }
    case KreinVariant::K1:
      f = [spec](double w) { return half_line_log_density(spec, w) / ((1.0 + w) * std::sqrt(w)); };
      break;
    case KreinVariant::K2:
      f = [spec](double w) { return half_line_log_density(spec, w) / (1.0 + w * w); };
      break;
  }
  return classify_improper(f, 0.0, pts, krein_hints(prof, variant), opt);
}

bool all_moments_finite(const SingularityProfile& prof) {
  const auto& t = prof.tail_class;
  switch (t.kind) {
    case TailKind::Power:
    case TailKind::PowerLogDamped: return t.growth_power > 0;
    case TailKind::LogSquared: return true;
    case TailKind::Logarithmic: return false;
  }
  return false;
}

double log_moment(const WeightSpec& spec, int k) {
  if (k < 0) throw InputError("log_moment: negative order");
  // In x = log w the moment is int exp(phi(x)) dx with
  // phi(x) = (k + 1) x + log rho(e^x).
  auto phi = [&](double x) { return (k + 1) * x + half_line_log_density(spec, std::exp(x)); };
  const double lo = -60.0, hi = 700.0, step = 0.05;
  const int n = static_cast<int>((hi - lo) / step);
  double best = -kInf, xbest = lo;
  int ibest = 0;
  std::vector<double> tail;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * step;
    const double v = phi(x);
    if (v > best) best = v, xbest = x, ibest = i;
    if (i > n - 10) tail.push_back(v);
  }
  if (!std::isfinite(best)) throw NumericError("log_moment: log-density is -inf everywhere");
  if (ibest >= n - 10 || tail.back() >= tail.front()) return kInf;

  std::vector<double> split{xbest};
  for (double p : positive_split_points(singularity_profile(spec))) split.push_back(std::log(p));
  QuadOptions opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 1e-14;
  auto g = [&](double x) {
    const double v = phi(x) - best;
    return std::isnan(v) ? 0.0 : std::exp(v);
  };
  const double I = integrate_real(g, -kInf, kInf, split, opt).value;
  return best + std::log(I);
}

KreinReport classify_weight(const WeightSpec& spec, int max_moment) {
  if (max_moment < 0) throw InputError("classify_weight: max_moment must be >= 0");
  validate(spec);
  KreinReport rep;
  rep.weight = spec;
  rep.k0 = krein_value(spec.is_full_line() ? spec : even_extension(spec), KreinVariant::K0);
  rep.k1 = krein_value(spec, KreinVariant::K1);
  rep.k2 = krein_value(spec, KreinVariant::K2);

  const SingularityProfile prof = singularity_profile(spec);
  bool numeric_ok = true;
  for (int k = 0; k <= max_moment; ++k) {
    const double lm = log_moment(spec, k);
    rep.log_moments.push_back(lm);
    if (!std::isfinite(lm)) numeric_ok = false;
  }
  rep.max_moment_checked = max_moment;
  const bool symbolic_ok = all_moments_finite(prof);
  rep.moments_finite = symbolic_ok && numeric_ok;
  if (symbolic_ok && !numeric_ok)
    rep.erratum_flags.push_back("moment spot-check diverges although the tail class implies finite moments");
  rep.in_R_plus = rep.moments_finite && rep.k2.convergent();

  const bool unregularized = (spec.family == Family::DampedStretchedExp || spec.family == Family::ExcludedDamped) &&
                             !spec.regularize_log;
  if (unregularized)
    rep.erratum_flags.push_back(
        "unregularized |log w| damping vanishes at w=1 where log rho ~ -r/|w-1|^p; K2 diverges there");
  if (spec.family == Family::StretchedExp && spec.q == 1.0 && !rep.k2.convergent())
    rep.erratum_flags.push_back("q=1 lies in the printed range q in (0,1] but K2 diverges (int w/(1+w^2) = inf)");
  else if (listed_in_R_plus(spec) && !rep.in_R_plus && !unregularized)
    rep.erratum_flags.push_back("listed in R+ by the catalog but classified outside R+");
  if (spec.family == Family::ExcludedDamped && rep.in_R_plus)
    rep.erratum_flags.push_back("catalog excludes this weight but it classifies inside R+");
  for (const ImproperClass* c : {&rep.k0, &rep.k1, &rep.k2})
    if (c->symbolic && c->ladder && !c->corroborated)
      rep.erratum_flags.push_back("symbolic and ladder classifications disagree: " + c->note);
  return rep;
}

std::string krein_csv_header() { return "family,params,K0,K1,K2,in_R_plus,erratum_flags"; }

std::string krein_csv_row(const KreinReport& r) {
  char params[160];
  std::snprintf(params, sizeof params, "r=%.17g;q=%.17g;p=%.17g;regularize_log=%d", r.weight.r, r.weight.q,
                r.weight.p, r.weight.regularize_log ? 1 : 0);
  std::string flags;
  for (const auto& f : r.erratum_flags) flags += (flags.empty() ? "" : "; ") + f;
  return csv_quote(to_string(r.weight.family)) + "," + csv_quote(params) + "," + csv_quote(to_string(r.k0)) + "," +
         csv_quote(to_string(r.k1)) + "," + csv_quote(to_string(r.k2)) + "," + (r.in_R_plus ? "true" : "false") +
         "," + csv_quote(flags);
}

}  // namespace kreinlab
