#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "kreinlab/quad.hpp"

namespace kreinlab {

namespace {

struct LineFit {
  double slope = 0.0;
  double r2 = 0.0;
  double rms = 0.0;
  bool good = false;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, double r2_threshold) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  const double ssres = std::max(0.0, syy - f.slope * sxy);
  f.rms = std::sqrt(ssres / n);
  f.r2 = syy > 0 ? 1.0 - ssres / syy : 1.0;
  // A flat sequence has no variance to explain; a tiny residual is then the
  // meaningful criterion.
  f.good = f.r2 > r2_threshold || f.rms < 1e-4;
  return f;
}

int rate_rank(const ImproperClass& c) {
  if (c.convergent()) return 0;
  switch (c.rate) {
    case DivergenceRate::Power: return 3;
    case DivergenceRate::Log: return 2;
    case DivergenceRate::LogLog: return 1;
    case DivergenceRate::None: return 0;
  }
  return 0;
}

ImproperClass divergent(DivergenceRate rate, double exponent = 0.0) {
  ImproperClass c;
  c.status = ImproperStatus::Divergent;
  c.rate = rate;
  c.exponent = exponent;
  return c;
}

// |f| ~ w^power (log w)^log_power at infinity.
ImproperClass tail_verdict(const TailHint& t) {
  constexpr double eps = 1e-12;
  if (t.power < -1 - eps) return ImproperClass{};
  if (t.power > -1 + eps) return divergent(DivergenceRate::Power, t.power + 1);
  if (t.log_power < -1 - eps) return ImproperClass{};
  if (std::abs(t.log_power + 1) <= eps) return divergent(DivergenceRate::LogLog);
  // Partial integrals grow like (log B)^{log_power + 1}.
  return divergent(DivergenceRate::Log, t.log_power + 1);
}

// |f| ~ |w - location|^{-power} near the point.
ImproperClass point_verdict(const PointHint& p) {
  constexpr double eps = 1e-12;
  if (p.power < 1 - eps) return ImproperClass{};
  if (std::abs(p.power - 1) <= eps) return divergent(DivergenceRate::Log);
  return divergent(DivergenceRate::Power, p.power - 1);
}

double segment(const RealFn& f, double lo, double hi, std::span<const double> sing, const LadderOptions& opt) {
  if (hi <= lo) return 0.0;
  QuadOptions q;
  q.rel_tol = std::min(opt.tol, 1e-12);
  q.abs_tol = 1e-250;
  q.max_panels = 4000;
  try {
    return integrate_real(f, lo, hi, sing, q).value;
  } catch (const AccuracyError& e) {
    return e.best_estimate();
  }
}

// Decides a ladder from its increments. `bounds` grow geometrically.
ImproperClass judge(const std::vector<LadderRow>& rows, const LadderOptions& opt, const std::string& where) {
  const int n = static_cast<int>(rows.size());
  const int w = opt.fit_window;
  if (n < w + 1) throw InconclusiveError(where + ": ladder too short");
  std::vector<double> inc, lb, llb;
  double biggest = 0.0;
  int sign = 0;
  bool mixed = false;
  for (int i = n - w; i < n; ++i) {
    const double d = rows[i].partial - rows[i - 1].partial;
    inc.push_back(d);
    biggest = std::max(biggest, std::abs(d));
    const int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (s != 0) {
      if (sign != 0 && s != sign) mixed = true;
      sign = s;
    }
  }
  const double scale = std::max(1.0, std::abs(rows.back().partial));
  ImproperClass c;
  c.ladder = true;
  c.evidence = rows;
  if (biggest <= opt.tol * scale) {
    c.status = ImproperStatus::Convergent;
    c.value = rows.back().partial;
    c.note = where + ": increments below tolerance";
    return c;
  }
  if (mixed) throw InconclusiveError(where + ": ladder increments change sign");
  for (int i = 0; i < w; ++i) {
    if (inc[i] == 0.0) throw InconclusiveError(where + ": zero increment inside a non-negligible ladder");
    const double B = rows[n - w + i].bound;
    lb.push_back(std::log(B));
    llb.push_back(std::log(std::log(B)));
    inc[i] = std::log(std::abs(inc[i]));
  }
  const LineFit pw = fit_line(lb, inc, opt.r2_threshold);
  const LineFit ll = fit_line(llb, inc, opt.r2_threshold);
  std::ostringstream note;
  note.precision(6);
  note << where << ": power fit slope " << pw.slope << " R2 " << pw.r2 << "; loglog fit slope " << ll.slope
       << " R2 " << ll.r2;
  c.note = note.str();
  const bool use_pw = pw.good && (!ll.good || pw.rms <= ll.rms);
  const bool use_ll = ll.good && !use_pw;
  if (use_pw) {
    if (pw.slope > 0.02) {
      c.status = ImproperStatus::Divergent;
      c.rate = DivergenceRate::Power;
      c.exponent = pw.slope;
      return c;
    }
    if (pw.slope >= -0.02) {
      c.status = ImproperStatus::Divergent;
      c.rate = DivergenceRate::Log;
      return c;
    }
    c.status = ImproperStatus::Convergent;
    return c;
  }
  if (use_ll) {
    const double s = -ll.slope;
    if (std::abs(s) <= 0.1) {
      c.status = ImproperStatus::Divergent;
      c.rate = DivergenceRate::Log;
      return c;
    }
    if (s < -0.1) {
      c.status = ImproperStatus::Divergent;
      c.rate = DivergenceRate::Log;
      c.exponent = 1 - s;
      return c;
    }
    if (std::abs(s - 1) <= 0.1) {
      c.status = ImproperStatus::Divergent;
      c.rate = DivergenceRate::LogLog;
      return c;
    }
    if (s > 1.1) {
      c.status = ImproperStatus::Convergent;
      return c;
    }
  }
  throw InconclusiveError(c.note + ": no growth model fits");
}

ImproperClass tail_ladder(const RealFn& f, double start, std::span<const double> sing, const LadderOptions& opt) {
  std::vector<LadderRow> rows;
  double partial = 0.0;
  double lo = start;
  for (int k = 0; k <= opt.max_k; ++k) {
    const double B = std::max(opt.first_bound * std::ldexp(1.0, k), start + std::ldexp(1.0, k));
    partial += segment(f, lo, B, sing, opt);
    rows.push_back({k, B, partial});
    lo = B;
  }
  return judge(rows, opt, "tail");
}

// Two-sided approach to an interior point; the bound column is 1/distance.
ImproperClass point_ladder(const RealFn& f, double loc, double left, double right, std::span<const double> sing,
                           const LadderOptions& opt) {
  std::vector<LadderRow> rows;
  double partial = 0.0;
  double dl = loc - left, dr = right - loc;
  for (int k = 0; k <= opt.max_k; ++k) {
    const double B = opt.first_bound * std::ldexp(1.0, k);
    const double d = 1.0 / B;
    if (d < dl) partial += segment(f, loc - dl, loc - d, sing, opt), dl = d;
    if (d < dr) partial += segment(f, loc + d, loc + dr, sing, opt), dr = d;
    rows.push_back({k, B, partial});
  }
  std::ostringstream os;
  os << "point " << loc;
  return judge(rows, opt, os.str());
}

// Sum of increments beyond the last rung, from whichever growth model fits
// the last `window` increments better.
double extrapolated_tail(const std::vector<LadderRow>& rows, int window) {
  const int n = static_cast<int>(rows.size());
  std::vector<double> y, lb, llb;
  double sign = 0.0;
  for (int i = n - window; i < n; ++i) {
    const double d = rows[i].partial - rows[i - 1].partial;
    if (d == 0.0) return 0.0;
    sign = d > 0 ? 1.0 : -1.0;
    y.push_back(std::log(std::abs(d)));
    lb.push_back(std::log(rows[i].bound));
    llb.push_back(std::log(std::log(rows[i].bound)));
  }
  const LineFit pw = fit_line(lb, y, 0.999);
  const LineFit ll = fit_line(llb, y, 0.999);
  auto predict = [&](const std::vector<double>& x, const LineFit& f, double at) {
    double mx = 0, my = 0;
    for (size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= x.size();
    my /= x.size();
    return std::exp(my + f.slope * (at - mx));
  };
  const double LB = std::log(rows.back().bound);
  const double ln2 = std::log(2.0);
  if (pw.rms <= ll.rms && pw.slope < 0) {
    const double ratio = std::exp2(pw.slope);
    return sign * predict(lb, pw, LB) * ratio / (1 - ratio);
  }
  const double s = -ll.slope;
  if (s <= 1.0) return 0.0;
  // increments C (log B_j)^{-s}, summed by the midpoint integral over j > K
  const double C = predict(llb, ll, std::log(LB)) * std::pow(LB, s);
  return sign * C * std::pow(LB + 0.5 * ln2, 1 - s) / ((s - 1) * ln2);
}

bool same_verdict(const ImproperClass& a, const ImproperClass& b) {
  if (a.status != b.status) return false;
  if (a.convergent()) return true;
  if (a.rate != b.rate) return false;
  if (a.rate == DivergenceRate::Power) return std::abs(a.exponent - b.exponent) <= 0.1 * std::max(1.0, a.exponent);
  return true;
}

}  // namespace

std::optional<ImproperClass> classify_symbolic(const ClassifierHints& hints) {
  if (!hints.tail) return std::nullopt;
  ImproperClass worst = tail_verdict(*hints.tail);
  for (const auto& p : hints.points) {
    ImproperClass v = point_verdict(p);
    if (rate_rank(v) > rate_rank(worst)) worst = v;
  }
  worst.symbolic = true;
  return worst;
}

ImproperClass classify_ladder(const RealFn& f, double a, std::span<const double> singular_points,
                              const ClassifierHints& hints, const LadderOptions& opt) {
  std::vector<double> sing(singular_points.begin(), singular_points.end());
  sing.push_back(a);
  std::sort(sing.begin(), sing.end());
  sing.erase(std::unique(sing.begin(), sing.end()), sing.end());

  std::vector<double> sites;
  if (hints.tail || !hints.points.empty()) {
    for (const auto& p : hints.points)
      if (p.location > a) sites.push_back(p.location);
  } else {
    for (double s : sing)
      if (s > a) sites.push_back(s);
  }
  std::sort(sites.begin(), sites.end());

  ImproperClass worst;
  bool have = false;
  for (size_t i = 0; i < sites.size(); ++i) {
    const double loc = sites[i];
    const double left_gap = loc - (i == 0 ? a : sites[i - 1]);
    const double right_gap = (i + 1 < sites.size() ? sites[i + 1] - loc : 1.0);
    const double h = std::min({0.5 * left_gap, 0.5 * right_gap, 0.5});
    ImproperClass v = point_ladder(f, loc, loc - h, loc + h, sing, opt);
    if (!have || rate_rank(v) > rate_rank(worst)) worst = v, have = true;
  }
  const double start = sites.empty() ? a : sites.back() + 1.0;
  ImproperClass t = tail_ladder(f, start, sing, opt);
  if (!have || rate_rank(t) > rate_rank(worst) || (worst.convergent() && t.convergent())) worst = t;
  worst.ladder = true;
  return worst;
}

ImproperClass classify_improper(const RealFn& f, double a, std::span<const double> singular_points,
                                const ClassifierHints& hints, const LadderOptions& opt) {
  std::optional<ImproperClass> sym = classify_symbolic(hints);
  ImproperClass out;
  if (sym) {
    out = *sym;
    try {
      ImproperClass lad = classify_ladder(f, a, singular_points, hints, opt);
      out.ladder = true;
      out.evidence = lad.evidence;
      out.corroborated = same_verdict(*sym, lad);
      out.note = lad.note;
      if (!out.corroborated) out.note += "; ladder disagrees: " + to_string(lad);
    } catch (const InconclusiveError& e) {
      out.corroborated = false;
      out.note = std::string("ladder inconclusive: ") + e.what();
    }
  } else {
    out = classify_ladder(f, a, singular_points, hints, opt);
  }
  if (out.convergent()) {
    std::vector<double> sing(singular_points.begin(), singular_points.end());
    sing.push_back(a);
    QuadOptions q;
    q.rel_tol = opt.tol;
    q.abs_tol = opt.tol;
    try {
      out.value = integrate_real(f, a, std::numeric_limits<double>::infinity(), sing, q).value;
    } catch (const AccuracyError&) {
      // Slowly decaying tails (e.g. 1/(w log^2 w)) defeat truncation-based
      // quadrature; sum the fitted ladder increments beyond the last rung.
      if (out.evidence.size() < static_cast<size_t>(opt.fit_window) + 1) throw;
      const double B = out.evidence.back().bound;
      q.abs_tol = 1e-250;
      q.rel_tol = std::min(opt.tol, 1e-12);
      q.max_panels = 20000;
      double head;
      try {
        head = integrate_real(f, a, B, sing, q).value;
      } catch (const AccuracyError& e) {
        head = e.best_estimate();
      }
      const double tail = extrapolated_tail(out.evidence, opt.fit_window);
      out.value = head + tail;
      std::ostringstream os;
      os.precision(3);
      os << "; value uses a fitted tail beyond B=" << B << " of " << tail << " (accuracy limited by the fit)";
      out.note += os.str();
    }
  } else {
    out.value = 0.0;
  }
  return out;
}

std::string to_string(const ImproperClass& c) {
  char buf[64];
  if (c.convergent()) {
    std::snprintf(buf, sizeof buf, "Convergent(%.17g)", c.value);
    return buf;
  }
  switch (c.rate) {
    case DivergenceRate::Power:
      std::snprintf(buf, sizeof buf, "Divergent(Power(%.3g))", c.exponent);
      return buf;
    case DivergenceRate::Log: return "Divergent(Log)";
    case DivergenceRate::LogLog: return "Divergent(LogLog)";
    case DivergenceRate::None: break;
  }
  return "Divergent";
}

std::string evidence_csv(const ImproperClass& c) {
  std::string out = "k,B_k,partial\n";
  char buf[96];
  for (const auto& r : c.evidence) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", r.k, r.bound, r.partial);
    out += buf;
  }
  return out;
}

}  // namespace kreinlab
