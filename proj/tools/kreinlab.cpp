// kreinlab: batch front end.
//
//   kreinlab [command] [--config run.json] [--set key=value ...] [--out dir]
//
// Exit status: 0 success, 1 input error, 2 accuracy / inconclusive error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "kreinlab/approx.hpp"
#include "kreinlab/hardy.hpp"
#include "kreinlab/kernels.hpp"
#include "kreinlab/krein.hpp"
#include "kreinlab/orthopoly.hpp"

using namespace kreinlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kCommands{"classify", "moments", "errors", "outer", "certify", "demo"};

const std::set<std::string> kKeys{"command",       "weight",          "weights",      "T",
                                  "degrees",       "norm",            "output_dir",   "max_moment",
                                  "grid_n",        "samples_per_T",   "eps_fractions", "xi_target",
                                  "chain_tol",     "confirm_density", "tail_fraction", "delta_ladder",
                                  "csv_stride",    "omega_limit",     "t_limit"};

const std::set<std::string> kPositive{"T", "xi_target", "chain_tol", "tail_fraction", "omega_limit", "t_limit"};

struct Config {
  std::string command;
  std::vector<WeightSpec> weights;
  bool weights_listed = false;  // an explicit (possibly empty) 'weights' list
  double T = 1.0;
  std::vector<int> degrees;
  std::string norm = "both";
  fs::path out = ".";
  int max_moment = 20;
  CertificateParams cert;
  double tail_fraction = 1e-10;
  std::vector<double> delta_ladder{1e-2, 1e-3, 1e-4};
  long csv_stride = 0;  // 0: command default
  double omega_limit = 50.0;
  double t_limit = 20.0;
};

std::string fmt(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

// Outputs are staged in memory and written only after the command finished.
struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;
  void add(std::string name, std::string body) { files.emplace_back(std::move(name), std::move(body)); }

  void commit(const fs::path& dir) const {
    fs::create_directories(dir);
    for (const auto& [name, body] : files) {
      const fs::path final = dir / name, tmp = dir / (name + ".tmp");
      {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw InputError("cannot write " + tmp.string());
        f << body;
        if (!f.flush()) throw InputError("write failed: " + tmp.string());
      }
      fs::rename(tmp, final);
      std::cout << final.string() << "\n";
    }
  }
};

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;  // bare string
  }
}

void apply_set(json& cfg, const std::string& kv) {
  auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw InputError("--set expects key=value, got '" + kv + "'");
  std::string key = kv.substr(0, eq);
  json* node = &cfg;
  size_t start = 0;
  for (size_t dot; (dot = key.find('.', start)) != std::string::npos; start = dot + 1) {
    json& child = (*node)[key.substr(start, dot - start)];
    if (child.is_null()) child = json::object();
    if (!child.is_object()) throw InputError("--set: '" + key.substr(0, dot) + "' is not an object");
    node = &child;
  }
  (*node)[key.substr(start)] = parse_value(kv.substr(eq + 1));
}

template <class T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError("config: '" + key + "' has the wrong type");
  }
}

Config parse_config(const json& j) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  for (const auto& [k, _] : j.items())
    if (!kKeys.count(k)) throw InputError("config: unknown key '" + k + "'");
  for (const auto& k : kPositive)
    if (j.contains(k)) {
      if (!j.at(k).is_number()) throw InputError("config: '" + k + "' must be a number");
      if (!(j.at(k).get<double>() > 0)) throw InputError("config: '" + k + "' must be positive");
    }

  Config c;
  if (j.contains("command")) c.command = get_as<std::string>(j, "command");
  if (j.contains("weight")) c.weights.push_back(weight_from_json(j.at("weight")));
  if (j.contains("weights")) {
    if (!j.at("weights").is_array()) throw InputError("config: 'weights' must be a list");
    c.weights_listed = true;
    for (const auto& w : j.at("weights")) c.weights.push_back(weight_from_json(w));
  }
  if (j.contains("T")) c.T = get_as<double>(j, "T");
  if (j.contains("degrees")) {
    c.degrees = get_as<std::vector<int>>(j, "degrees");
    for (int d : c.degrees)
      if (d < 0) throw InputError("config: degrees must be nonnegative");
  }
  if (j.contains("norm")) {
    c.norm = get_as<std::string>(j, "norm");
    if (c.norm != "L1" && c.norm != "L2" && c.norm != "both") throw InputError("config: norm must be L1, L2 or both");
  }
  if (j.contains("output_dir")) c.out = get_as<std::string>(j, "output_dir");
  if (j.contains("max_moment")) {
    c.max_moment = get_as<int>(j, "max_moment");
    if (c.max_moment < 0) throw InputError("config: max_moment must be nonnegative");
  }
  if (j.contains("grid_n")) c.cert.n = get_as<long>(j, "grid_n");
  if (j.contains("samples_per_T")) c.cert.samples_per_T = get_as<int>(j, "samples_per_T");
  if (j.contains("eps_fractions")) {
    c.cert.eps_fractions = get_as<std::vector<double>>(j, "eps_fractions");
    for (double f : c.cert.eps_fractions)
      if (!(f > 0 && f < 0.5)) throw InputError("config: eps_fractions must lie in (0, 1/2)");
  }
  if (j.contains("xi_target")) c.cert.xi_target = get_as<double>(j, "xi_target");
  if (j.contains("chain_tol")) c.cert.chain_tol = get_as<double>(j, "chain_tol");
  if (j.contains("confirm_density")) c.cert.confirm_density = get_as<bool>(j, "confirm_density");
  if (j.contains("tail_fraction")) c.tail_fraction = get_as<double>(j, "tail_fraction");
  if (j.contains("delta_ladder")) {
    c.delta_ladder = get_as<std::vector<double>>(j, "delta_ladder");
    for (double d : c.delta_ladder)
      if (!(d > 0)) throw InputError("config: delta_ladder entries must be positive");
  }
  if (j.contains("csv_stride")) {
    c.csv_stride = get_as<long>(j, "csv_stride");
    if (c.csv_stride < 1) throw InputError("config: csv_stride must be positive");
  }
  if (j.contains("omega_limit")) c.omega_limit = get_as<double>(j, "omega_limit");
  if (j.contains("t_limit")) c.t_limit = get_as<double>(j, "t_limit");
  return c;
}

const WeightSpec& single_weight(const Config& c) {
  if (c.weights.size() != 1) throw InputError("command '" + c.command + "' needs exactly one 'weight'");
  return c.weights.front();
}

std::string slug(const WeightSpec& w) {
  std::string s;
  for (char ch : w.name()) {
    if (std::isalnum(static_cast<unsigned char>(ch))) s += static_cast<char>(std::tolower(ch));
    else if (!s.empty() && s.back() != '_') s += '_';
  }
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s;
}

// ---------------------------------------------------------------------------

void run_classify(const Config& c, Artifacts& out) {
  if (c.weights.empty() && !c.weights_listed) throw InputError("classify needs 'weight' or 'weights'");
  std::string csv = krein_csv_header() + "\n";
  for (const auto& w : c.weights) csv += krein_csv_row(classify_weight(w, c.max_moment)) + "\n";
  out.add("classify.csv", csv);
}

void run_moments(const Config& c, Artifacts& out) {
  const auto& w = single_weight(c);
  std::string csv = "k,log_moment\n";
  for (int k = 0; k <= c.max_moment; ++k) csv += std::to_string(k) + "," + fmt(log_moment(w, k)) + "\n";
  out.add("moments.csv", csv);
  const int n = c.degrees.empty() ? 20 : *std::max_element(c.degrees.begin(), c.degrees.end()) + 1;
  auto table = recurrence(w, n);
  out.add("recurrence.csv", recurrence_csv(table));
  auto rule = gauss_rule(table, n);
  std::string g = "node,weight\n";
  for (size_t i = 0; i < rule.nodes.size(); ++i) g += fmt(rule.nodes[i]) + "," + fmt(rule.weights[i]) + "\n";
  out.add("gauss_rule.csv", g);
}

std::string error_curve_csv(const WeightSpec& w, double T, const std::vector<int>& degrees, const std::string& norm) {
  std::vector<int> ds = degrees;
  std::sort(ds.begin(), ds.end());
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
  std::vector<CurvePoint> l1, l2;
  if (norm != "L2") l1 = error_curve(w, T, ds, Norm::L1);
  if (norm != "L1") l2 = error_curve(w, T, ds, Norm::L2);
  std::string csv = "d,eps_l1,eps_l2\n";
  for (size_t i = 0; i < ds.size(); ++i)
    csv += std::to_string(ds[i]) + "," + (l1.empty() ? "" : fmt(l1[i].eps)) + "," + (l2.empty() ? "" : fmt(l2[i].eps)) +
           "\n";
  return csv;
}

void run_errors(const Config& c, Artifacts& out) {
  if (c.weights.empty()) throw InputError("errors needs 'weight' or 'weights'");
  std::vector<int> ds = c.degrees;
  if (ds.empty())
    for (int d = 0; d <= 16; ++d) ds.push_back(d);
  for (const auto& w : c.weights) out.add("errors_" + slug(w) + ".csv", error_curve_csv(w, c.T, ds, c.norm));
}

void run_outer(const Config& c, Artifacts& out) {
  WeightSpec w = single_weight(c);
  if (!w.is_full_line()) w = even_extension(w);
  auto o = outer_for_weight(w);
  auto grid = default_grid(o, c.cert.n == CertificateParams{}.n ? 1L << 18 : c.cert.n, 0.0, c.tail_fraction);
  auto bs = boundary_samples(o, grid);
  auto x = inverse_fourier(bs, c.tail_fraction);

  std::vector<double> omegas;
  for (double v = -4.0; v <= 4.0 + 1e-12; v += 0.5) omegas.push_back(v + 0.05);
  auto chk = boundary_modulus_check(o, omegas, c.delta_ladder);
  std::string bc = "delta,omega,rel_dev\n";
  for (size_t k = 0; k < chk.deltas.size(); ++k)
    for (size_t j = 0; j < omegas.size(); ++j)
      bc += fmt(chk.deltas[k]) + "," + fmt(omegas[j]) + "," + fmt(chk.rel_dev[k][j]) + "\n";

  const long stride = c.csv_stride ? c.csv_stride : 16;
  std::string xs = "t,re_x,im_x\n";
  for (long m = 0; m < x.n; m += stride) {
    double t = x.time(m);
    if (std::abs(t) > c.t_limit) continue;
    xs += fmt(t) + "," + fmt(x.samples[m].real()) + "," + fmt(x.samples[m].imag()) + "\n";
  }

  json s;
  s["weight"] = w.name();
  s["n"] = grid.n;
  s["omega_max"] = grid.omega_max();
  s["dt"] = grid.dt();
  s["delta_min"] = o.delta_min;
  s["causality_defect"] = causality_defect(x);
  s["max_rel_deviation"] = chk.max_rel_deviation;
  s["extrapolated_deviation"] = chk.extrapolated_deviation;
  s["monotone"] = chk.monotone;
  s["files"] = {{"boundary", "boundary.csv"}, {"ladder", "boundary_check.csv"}, {"x", "x.csv"}};
  out.add("boundary.csv", boundary_csv(bs, stride, c.omega_limit));
  out.add("boundary_check.csv", bc);
  out.add("x.csv", xs);
  out.add("outer.json", s.dump(2) + "\n");
}

void certify_one(const WeightSpec& w, double T, int d, const std::string& norm, const Config& c, Artifacts& out) {
  PolyApproximant psi = norm == "L1" ? best_l1(w, T, d, resolving_rule(w, T, d)) : best_l2(w, T, d);
  CertificateArtifacts art;
  auto r = certificate(w, psi, T, c.cert, &art);
  const std::string base = "certificate_d" + std::to_string(d);
  const long stride = c.csv_stride ? c.csv_stride : 4;

  std::string ys = "t,re_y,im_y,re_y_hat,im_y_hat\n";
  const auto& yh = art.hy.y_hat;
  for (long m = 0; m < yh.n; m += stride) {
    double t = yh.time(m);
    if (std::abs(t) > c.t_limit * T) continue;
    ys += fmt(t) + "," + fmt(art.hy.y[m].real()) + "," + fmt(art.hy.y[m].imag()) + "," + fmt(yh.samples[m].real()) +
          "," + fmt(yh.samples[m].imag()) + "\n";
  }
  json j = to_json(r);
  j["norm"] = norm == "L1" ? "L1" : "L2";
  j["files"] = {{"y", base + "_y.csv"}, {"y_hat", base + "_y.csv"}, {"X", base + "_X.csv"}};
  out.add(base + ".json", j.dump(2) + "\n");
  out.add(base + "_y.csv", ys);
  out.add(base + "_X.csv", boundary_csv(art.X, stride, c.omega_limit));
}

void run_certify(const Config& c, Artifacts& out) {
  const auto& w = single_weight(c);
  if (c.degrees.empty()) throw InputError("certify needs 'degrees'");
  for (int d : c.degrees) certify_one(w, c.T, d, c.norm == "L1" ? "L1" : "L2", c, out);
}

void run_demo(const Config& c, Artifacts& out) {
  std::vector<int> ds = c.degrees;
  if (ds.empty())
    for (int d = 2; d <= 16; d += 2) ds.push_back(d);
  const auto a = pure_exp(1), b = stretched_exp(1, 0.5);
  out.add("errors_" + slug(a) + ".csv", error_curve_csv(a, c.T, ds, c.norm));
  out.add("errors_" + slug(b) + ".csv", error_curve_csv(b, c.T, ds, c.norm));
  certify_one(b, c.T, 4, "L2", c, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kreinlab: Krein conditions, weighted approximation of e^{iwT} and inequality-chain certificates"};
  std::string command, config_path, out_dir;
  std::vector<std::string> sets;
  app.add_option("command", command, "classify | moments | errors | outer | certify | demo");
  app.add_option("--config", config_path, "JSON run config");
  app.add_option("--set", sets, "override a config key (key=value, value parsed as JSON)");
  app.add_option("--out", out_dir, "output directory");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    json cfg = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw InputError("cannot read config " + config_path);
      try {
        cfg = json::parse(f);
      } catch (const json::parse_error& e) {
        throw InputError(std::string("config is not valid JSON: ") + e.what());
      }
    }
    for (const auto& s : sets) apply_set(cfg, s);
    if (!command.empty()) cfg["command"] = command;
    if (!out_dir.empty()) cfg["output_dir"] = out_dir;
    Config c = parse_config(cfg);
    if (c.command.empty()) throw InputError("no command given");
    if (!kCommands.count(c.command)) throw InputError("unknown command '" + c.command + "'");

    Artifacts out;
    if (c.command == "classify") run_classify(c, out);
    else if (c.command == "moments") run_moments(c, out);
    else if (c.command == "errors") run_errors(c, out);
    else if (c.command == "outer") run_outer(c, out);
    else if (c.command == "certify") run_certify(c, out);
    else run_demo(c, out);
    out.commit(c.out);
    return 0;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return 1;
  } catch (const AccuracyError& e) {
    std::cerr << "accuracy error: " << e.what() << " (best estimate " << e.best_estimate() << ")\n";
    return 2;
  } catch (const InconclusiveError& e) {
    std::cerr << "inconclusive: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
