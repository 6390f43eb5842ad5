#pragma once

// Experiment driver: `vyoung <experiment> [flags]`. Writes a CSV table to
// --out and prints one summary line
//   <experiment> <PASS|FAIL> <metric>=<value> threshold=<value>
// Exit codes: 0 pass, 1 threshold failure, 2 usage or configuration error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vyoung/catalog.hpp"
#include "vyoung/covariance.hpp"
#include "vyoung/integrator.hpp"
#include "vyoung/kernels.hpp"
#include "vyoung/operators.hpp"
#include "vyoung/regularity.hpp"

namespace vyoung::cli {

inline const std::vector<std::string>& experiments() {
  static const std::vector<std::string> e = {"covariance-check", "kstar",          "identity",
                                             "iterated-identity", "l2-convergence", "pvar",
                                             "holder-fit",        "young-ineq"};
  return e;
}

struct ExperimentConfig {
  std::string experiment;
  std::string kernel_id = "rl:H=0.5";
  std::string integrand_id;
  std::string integrand2_id = "const:1";
  std::string function_id;
  std::string covariance_id;  ///< lhs integrator of identity; default kernel:<kernel>
  std::string integrator_id = "min";
  std::string form = "diagonal";
  double T = 1.0;
  std::vector<int> schedule;  ///< empty: experiment default
  int grid = 0;               ///< 0: experiment default
  double p = 1.0;
  double q = 1.0;
  std::optional<double> expect;
  std::optional<double> tol;
  QuadratureScheme cov_quad;
  SingularQuad quad;
  bool quad_lambda_set = false;
  std::string out;
  unsigned threads = 0;
};

/// Error in the configuration or arguments; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParseResult {
  std::optional<ExperimentConfig> config;  ///< empty when the run should stop
  int exit_code = 0;
};

namespace detail {

// Keys accepted in config files and (with a leading --) on the command line.
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> k = {
      "experiment", "kernel",      "integrand",   "integrand2", "function",    "covariance",
      "integrator", "form",        "T",           "schedule",   "grid",        "p",
      "q",          "expect",      "tol",         "out",        "threads",     "quad-panels",
      "quad-points", "quad-grading", "quad-lambda", "cov-panels", "cov-points", "cov-grading",
      "cov-tol"};
  return k;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Flat key=value file; '#' starts a comment line.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  const auto& keys = config_keys();
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    return vyoung::detail::parse_number(v, key);
  } catch (const CatalogError&) {
    throw UsageError("invalid number for " + key + ": '" + v + "'");
  }
}

inline int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw UsageError("invalid integer for " + key);
  return static_cast<int>(d);
}

inline std::vector<int> to_schedule(const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const int n = to_int("schedule", trim(item));
    if (n < 1) throw UsageError("schedule entries must be >= 1");
    out.push_back(n);
  }
  if (out.empty()) throw UsageError("empty schedule");
  return out;
}

inline ExperimentConfig build_config(const std::map<std::string, std::string>& kv) {
  ExperimentConfig c;
  auto get = [&](const char* k) -> const std::string* {
    const auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto v = get("experiment")) c.experiment = *v;
  if (c.experiment.empty()) throw UsageError("no experiment given");
  const auto& ex = experiments();
  if (std::find(ex.begin(), ex.end(), c.experiment) == ex.end())
    throw UsageError("unknown experiment '" + c.experiment + "'");
  if (auto v = get("kernel")) c.kernel_id = *v;
  if (auto v = get("integrand")) c.integrand_id = *v;
  if (auto v = get("integrand2")) c.integrand2_id = *v;
  if (auto v = get("function")) c.function_id = *v;
  if (auto v = get("covariance")) c.covariance_id = *v;
  if (auto v = get("integrator")) c.integrator_id = *v;
  if (auto v = get("form")) {
    if (*v != "diagonal" && *v != "product") throw UsageError("form must be diagonal or product");
    c.form = *v;
  }
  if (auto v = get("T")) c.T = to_double("T", *v);
  if (!(c.T > 0.0)) throw UsageError("T must be > 0");
  if (auto v = get("schedule")) c.schedule = to_schedule(*v);
  if (auto v = get("grid")) c.grid = to_int("grid", *v);
  if (c.grid < 0) throw UsageError("grid must be >= 1");
  if (auto v = get("p")) c.p = to_double("p", *v);
  if (auto v = get("q")) c.q = to_double("q", *v);
  if (auto v = get("expect")) c.expect = to_double("expect", *v);
  if (auto v = get("tol")) c.tol = to_double("tol", *v);
  if (auto v = get("out")) c.out = *v;
  if (auto v = get("threads")) {
    const int t = to_int("threads", *v);
    if (t < 0) throw UsageError("threads must be >= 0");
    c.threads = static_cast<unsigned>(t);
  }
  if (auto v = get("quad-panels")) c.quad.panels = to_int("quad-panels", *v);
  if (auto v = get("quad-points")) c.quad.points_per_panel = to_int("quad-points", *v);
  if (auto v = get("quad-grading")) c.quad.grading_exponent = to_double("quad-grading", *v);
  if (auto v = get("quad-lambda")) {
    c.quad.holder_lambda_hint = to_double("quad-lambda", *v);
    c.quad_lambda_set = true;
  }
  if (auto v = get("cov-panels")) c.cov_quad.panels = to_int("cov-panels", *v);
  if (auto v = get("cov-points")) c.cov_quad.points_per_panel = to_int("cov-points", *v);
  if (auto v = get("cov-grading")) c.cov_quad.grading_exponent = to_double("cov-grading", *v);
  if (auto v = get("cov-tol")) c.cov_quad.abs_tol = to_double("cov-tol", *v);
  try {
    c.quad.validate();
    c.cov_quad.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  // Resolve every referenced id now so bad ids fail as usage errors.
  try {
    make_kernel(c.kernel_id, c.T);
    if (!c.integrand_id.empty()) make_function_2d(c.integrand_id);
    make_function_2d(c.integrand2_id);
    if (!c.function_id.empty() && !is_function_2d(c.function_id)) make_function_1d(c.function_id);
    if (!c.covariance_id.empty()) make_covariance(c.covariance_id, c.T, c.cov_quad);
    if (c.experiment == "young-ineq") make_integrator(c.integrator_id, c.T, c.cov_quad);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return c;
}

inline std::string usage_text() {
  std::string s =
      "usage: vyoung <experiment> [--kernel ID] [--integrand ID] [--function ID] [--T X]\n"
      "              [--schedule n1,n2,...] [--grid N] [--tol X] [--out PATH]\n"
      "              [--threads N] [--config FILE] [--list]\n"
      "experiments:";
  for (const auto& e : experiments()) s += " " + e;
  return s + "\n";
}

inline std::string catalog_text() {
  std::string s = "experiments:\n";
  for (const auto& e : experiments()) s += "  " + e + "\n";
  auto add = [&](const char* title, const std::vector<std::string>& ids) {
    s += title;
    for (const auto& id : ids) s += "  " + id + "\n";
  };
  add("kernels:\n", kernel_catalog());
  add("covariances:\n", covariance_catalog());
  add("functions (1D):\n", function1d_catalog());
  add("functions (2D):\n", function2d_catalog());
  return s;
}

}  // namespace detail

/// Parses command-line arguments (without the program name). A --config file
/// supplies defaults; flags given on the command line override it.
inline ParseResult parse_config(const std::vector<std::string>& args, std::ostream& out = std::cout,
                                std::ostream& err = std::cerr) {
  if (args.empty()) {
    err << detail::usage_text();
    return {std::nullopt, 2};
  }
  CLI::App app{"vyoung"};
  std::map<std::string, std::string> flags;
  std::string experiment, config_path;
  bool list = false;
  app.add_option("experiment", experiment, "experiment id");
  app.add_option("--config", config_path, "flat key=value config file");
  app.add_flag("--list", list, "list experiments and catalog ids");
  std::map<std::string, CLI::Option*> opts;
  for (const auto& key : detail::config_keys()) {
    if (key == "experiment") continue;
    opts[key] = app.add_option("--" + key, flags[key]);
  }
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << detail::usage_text();
    return {std::nullopt, 0};
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << detail::usage_text();
    return {std::nullopt, 2};
  }
  if (list) {
    out << detail::catalog_text();
    return {std::nullopt, 0};
  }
  try {
    std::map<std::string, std::string> kv;
    if (!config_path.empty()) kv = detail::read_config_file(config_path);
    for (const auto& [key, opt] : opts)
      if (opt->count() > 0) kv[key] = flags[key];
    if (!experiment.empty()) kv["experiment"] = experiment;
    return {detail::build_config(kv), 0};
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << detail::catalog_text();
    return {std::nullopt, 2};
  }
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string fmt6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) { line(header); }
  void row(const std::vector<double>& xs) {
    std::vector<std::string> s;
    for (double x : xs) s.push_back(fmt17(x));
    line(s);
  }
  void row(const std::vector<std::string>& xs) { line(xs); }
  const std::string& text() const { return text_; }

 private:
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
    text_ += "\n";
  }
  std::string text_;
};

struct Outcome {
  bool pass = false;
  std::string metric;
  double value = 0.0;
  std::string threshold;
  Csv csv{{}};
};

inline double local_rate(double m0, double y0, double m1, double y1) {
  if (!(y0 > 0.0 && y1 > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log(y1 / y0) / std::log(m1 / m0);
}

/// mesh,value,delta,rate; rate is the local slope of |delta| (by_value: of value).
inline void add_report(Csv& csv, const ConvergenceReport& r, bool by_value,
                       const std::string& series = "") {
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    double rate = std::numeric_limits<double>::quiet_NaN();
    if (i > 0) {
      const auto& a = r.rows[i - 1];
      const auto& b = r.rows[i];
      rate = by_value ? local_rate(a.mesh, std::abs(a.value), b.mesh, std::abs(b.value))
                      : local_rate(a.mesh, std::abs(a.delta), b.mesh, std::abs(b.delta));
    }
    std::vector<std::string> cells;
    if (!series.empty()) cells.push_back(series);
    for (double x : {r.rows[i].mesh, r.rows[i].value, r.rows[i].delta, rate})
      cells.push_back(fmt17(x));
    csv.row(cells);
  }
}

inline double kernel_hurst(const std::string& id) {
  const auto eq = id.find("H=");
  return vyoung::detail::parse_number(std::string_view(id).substr(eq + 2), id);
}

inline SingularQuad quad_for(const ExperimentConfig& c, double lambda) {
  SingularQuad q = c.quad;
  if (!c.quad_lambda_set) q.holder_lambda_hint = lambda;
  return q;
}

inline Outcome run_covariance_check(const ExperimentConfig& c) {
  const auto k = make_kernel(c.kernel_id, c.T);
  const double H = kernel_hurst(c.kernel_id);
  const bool fbm = c.kernel_id.rfind("fbm:", 0) == 0;
  const int n = c.grid > 0 ? c.grid : 6;
  Outcome o;
  o.csv = Csv({"s", "t", "kernel_covariance", "closed_form", "rel_err"});
  double worst = 0.0;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      const double s = c.T * i / n, t = c.T * j / n;
      const double kc = kernel_covariance(k, s, t, c.cov_quad);
      const double ref = fbm ? fbm_covariance(H, s, t) : rl_covariance(H, s, t);
      const double rel = std::abs(kc - ref) / std::max(std::abs(ref), 0.01);
      worst = std::max(worst, rel);
      o.csv.row({s, t, kc, ref, rel});
    }
  const double thr = c.tol.value_or(1e-3);
  o.metric = "max_rel_err";
  o.value = worst;
  o.threshold = fmt6(thr);
  o.pass = worst <= thr;
  return o;
}

inline Outcome run_kstar(const ExperimentConfig& c) {
  const auto k = make_kernel(c.kernel_id, c.T);
  const auto f = make_function_1d(c.function_id.empty() ? "id" : c.function_id);
  const auto q = quad_for(c, f.holder);
  const int n = c.grid > 0 ? c.grid : 8;
  Outcome o;
  o.csv = Csv({"s", "value", "error"});
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = c.T * (i + 0.5) / n;
    const auto r = kstar_apply_with_error(k, f, s, q);
    worst = std::max(worst, r.error);
    o.csv.row({s, r.value, r.error});
  }
  const double thr = c.tol.value_or(1e-6);
  o.metric = "max_error";
  o.value = worst;
  o.threshold = fmt6(thr);
  o.pass = worst <= thr;
  return o;
}

inline IdentityOptions identity_options(const ExperimentConfig& c) {
  IdentityOptions io;
  if (!c.schedule.empty()) io.schedule = c.schedule;
  if (!c.covariance_id.empty()) io.covariance = make_covariance(c.covariance_id, c.T, c.cov_quad);
  io.cov_quad = c.cov_quad;
  io.threads = Threads{c.threads};
  return io;
}

inline Outcome identity_outcome(const IdentityResidual& r, double thr) {
  Outcome o;
  o.csv = Csv({"lhs", "rhs", "abs_residual", "rel_residual"});
  o.csv.row({r.lhs, r.rhs, r.abs_residual, r.rel_residual});
  o.metric = "rel_residual";
  o.value = r.rel_residual;
  o.threshold = fmt6(thr);
  o.pass = r.rel_residual <= thr;
  return o;
}

inline Outcome run_identity(const ExperimentConfig& c) {
  const auto k = make_kernel(c.kernel_id, c.T);
  const auto phi = make_function_2d(c.integrand_id.empty() ? "prod:s,t" : c.integrand_id);
  const auto q = quad_for(c, phi.holder);
  const auto io = identity_options(c);
  IdentityResidual r;
  if (c.form == "product") {
    if (!phi.factors) throw UsageError("form=product needs a prod: integrand");
    r = product_identity(k, phi.factors->first, phi.factors->second, q, io);
  } else {
    r = diagonal_identity(k, phi, q, io);
  }
  return identity_outcome(r, c.tol.value_or(1e-2));
}

inline Outcome run_iterated(const ExperimentConfig& c) {
  const auto k = make_kernel(c.kernel_id, c.T);
  const auto p1 = make_function_2d(c.integrand_id.empty() ? "prod:s,t" : c.integrand_id);
  const auto p2 = make_function_2d(c.integrand2_id);
  const auto q = quad_for(c, std::min(p1.holder, p2.holder));
  const int n = c.grid > 0 ? c.grid : 48;
  const auto r = iterated_identity(k, p1, p2, n, q, identity_options(c));
  if (r.capped) std::cerr << "note: 4-fold sum capped at n=" << IdentityOptions{}.fourfold_cap << "\n";
  return identity_outcome(r, c.tol.value_or(5e-2));
}

inline Outcome run_l2(const ExperimentConfig& c) {
  const auto k = make_kernel(c.kernel_id, c.T);
  L2Options lo;
  lo.threads = Threads{c.threads};
  Outcome o;
  if (!c.function_id.empty()) {
    const auto f = make_function_1d(c.function_id);
    const std::vector<int> ns = c.schedule.empty() ? std::vector<int>{32, 64, 128, 256} : c.schedule;
    const auto rep = l2_convergence_1d(k, f, ns, quad_for(c, f.holder), lo);
    o.csv = Csv({"mesh", "value", "delta", "rate"});
    add_report(o.csv, rep, true);
    const double thr = c.expect.value_or(2.0 * (f.holder - k.alpha()) - 0.2);
    o.metric = "fitted_rate";
    o.value = rep.fitted_rate;
    o.threshold = fmt6(thr);
    o.pass = rep.fitted_rate >= thr;
    return o;
  }
  const auto psi = make_function_2d(c.integrand_id.empty() ? "prod:pow:0.8,pow:0.8" : c.integrand_id);
  const std::vector<int> ns = c.schedule.empty() ? std::vector<int>{8, 16, 32, 64} : c.schedule;
  lo.quad2d.holder_lambda_hint = c.quad_lambda_set ? c.quad.holder_lambda_hint : psi.holder;
  const auto reps = l2_convergence_2d(k, psi, ns, lo);
  o.csv = Csv({"series", "mesh", "value", "delta", "rate"});
  add_report(o.csv, reps.area, true, "area");
  add_report(o.csv, reps.diagonal, true, "diagonal");
  auto ratio = [](const ConvergenceReport& r) {
    return r.rows.front().value != 0.0 ? r.rows.back().value / r.rows.front().value : 0.0;
  };
  const double worst = std::max(ratio(reps.area), ratio(reps.diagonal));
  const double thr = c.tol.value_or(0.1);
  o.metric = "final_over_initial";
  o.value = worst;
  o.threshold = fmt6(thr);
  o.pass = worst <= thr && decreasing_with_slack(reps.area.rows) &&
           decreasing_with_slack(reps.diagonal.rows);
  return o;
}

inline Outcome expect_outcome(const ExperimentConfig& c, const std::string& metric, double v,
                              double default_tol) {
  Outcome o;
  o.metric = metric;
  o.value = v;
  if (c.expect) {
    const double tol = c.tol.value_or(default_tol);
    o.threshold = fmt6(*c.expect) + "+-" + fmt6(tol);
    o.pass = std::abs(v - *c.expect) <= tol * std::max(1.0, std::abs(*c.expect));
  } else {
    o.threshold = "none";
    o.pass = std::isfinite(v);
  }
  return o;
}

inline Outcome run_pvar(const ExperimentConfig& c) {
  const std::string id = c.function_id.empty() ? "min" : c.function_id;
  const int n = c.grid > 0 ? c.grid : 64;
  if (c.p < 1.0) throw UsageError("p must be >= 1");
  double v = 0.0;
  if (is_function_2d(id)) {
    const auto f = make_function_2d(id);
    v = pvar_2d_grid(sample_2d(f, Partition2D::uniform(n, c.T)), c.p);
  } else {
    const auto f = make_function_1d(id);
    v = pvar_1d(sample_1d(f, Grid1D::uniform(n, c.T)), c.p);
  }
  Outcome o = expect_outcome(c, "pvar", v, 1e-9);
  o.csv = Csv({"n", "p", "value"});
  o.csv.row({static_cast<double>(n), c.p, v});
  return o;
}

inline Outcome run_holder(const ExperimentConfig& c) {
  const std::string id = c.function_id.empty() ? "pow:0.5" : c.function_id;
  if (is_function_2d(id)) {
    const auto f = make_function_2d(id);
    const int n = c.grid > 0 ? c.grid : 64;
    const auto part = Partition2D::uniform(n, c.T);
    const auto p = holder_bifit_2d(part, sample_2d(f, part));
    Outcome o = expect_outcome(c, "lambda", p.lambda, 0.05);
    o.csv = Csv({"lambda", "const_c", "flavor", "lambda_u", "lambda_v", "rect_lambda", "fit_r2"});
    o.csv.row(std::vector<std::string>{fmt17(p.lambda), fmt17(p.const_c), to_string(p.flavor),
                                       fmt17(p.lambda_u), fmt17(p.lambda_v), fmt17(p.rect_lambda),
                                       fmt17(p.fit_r2)});
    return o;
  }
  const auto f = make_function_1d(id);
  const int n = c.grid > 0 ? c.grid : 1024;
  const auto g = Grid1D::uniform(n, c.T);
  const auto h = holder_fit_1d(g, sample_1d(f, g));
  Outcome o = expect_outcome(c, "lambda", h.lambda, 0.05);
  o.csv = Csv({"lambda", "const_c", "fit_r2"});
  o.csv.row({h.lambda, h.const_c, h.r2});
  return o;
}

inline Outcome run_young(const ExperimentConfig& c) {
  const auto f = make_function_2d(c.integrand_id.empty() ? "prod:s,t" : c.integrand_id);
  const auto g = make_integrator(c.integrator_id, c.T, c.cov_quad);
  const std::vector<int> ns = c.schedule.empty() ? std::vector<int>{16, 32, 64, 128} : c.schedule;
  Outcome o;
  o.csv = Csv({"n", "lhs", "f_norm", "g_qvar", "rhs_factor", "ratio"});
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  bool finite = true;
  for (int n : ns) {
    const auto y = young_inequality_check(f, g, c.p, c.q, Partition2D::uniform(n, c.T),
                                          Threads{c.threads});
    const double ratio = y.rhs_factor > 0.0 ? y.lhs / y.rhs_factor : 0.0;
    finite = finite && std::isfinite(ratio);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    o.csv.row({static_cast<double>(n), y.lhs, y.f_norm, y.g_qvar, y.rhs_factor, ratio});
  }
  const double spread = lo > 0.0 ? hi / lo : (hi == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
  const double thr = c.tol.value_or(2.0);
  o.metric = "ratio_spread";
  o.value = spread;
  o.threshold = fmt6(thr);
  o.pass = finite && spread <= thr;
  return o;
}

}  // namespace detail

/// Runs one experiment. Returns the process exit code.
inline int run(const ExperimentConfig& c, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  detail::Outcome o;
  try {
    const auto& e = c.experiment;
    if (e == "covariance-check") o = detail::run_covariance_check(c);
    else if (e == "kstar") o = detail::run_kstar(c);
    else if (e == "identity") o = detail::run_identity(c);
    else if (e == "iterated-identity") o = detail::run_iterated(c);
    else if (e == "l2-convergence") o = detail::run_l2(c);
    else if (e == "pvar") o = detail::run_pvar(c);
    else if (e == "holder-fit") o = detail::run_holder(c);
    else if (e == "young-ineq") o = detail::run_young(c);
    else throw UsageError("unknown experiment '" + e + "'");
  } catch (const UsageError& ex) {
    err << "error: " << ex.what() << "\n";
    return 2;
  } catch (const CatalogError& ex) {
    err << "error: " << ex.what() << "\n" << detail::catalog_text();
    return 2;
  } catch (const DomainError& ex) {
    err << "error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    out << c.experiment << " FAIL error=" << ex.what() << " threshold=n/a\n";
    return 1;
  }
  if (!c.out.empty()) {
    std::ofstream f(c.out, std::ios::binary);
    if (!f) {
      err << "error: cannot write '" << c.out << "'\n";
      return 2;
    }
    f << o.csv.text();
  }
  out << c.experiment << (o.pass ? " PASS " : " FAIL ") << o.metric << "=" << detail::fmt6(o.value)
      << " threshold=" << o.threshold << "\n";
  return o.pass ? 0 : 1;
}

/// parse_config followed by run.
inline int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const auto parsed = parse_config(args);
  if (!parsed.config) return parsed.exit_code;
  return run(*parsed.config);
}

}  // namespace vyoung::cli
