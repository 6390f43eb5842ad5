// Acceptance harness. One line per criterion:
//   [PASS] C<n> <name> (<seconds>s) <details>
// Exit status is 1 when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "vyoung/catalog.hpp"
#include "vyoung/vyoung.hpp"

using namespace vyoung;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "!") + what;
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string g3(double x) { return fmt("%.3g", x); }

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> body;
};

// --- 1 ---------------------------------------------------------------------

Verdict covariance_oracle() {
  constexpr double kTol = 1e-3;
  Verdict v;
  for (double H : {0.4, 0.5, 0.6, 0.75}) {
    const auto k = make_fbm_kernel(H);
    double worst = 0.0;
    for (int i = 1; i <= 6; ++i)
      for (int j = 1; j <= 6; ++j) {
        const double s = i / 6.0, t = j / 6.0;
        const double ref = fbm_covariance(H, s, t);
        worst = std::max(worst, std::abs(kernel_covariance(k, s, t) - ref) / std::abs(ref));
      }
    v.require(worst <= kTol, "H=" + fmt("%.2f", H) + " max_rel=" + g3(worst));
  }
  return v;
}

// --- 2 ---------------------------------------------------------------------

Verdict brownian_degeneracy() {
  constexpr double kPointTol = 1e-12;
  constexpr double kLhsTol = 1e-2;
  constexpr double kRhsTol = 1e-8;
  Verdict v;
  const auto k = make_rl_kernel(0.5);
  auto phi = [](double t) { return std::exp(t) * std::cos(3 * t); };
  auto psi = [](double a, double b) { return std::sin(a + b) + a * b * b; };
  double e1 = 0.0, e2 = 0.0;
  for (double s = 0.05; s < 1.0; s += 0.1) {
    e1 = std::max(e1, std::abs(kstar_apply(k, phi, s) - phi(s)));
    for (double t = 0.05; t < 1.0; t += 0.15)
      e2 = std::max(e2, std::abs(kstar_tensor(k, psi, s, t) - psi(s, t)));
  }
  v.require(e1 <= kPointTol, "kstar_err=" + g3(e1));
  v.require(e2 <= kPointTol, "tensor_err=" + g3(e2));
  IdentityOptions o;
  o.schedule = {64, 128, 256};
  const auto r = diagonal_identity(k, [](double s, double t) { return s * t; }, {}, o);
  v.require(std::abs(r.lhs - 1.0 / 3) <= kLhsTol, "lhs_err=" + g3(std::abs(r.lhs - 1.0 / 3)));
  v.require(std::abs(r.rhs - 1.0 / 3) <= kRhsTol, "rhs_err=" + g3(std::abs(r.rhs - 1.0 / 3)));
  return v;
}

// --- 3 ---------------------------------------------------------------------

Verdict product_factorization() {
  constexpr double kTol = 1e-8;
  Verdict v;
  const std::vector<std::string> ids = {"prod:pow:0.8,cos", "prod:exp,pow:0.7", "prod:s,sin"};
  for (double H : {0.6, 0.75}) {
    const auto k = make_rl_kernel(H);
    double worst = 0.0;
    for (const auto& id : ids) {
      const auto f = make_function_2d(id);
      const auto& [f1, f2] = *f.factors;
      SingularQuad q;
      q.holder_lambda_hint = f.holder;
      for (int i = 1; i <= 4; ++i)
        for (int j = 1; j <= 4; ++j) {
          const double u = 0.2 * i, w = 0.2 * j - 0.07;
          const double val = kstar_tensor(k, f, u, w, q);
          const double ref = kstar_apply(k, f1, u, q) * kstar_apply(k, f2, w, q);
          worst = std::max(worst, std::abs(val - ref) / (1 + std::abs(val)));
        }
    }
    v.require(worst <= kTol, "H=" + fmt("%.2f", H) + " scaled_err=" + g3(worst));
  }
  return v;
}

// --- 4 ---------------------------------------------------------------------

Verdict iterated_application() {
  constexpr double kFactor = 5.0;
  Verdict v;
  const auto k = make_rl_kernel(0.7);
  auto psi = [](double a, double b) { return std::pow(a, 0.8) * std::cos(b) + std::exp(-a * b); };
  SingularQuad q;
  q.holder_lambda_hint = 0.8;
  double worst_ratio = 0.0;
  int ok = 0;
  for (double u : {0.2, 0.5, 0.8})
    for (double w : {0.25, 0.55, 0.85}) {
      const auto direct = kstar_tensor_with_error(k, psi, u, w, q);
      // the returned direct value uses the (n+2)-point rule, so the passes do too
      SingularQuad fine = q;
      fine.points_per_panel += 2;
      auto outer = [&](double a) {
        return kstar_apply(k, [&](double b) { return psi(a, b); }, w, fine);
      };
      const double two_pass = kstar_apply(k, outer, u, fine);
      const double diff = std::abs(two_pass - direct.value);
      const bool pass = diff <= kFactor * direct.error;
      ok += pass;
      worst_ratio = std::max(worst_ratio, direct.error > 0 ? diff / direct.error : diff > 0 ? 1e300 : 0);
    }
  v.require(ok == 9, "points_ok=" + std::to_string(ok) + "/9 worst_diff_over_est=" + g3(worst_ratio));
  return v;
}

// --- 5 ---------------------------------------------------------------------

Verdict main_identity() {
  constexpr double kTolA = 1e-2;
  constexpr double kTolB = 2e-2;
  Verdict v;
  {
    IdentityOptions o;
    o.schedule = {64, 128, 256, 512, 1024};
    const auto r = diagonal_identity(make_rl_kernel(0.75), [](double s, double t) { return s * t; }, {}, o);
    v.require(r.rel_residual <= kTolA, "rl0.75 st rel=" + g3(r.rel_residual));
  }
  {
    IdentityOptions o;
    o.covariance = CovarianceFunction::closed_form_fbm(0.75);
    SingularQuad q;
    q.holder_lambda_hint = 0.6;
    const auto r = product_identity(
        make_fbm_kernel(0.75), [](double s) { return std::pow(s, 0.6); },
        [](double t) { return std::cos(t); }, q, o);
    v.require(r.rel_residual <= kTolB, "fbm0.75 product rel=" + g3(r.rel_residual));
  }
  return v;
}

// --- 6 ---------------------------------------------------------------------

Verdict iterated_identity_check() {
  constexpr double kTol = 5e-2;
  Verdict v;
  SingularQuad q{12, 1.0, 6, 0.8};
  const auto r = iterated_identity(
      make_rl_kernel(0.7), [](double a, double b) { return std::pow(a, 0.8) * std::pow(b, 0.8); },
      [](double a, double b) { return std::cos(a) * (1 + b * b); }, 48, q);
  v.require(!r.capped, "n=48 uncapped");
  v.require(r.rel_residual <= kTol, "rel=" + g3(r.rel_residual));
  return v;
}

// --- 7 ---------------------------------------------------------------------

Verdict l2_convergence() {
  constexpr double kLambda = 0.6;
  constexpr double kSlack = 0.2;
  constexpr double kShrink = 0.1;
  Verdict v;
  const auto k = make_rl_kernel(0.75);
  const double floor = 2 * (kLambda - k.alpha()) - kSlack;
  const std::vector<int> n1 = {32, 64, 128, 256};
  SingularQuad q;
  q.holder_lambda_hint = kLambda;
  const auto r1 = l2_convergence_1d(k, [](double t) { return std::pow(t, kLambda); }, n1, q);
  v.require(r1.fitted_rate >= floor, "1d slope=" + fmt("%.3f", r1.fitted_rate));

  const std::vector<int> n2 = {8, 16, 32, 64};
  const auto r2 = l2_convergence_2d(
      k, [](double a, double b) { return std::pow(a, kLambda) * std::pow(b, kLambda); }, n2);
  for (const auto* rep : {&r2.area, &r2.diagonal}) {
    const bool dec = decreasing_with_slack(rep->rows, 1);
    const double ratio = rep->rows.back().value / rep->rows.front().value;
    const std::string tag = rep == &r2.area ? "area" : "diagonal";
    v.require(dec && ratio <= kShrink, tag + " final/initial=" + g3(ratio) + (dec ? "" : " non-monotone"));
  }
  return v;
}

// --- 8 ---------------------------------------------------------------------

double pvar_enumerate(const std::vector<double>& x, double p) {
  const std::size_t m = x.size() - 2;
  double best = 0.0;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::size_t prev = 0;
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k)
      if (mask >> k & 1u) {
        s += std::pow(std::abs(x[k + 1] - x[prev]), p);
        prev = k + 1;
      }
    best = std::max(best, s + std::pow(std::abs(x.back() - x[prev]), p));
  }
  return std::pow(best, 1 / p);
}

Verdict pvar_oracles() {
  constexpr double kTol = 1e-12;
  Verdict v;
  double worst = 0.0;
  int cases = 0;
  for (std::size_t n = 2; n <= 12; ++n)
    for (unsigned seed = 0; seed < 8; ++seed) {
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i)
        x[i] = std::sin(0.9 * i * (seed + 1) + seed) * (1 + 0.3 * std::cos(2.3 * i + seed));
      for (double p : {1.0, 1.5, 2.0, 3.0}) {
        const double ref = pvar_enumerate(x, p);
        worst = std::max(worst, std::abs(pvar_1d(x, p) - ref) / std::max(1.0, ref));
        ++cases;
      }
    }
  v.require(worst <= kTol, std::to_string(cases) + " grids max_err=" + g3(worst));
  const auto part = Partition2D::uniform(64);
  const double m = pvar_2d_grid(sample_2d([](double a, double b) { return std::min(a, b); }, part), 1.0);
  v.require(std::abs(m - 1.0) <= kTol, "pvar2d(min)=" + fmt("%.15g", m));
  return v;
}

// --- 9 ---------------------------------------------------------------------

Verdict young_inequality() {
  constexpr double kSpread = 2.0;
  struct Pair {
    const char* f;
    const char* g;
    double p, q;
  };
  const Pair pairs[] = {{"prod:t,t", "min", 1.0, 1.0},
                        {"prod:cos,exp", "fbm-closed:H=0.75", 1.0, 1.0},
                        {"prod:pow:0.6,pow:0.6", "min", 1.0 / 0.6, 1.0},
                        {"prod:sin,cos", "fbm-closed:H=0.4", 1.0, 1.25},
                        {"min", "prod:pow:0.7,pow:0.7", 1.0, 1.0}};
  Verdict v;
  for (const auto& pr : pairs) {
    const auto f = make_function_2d(pr.f);
    const auto g = make_integrator(pr.g, 1.0);
    double lo = 1e300, hi = 0.0;
    bool finite = true;
    for (int n : {16, 32, 64, 128}) {
      const auto c = young_inequality_check(f, g, pr.p, pr.q, Partition2D::uniform(n));
      const double ratio = c.lhs / c.rhs_factor;
      finite = finite && std::isfinite(ratio) && ratio > 0;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    v.require(finite && hi <= kSpread * lo, std::string(pr.f) + "|" + pr.g + " spread=" + g3(hi / lo));
  }
  return v;
}

// --- 10 --------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

Verdict determinism() {
  namespace fs = std::filesystem;
  const std::vector<std::string> runs = {
      "covariance-check --kernel fbm:H=0.6 --grid 5",
      "identity --kernel rl:H=0.7 --integrand prod:pow:0.8,cos --schedule 16,32,64",
      "l2-convergence --kernel rl:H=0.75 --function pow:0.6 --schedule 16,32,64",
      "young-ineq --function prod:sin,cos --integrator fbm-closed:H=0.4 --p 1 --q 1.25",
      "iterated-identity --kernel rl:H=0.7 --integrand prod:pow:0.8,pow:0.8 --integrand2 "
      "prod:cos,exp --grid 12 --quad-panels 8 --quad-points 4"};
  const fs::path dir = fs::temp_directory_path() / "vyoung_acceptance";
  fs::create_directories(dir);
  Verdict v;
  int idx = 0;
  for (const auto& args : runs) {
    std::string csv[2];
    int codes[2];
    const unsigned threads[2] = {1, 4};
    for (int t = 0; t < 2; ++t) {
      const auto out = dir / ("run" + std::to_string(idx) + "_" + std::to_string(threads[t]) + ".csv");
      fs::remove(out);
      const std::string cmd = std::string(VYOUNG_CLI_PATH) + " " + args + " --threads " +
                              std::to_string(threads[t]) + " --out " + out.string() + " > /dev/null 2>&1";
      const int st = std::system(cmd.c_str());
      codes[t] = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
      csv[t] = slurp(out);
    }
    const std::string name = args.substr(0, args.find(' '));
    const bool ran = codes[0] <= 1 && codes[0] == codes[1] && !csv[0].empty();
    v.require(ran && csv[0] == csv[1], name + (ran ? (csv[0] == csv[1] ? " identical" : " differs") : " did not run"));
    ++idx;
  }
  return v;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "covariance-oracle", 30, covariance_oracle},
      {2, "brownian-degeneracy", 10, brownian_degeneracy},
      {3, "product-factorization", 10, product_factorization},
      {4, "iterated-application", 20, iterated_application},
      {5, "main-identity", 120, main_identity},
      {6, "iterated-identity", 60, iterated_identity_check},
      {7, "l2-convergence", 120, l2_convergence},
      {8, "pvar-oracles", 10, pvar_oracles},
      {9, "young-inequality", 60, young_inequality},
      {10, "determinism", 600, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.require(secs <= c.budget_s, "runtime " + fmt("%.1f", secs) + "s <= " + fmt("%g", c.budget_s) + "s");
    failed += !v.pass;
    std::printf("[%s] C%d %s (%.2fs) %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
