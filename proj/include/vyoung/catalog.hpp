#pragma once

// String-addressable kernels, covariances and test functions.
//
//   kernels      fbm:H=<h>  rl:H=<h>
//   covariances  fbm-closed:H=<h>  kernel:<kernel-id>
//   1D functions const:<c>  s | t | id  pow:<a>  cos  sin  exp
//   2D functions prod:<f1>,<f2>  sum:<f1>,<f2>  absdiff:<l>  min  const:<c>

#include <charconv>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vyoung/covariance.hpp"
#include "vyoung/kernels.hpp"

namespace vyoung {

/// Unknown or malformed catalog id.
class CatalogError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Function1D {
  std::string id;
  std::function<double(double)> fn;
  double holder = 1.0;  ///< Hoelder exponent on [0, T]
  double operator()(double t) const { return fn(t); }
};

struct Function2D {
  std::string id;
  std::function<double(double, double)> fn;
  double holder = 1.0;
  bool strong = true;  ///< strongly bi-continuous with exponent `holder`
  std::optional<std::pair<Function1D, Function1D>> factors;  ///< set for prod:
  double operator()(double u, double v) const { return fn(u, v); }
};

namespace detail {

inline double parse_number(std::string_view s, const std::string& ctx) {
  double x = 0.0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, x);
  if (s.empty() || r.ec != std::errc{} || r.ptr != end || !std::isfinite(x))
    throw CatalogError("malformed number in '" + ctx + "'");
  return x;
}

inline bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

}  // namespace detail

inline const std::vector<std::string>& kernel_catalog() {
  static const std::vector<std::string> c = {"fbm:H=<h>", "rl:H=<h>"};
  return c;
}
inline const std::vector<std::string>& covariance_catalog() {
  static const std::vector<std::string> c = {"fbm-closed:H=<h>", "kernel:<kernel-id>"};
  return c;
}
inline const std::vector<std::string>& function1d_catalog() {
  static const std::vector<std::string> c = {"const:<c>", "s", "t", "id", "pow:<a>",
                                             "cos",       "sin", "exp"};
  return c;
}
inline const std::vector<std::string>& function2d_catalog() {
  static const std::vector<std::string> c = {"prod:<f1>,<f2>", "sum:<f1>,<f2>", "absdiff:<l>",
                                             "min", "const:<c>"};
  return c;
}

/// Kernel on [0, T]. H outside (0,1) raises DomainError("H out of (0,1)").
inline VolterraKernel make_kernel(const std::string& id, double T = 1.0) {
  if (detail::starts_with(id, "fbm:H="))
    return make_fbm_kernel(detail::parse_number(std::string_view(id).substr(6), id), T);
  if (detail::starts_with(id, "rl:H="))
    return make_rl_kernel(detail::parse_number(std::string_view(id).substr(5), id), T);
  throw CatalogError("unknown kernel id '" + id + "'");
}

inline CovarianceFunction make_covariance(const std::string& id, double T = 1.0,
                                          const QuadratureScheme& quad = {}) {
  if (detail::starts_with(id, "fbm-closed:H="))
    return CovarianceFunction::closed_form_fbm(
        detail::parse_number(std::string_view(id).substr(13), id), T);
  if (detail::starts_with(id, "kernel:"))
    return CovarianceFunction::kernel_derived(make_kernel(id.substr(7), T), quad);
  throw CatalogError("unknown covariance id '" + id + "'");
}

inline Function1D make_function_1d(const std::string& id) {
  if (id == "s" || id == "t" || id == "id") return {id, [](double t) { return t; }, 1.0};
  if (id == "cos") return {id, [](double t) { return std::cos(t); }, 1.0};
  if (id == "sin") return {id, [](double t) { return std::sin(t); }, 1.0};
  if (id == "exp") return {id, [](double t) { return std::exp(t); }, 1.0};
  if (detail::starts_with(id, "const:")) {
    const double c = detail::parse_number(std::string_view(id).substr(6), id);
    return {id, [c](double) { return c; }, 1.0};
  }
  if (detail::starts_with(id, "pow:")) {
    const double a = detail::parse_number(std::string_view(id).substr(4), id);
    if (!(a > 0.0)) throw CatalogError("pow exponent must be > 0 in '" + id + "'");
    return {id, [a](double t) { return std::pow(t, a); }, std::min(a, 1.0)};
  }
  throw CatalogError("unknown function id '" + id + "'");
}

inline Function2D make_function_2d(const std::string& id) {
  auto split_pair = [&](std::string_view body) {
    const auto comma = body.find(',');
    if (comma == std::string_view::npos) throw CatalogError("expected '<f1>,<f2>' in '" + id + "'");
    return std::pair{make_function_1d(std::string(body.substr(0, comma))),
                     make_function_1d(std::string(body.substr(comma + 1)))};
  };
  if (id == "min") {
    // Lipschitz in each variable; rectangular increments on diagonal cells
    // are of order du^(1/2) dv^(1/2).
    return {id, [](double u, double v) { return std::min(u, v); }, 1.0, false, std::nullopt};
  }
  if (detail::starts_with(id, "const:")) {
    const double c = detail::parse_number(std::string_view(id).substr(6), id);
    return {id, [c](double, double) { return c; }, 1.0, true, std::nullopt};
  }
  if (detail::starts_with(id, "absdiff:")) {
    const double l = detail::parse_number(std::string_view(id).substr(8), id);
    if (!(l > 0.0 && l <= 1.0)) throw CatalogError("absdiff exponent must be in (0,1] in '" + id + "'");
    return {id, [l](double u, double v) { return std::pow(std::abs(u - v), l); }, l, false,
            std::nullopt};
  }
  if (detail::starts_with(id, "prod:")) {
    auto [f1, f2] = split_pair(std::string_view(id).substr(5));
    const double h = std::min(f1.holder, f2.holder);
    auto fn = [a = f1.fn, b = f2.fn](double u, double v) { return a(u) * b(v); };
    return {id, fn, h, true, std::pair{f1, f2}};
  }
  if (detail::starts_with(id, "sum:")) {
    auto [f1, f2] = split_pair(std::string_view(id).substr(4));
    const double h = std::min(f1.holder, f2.holder);
    auto fn = [a = f1.fn, b = f2.fn](double u, double v) { return a(u) + b(v); };
    return {id, fn, h, true, std::nullopt};
  }
  throw CatalogError("unknown 2D function id '" + id + "'");
}

inline bool is_function_2d(const std::string& id) {
  try {
    make_function_2d(id);
    return true;
  } catch (const CatalogError&) {
    return false;
  }
}

/// Integrator g of a Young integral: a covariance id or a 2D function id.
inline std::function<double(double, double)> make_integrator(const std::string& id, double T,
                                                             const QuadratureScheme& quad = {}) {
  if (detail::starts_with(id, "fbm-closed:") || detail::starts_with(id, "kernel:")) {
    auto R = make_covariance(id, T, quad);
    return [R](double s, double t) { return R(s, t); };
  }
  return make_function_2d(id).fn;
}

}  // namespace vyoung
