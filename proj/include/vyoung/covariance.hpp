#pragma once

// Covariance functions R(s,t): the closed-form fBm covariance and the
// kernel-derived covariance R(s,t) = int_0^{s^t} K(t,r) K(s,r) dr computed by
// graded Gauss-Legendre quadrature. Also rectangular increments.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vyoung/errors.hpp"
#include "vyoung/kernels.hpp"
#include "vyoung/parallel.hpp"
#include "vyoung/quadrature.hpp"

namespace vyoung {

/// 1/2 (s^2H + t^2H - |t-s|^2H).
inline double fbm_covariance(double H, double s, double t) {
  detail::check_hurst(H);
  if (s < 0.0 || t < 0.0) throw DomainError("fbm_covariance: times must be >= 0");
  const double h2 = 2.0 * H;
  return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
}

/// Covariance of the Riemann-Liouville kernel C (t-r)^(H-1/2), from Euler's
/// integral: for s <= t,
///   R(s,t) = C^2 s^(H+1/2) t^(H-1/2) / (H+1/2) F(1/2-H, 1; H+3/2; s/t).
inline double rl_covariance(double H, double s, double t) {
  detail::check_hurst(H);
  if (s < 0.0 || t < 0.0) throw DomainError("rl_covariance: times must be >= 0");
  const double lo = std::min(s, t);
  const double hi = std::max(s, t);
  if (lo == 0.0) return 0.0;
  const double c = rl_constant(H);
  return c * c * std::pow(lo, H + 0.5) * std::pow(hi, H - 0.5) / (H + 0.5) *
         hyp2f1(0.5 - H, 1.0, H + 1.5, lo / hi);
}

/// Composite Gauss-Legendre on [0, s^t], graded geometrically toward both
/// endpoints. Half the panels grade toward r = 0 and half toward r = s^t, with
/// width ratio 2^-grading_exponent between neighbouring panels.
struct QuadratureScheme {
  int panels = 32;
  double grading_exponent = 3.0;
  int points_per_panel = 8;
  /// Tolerance per unit length of the integration interval.
  double abs_tol = 1e-6;

  void validate() const {
    if (panels < 1) throw std::invalid_argument("QuadratureScheme: panels must be >= 1");
    if (!(grading_exponent >= 1.0))
      throw std::invalid_argument("QuadratureScheme: grading_exponent must be >= 1");
    if (points_per_panel < 1 || points_per_panel + 2 > kMaxGaussPoints)
      throw std::invalid_argument("QuadratureScheme: points_per_panel out of range");
  }
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

inline std::vector<double> covariance_breaks(double m, const QuadratureScheme& q) {
  if (q.panels < 2) return {0.0, m};
  const double ratio = std::pow(2.0, -q.grading_exponent);
  const int left = q.panels / 2;
  const int right = q.panels - left;
  const double mid = 0.5 * m;
  auto br = geometric_breaks(0.0, mid, true, left, ratio);
  auto rb = geometric_breaks(mid, m, false, right, ratio);
  br.insert(br.end(), rb.begin() + 1, rb.end());
  return br;
}

inline double panel_rule_sum(const VolterraKernel& k, double lo, double hi,
                             std::span<const double> breaks, int points) {
  const auto& rule = gauss_legendre(points);
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double c = 0.5 * (breaks[p] + breaks[p + 1]);
    const double h = 0.5 * (breaks[p + 1] - breaks[p]);
    double acc = 0.0;
    for (int j = 0; j < points; ++j) {
      const double r = c + h * rule.x[j];
      acc += rule.w[j] * k(hi, r) * k(lo, r);
    }
    total += h * acc;
  }
  return total;
}

}  // namespace detail

/// Quadrature value and error estimate |Q_n - Q_{n+2}| on the same mesh; the
/// (n+2)-point value is returned. R(0, t) = R(s, 0) = 0.
inline QuadResult kernel_covariance_estimate(const VolterraKernel& kernel, double s, double t,
                                             const QuadratureScheme& quad = {}) {
  quad.validate();
  if (s < 0.0 || t < 0.0) throw DomainError("kernel_covariance: times must be >= 0");
  const double lo = std::min(s, t);
  const double hi = std::max(s, t);
  if (lo == 0.0) return {0.0, 0.0};
  const auto br = detail::covariance_breaks(lo, quad);
  const double coarse = detail::panel_rule_sum(kernel, lo, hi, br, quad.points_per_panel);
  const double fine = detail::panel_rule_sum(kernel, lo, hi, br, quad.points_per_panel + 2);
  return {fine, std::abs(fine - coarse)};
}

/// Kernel-derived covariance; throws AccuracyError when the estimate exceeds
/// abs_tol * max(1, s^t).
inline double kernel_covariance(const VolterraKernel& kernel, double s, double t,
                                const QuadratureScheme& quad = {}) {
  const auto r = kernel_covariance_estimate(kernel, s, t, quad);
  const double tol = quad.abs_tol * std::max(1.0, std::min(s, t));
  if (r.error > tol)
    throw AccuracyError("kernel_covariance: quadrature error estimate above tolerance", r.error,
                        tol);
  return r.value;
}

// ---------------------------------------------------------------------------
// Rectangular increments
// ---------------------------------------------------------------------------

struct Rect {
  double u1, u2, v1, v2;
};

/// F(u1,v1) + F(u2,v2) - F(u1,v2) - F(u2,v1).
template <class F>
double rect_increment(const F& f, const Rect& r) {
  if (r.u1 > r.u2 || r.v1 > r.v2) throw std::invalid_argument("rect_increment: invalid rect");
  return f(r.u1, r.v1) + f(r.u2, r.v2) - f(r.u1, r.v2) - f(r.u2, r.v1);
}

// ---------------------------------------------------------------------------
// Covariance function
// ---------------------------------------------------------------------------

class CovarianceFunction {
 public:
  struct ClosedFormFbm {
    double H;
  };
  struct KernelDerived {
    VolterraKernel kernel;
    QuadratureScheme quad;
  };

  static CovarianceFunction closed_form_fbm(double H, double T = 1.0) {
    detail::check_hurst(H);
    if (!(T > 0.0)) throw DomainError("covariance horizon must be > 0");
    return CovarianceFunction(ClosedFormFbm{H}, T, "fbm-closed:H=" + std::to_string(H));
  }

  static CovarianceFunction kernel_derived(const VolterraKernel& kernel,
                                           const QuadratureScheme& quad = {}) {
    quad.validate();
    return CovarianceFunction(KernelDerived{kernel, quad}, kernel.horizon(),
                              "kernel:" + kernel.id());
  }

  double operator()(double s, double t) const {
    if (const auto* c = std::get_if<ClosedFormFbm>(&source_)) return fbm_covariance(c->H, s, t);
    const auto& k = std::get<KernelDerived>(source_);
    return kernel_covariance(k.kernel, s, t, k.quad);
  }

  double horizon() const noexcept { return T_; }
  const std::string& id() const noexcept { return id_; }
  bool is_closed_form() const noexcept { return std::holds_alternative<ClosedFormFbm>(source_); }
  const VolterraKernel* kernel() const noexcept {
    const auto* k = std::get_if<KernelDerived>(&source_);
    return k ? &k->kernel : nullptr;
  }

 private:
  CovarianceFunction(std::variant<ClosedFormFbm, KernelDerived> src, double T, std::string id)
      : source_(std::move(src)), T_(T), id_(std::move(id)) {}

  std::variant<ClosedFormFbm, KernelDerived> source_;
  double T_;
  std::string id_;
};

/// Matrix R(x_i, x_j), evaluated on the upper triangle only and mirrored, so
/// it is exactly symmetric.
inline Eigen::MatrixXd covariance_matrix(const CovarianceFunction& R, std::span<const double> x,
                                         Threads threads = {}) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd m(n, n);
  parallel_for(
      x.size(),
      [&](std::size_t i) {
        const auto ii = static_cast<Eigen::Index>(i);
        for (Eigen::Index j = ii; j < n; ++j) m(ii, j) = R(x[i], x[j]);
      },
      threads);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) m(i, j) = m(j, i);
  return m;
}

struct PsdDiagnostic {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  bool psd = true;  ///< min_eigenvalue >= -tol
};

/// Smallest eigenvalue of the Gram matrix on the given points. A diagnostic:
/// quadrature error can produce tiny negative eigenvalues.
inline PsdDiagnostic psd_diagnostic(const CovarianceFunction& R, std::span<const double> x,
                                    double tol = 1e-8, Threads threads = {}) {
  const Eigen::MatrixXd m = covariance_matrix(R, x, threads);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  PsdDiagnostic d;
  if (m.size() == 0) return d;
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  d.max_eigenvalue = es.eigenvalues().maxCoeff();
  d.psd = d.min_eigenvalue >= -tol;
  return d;
}

}  // namespace vyoung
