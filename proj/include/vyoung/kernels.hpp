#pragma once

// Volterra kernels: the fractional Brownian motion kernel (hypergeometric
// representation), the Riemann-Liouville kernel, a type-erased kernel
// contract, and a sampled check of the kernel growth bounds
//   (i)  |K(t,s)|      <= C s^-a (t-s)^-a
//   (ii) |dK/dt (t,s)| <= C (t-s)^-(a+1)
// for 0 < s < t <= T.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "vyoung/errors.hpp"

namespace vyoung {

// ---------------------------------------------------------------------------
// Gauss hypergeometric function 2F1
// ---------------------------------------------------------------------------

struct HypergeometricParams {
  double a;
  double b;
  double c;
  double z;
};

inline constexpr int kHyp2f1MaxTerms = 500;

namespace detail {

inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

/// 1/Gamma(x), zero at the poles.
inline double rgamma(double x) {
  if (is_nonpositive_integer(x)) return 0.0;
  return 1.0 / std::tgamma(x);
}

/// Plain Gauss series. Stops once three consecutive terms fall below
/// 1e-16 * |partial sum|.
inline double hyp2f1_series(double a, double b, double c, double z, int max_terms) {
  double sum = 1.0;
  double term = 1.0;
  int small_run = 0;
  for (int k = 0; k < max_terms; ++k) {
    term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    sum += term;
    if (term == 0.0) return sum;  // terminating series
    if (std::abs(term) < 1e-16 * std::abs(sum)) {
      if (++small_run == 3) return sum;
    } else {
      small_run = 0;
    }
  }
  throw SeriesDivergence("hyp2f1: series did not converge within the term cap", max_terms);
}

/// F(a,b;c;w) for w in [0, 1], with omw = 1 - w passed separately so callers
/// can supply it without cancellation. Close to w = 1 the 1-w connection
/// formula is used unless c-a-b is (nearly) an integer.
inline double hyp2f1_unit(double a, double b, double c, double w, double omw, int max_terms) {
  if (w <= 0.9) return hyp2f1_series(a, b, c, w, max_terms);
  const double d = c - a - b;
  if (std::abs(d - std::round(d)) < 1e-8) return hyp2f1_series(a, b, c, w, max_terms);
  if (omw == 0.0) {
    if (d <= 0.0) throw DomainError("hyp2f1: divergent at z = 1 (c - a - b <= 0)");
    return std::tgamma(c) * std::tgamma(d) * rgamma(c - a) * rgamma(c - b);
  }
  const double gc = std::tgamma(c);
  const double coef1 = gc * std::tgamma(d) * rgamma(c - a) * rgamma(c - b);
  const double coef2 = gc * std::tgamma(-d) * rgamma(a) * rgamma(b);
  double out = 0.0;
  if (coef1 != 0.0) out += coef1 * hyp2f1_series(a, b, 1.0 - d, omw, max_terms);
  if (coef2 != 0.0)
    out += coef2 * std::pow(omw, d) * hyp2f1_series(c - a, c - b, 1.0 + d, omw, max_terms);
  return out;
}

/// F(a,b;c;z) for z = -x/y <= 0 given as the pair (x, y) with x >= 0, y > 0.
/// Pfaff: F(a,b;c;z) = (1-z)^-a F(a, c-b; c; z/(z-1)), where
/// 1 - z = (x+y)/y and z/(z-1) = x/(x+y).
inline double hyp2f1_negative(double a, double b, double c, double x, double y, int max_terms) {
  const double z = -x / y;
  if (z >= -0.5) return hyp2f1_series(a, b, c, z, max_terms);
  const double sum = x + y;
  return std::pow(sum / y, -a) * hyp2f1_unit(a, c - b, c, x / sum, y / sum, max_terms);
}

inline void check_c(double c) {
  if (is_nonpositive_integer(c))
    throw DomainError("hyp2f1: c must not be zero or a negative integer");
}

}  // namespace detail

/// Gauss hypergeometric function F(a,b;c;z) for real z <= 1.
inline double hyp2f1(double a, double b, double c, double z, int max_terms = kHyp2f1MaxTerms) {
  detail::check_c(c);
  if (std::isnan(z) || z > 1.0) throw DomainError("hyp2f1: z must be <= 1");
  if (z == 0.0 || a == 0.0 || b == 0.0) return 1.0;
  if (z < 0.0) return detail::hyp2f1_negative(a, b, c, -z, 1.0, max_terms);
  return detail::hyp2f1_unit(a, b, c, z, 1.0 - z, max_terms);
}

inline double hyp2f1(const HypergeometricParams& p, int max_terms = kHyp2f1MaxTerms) {
  return hyp2f1(p.a, p.b, p.c, p.z, max_terms);
}

// ---------------------------------------------------------------------------
// Closed-form kernels
// ---------------------------------------------------------------------------

namespace detail {

inline void check_hurst(double H) {
  if (!(H > 0.0 && H < 1.0)) throw DomainError("H out of (0,1)");
}

/// Variance of the process generated by the unnormalized hypergeometric kernel
/// at t = 1: Gamma(2-2H) cos(pi H) / (pi H (1-2H)), equal to 1 at H = 1/2.
inline double fbm_raw_variance(double H) {
  if (std::abs(H - 0.5) < 1e-12) return 1.0;
  return std::tgamma(2.0 - 2.0 * H) * std::sin(std::numbers::pi * (0.5 - H)) /
         (std::numbers::pi * H * (1.0 - 2.0 * H));
}

}  // namespace detail

/// fBm Volterra kernel
///   K(t,s) = c_H / Gamma(H+1/2) (t-s)^(H-1/2) F(H-1/2, 1/2-H, H+1/2, 1 - t/s),
/// normalized by c_H so that the induced covariance is the standard
/// 1/2 (s^2H + t^2H - |t-s|^2H). Zero for s >= t.
inline double fbm_kernel_eval(double H, double t, double s) {
  detail::check_hurst(H);
  if (!(s > 0.0)) throw DomainError("fbm kernel: s must be > 0");
  if (s >= t) return 0.0;
  if (std::abs(H - 0.5) < 1e-15) return 1.0;
  const double norm = 1.0 / (std::tgamma(H + 0.5) * std::sqrt(detail::fbm_raw_variance(H)));
  // 1 - t/s = -(t-s)/s
  const double f = detail::hyp2f1_negative(H - 0.5, 0.5 - H, H + 0.5, t - s, s, kHyp2f1MaxTerms);
  return norm * std::pow(t - s, H - 0.5) * f;
}

inline constexpr double kFdRelativeStep = 1e-4;
inline constexpr double kFdGapFloor = 1e-12;

/// dK/dt of the fBm kernel by Richardson-extrapolated central differences with
/// step h = min(t-s, s) * 1e-4.
inline double fbm_kernel_dt(double H, double t, double s) {
  detail::check_hurst(H);
  if (!(s > 0.0)) throw DomainError("fbm kernel: s must be > 0");
  if (s >= t) return 0.0;
  if (t - s < 8.0 * kFdGapFloor * t)
    throw StepUnderflow("fbm_kernel_dt: t - s below the finite-difference floor");
  const double h = std::min(t - s, s) * kFdRelativeStep;
  auto central = [&](double step) {
    return (fbm_kernel_eval(H, t + step, s) - fbm_kernel_eval(H, t - step, s)) / (2.0 * step);
  };
  const double d1 = central(h);
  const double d2 = central(0.5 * h);
  return (4.0 * d2 - d1) / 3.0;
}

/// Normalizing constant of the Riemann-Liouville kernel, chosen so that
/// H = 1/2 gives the Brownian indicator kernel.
inline double rl_constant(double H) { return 1.0 / std::tgamma(H + 0.5); }

/// Riemann-Liouville kernel C_H (t-s)^(H-1/2) for s < t, else 0.
inline double rl_kernel_eval(double H, double t, double s) {
  detail::check_hurst(H);
  if (s < 0.0) throw DomainError("rl kernel: s must be >= 0");
  if (s >= t) return 0.0;
  return rl_constant(H) * std::pow(t - s, H - 0.5);
}

inline double rl_kernel_dt(double H, double t, double s) {
  detail::check_hurst(H);
  if (s < 0.0) throw DomainError("rl kernel: s must be >= 0");
  if (s >= t) return 0.0;
  return rl_constant(H) * (H - 0.5) * std::pow(t - s, H - 1.5);
}

// ---------------------------------------------------------------------------
// Kernel contract
// ---------------------------------------------------------------------------

/// Immutable Volterra kernel on [0, T]^2. Copies share the evaluation
/// closures, so a kernel can be read concurrently from any number of threads.
class VolterraKernel {
 public:
  using Fn = std::function<double(double, double)>;

  VolterraKernel(std::string id, double horizon, double alpha, double bound_const, Fn eval,
                 Fn eval_dt)
      : impl_(std::make_shared<const Impl>(Impl{std::move(id), horizon, alpha, bound_const,
                                                std::move(eval), std::move(eval_dt)})) {
    if (!(horizon > 0.0)) throw DomainError("kernel horizon must be > 0");
    if (!(alpha >= 0.0)) throw DomainError("kernel alpha must be >= 0");
  }

  /// K(t, s); exactly 0 for s >= t.
  double operator()(double t, double s) const {
    if (s >= t) return 0.0;
    return impl_->eval(t, s);
  }

  /// dK/dt (t, s); 0 for s >= t.
  double dt(double t, double s) const {
    if (s >= t) return 0.0;
    return impl_->eval_dt(t, s);
  }

  const std::string& id() const noexcept { return impl_->id; }
  double horizon() const noexcept { return impl_->horizon; }
  double alpha() const noexcept { return impl_->alpha; }
  double bound_const() const noexcept { return impl_->bound_const; }
  /// Whether the singularity exponent is in the admissible range [0, 1/4).
  bool alpha_admissible() const noexcept { return impl_->alpha < 0.25; }

  VolterraKernel with_bound_const(double c) const {
    return VolterraKernel(impl_->id, impl_->horizon, impl_->alpha, c, impl_->eval,
                          impl_->eval_dt);
  }
  VolterraKernel with_alpha(double alpha) const {
    return VolterraKernel(impl_->id, impl_->horizon, alpha, impl_->bound_const, impl_->eval,
                          impl_->eval_dt);
  }

 private:
  struct Impl {
    std::string id;
    double horizon;
    double alpha;
    double bound_const;
    Fn eval;
    Fn eval_dt;
  };
  std::shared_ptr<const Impl> impl_;
};

/// Fits C in dK/dt = C (t/s)^(H-1/2) (t-s)^(H-3/2) from finite differences at
/// a few reference points (mean of the ratios).
inline double fit_fbm_dt_constant(double H, double T = 1.0) {
  detail::check_hurst(H);
  if (std::abs(H - 0.5) < 1e-15) return 0.0;
  const std::pair<double, double> refs[] = {
      {T, 0.5 * T}, {0.8 * T, 0.3 * T}, {T, 0.9 * T}, {0.6 * T, 0.05 * T}};
  double acc = 0.0;
  for (auto [t, s] : refs)
    acc += fbm_kernel_dt(H, t, s) / (std::pow(t / s, H - 0.5) * std::pow(t - s, H - 1.5));
  return acc / std::size(refs);
}

struct ConditionReport;
ConditionReport verify_condition(const VolterraKernel& kernel, int n_samples,
                                 double cap = 1e6);

/// fBm kernel on [0, T] with alpha = |H - 1/2|. dK/dt uses the power form with
/// the finite-difference fitted constant; the bound constant is fitted on a
/// default sample.
VolterraKernel make_fbm_kernel(double H, double T = 1.0);

/// Riemann-Liouville kernel on [0, T] with alpha = max(0, 1/2 - H).
VolterraKernel make_rl_kernel(double H, double T = 1.0);

// ---------------------------------------------------------------------------
// Growth-bound check
// ---------------------------------------------------------------------------

/// Sampled fit of one of the two growth bounds.
struct BoundFit {
  double implied_const = 0.0;  ///< max ratio |value| / bound-shape over the sample
  double headroom = 0.0;       ///< cap / implied_const
  /// Log-log slope of the worst ratio against the gap t-s (resp. against s)
  /// at the small-scale end of the sample. Negative means the ratio blows up.
  double gap_exponent = 0.0;
  double s_exponent = 0.0;
  bool satisfied = true;
};

struct ConditionReport {
  double alpha = 0.0;
  BoundFit value_bound;       ///< (i)
  BoundFit derivative_bound;  ///< (ii)
  double fitted_const = 0.0;  ///< smallest C satisfying both bounds on the sample
  bool satisfied = true;
};

inline constexpr double kBlowupSlopeTolerance = 0.02;

namespace detail {

inline double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

/// Slope of log(max ratio at level) vs log(scale) over the finest half of the
/// levels. Levels whose max ratio is zero are skipped.
inline double blowup_slope(const std::vector<double>& scales, const std::vector<double>& maxima) {
  std::vector<double> lx, ly;
  const std::size_t start = scales.size() / 2;
  for (std::size_t i = start; i < scales.size(); ++i) {
    if (maxima[i] > 0.0 && std::isfinite(maxima[i])) {
      lx.push_back(std::log(scales[i]));
      ly.push_back(std::log(maxima[i]));
    }
  }
  return lsq_slope(lx, ly);
}

}  // namespace detail

/// Samples (s, t) on a geometric grid s = T rho^i, t - s = T rho^j spanning six
/// decades (never touching s = 0 or s = t) and fits both growth bounds. A bound
/// is reported violated when its implied constant exceeds `cap` or its worst
/// ratio grows as a power of the gap or of s toward the small-scale end.
inline ConditionReport verify_condition(const VolterraKernel& kernel, int n_samples, double cap) {
  if (n_samples < 10) throw std::invalid_argument("verify_condition: n_samples must be >= 10");
  const double T = kernel.horizon();
  const double a = kernel.alpha();
  const double rho = std::pow(1e-6, 1.0 / (n_samples - 1));

  std::vector<double> scales(n_samples);
  for (int i = 0; i < n_samples; ++i) scales[i] = T * std::pow(rho, i);

  // [bound][direction][level] worst ratios.
  std::vector<double> gap_max[2], s_max[2];
  for (int b = 0; b < 2; ++b) {
    gap_max[b].assign(n_samples, 0.0);
    s_max[b].assign(n_samples, 0.0);
  }
  double implied[2] = {0.0, 0.0};

  for (int i = 0; i < n_samples; ++i) {
    const double s = scales[i] * (1.0 - 1e-9);
    for (int j = 0; j < n_samples; ++j) {
      const double gap = scales[j];
      const double t = s + gap;
      if (t > T) continue;
      const double r_value = std::abs(kernel(t, s)) / (std::pow(s, -a) * std::pow(gap, -a));
      const double r_deriv = std::abs(kernel.dt(t, s)) / std::pow(gap, -(a + 1.0));
      const double r[2] = {r_value, r_deriv};
      for (int b = 0; b < 2; ++b) {
        implied[b] = std::max(implied[b], r[b]);
        gap_max[b][j] = std::max(gap_max[b][j], r[b]);
        s_max[b][i] = std::max(s_max[b][i], r[b]);
      }
    }
  }

  ConditionReport report;
  report.alpha = a;
  BoundFit* fits[2] = {&report.value_bound, &report.derivative_bound};
  for (int b = 0; b < 2; ++b) {
    BoundFit& f = *fits[b];
    f.implied_const = implied[b];
    f.headroom = implied[b] > 0.0 ? cap / implied[b] : std::numeric_limits<double>::infinity();
    f.gap_exponent = detail::blowup_slope(scales, gap_max[b]);
    f.s_exponent = detail::blowup_slope(scales, s_max[b]);
    f.satisfied = implied[b] <= cap && f.gap_exponent > -kBlowupSlopeTolerance &&
                  f.s_exponent > -kBlowupSlopeTolerance;
  }
  report.fitted_const = std::max(implied[0], implied[1]);
  report.satisfied = report.value_bound.satisfied && report.derivative_bound.satisfied;
  return report;
}

inline VolterraKernel make_fbm_kernel(double H, double T) {
  detail::check_hurst(H);
  const double c2 = fit_fbm_dt_constant(H, T);
  auto eval = [H](double t, double s) { return fbm_kernel_eval(H, t, s); };
  auto eval_dt = [H, c2](double t, double s) {
    if (c2 == 0.0) return 0.0;
    return c2 * std::pow(t / s, H - 0.5) * std::pow(t - s, H - 1.5);
  };
  VolterraKernel k("fbm:H=" + std::to_string(H), T, std::abs(H - 0.5), 0.0, eval, eval_dt);
  return k.with_bound_const(verify_condition(k, 24).fitted_const);
}

inline VolterraKernel make_rl_kernel(double H, double T) {
  detail::check_hurst(H);
  const double c = rl_constant(H);
  auto eval = [c, H](double t, double s) { return c * std::pow(t - s, H - 0.5); };
  auto eval_dt = [c, H](double t, double s) { return c * (H - 0.5) * std::pow(t - s, H - 1.5); };
  VolterraKernel k("rl:H=" + std::to_string(H), T, std::max(0.0, 0.5 - H), 0.0, eval, eval_dt);
  return k.with_bound_const(verify_condition(k, 24).fitted_const);
}

}  // namespace vyoung
