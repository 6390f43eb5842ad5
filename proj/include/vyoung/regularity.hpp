#pragma once

// Sample grids, 1D and 2D p-variation, and Hoelder (bi-)continuity fits.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vyoung {

/// Strictly increasing sample times.
class Grid1D {
 public:
  explicit Grid1D(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw std::invalid_argument("Grid1D: need at least 2 points");
    for (std::size_t i = 1; i < points_.size(); ++i)
      if (!(points_[i] > points_[i - 1]))
        throw std::invalid_argument("Grid1D: points must be strictly increasing");
  }

  /// n cells of equal width on [0, T].
  static Grid1D uniform(int n, double T = 1.0) {
    if (n < 1) throw std::invalid_argument("Grid1D::uniform: n must be >= 1");
    std::vector<double> p(n + 1);
    for (int i = 0; i <= n; ++i) p[i] = T * i / n;
    p[n] = T;
    return Grid1D(std::move(p));
  }

  std::span<const double> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  std::size_t cells() const noexcept { return points_.size() - 1; }
  double operator[](std::size_t i) const { return points_[i]; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }

  double mesh() const {
    double m = 0.0;
    for (std::size_t i = 1; i < points_.size(); ++i) m = std::max(m, points_[i] - points_[i - 1]);
    return m;
  }

 private:
  std::vector<double> points_;
};

struct Partition2D {
  Grid1D u;
  Grid1D v;

  static Partition2D uniform(int n, double T = 1.0) {
    return {Grid1D::uniform(n, T), Grid1D::uniform(n, T)};
  }
  double mesh() const { return std::max(u.mesh(), v.mesh()); }
};

template <class F>
std::vector<double> sample_1d(const F& f, const Grid1D& g) {
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = f(g[i]);
  return out;
}

/// Matrix of f(u_i, v_j), rows indexed by u.
template <class F>
Eigen::MatrixXd sample_2d(const F& f, const Partition2D& part) {
  Eigen::MatrixXd m(part.u.size(), part.v.size());
  for (std::size_t i = 0; i < part.u.size(); ++i)
    for (std::size_t j = 0; j < part.v.size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f(part.u[i], part.v[j]);
  return m;
}

// ---------------------------------------------------------------------------
// p-variation
// ---------------------------------------------------------------------------

/// Exact p-variation over all subpartitions of the sample grid:
/// best[j] = max_{i<j} best[i] + |x_j - x_i|^p.
inline double pvar_1d(std::span<const double> x, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("pvar_1d: p must be >= 1");
  if (x.size() < 2) throw std::invalid_argument("pvar_1d: need at least 2 samples");
  std::vector<double> best(x.size(), 0.0);
  for (std::size_t j = 1; j < x.size(); ++j) {
    double b = 0.0;
    for (std::size_t i = 0; i < j; ++i) b = std::max(b, best[i] + std::pow(std::abs(x[j] - x[i]), p));
    best[j] = b;
  }
  return std::pow(best.back(), 1.0 / p);
}

namespace detail {

inline std::vector<Eigen::Index> dyadic_indices(Eigen::Index n, Eigen::Index stride) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < n - 1; i += stride) idx.push_back(i);
  idx.push_back(n - 1);
  return idx;
}

inline double grid_pvar_sum(const Eigen::MatrixXd& f, const std::vector<Eigen::Index>& iu,
                            const std::vector<Eigen::Index>& iv, double p) {
  double s = 0.0;
  for (std::size_t a = 0; a + 1 < iu.size(); ++a)
    for (std::size_t b = 0; b + 1 < iv.size(); ++b) {
      const double inc = f(iu[a], iv[b]) + f(iu[a + 1], iv[b + 1]) - f(iu[a], iv[b + 1]) -
                         f(iu[a + 1], iv[b]);
      s += std::pow(std::abs(inc), p);
    }
  return s;
}

}  // namespace detail

/// Lower bound of the 2D p-variation: the largest grid sum over the full grid
/// and every pair of dyadic coarsenings (stride 2^a along u, 2^b along v, last
/// point always kept).
inline double pvar_2d_grid(const Eigen::MatrixXd& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("pvar_2d_grid: p must be >= 1");
  if (f.rows() < 2 || f.cols() < 2) throw std::invalid_argument("pvar_2d_grid: need a 2x2 grid");
  double best = 0.0;
  for (Eigen::Index su = 1; su < f.rows(); su *= 2) {
    const auto iu = detail::dyadic_indices(f.rows(), su);
    for (Eigen::Index sv = 1; sv < f.cols(); sv *= 2)
      best = std::max(best, detail::grid_pvar_sum(f, iu, detail::dyadic_indices(f.cols(), sv), p));
  }
  return std::pow(best, 1.0 / p);
}

// ---------------------------------------------------------------------------
// Hoelder fits
// ---------------------------------------------------------------------------

struct HolderFit {
  double lambda = 1.0;
  double const_c = 0.0;
  double r2 = 1.0;
};

enum class HolderFlavor { bi_continuous, strongly_bi_continuous };

inline const char* to_string(HolderFlavor f) {
  return f == HolderFlavor::strongly_bi_continuous ? "strongly_bi_continuous" : "bi_continuous";
}

struct HolderProfile {
  double lambda = 1.0;
  double const_c = 0.0;
  HolderFlavor flavor = HolderFlavor::bi_continuous;
  double fit_r2 = 1.0;
  // Diagnostics of the 2D fit.
  double lambda_u = 1.0;
  double lambda_v = 1.0;
  double rect_lambda = 1.0;  ///< per-axis exponent of the rectangular bound
  double rect_const = 0.0;
};

inline constexpr double kFitSlack = 0.1;

namespace detail {

/// Dyadic scales T 2^-k, k >= 1, down to twice the mesh.
inline std::vector<double> dyadic_scales(double span, double mesh) {
  std::vector<double> h;
  for (double x = 0.5 * span; x >= 2.0 * mesh * (1.0 - 1e-12); x *= 0.5) h.push_back(x);
  return h;
}

/// Index of the farthest point with t[j] - t[i] <= h (tolerant to rounding).
inline std::size_t reach(std::span<const double> t, std::size_t i, double h) {
  std::size_t j = i;
  while (j + 1 < t.size() && t[j + 1] - t[i] <= h * (1.0 + 1e-12)) ++j;
  return j;
}

struct LogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
};

inline LogFit log_log_fit(const std::vector<double>& h, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < h.size(); ++i)
    if (y[i] > 0.0) {
      lx.push_back(std::log(h[i]));
      ly.push_back(std::log(y[i]));
    }
  LogFit f;
  const std::size_t n = lx.size();
  if (n < 2) return f;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

/// max over scales of y(h) / h^e.
inline double sup_ratio(const std::vector<double>& h, const std::vector<double>& y, double e) {
  double c = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) c = std::max(c, y[i] / std::pow(h[i], e));
  return c;
}

inline bool all_below(const std::vector<double>& y, double eps) {
  return std::all_of(y.begin(), y.end(), [eps](double v) { return v <= eps; });
}

}  // namespace detail

/// Oscillation osc(h) = max_{|t1-t2| <= h} |f(t1) - f(t2)| at dyadic h,
/// fitted as C h^lambda by log-log least squares.
inline HolderFit holder_fit_1d(const Grid1D& g, std::span<const double> f) {
  if (g.size() < 8) throw std::invalid_argument("holder_fit_1d: need at least 8 samples");
  if (f.size() != g.size()) throw std::invalid_argument("holder_fit_1d: size mismatch");
  const auto t = g.points();
  const auto hs = detail::dyadic_scales(g.back() - g.front(), g.mesh());
  std::vector<double> osc(hs.size(), 0.0);
  for (std::size_t k = 0; k < hs.size(); ++k)
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::size_t j_end = detail::reach(t, i, hs[k]);
      for (std::size_t j = i + 1; j <= j_end; ++j) osc[k] = std::max(osc[k], std::abs(f[j] - f[i]));
    }
  HolderFit out;
  const double scale = std::max(1.0, *std::max_element(f.begin(), f.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  }));
  if (detail::all_below(osc, 1e-14 * scale)) return {1.0, 0.0, 1.0};
  const auto lf = detail::log_log_fit(hs, osc);
  out.lambda = lf.slope;
  out.const_c = std::exp(lf.intercept);
  out.r2 = lf.r2;
  return out;
}

/// Fits the directional bounds of each variable and the rectangular bound
/// |rect| <= C (du dv)^a. The profile is strongly bi-continuous when the
/// per-axis rectangular exponent a reaches min(lambda_u, lambda_v) - kFitSlack,
/// or when rectangular increments vanish. Constants are the sup of the
/// sampled ratios at the dyadic scales.
inline HolderProfile holder_bifit_2d(const Partition2D& part, const Eigen::MatrixXd& f) {
  if (part.u.size() < 8 || part.v.size() < 8)
    throw std::invalid_argument("holder_bifit_2d: need at least 8 points per axis");
  if (f.rows() != static_cast<Eigen::Index>(part.u.size()) ||
      f.cols() != static_cast<Eigen::Index>(part.v.size()))
    throw std::invalid_argument("holder_bifit_2d: size mismatch");
  const auto tu = part.u.points();
  const auto tv = part.v.points();
  const double span = std::max(part.u.back() - part.u.front(), part.v.back() - part.v.front());
  const auto hs = detail::dyadic_scales(span, part.mesh());
  const std::size_t K = hs.size();
  std::vector<double> osc_u(K, 0.0), osc_v(K, 0.0), osc_r(K, 0.0);
  const auto nu = static_cast<Eigen::Index>(tu.size());
  const auto nv = static_cast<Eigen::Index>(tv.size());

  for (std::size_t k = 0; k < K; ++k) {
    std::vector<std::size_t> ru(tu.size()), rv(tv.size());
    for (std::size_t i = 0; i < tu.size(); ++i) ru[i] = detail::reach(tu, i, hs[k]);
    for (std::size_t j = 0; j < tv.size(); ++j) rv[j] = detail::reach(tv, j, hs[k]);
    for (Eigen::Index i = 0; i < nu; ++i)
      for (Eigen::Index j = 0; j < nv; ++j) {
        for (auto i2 = static_cast<Eigen::Index>(i + 1); i2 <= static_cast<Eigen::Index>(ru[i]); ++i2)
          osc_u[k] = std::max(osc_u[k], std::abs(f(i2, j) - f(i, j)));
        for (auto j2 = static_cast<Eigen::Index>(j + 1); j2 <= static_cast<Eigen::Index>(rv[j]); ++j2)
          osc_v[k] = std::max(osc_v[k], std::abs(f(i, j2) - f(i, j)));
        const auto i2 = static_cast<Eigen::Index>(ru[i]);
        const auto j2 = static_cast<Eigen::Index>(rv[j]);
        if (i2 > i && j2 > j)
          osc_r[k] = std::max(osc_r[k], std::abs(f(i, j) + f(i2, j2) - f(i, j2) - f(i2, j)));
      }
  }

  const double scale = std::max(1.0, f.cwiseAbs().maxCoeff());
  const double zero_eps = 1e-12 * scale;
  HolderProfile p;
  double c_u = 0.0, c_v = 0.0, r2_u = 1.0, r2_v = 1.0;
  if (!detail::all_below(osc_u, zero_eps)) {
    const auto lf = detail::log_log_fit(hs, osc_u);
    p.lambda_u = std::min(1.0, lf.slope);
    r2_u = lf.r2;
    c_u = detail::sup_ratio(hs, osc_u, p.lambda_u);
  }
  if (!detail::all_below(osc_v, zero_eps)) {
    const auto lf = detail::log_log_fit(hs, osc_v);
    p.lambda_v = std::min(1.0, lf.slope);
    r2_v = lf.r2;
    c_v = detail::sup_ratio(hs, osc_v, p.lambda_v);
  }
  const double lambda = std::min(p.lambda_u, p.lambda_v);
  p.fit_r2 = std::min(r2_u, r2_v);

  bool strong = false;
  if (detail::all_below(osc_r, zero_eps)) {
    // Additive field: the rectangular bound holds with any exponent.
    strong = true;
    p.rect_lambda = lambda;
    p.rect_const = 0.0;
  } else {
    const auto lf = detail::log_log_fit(hs, osc_r);
    p.rect_lambda = 0.5 * lf.slope;
    p.rect_const = detail::sup_ratio(hs, osc_r, 2.0 * p.rect_lambda);
    strong = p.rect_lambda >= lambda - kFitSlack;
  }
  p.lambda = lambda;
  p.flavor = strong ? HolderFlavor::strongly_bi_continuous : HolderFlavor::bi_continuous;
  p.const_c = std::max({c_u, c_v, strong ? detail::sup_ratio(hs, osc_r, 2.0 * lambda) : 0.0});
  return p;
}

/// A lambda-Hoelder bi-continuous field is strongly lambda/2-Hoelder
/// bi-continuous: |rect| <= min(2C du^l, 2C dv^l) <= 2C du^(l/2) dv^(l/2), and
/// lowering the directional exponent to l/2 costs a factor T^(l/2) on [0,T].
inline HolderProfile strong_downgrade(const HolderProfile& p, double T = 1.0) {
  if (p.flavor != HolderFlavor::bi_continuous)
    throw std::invalid_argument("strong_downgrade: profile must be bi_continuous");
  HolderProfile out = p;
  out.lambda = 0.5 * p.lambda;
  out.const_c = 2.0 * p.const_c * std::max(1.0, std::pow(T, 0.5 * p.lambda));
  out.flavor = HolderFlavor::strongly_bi_continuous;
  out.rect_lambda = out.lambda;
  out.rect_const = out.const_c;
  return out;
}

}  // namespace vyoung
