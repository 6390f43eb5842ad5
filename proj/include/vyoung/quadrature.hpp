#pragma once

// Gauss-Legendre rules and graded panel meshes shared by the covariance,
// operator and integrator modules.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace vyoung {

struct QuadNode {
  double x;
  double w;
};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> x;
  std::vector<double> w;
};

inline constexpr int kMaxGaussPoints = 64;

namespace detail {

inline GaussLegendreRule compute_gauss_legendre(int n) {
  GaussLegendreRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged root.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.x[i] = -x;
    rule.w[i] = w;
    rule.x[n - 1 - i] = x;
    rule.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.x[n / 2] = 0.0;
  return rule;
}

}  // namespace detail

/// Cached rule, 1 <= n <= kMaxGaussPoints. The table is immutable after the
/// first call and safe to share between threads.
inline const GaussLegendreRule& gauss_legendre(int n) {
  static const auto table = [] {
    std::array<GaussLegendreRule, kMaxGaussPoints + 1> t;
    for (int k = 1; k <= kMaxGaussPoints; ++k) t[k] = detail::compute_gauss_legendre(k);
    return t;
  }();
  if (n < 1 || n > kMaxGaussPoints)
    throw std::invalid_argument("Gauss-Legendre order out of range");
  return table[n];
}

/// Breakpoints of [a, b] with `levels` panels whose widths shrink by `ratio`
/// toward the endpoint a (toward_a) or b. The innermost panel has width
/// (b - a) * ratio^(levels - 1).
inline std::vector<double> geometric_breaks(double a, double b, bool toward_a, int levels,
                                            double ratio) {
  std::vector<double> br;
  br.reserve(levels + 1);
  const double len = b - a;
  if (toward_a) {
    br.push_back(a);
    for (int k = levels - 1; k >= 1; --k) br.push_back(a + len * std::pow(ratio, k));
    br.push_back(b);
  } else {
    br.push_back(a);
    for (int k = 1; k < levels; ++k) br.push_back(b - len * std::pow(ratio, k));
    std::sort(br.begin() + 1, br.end());
    br.push_back(b);
  }
  return br;
}

/// Mesh of [a, b] split at the midpoint, each half graded geometrically toward
/// its outer endpoint with `per_side` panels.
inline std::vector<double> doubly_graded_breaks(double a, double b, int per_side, double ratio) {
  const double mid = 0.5 * (a + b);
  auto left = geometric_breaks(a, mid, true, per_side, ratio);
  auto right = geometric_breaks(mid, b, false, per_side, ratio);
  left.insert(left.end(), right.begin() + 1, right.end());
  return left;
}

/// Inserts the points of `extra` lying strictly inside (front, back).
inline void merge_breaks(std::vector<double>& breaks, std::span<const double> extra) {
  if (extra.empty() || breaks.size() < 2) return;
  const double lo = breaks.front();
  const double hi = breaks.back();
  for (double x : extra)
    if (x > lo && x < hi) breaks.push_back(x);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
}

/// Appends the composite Gauss-Legendre nodes of every panel in `breaks`.
inline void append_panel_nodes(std::span<const double> breaks, int points,
                               std::vector<QuadNode>& out) {
  const auto& rule = gauss_legendre(points);
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p];
    const double b = breaks[p + 1];
    if (!(b > a)) continue;
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    for (int k = 0; k < points; ++k) out.push_back({c + h * rule.x[k], h * rule.w[k]});
  }
}

inline std::vector<QuadNode> panel_nodes(std::span<const double> breaks, int points) {
  std::vector<QuadNode> out;
  out.reserve((breaks.size() - 1) * points);
  append_panel_nodes(breaks, points, out);
  return out;
}

}  // namespace vyoung
