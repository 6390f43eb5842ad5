#pragma once

// The operators K*, A^K, B^K and K* (x) K*:
//   K* phi(s)      = phi(s) K(T,s) + A^K(phi)(s)
//   A^K(phi)(s)    = int_s^T [phi(r) - phi(s)] dK/dr(r,s) dr
//   B^K(psi)(u,v)  = int_v^T int_u^T psi-rectangular-increment over
//                    [u,r1]x[v,r2] against dK(r1,u) dK(r2,v)
//   K*(x)K* psi    = psi(u,v) K(T,u) K(T,v) + K(T,v) A^K(psi(.,v))(u)
//                    + K(T,u) A^K(psi(u,.))(v) + B^K(psi)(u,v)
// Values may be real scalars or Eigen vectors. The difference phi(r) - phi(s)
// is never expanded, so the integrand keeps its integrable (r-s)^(l-a-1)
// behaviour and is resolved on a mesh graded toward r = s.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "vyoung/errors.hpp"
#include "vyoung/kernels.hpp"
#include "vyoung/quadrature.hpp"
#include "vyoung/regularity.hpp"

namespace vyoung {

struct SingularQuad {
  int panels = 24;
  double grading_exponent = 1.0;
  int points_per_panel = 8;
  /// Expected Hoelder exponent of phi(r) - phi(s).
  double holder_lambda_hint = 1.0;
  /// Checked by the *_with_error variants only.
  double abs_tol = std::numeric_limits<double>::infinity();

  void validate() const {
    if (panels < 4) throw std::invalid_argument("SingularQuad: panels must be >= 4");
    if (points_per_panel < 1 || points_per_panel + 2 > kMaxGaussPoints)
      throw std::invalid_argument("SingularQuad: points_per_panel out of range");
  }

  /// max(grading_exponent, 1/(lambda - alpha)) clamped to [1, 8].
  double effective_grading(double alpha) const {
    const double gap = holder_lambda_hint - alpha;
    const double need = gap > 0.0 ? 1.0 / gap : 8.0;
    return std::clamp(std::max(grading_exponent, need), 1.0, 8.0);
  }

  /// Number of halving levels toward the singular endpoint.
  int levels(double alpha) const {
    return std::max(panels, static_cast<int>(std::ceil(8.0 * effective_grading(alpha))));
  }
};

template <class V>
struct ValueWithError {
  V value;
  double error;
};

namespace detail {

inline double value_norm(double x) { return std::abs(x); }
template <class Derived>
double value_norm(const Eigen::MatrixBase<Derived>& x) {
  return x.norm();
}

template <class V>
V zero_like(const V& v) {
  if constexpr (std::is_arithmetic_v<V>) {
    return V{0};
  } else {
    return V(v * 0.0);
  }
}

/// Nodes r_a in (s, T) with weights w_a * dK/dr(r_a, s).
struct SingularNodes {
  std::vector<double> r;
  std::vector<double> w;
};

inline std::vector<double> singular_breaks(const VolterraKernel& k, double s,
                                           const SingularQuad& q,
                                           std::span<const double> extra) {
  auto br = geometric_breaks(s, k.horizon(), true, q.levels(k.alpha()), 0.5);
  merge_breaks(br, extra);
  return br;
}

inline SingularNodes singular_nodes(const VolterraKernel& k, double s,
                                    std::span<const double> breaks, int points) {
  std::vector<QuadNode> nodes;
  nodes.reserve((breaks.size() - 1) * points);
  append_panel_nodes(breaks, points, nodes);
  SingularNodes out;
  out.r.reserve(nodes.size());
  out.w.reserve(nodes.size());
  for (const auto& n : nodes) {
    out.r.push_back(n.x);
    out.w.push_back(n.w * k.dt(n.x, s));
  }
  return out;
}

inline void check_interior(const VolterraKernel& k, double s, const char* what) {
  if (!(s > 0.0 && s < k.horizon())) throw DomainError(std::string(what) + ": point must lie in (0, T)");
}

template <class Phi>
auto ak_on_nodes(const Phi& phi, double s, const SingularNodes& n) {
  using V = std::decay_t<decltype(phi(s))>;
  const V phi_s = phi(s);
  V acc = zero_like(phi_s);
  for (std::size_t a = 0; a < n.r.size(); ++a) acc += n.w[a] * (phi(n.r[a]) - phi_s);
  return acc;
}

template <class Psi>
auto tensor_on_nodes(const VolterraKernel& k, const Psi& psi, double u, double v,
                     const SingularNodes& nu, const SingularNodes& nv) {
  using V = std::decay_t<decltype(psi(u, v))>;
  const double T = k.horizon();
  const double ktu = k(T, u);
  const double ktv = k(T, v);
  const V p_uv = psi(u, v);

  // psi(r_a, v) and psi(u, r_b) are reused by the cross terms and by B.
  std::vector<V> p_av, p_ub;
  p_av.reserve(nu.r.size());
  p_ub.reserve(nv.r.size());
  for (double r : nu.r) p_av.push_back(psi(r, v));
  for (double r : nv.r) p_ub.push_back(psi(u, r));

  V a_u = zero_like(p_uv);
  for (std::size_t a = 0; a < nu.r.size(); ++a) a_u += nu.w[a] * (p_av[a] - p_uv);
  V a_v = zero_like(p_uv);
  for (std::size_t b = 0; b < nv.r.size(); ++b) a_v += nv.w[b] * (p_ub[b] - p_uv);

  V bk = zero_like(p_uv);
  for (std::size_t a = 0; a < nu.r.size(); ++a) {
    V row = zero_like(p_uv);
    for (std::size_t b = 0; b < nv.r.size(); ++b)
      row += nv.w[b] * (psi(nu.r[a], nv.r[b]) - p_ub[b] - p_av[a] + p_uv);
    bk += nu.w[a] * row;
  }
  struct Parts {
    V boundary, a_u, a_v, b;
    double ktu, ktv;
    V total() const { return V(boundary + ktv * a_u + ktu * a_v + b); }
  };
  return Parts{V(p_uv * (ktu * ktv)), a_u, a_v, bk, ktu, ktv};
}

template <class V>
void check_tolerance(const ValueWithError<V>& r, const SingularQuad& q, const char* what) {
  if (r.error > q.abs_tol)
    throw AccuracyError(std::string(what) + ": quadrature error estimate above tolerance", r.error,
                        q.abs_tol);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// One-dimensional operators
// ---------------------------------------------------------------------------

/// A^K(phi)(s). `breaks` lists points where phi jumps; the mesh is split there.
template <class Phi>
auto ak_apply(const VolterraKernel& k, const Phi& phi, double s, const SingularQuad& q = {},
              std::span<const double> breaks = {}) {
  q.validate();
  detail::check_interior(k, s, "ak_apply");
  const auto br = detail::singular_breaks(k, s, q, breaks);
  return detail::ak_on_nodes(phi, s, detail::singular_nodes(k, s, br, q.points_per_panel));
}

/// K* phi(s) = phi(s) K(T,s) + A^K(phi)(s), sharing A^K's quadrature path.
template <class Phi>
auto kstar_apply(const VolterraKernel& k, const Phi& phi, double s, const SingularQuad& q = {},
                 std::span<const double> breaks = {}) {
  using V = std::decay_t<decltype(phi(s))>;
  const V ak = ak_apply(k, phi, s, q, breaks);
  return V(phi(s) * k(k.horizon(), s) + ak);
}

/// A^K with the estimate |Q_n - Q_{n+2}|; the (n+2)-point value is returned.
template <class Phi>
auto ak_apply_with_error(const VolterraKernel& k, const Phi& phi, double s,
                         const SingularQuad& q = {}, std::span<const double> breaks = {}) {
  using V = std::decay_t<decltype(phi(s))>;
  q.validate();
  detail::check_interior(k, s, "ak_apply");
  const auto br = detail::singular_breaks(k, s, q, breaks);
  const V coarse = detail::ak_on_nodes(phi, s, detail::singular_nodes(k, s, br, q.points_per_panel));
  const V fine =
      detail::ak_on_nodes(phi, s, detail::singular_nodes(k, s, br, q.points_per_panel + 2));
  ValueWithError<V> out{fine, detail::value_norm(V(fine - coarse))};
  detail::check_tolerance(out, q, "ak_apply");
  return out;
}

template <class Phi>
auto kstar_apply_with_error(const VolterraKernel& k, const Phi& phi, double s,
                            const SingularQuad& q = {}, std::span<const double> breaks = {}) {
  using V = std::decay_t<decltype(phi(s))>;
  auto r = ak_apply_with_error(k, phi, s, q, breaks);
  return ValueWithError<V>{V(phi(s) * k(k.horizon(), s) + r.value), r.error};
}

/// K*(1_[a,b))(s) = K(b,s) - K(a,s), with K(x,s) = 0 for s >= x.
inline double kstar_indicator(const VolterraKernel& k, double a, double b, double s) {
  if (!(a >= 0.0 && a < b && b <= k.horizon()))
    throw std::invalid_argument("kstar_indicator: need 0 <= a < b <= T");
  return k(b, s) - k(a, s);
}

/// K* of the step function equal to c[i] on [t_i, t_{i+1}).
inline double kstar_step_1d(const VolterraKernel& k, const Grid1D& g, std::span<const double> c,
                            double s) {
  if (c.size() != g.cells()) throw std::invalid_argument("kstar_step_1d: coefficient count");
  double acc = 0.0;
  double k_lo = k(g[0], s);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double k_hi = k(g[i + 1], s);
    acc += c[i] * (k_hi - k_lo);
    k_lo = k_hi;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Two-dimensional operators
// ---------------------------------------------------------------------------

/// B^K(psi)(u,v) by tensor-product quadrature on the two graded meshes.
template <class Psi>
auto bk_apply(const VolterraKernel& k, const Psi& psi, double u, double v,
              const SingularQuad& q = {}, std::span<const double> breaks_u = {},
              std::span<const double> breaks_v = {}) {
  q.validate();
  detail::check_interior(k, u, "bk_apply");
  detail::check_interior(k, v, "bk_apply");
  const auto nu = detail::singular_nodes(k, u, detail::singular_breaks(k, u, q, breaks_u),
                                         q.points_per_panel);
  const auto nv = detail::singular_nodes(k, v, detail::singular_breaks(k, v, q, breaks_v),
                                         q.points_per_panel);
  return detail::tensor_on_nodes(k, psi, u, v, nu, nv).b;
}

/// (K* (x) K*) psi (u,v).
template <class Psi>
auto kstar_tensor(const VolterraKernel& k, const Psi& psi, double u, double v,
                  const SingularQuad& q = {}, std::span<const double> breaks_u = {},
                  std::span<const double> breaks_v = {}) {
  q.validate();
  detail::check_interior(k, u, "kstar_tensor");
  detail::check_interior(k, v, "kstar_tensor");
  const auto nu = detail::singular_nodes(k, u, detail::singular_breaks(k, u, q, breaks_u),
                                         q.points_per_panel);
  const auto nv = detail::singular_nodes(k, v, detail::singular_breaks(k, v, q, breaks_v),
                                         q.points_per_panel);
  return detail::tensor_on_nodes(k, psi, u, v, nu, nv).total();
}

template <class Psi>
auto kstar_tensor_with_error(const VolterraKernel& k, const Psi& psi, double u, double v,
                             const SingularQuad& q = {}, std::span<const double> breaks_u = {},
                             std::span<const double> breaks_v = {}) {
  using V = std::decay_t<decltype(psi(u, v))>;
  q.validate();
  detail::check_interior(k, u, "kstar_tensor");
  detail::check_interior(k, v, "kstar_tensor");
  const auto bu = detail::singular_breaks(k, u, q, breaks_u);
  const auto bv = detail::singular_breaks(k, v, q, breaks_v);
  const int n = q.points_per_panel;
  const V coarse = detail::tensor_on_nodes(k, psi, u, v, detail::singular_nodes(k, u, bu, n),
                                           detail::singular_nodes(k, v, bv, n))
                       .total();
  const V fine = detail::tensor_on_nodes(k, psi, u, v, detail::singular_nodes(k, u, bu, n + 2),
                                         detail::singular_nodes(k, v, bv, n + 2))
                     .total();
  ValueWithError<V> out{fine, detail::value_norm(V(fine - coarse))};
  detail::check_tolerance(out, q, "kstar_tensor");
  return out;
}

/// Quadrature-free (K* (x) K*) psi^pi (r1, r2) for the step field equal to
/// c(i, j) on [u_i, u_{i+1}) x [v_j, v_{j+1}):
///   sum_ij c(i,j) [K(u_{i+1},r1) - K(u_i,r1)] [K(v_{j+1},r2) - K(v_j,r2)].
inline double kstar_tensor_step(const VolterraKernel& k, const Partition2D& part,
                                const Eigen::MatrixXd& c, double r1, double r2) {
  if (c.rows() != static_cast<Eigen::Index>(part.u.cells()) ||
      c.cols() != static_cast<Eigen::Index>(part.v.cells()))
    throw std::invalid_argument("kstar_tensor_step: coefficient shape must be cells_u x cells_v");
  Eigen::VectorXd du(c.rows()), dv(c.cols());
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    du(i) = kstar_indicator(k, part.u[i], part.u[i + 1], r1);
  for (Eigen::Index j = 0; j < c.cols(); ++j)
    dv(j) = kstar_indicator(k, part.v[j], part.v[j + 1], r2);
  return du.dot(c * dv);
}

/// Left-endpoint coefficients psi(u_i, v_j) of the step approximation psi^pi.
template <class Psi>
Eigen::MatrixXd step_coefficients(const Psi& psi, const Partition2D& part) {
  Eigen::MatrixXd c(part.u.cells(), part.v.cells());
  for (std::size_t i = 0; i < part.u.cells(); ++i)
    for (std::size_t j = 0; j < part.v.cells(); ++j)
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = psi(part.u[i], part.v[j]);
  return c;
}

}  // namespace vyoung
