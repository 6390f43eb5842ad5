#pragma once

// 2D Young-Stieltjes Riemann sums against covariance functions, refinement
// reports, and the identities linking Riemann-sum limits to diagonal
// integrals of K* (x) K*.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "vyoung/covariance.hpp"
#include "vyoung/kernels.hpp"
#include "vyoung/operators.hpp"
#include "vyoung/parallel.hpp"
#include "vyoung/quadrature.hpp"
#include "vyoung/regularity.hpp"

namespace vyoung {

struct ConvergenceRow {
  double mesh;
  double value;
  double delta;  ///< value minus previous value; NaN on the first row
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  double fitted_rate = 0.0;
  bool converged = false;
  double final_value = 0.0;
};

struct IdentityResidual {
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_residual = 0.0;
  double rel_residual = 0.0;
  bool lhs_converged = true;
  bool capped = false;  ///< lhs evaluated below the requested resolution
  ConvergenceReport lhs_report;
};

inline IdentityResidual make_residual(double lhs, double rhs) {
  IdentityResidual r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.abs_residual = std::abs(lhs - rhs);
  r.rel_residual = rhs != 0.0 ? r.abs_residual / std::abs(rhs) : r.abs_residual;
  return r;
}

/// Least-squares slope of log y against log mesh over the last max(3, m-1)
/// rows; rows with y <= 0 or non-finite are skipped. 0 when fewer than two
/// usable rows remain.
inline double fit_power_rate(std::span<const double> mesh, std::span<const double> y) {
  const std::size_t m = mesh.size();
  const std::size_t use = std::min(m, std::max<std::size_t>(3, m > 0 ? m - 1 : 0));
  std::vector<double> mx, my;
  for (std::size_t i = m - use; i < m; ++i)
    if (y[i] > 0.0 && std::isfinite(y[i])) {
      mx.push_back(mesh[i]);
      my.push_back(y[i]);
    }
  return mx.size() < 2 ? 0.0 : detail::log_log_fit(mx, my).slope;
}

/// Fit of |delta| against mesh (the Cauchy rate of a refinement sequence).
inline double delta_rate(const std::vector<ConvergenceRow>& rows) {
  std::vector<double> m, d;
  for (const auto& r : rows)
    if (std::isfinite(r.delta)) {
      m.push_back(r.mesh);
      d.push_back(std::abs(r.delta));
    }
  return fit_power_rate(m, d);
}

/// Fit of the values themselves against mesh, for sequences tending to 0.
inline double value_rate(const std::vector<ConvergenceRow>& rows) {
  std::vector<double> m, v;
  for (const auto& r : rows) {
    m.push_back(r.mesh);
    v.push_back(std::abs(r.value));
  }
  return fit_power_rate(m, v);
}

/// True when the values decrease along the rows with at most `allowed`
/// non-decreasing steps.
inline bool decreasing_with_slack(const std::vector<ConvergenceRow>& rows, int allowed = 1) {
  int bad = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].value < rows[i - 1].value)) ++bad;
  return bad <= allowed;
}

// ---------------------------------------------------------------------------
// Riemann sums
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> union_points(std::span<const Partition2D> parts, bool along_u) {
  std::vector<double> pts;
  for (const auto& p : parts) {
    const auto g = along_u ? p.u.points() : p.v.points();
    pts.insert(pts.end(), g.begin(), g.end());
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

inline std::vector<Eigen::Index> locate(std::span<const double> all, std::span<const double> pts) {
  std::vector<Eigen::Index> idx(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto it = std::lower_bound(all.begin(), all.end(), pts[i]);
    if (it == all.end() || *it != pts[i]) throw std::logic_error("locate: point not in union");
    idx[i] = it - all.begin();
  }
  return idx;
}

}  // namespace detail

/// Values of an integrator g on the union of the nodes of several partitions,
/// evaluated once. Covariance functions are filled symmetrically when the
/// two node sets coincide.
class IntegratorTable {
 public:
  template <class G>
  IntegratorTable(const G& g, std::span<const Partition2D> parts, Threads threads = {})
      : u_(detail::union_points(parts, true)), v_(detail::union_points(parts, false)) {
    const auto nu = static_cast<Eigen::Index>(u_.size());
    const auto nv = static_cast<Eigen::Index>(v_.size());
    vals_.resize(nu, nv);
    const bool sym = std::is_same_v<std::decay_t<G>, CovarianceFunction> && u_ == v_;
    parallel_for(
        u_.size(),
        [&](std::size_t i) {
          const auto ii = static_cast<Eigen::Index>(i);
          for (Eigen::Index j = sym ? ii : 0; j < nv; ++j) vals_(ii, j) = g(u_[i], v_[j]);
        },
        threads);
    if (sym)
      for (Eigen::Index i = 0; i < nu; ++i)
        for (Eigen::Index j = 0; j < i; ++j) vals_(i, j) = vals_(j, i);
  }

  /// Rectangular increments of g on the cells of `part`, shape cells_u x cells_v.
  Eigen::MatrixXd cell_increments(const Partition2D& part) const {
    const auto iu = detail::locate(u_, part.u.points());
    const auto iv = detail::locate(v_, part.v.points());
    Eigen::MatrixXd d(part.u.cells(), part.v.cells());
    for (std::size_t i = 0; i + 1 < iu.size(); ++i)
      for (std::size_t j = 0; j + 1 < iv.size(); ++j)
        d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            vals_(iu[i], iv[j]) + vals_(iu[i + 1], iv[j + 1]) - vals_(iu[i], iv[j + 1]) -
            vals_(iu[i + 1], iv[j]);
    return d;
  }

  /// Samples of g on the nodes of `part`.
  Eigen::MatrixXd samples(const Partition2D& part) const {
    const auto iu = detail::locate(u_, part.u.points());
    const auto iv = detail::locate(v_, part.v.points());
    Eigen::MatrixXd s(iu.size(), iv.size());
    for (std::size_t i = 0; i < iu.size(); ++i)
      for (std::size_t j = 0; j < iv.size(); ++j)
        s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vals_(iu[i], iv[j]);
    return s;
  }

 private:
  std::vector<double> u_, v_;
  Eigen::MatrixXd vals_;
};

namespace detail {

/// sum_ij f(u_i, v_j) d(i, j), rows in parallel, pairwise reductions.
template <class F>
double tagged_sum(const F& f, const Partition2D& part, const Eigen::MatrixXd& d, Threads threads) {
  const std::size_t nu = part.u.cells();
  const std::size_t nv = part.v.cells();
  std::vector<double> rows(nu);
  parallel_for(
      nu,
      [&](std::size_t i) {
        std::vector<double> terms(nv);
        for (std::size_t j = 0; j < nv; ++j)
          terms[j] = f(part.u[i], part.v[j]) *
                     d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        rows[i] = pairwise_sum(terms);
      },
      threads);
  return pairwise_sum(rows);
}

}  // namespace detail

/// sum_ij f(u_i, v_j) g-rect(cell_ij), left-endpoint tags.
template <class F, class G>
double riemann_sum_2d(const F& f, const G& g, const Partition2D& part, Threads threads = {}) {
  const IntegratorTable table(g, std::span<const Partition2D>(&part, 1), threads);
  return detail::tagged_sum(f, part, table.cell_increments(part), threads);
}

/// Riemann sums along a mesh-decreasing schedule (g is evaluated once on the
/// union of all nodes). converged: |delta| < tol on the last two steps.
template <class F, class G>
ConvergenceReport young_integrate_2d(const F& f, const G& g, std::span<const Partition2D> schedule,
                                     double tol, Threads threads = {}) {
  if (schedule.size() < 3) throw std::invalid_argument("young_integrate_2d: need >= 3 partitions");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (!(schedule[i].mesh() < schedule[i - 1].mesh()))
      throw std::invalid_argument("young_integrate_2d: schedule must be strictly mesh-decreasing");
  const IntegratorTable table(g, schedule, threads);
  ConvergenceReport rep;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (const auto& part : schedule) {
    const double val = detail::tagged_sum(f, part, table.cell_increments(part), threads);
    rep.rows.push_back({part.mesh(), val, val - prev});
    prev = val;
  }
  const std::size_t m = rep.rows.size();
  rep.converged = std::abs(rep.rows[m - 1].delta) < tol && std::abs(rep.rows[m - 2].delta) < tol;
  rep.final_value = rep.rows.back().value;
  rep.fitted_rate = delta_rate(rep.rows);
  return rep;
}

inline std::vector<Partition2D> uniform_schedule(std::span<const int> ns, double T = 1.0) {
  std::vector<Partition2D> out;
  out.reserve(ns.size());
  for (int n : ns) out.push_back(Partition2D::uniform(n, T));
  return out;
}

// ---------------------------------------------------------------------------
// Identities
// ---------------------------------------------------------------------------

struct IdentityOptions {
  std::vector<int> schedule = {8, 16, 32, 64, 128, 256};
  /// Integrator of the Riemann-sum side; defaults to the kernel-derived covariance.
  std::optional<CovarianceFunction> covariance;
  QuadratureScheme cov_quad;
  double tol = 1e-3;
  /// Outer 1D rule on [0,T]: halving levels per side and points per panel.
  int outer_levels = 16;
  int outer_points = 8;
  /// Outer 2D rule of the iterated identity (per axis).
  int outer2d_levels = 6;
  int outer2d_points = 6;
  /// Largest n per axis of the 4-fold Riemann sum.
  int fourfold_cap = 64;
  Threads threads;
};

namespace detail {

inline std::vector<QuadNode> outer_nodes(double T, int levels, int points) {
  return panel_nodes(doubly_graded_breaks(0.0, T, levels, 0.5), points);
}

/// sum_a w_a h(x_a), evaluated in parallel and reduced pairwise.
template <class H>
double outer_integral(std::span<const QuadNode> nodes, const H& h, Threads threads) {
  std::vector<double> terms(nodes.size());
  parallel_for(
      nodes.size(), [&](std::size_t a) { terms[a] = nodes[a].w * h(nodes[a].x); }, threads);
  return pairwise_sum(terms);
}

inline CovarianceFunction identity_covariance(const VolterraKernel& k, const IdentityOptions& o) {
  return o.covariance ? *o.covariance : CovarianceFunction::kernel_derived(k, o.cov_quad);
}

template <class Phi>
IdentityResidual finish_identity(const Phi& phi, const VolterraKernel& k, const IdentityOptions& o,
                                 double rhs) {
  const auto R = identity_covariance(k, o);
  const auto sched = uniform_schedule(o.schedule, k.horizon());
  auto rep = young_integrate_2d(phi, R, sched, o.tol, o.threads);
  auto res = make_residual(rep.final_value, rhs);
  res.lhs_converged = rep.converged;
  res.lhs_report = std::move(rep);
  return res;
}

}  // namespace detail

/// lhs: Riemann sums of phi dR; rhs: int_0^T (K* (x) K*) phi (r, r) dr.
template <class Phi>
IdentityResidual diagonal_identity(const VolterraKernel& k, const Phi& phi,
                                   const SingularQuad& q = {}, const IdentityOptions& o = {}) {
  const auto nodes = detail::outer_nodes(k.horizon(), o.outer_levels, o.outer_points);
  const double rhs = detail::outer_integral(
      nodes, [&](double r) { return kstar_tensor(k, phi, r, r, q); }, o.threads);
  return detail::finish_identity(phi, k, o, rhs);
}

/// phi(s,t) = phi1(s) phi2(t); rhs: int_0^T K*phi1(r) K*phi2(r) dr.
template <class Phi1, class Phi2>
IdentityResidual product_identity(const VolterraKernel& k, const Phi1& phi1, const Phi2& phi2,
                                  const SingularQuad& q = {}, const IdentityOptions& o = {}) {
  const auto nodes = detail::outer_nodes(k.horizon(), o.outer_levels, o.outer_points);
  const double rhs = detail::outer_integral(
      nodes, [&](double r) { return kstar_apply(k, phi1, r, q) * kstar_apply(k, phi2, r, q); },
      o.threads);
  auto phi = [&](double s, double t) { return phi1(s) * phi2(t); };
  return detail::finish_identity(phi, k, o, rhs);
}

/// lhs: sum_ijkl psi1(q_i,s_j) psi2(r_k,t_l) R-rect(q_i,r_k) R-rect(s_j,t_l) on
/// a uniform n x n grid (n capped at fourfold_cap), contracted as
/// sum_ij A_ij (D B D^T)_ij with D the matrix of cell increments of R.
/// rhs: tensor Gauss-Legendre integral of (K*(x)K* psi1)(K*(x)K* psi2) over [0,T]^2.
template <class Psi1, class Psi2>
IdentityResidual iterated_identity(const VolterraKernel& k, const Psi1& psi1, const Psi2& psi2,
                                   int n, const SingularQuad& q = {},
                                   const IdentityOptions& o = {}) {
  if (n < 1) throw std::invalid_argument("iterated_identity: n must be >= 1");
  const int n_used = std::min(n, o.fourfold_cap);
  const double T = k.horizon();

  const auto R = detail::identity_covariance(k, o);
  const auto part = Partition2D::uniform(n_used, T);
  const IntegratorTable table(R, std::span<const Partition2D>(&part, 1), o.threads);
  const Eigen::MatrixXd D = table.cell_increments(part);
  const Eigen::MatrixXd A = step_coefficients(psi1, part);
  const Eigen::MatrixXd B = step_coefficients(psi2, part);
  const Eigen::MatrixXd M = D * B * D.transpose();
  const double lhs = A.cwiseProduct(M).sum();

  const auto nodes = detail::outer_nodes(T, o.outer2d_levels, o.outer2d_points);
  const std::size_t m = nodes.size();
  std::vector<double> terms(m * m);
  parallel_for(
      m * m,
      [&](std::size_t idx) {
        const auto& a = nodes[idx / m];
        const auto& b = nodes[idx % m];
        terms[idx] = a.w * b.w * kstar_tensor(k, psi1, a.x, b.x, q) *
                     kstar_tensor(k, psi2, a.x, b.x, q);
      },
      o.threads);
  auto res = make_residual(lhs, pairwise_sum(terms));
  res.capped = n_used < n;
  return res;
}

// ---------------------------------------------------------------------------
// L2 convergence of step approximations
// ---------------------------------------------------------------------------

struct L2Options {
  /// Outer rule per cell of the finest partition: halving levels per side, points per panel.
  int cell_levels = 3;
  int cell_points = 4;
  /// Gauss points per axis per finest cell for the 2D outer rule.
  int cell_points_2d = 3;
  /// Quadrature of the non-step part in 2D (K* (x) K* psi).
  SingularQuad quad2d{12, 1.0, 6, 1.0};
  Threads threads;
};

namespace detail {

inline std::vector<double> union_grid(std::span<const int> ns, double T) {
  std::vector<double> pts;
  for (int n : ns) {
    const auto g = Grid1D::uniform(n, T);
    pts.insert(pts.end(), g.points().begin(), g.points().end());
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

inline void check_meshes(std::span<const int> ns) {
  if (ns.empty()) throw std::invalid_argument("l2_convergence: empty schedule");
  for (std::size_t i = 1; i < ns.size(); ++i)
    if (!(ns[i] > ns[i - 1])) throw std::invalid_argument("l2_convergence: n must increase");
}

inline ConvergenceReport finish_l2(std::span<const int> ns, double T, std::span<const double> vals) {
  ConvergenceReport rep;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < ns.size(); ++i) {
    rep.rows.push_back({T / ns[i], vals[i], vals[i] - prev});
    prev = vals[i];
  }
  rep.final_value = rep.rows.back().value;
  rep.fitted_rate = value_rate(rep.rows);
  rep.converged = decreasing_with_slack(rep.rows);
  return rep;
}

}  // namespace detail

/// For each uniform n: int_0^T |K*(phi^pi - phi)(s)|^2 ds, the step part in
/// closed form and K* phi by singular quadrature (computed once, since it does
/// not depend on n).
template <class Phi>
ConvergenceReport l2_convergence_1d(const VolterraKernel& k, const Phi& phi,
                                    std::span<const int> ns, const SingularQuad& q = {},
                                    const L2Options& o = {}) {
  detail::check_meshes(ns);
  const double T = k.horizon();
  const auto cells = detail::union_grid(ns, T);
  std::vector<QuadNode> nodes;
  for (std::size_t c = 0; c + 1 < cells.size(); ++c)
    append_panel_nodes(doubly_graded_breaks(cells[c], cells[c + 1], o.cell_levels, 0.5),
                       o.cell_points, nodes);

  std::vector<double> smooth(nodes.size());
  parallel_for(
      nodes.size(), [&](std::size_t a) { smooth[a] = kstar_apply(k, phi, nodes[a].x, q); },
      o.threads);

  std::vector<double> vals;
  for (int n : ns) {
    const auto g = Grid1D::uniform(n, T);
    std::vector<double> c(g.cells());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = phi(g[i]);
    std::vector<double> terms(nodes.size());
    parallel_for(
        nodes.size(),
        [&](std::size_t a) {
          const double d = kstar_step_1d(k, g, c, nodes[a].x) - smooth[a];
          terms[a] = nodes[a].w * d * d;
        },
        o.threads);
    vals.push_back(pairwise_sum(terms));
  }
  return detail::finish_l2(ns, T, vals);
}

struct L2Reports {
  ConvergenceReport area;      ///< int int |K*(x)K*(psi^pi - psi)|^2
  ConvergenceReport diagonal;  ///< int |K*(x)K*(psi^pi - psi)(r,r)| dr
};

/// Both step-approximation norms of K* (x) K* along uniform partitions. The
/// outer rules use the cells of the finest partition, where the step parts
/// are smooth; K* (x) K* psi is evaluated once per outer node.
template <class Psi>
L2Reports l2_convergence_2d(const VolterraKernel& k, const Psi& psi, std::span<const int> ns,
                            const L2Options& o = {}) {
  detail::check_meshes(ns);
  const double T = k.horizon();
  const auto cells = detail::union_grid(ns, T);

  std::vector<QuadNode> area_nodes;  // per axis
  append_panel_nodes(cells, o.cell_points_2d, area_nodes);
  std::vector<QuadNode> diag_nodes;
  for (std::size_t c = 0; c + 1 < cells.size(); ++c)
    append_panel_nodes(doubly_graded_breaks(cells[c], cells[c + 1], o.cell_levels, 0.5),
                       o.cell_points, diag_nodes);

  const std::size_t m = area_nodes.size();
  Eigen::MatrixXd smooth(m, m);
  parallel_for(
      m * m,
      [&](std::size_t idx) {
        const auto a = static_cast<Eigen::Index>(idx / m);
        const auto b = static_cast<Eigen::Index>(idx % m);
        smooth(a, b) = kstar_tensor(k, psi, area_nodes[a].x, area_nodes[b].x, o.quad2d);
      },
      o.threads);
  std::vector<double> smooth_diag(diag_nodes.size());
  parallel_for(
      diag_nodes.size(),
      [&](std::size_t a) {
        smooth_diag[a] = kstar_tensor(k, psi, diag_nodes[a].x, diag_nodes[a].x, o.quad2d);
      },
      o.threads);

  std::vector<double> area_vals, diag_vals;
  for (int n : ns) {
    const auto part = Partition2D::uniform(n, T);
    const Eigen::MatrixXd C = step_coefficients(psi, part);
    // Row a of E holds K*(1_cell_i)(x_a), so the step part on the grid is E C E^T.
    auto indicator_matrix = [&](const std::vector<QuadNode>& nodes) {
      Eigen::MatrixXd E(nodes.size(), n);
      for (std::size_t a = 0; a < nodes.size(); ++a)
        for (int i = 0; i < n; ++i)
          E(static_cast<Eigen::Index>(a), i) = kstar_indicator(k, part.u[i], part.u[i + 1], nodes[a].x);
      return E;
    };
    const Eigen::MatrixXd E = indicator_matrix(area_nodes);
    const Eigen::MatrixXd diff = E * C * E.transpose() - smooth;
    std::vector<double> rows(m);
    for (std::size_t a = 0; a < m; ++a) {
      std::vector<double> t(m);
      for (std::size_t b = 0; b < m; ++b) {
        const double d = diff(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        t[b] = area_nodes[b].w * d * d;
      }
      rows[a] = area_nodes[a].w * pairwise_sum(t);
    }
    area_vals.push_back(pairwise_sum(rows));

    const Eigen::MatrixXd Ed = indicator_matrix(diag_nodes);
    const Eigen::VectorXd step_diag = (Ed * C).cwiseProduct(Ed).rowwise().sum();
    std::vector<double> t(diag_nodes.size());
    for (std::size_t a = 0; a < diag_nodes.size(); ++a)
      t[a] = diag_nodes[a].w * std::abs(step_diag(static_cast<Eigen::Index>(a)) - smooth_diag[a]);
    diag_vals.push_back(pairwise_sum(t));
  }
  return {detail::finish_l2(ns, T, area_vals), detail::finish_l2(ns, T, diag_vals)};
}

// ---------------------------------------------------------------------------
// Young's inequality
// ---------------------------------------------------------------------------

struct YoungCheck {
  double lhs = 0.0;         ///< |Riemann sum of f dg|
  double f_norm = 0.0;      ///< |f(s,u)| + edge p-variations + 2D p-variation
  double g_qvar = 0.0;      ///< 2D q-variation (grid lower bound)
  double rhs_factor = 0.0;  ///< f_norm * g_qvar
};

template <class F, class G>
YoungCheck young_inequality_check(const F& f, const G& g, double p, double q,
                                  const Partition2D& part, Threads threads = {}) {
  if (!(p >= 1.0 && q >= 1.0 && 1.0 / p + 1.0 / q > 1.0))
    throw std::invalid_argument("young_inequality_check: need p, q >= 1 and 1/p + 1/q > 1");
  YoungCheck out;
  out.lhs = std::abs(riemann_sum_2d(f, g, part, threads));
  const Eigen::MatrixXd fs = sample_2d(f, part);
  const Eigen::MatrixXd gs = sample_2d(g, part);
  std::vector<double> edge_v(fs.cols()), edge_u(fs.rows());
  for (Eigen::Index j = 0; j < fs.cols(); ++j) edge_v[j] = fs(0, j);
  for (Eigen::Index i = 0; i < fs.rows(); ++i) edge_u[i] = fs(i, 0);
  out.f_norm = std::abs(fs(0, 0)) + pvar_1d(edge_v, p) + pvar_1d(edge_u, p) + pvar_2d_grid(fs, p);
  out.g_qvar = pvar_2d_grid(gs, q);
  out.rhs_factor = out.f_norm * out.g_qvar;
  return out;
}

}  // namespace vyoung
