#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <vector>

#include "qssvm/dataset.hpp"
#include "qssvm/halfvec.hpp"
#include "qssvm/qp.hpp"
#include "qssvm/types.hpp"

namespace qssvm {

struct TrainConfig {
  Variant variant = Variant::QSSVM;
  /// Weight of ||hvec(W)||_1. Only the L1 variants and R-QSSVM accept a nonzero value.
  double lambda = 0.0;
  /// Slack weight; required for soft variants, rejected otherwise.
  std::optional<double> mu;
  /// hvec positions forced to zero; required for R-QSSVM, rejected otherwise.
  std::optional<std::vector<Index>> zero_set;
  SolveOptions solver;

  void validate(Index n) const {
    if (!std::isfinite(lambda) || lambda < 0.0)
      throw InvalidConfig("lambda must be finite and >= 0");
    if (lambda != 0.0 && !accepts_lambda(variant))
      throw InvalidConfig(std::string(to_string(variant)) + " does not take a lambda penalty");
    if (is_soft(variant)) {
      if (!mu || !std::isfinite(*mu) || *mu <= 0.0)
        throw InvalidConfig(std::string(to_string(variant)) + " needs mu > 0");
    } else if (mu) {
      throw InvalidConfig(std::string(to_string(variant)) + " is hard-margin and takes no mu");
    }
    if ((variant == Variant::RQSSVM) != zero_set.has_value())
      throw InvalidConfig("a zero set is required for R-QSSVM and only for it");
    if (zero_set)
      for (Index j : *zero_set)
        if (j < 0 || j >= half_size(n))
          throw InvalidConfig("zero set index " + std::to_string(j) + " out of range");
  }
};

enum class WMode { None, Free, Split };

/// Where each block of the model lives in the QP variable vector.
/// Split: (p, q, b, c, xi) with hvec(W) = p - q on `w_indices`.
/// Free:  (w, b, c, xi). None (linear SVM): (u, d, xi) stored in the b and c slots.
struct QpLayout {
  WMode w_mode = WMode::None;
  Index n = 0, m = 0;
  std::vector<Index> w_indices;  ///< hvec positions carried by the w block
  Index p_offset = -1, q_offset = -1, w_offset = -1;
  Index b_offset = 0, c_offset = 0, xi_offset = -1;
  Index num_vars = 0;
  bool soft = false;

  Index nw() const { return static_cast<Index>(w_indices.size()); }
};

/// Optimality report for the original (unsplit, possibly nonsmooth) formulation.
/// Every field except the multipliers is a nonnegative violation magnitude.
struct KktReport {
  double stationarity = 0.0;
  double primal_feasibility = 0.0;
  double complementarity = 0.0;
  double dual_feasibility = 0.0;
  Vector alpha;  ///< classification-row multipliers
  Vector eta;    ///< slack-bound multipliers, mu - alpha (soft variants only)
  Vector beta;   ///< multipliers of the zero constraints, in hvec order (R-QSSVM only)

  double worst() const {
    return std::max({stationarity, primal_feasibility, complementarity, dual_feasibility});
  }
};

struct SolverStats {
  int iterations = 0;
  double wall_seconds = 0.0;
  QpStatus status = QpStatus::NumericalFailure;
  bool polished = false;
};

struct TrainReport {
  QuadSurfaceModel model;
  Vector xi;
  double objective = 0.0;
  KktReport kkt;
  SolverStats solver_stats;
  Vector split_solution;
  QpLayout layout;
};

inline QpLayout make_layout(Index n, Index m, const TrainConfig& cfg) {
  QpLayout L;
  L.n = n;
  L.m = m;
  L.soft = is_soft(cfg.variant);
  Index off = 0;
  if (!is_linear(cfg.variant)) {
    std::vector<bool> zero(static_cast<std::size_t>(half_size(n)), false);
    if (cfg.zero_set)
      for (Index j : *cfg.zero_set) zero[static_cast<std::size_t>(j)] = true;
    for (Index j = 0; j < half_size(n); ++j)
      if (!zero[static_cast<std::size_t>(j)]) L.w_indices.push_back(j);
    // At lambda = 0 a split would leave p and q free to grow together, so the
    // unpenalized problems keep w as a free block.
    if (cfg.lambda > 0.0) {
      L.w_mode = WMode::Split;
      L.p_offset = 0;
      L.q_offset = L.nw();
      off = 2 * L.nw();
    } else {
      L.w_mode = WMode::Free;
      L.w_offset = 0;
      off = L.nw();
    }
  }
  L.b_offset = off;
  off += n;
  L.c_offset = off++;
  if (L.soft) {
    L.xi_offset = off;
    off += m;
  }
  L.num_vars = off;
  return L;
}

/// Smooth QP for the configured formulation. The constraint rows are
/// y_i (z'r_i + c) + xi_i >= 1 in the layout's variable order.
inline QuadraticProgram build_qp(const Dataset& d, const TrainConfig& cfg, const DesignCache& cache) {
  cfg.validate(d.n());
  if (cache.m() != d.m() || cache.n() != d.n())
    throw DimensionMismatch("build_qp: design cache does not belong to this dataset");
  const QpLayout L = make_layout(d.n(), d.m(), cfg);
  const Index n = d.n(), m = d.m(), h = half_size(n), nw = L.nw();
  QuadraticProgram qp;
  qp.Q = Matrix::Zero(L.num_vars, L.num_vars);
  qp.q = Vector::Zero(L.num_vars);
  qp.A = Matrix::Zero(m, L.num_vars);
  qp.c = Vector::Ones(m);

  if (L.w_mode == WMode::None) {
    qp.Q.block(L.b_offset, L.b_offset, n, n).setIdentity();
  } else {
    // Restrict G to the retained w entries plus the b block.
    std::vector<Index> keep = L.w_indices;
    for (Index k = 0; k < n; ++k) keep.push_back(h + k);
    const Index nk = static_cast<Index>(keep.size());
    Matrix Gs(nk, nk);
    for (Index a = 0; a < nk; ++a)
      for (Index b = 0; b < nk; ++b)
        Gs(a, b) = cache.G()(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(b)]);
    if (L.w_mode == WMode::Free) {
      qp.Q.topLeftCorner(nk, nk) = Gs;
    } else {
      // (p, q, b) -> (w, b) = T (p, q, b) with T = [I -I 0; 0 0 I].
      Matrix T = Matrix::Zero(nk, 2 * nw + n);
      T.topLeftCorner(nw, nw).setIdentity();
      T.block(0, nw, nw, nw) = -Matrix::Identity(nw, nw);
      T.block(nw, 2 * nw, n, n).setIdentity();
      qp.Q.topLeftCorner(2 * nw + n, 2 * nw + n) = T.transpose() * Gs * T;
      qp.q.head(2 * nw).setConstant(cfg.lambda);
      for (Index j = 0; j < 2 * nw; ++j) qp.nonneg.push_back(j);
    }
  }
  qp.Q = 0.5 * (qp.Q + qp.Q.transpose());

  for (Index i = 0; i < m; ++i) {
    const double y = d.label(i);
    for (Index a = 0; a < nw; ++a) {
      const double s = cache.s()(i, L.w_indices[static_cast<std::size_t>(a)]);
      if (L.w_mode == WMode::Free) {
        qp.A(i, L.w_offset + a) = y * s;
      } else {
        qp.A(i, L.p_offset + a) = y * s;
        qp.A(i, L.q_offset + a) = -y * s;
      }
    }
    for (Index k = 0; k < n; ++k) qp.A(i, L.b_offset + k) = y * d.X()(i, k);
    qp.A(i, L.c_offset) = y;
    if (L.soft) qp.A(i, L.xi_offset + i) = 1.0;
  }
  if (L.soft) {
    qp.q.segment(L.xi_offset, m).setConstant(*cfg.mu);
    for (Index i = 0; i < m; ++i) qp.nonneg.push_back(L.xi_offset + i);
  }
  return qp;
}

/// +1 when f(x) >= 0, else -1. An exact zero maps to +1.
inline int predict(const QuadSurfaceModel& model, const Vector& x) {
  return quad_eval(model, x) >= 0.0 ? 1 : -1;
}

/// Objective of the original formulation at (model, xi).
inline double formulation_objective(const QuadSurfaceModel& model, const Vector& xi,
                                    const DesignCache* cache) {
  double obj = 0.0;
  if (is_linear(model.variant)) {
    obj = 0.5 * model.b.squaredNorm();
  } else {
    const Vector z = model_z(model);
    obj = 0.5 * z.dot(cache->G() * z) + model.lambda * hvec(model.W).values().lpNorm<1>();
  }
  if (model.mu) obj += *model.mu * xi.sum();
  return obj;
}

/// KKT violations of the original formulation at (model, xi) with row multipliers alpha.
/// The l1 term is handled through its subdifferential: a coordinate with w_j = 0 only
/// needs its gradient within [-lambda, lambda].
inline KktReport evaluate_kkt(const Dataset& d, const DesignCache& cache, const QuadSurfaceModel& model,
                              const Vector& xi, const Vector& alpha,
                              const std::optional<std::vector<Index>>& zero_set = std::nullopt) {
  const Index n = d.n(), m = d.m(), h = half_size(n);
  if (alpha.size() != m || xi.size() != m) throw DimensionMismatch("evaluate_kkt: multiplier length");
  KktReport r;
  r.alpha = alpha;
  const Vector ay = alpha.cwiseProduct(d.y());

  // Margins y_i f(x_i) + xi_i - 1 >= 0.
  Vector margin(m);
  for (Index i = 0; i < m; ++i) margin[i] = d.label(i) * quad_eval(model, d.x(i)) + xi[i] - 1.0;
  for (Index i = 0; i < m; ++i) {
    r.primal_feasibility = std::max({r.primal_feasibility, -margin[i], -xi[i]});
    r.complementarity = std::max(r.complementarity, std::abs(alpha[i] * margin[i]));
    r.dual_feasibility = std::max(r.dual_feasibility, -alpha[i]);
  }
  if (model.mu) {
    r.eta = Vector::Constant(m, *model.mu) - alpha;
    for (Index i = 0; i < m; ++i) {
      r.dual_feasibility = std::max(r.dual_feasibility, -r.eta[i]);
      r.complementarity = std::max(r.complementarity, std::abs(r.eta[i] * xi[i]));
    }
  } else {
    r.primal_feasibility = std::max(r.primal_feasibility, xi.size() ? xi.cwiseAbs().maxCoeff() : 0.0);
  }
  r.stationarity = std::abs(ay.sum());

  if (is_linear(model.variant)) {
    const Vector g = model.b - d.X().transpose() * ay;
    r.stationarity = std::max(r.stationarity, g.cwiseAbs().maxCoeff());
    const double wmax = model.W.dim() ? model.W.dense().cwiseAbs().maxCoeff() : 0.0;
    r.primal_feasibility = std::max(r.primal_feasibility, wmax);
    return r;
  }

  const Vector z = model_z(model);
  const Vector g = cache.G() * z - cache.r().transpose() * ay;
  const Vector w = z.head(h);
  const double ztol = 1e-9 * (1.0 + (h ? w.cwiseAbs().maxCoeff() : 0.0));
  std::vector<bool> pinned(static_cast<std::size_t>(h), false);
  if (zero_set) {
    r.beta = Vector::Zero(h);
    for (Index j : *zero_set) {
      pinned[static_cast<std::size_t>(j)] = true;
      r.beta[j] = -g[j];
      r.primal_feasibility = std::max(r.primal_feasibility, std::abs(w[j]));
    }
  }
  const double lam = model.lambda;
  for (Index j = 0; j < h; ++j) {
    if (pinned[static_cast<std::size_t>(j)]) continue;
    const double res = std::abs(w[j]) <= ztol ? std::max(0.0, std::abs(g[j]) - lam)
                                               : std::abs(g[j] + lam * (w[j] > 0 ? 1.0 : -1.0));
    r.stationarity = std::max(r.stationarity, res);
  }
  for (Index k = 0; k < n; ++k) r.stationarity = std::max(r.stationarity, std::abs(g[h + k]));
  return r;
}

namespace detail {

inline void unpack(const QpLayout& L, const Vector& x, QuadSurfaceModel& model, Vector& xi) {
  const Index n = L.n, h = half_size(n);
  Vector w = Vector::Zero(h);
  for (Index a = 0; a < L.nw(); ++a) {
    const Index j = L.w_indices[static_cast<std::size_t>(a)];
    w[j] = L.w_mode == WMode::Split ? x[L.p_offset + a] - x[L.q_offset + a] : x[L.w_offset + a];
  }
  model.W = unhvec(HalfVector(n, w));
  model.b = x.segment(L.b_offset, n);
  model.c = x[L.c_offset];
  xi = L.soft ? Vector(x.segment(L.xi_offset, L.m)) : Vector(Vector::Zero(L.m));
}

}  // namespace detail

/// Fits the configured formulation. Throws HardMarginInfeasible when a hard-margin
/// problem has no feasible point and SolverFailure when the solver does not converge.
inline TrainReport train(const Dataset& d, const TrainConfig& cfg, const DesignCache& cache) {
  const auto t0 = std::chrono::steady_clock::now();
  const QuadraticProgram qp = build_qp(d, cfg, cache);
  const QpSolution sol = solve(qp, cfg.solver);
  const auto t1 = std::chrono::steady_clock::now();

  if (sol.status == QpStatus::Infeasible) {
    if (!is_soft(cfg.variant))
      throw HardMarginInfeasible(std::string(to_string(cfg.variant)) +
                                 ": the data cannot be separated with margin 1");
    throw SolverFailure(std::string(to_string(cfg.variant)) + ": solver reported infeasibility");
  }
  if (sol.status != QpStatus::Optimal)
    throw SolverFailure(std::string(to_string(cfg.variant)) + ": solver stopped with status " +
                        to_string(sol.status) + " after " + std::to_string(sol.iterations) +
                        " iterations");

  TrainReport rep;
  rep.layout = make_layout(d.n(), d.m(), cfg);
  rep.model.variant = cfg.variant;
  rep.model.lambda = cfg.lambda;
  rep.model.mu = cfg.mu;
  detail::unpack(rep.layout, sol.x, rep.model, rep.xi);
  rep.split_solution = sol.x;
  rep.objective = formulation_objective(rep.model, rep.xi, &cache);
  rep.kkt = evaluate_kkt(d, cache, rep.model, rep.xi, sol.dual, cfg.zero_set);
  rep.solver_stats.iterations = sol.iterations;
  rep.solver_stats.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  rep.solver_stats.status = sol.status;
  rep.solver_stats.polished = sol.polished;
  return rep;
}

inline TrainReport train(const Dataset& d, const TrainConfig& cfg) {
  return train(d, cfg, assemble_design(d));
}

/// hvec positions whose magnitude is at most tol * (1 + ||hvec(W)||_inf).
inline std::vector<Index> sparsity_pattern(const QuadSurfaceModel& model, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("sparsity_pattern: tol must be positive");
  const Vector w = hvec(model.W).values();
  const double cut = tol * (1.0 + (w.size() ? w.cwiseAbs().maxCoeff() : 0.0));
  std::vector<Index> out;
  for (Index j = 0; j < w.size(); ++j)
    if (std::abs(w[j]) <= cut) out.push_back(j);
  return out;
}

/// Sufficient lambda for L1-QSSVM to return the hard-margin SVM solution. The strictly
/// feasible point needed by the bound is twice the SVM solution.
inline double lambda_equivalence_bound(const Dataset& d, const SolveOptions& solver = {}) {
  TrainConfig cfg;
  cfg.variant = Variant::SVM;
  cfg.solver = solver;
  TrainReport svm;
  try {
    svm = train(d, cfg);
  } catch (const HardMarginInfeasible&) {
    throw NotLinearlySeparable("lambda_equivalence_bound: data is not linearly separable");
  }
  const Vector u = 2.0 * svm.model.b;
  const double dd = 2.0 * svm.model.c;
  double c2 = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < d.m(); ++i) c2 = std::min(c2, d.label(i) * (u.dot(d.x(i)) + dd) - 1.0);
  if (!(c2 > 0.0)) throw SolverFailure("lambda_equivalence_bound: witness is not strictly feasible");
  Eigen::JacobiSVD<Matrix> svd(d.X());
  const double xnorm = svd.singularValues()[0];
  double max2 = 0.0, maxinf = 0.0;
  for (Index i = 0; i < d.m(); ++i) {
    max2 = std::max(max2, d.X().row(i).norm());
    maxinf = std::max(maxinf, d.X().row(i).cwiseAbs().maxCoeff());
  }
  return static_cast<double>(d.m()) * u.squaredNorm() / (2.0 * c2) * (xnorm * max2 + maxinf * maxinf);
}

/// Slack weight above which the soft L1 model has zero slacks on quadratically separable
/// data: (q(witness) - q*) / c1, with the witness twice the hard-margin L1-QSSVM solution.
inline double mu_vanishing_bound(const Dataset& d, double lambda, const SolveOptions& solver = {}) {
  TrainConfig cfg;
  cfg.variant = Variant::L1QSSVM;
  cfg.lambda = lambda;
  cfg.solver = solver;
  const DesignCache cache = assemble_design(d);
  TrainReport hard;
  try {
    hard = train(d, cfg, cache);
  } catch (const HardMarginInfeasible&) {
    throw NotQuadraticallySeparable("mu_vanishing_bound: data is not quadratically separable");
  }
  QuadSurfaceModel witness = hard.model;
  witness.W = SymmetricMatrix::from_dense(2.0 * hard.model.W.dense());
  witness.b = 2.0 * hard.model.b;
  witness.c = 2.0 * hard.model.c;
  double c1 = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < d.m(); ++i) c1 = std::min(c1, d.label(i) * quad_eval(witness, d.x(i)) - 1.0);
  if (!(c1 > 0.0)) throw SolverFailure("mu_vanishing_bound: witness is not strictly feasible");
  const Vector none = Vector::Zero(d.m());
  const double q_bar = formulation_objective(witness, none, &cache);
  const double q_star = formulation_objective(hard.model, none, &cache);
  return std::max(0.0, q_bar - q_star) / c1;
}

}  // namespace qssvm
