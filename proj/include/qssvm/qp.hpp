#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "qssvm/types.hpp"

namespace qssvm {

/// minimize 1/2 x'Qx + q'x  subject to  A x >= c  and  x_j >= 0 for j in nonneg.
struct QuadraticProgram {
  Matrix Q;
  Vector q;
  Matrix A;
  Vector c;
  std::vector<Index> nonneg;

  Index num_vars() const { return q.size(); }
  Index num_rows() const { return c.size(); }

  /// Dimension and symmetry checks. PSD-ness is the caller's responsibility.
  void validate() const {
    const Index p = q.size();
    if (Q.rows() != p || Q.cols() != p) throw DimensionMismatch("QuadraticProgram: Q is not p x p");
    if (A.cols() != p && !(A.rows() == 0 && c.size() == 0))
      throw DimensionMismatch("QuadraticProgram: A has wrong column count");
    if (A.rows() != c.size()) throw DimensionMismatch("QuadraticProgram: A and c disagree");
    for (Index j : nonneg)
      if (j < 0 || j >= p) throw DimensionMismatch("QuadraticProgram: bound index out of range");
    const double scale = 1.0 + Q.cwiseAbs().maxCoeff();
    if (p > 0 && (Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw InvalidArgument("QuadraticProgram: Q is not symmetric");
    if (!Q.allFinite() || !q.allFinite() || !A.allFinite() || !c.allFinite())
      throw InvalidArgument("QuadraticProgram: non-finite data");
  }

  double objective(const Vector& x) const { return 0.5 * x.dot(Q * x) + q.dot(x); }
};

enum class QpStatus { Optimal, Infeasible, IterationLimit, NumericalFailure };

inline const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "Optimal";
    case QpStatus::Infeasible: return "Infeasible";
    case QpStatus::IterationLimit: return "IterationLimit";
    case QpStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

struct QpResiduals {
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double complementarity_gap = 0.0;
};

struct QpSolution {
  Vector x;
  Vector dual;        ///< one per row of A
  Vector bound_dual;  ///< length p, zero for variables without a bound
  QpStatus status = QpStatus::NumericalFailure;
  QpResiduals residuals;
  int iterations = 0;
  double objective = 0.0;
  bool polished = false;
};

struct SolveOptions {
  double tol_primal = 1e-8;
  double tol_dual = 1e-8;
  double tol_gap = 1e-8;
  int max_iterations = 200;
  double static_regularization = 1e-10;
  double max_regularization = 1e-6;
  /// Perturbs the interior starting point; used to check that answers do not depend on it.
  std::optional<std::uint64_t> start_seed;
  /// Refine the interior-point answer by an equality-constrained solve on the detected active set.
  bool polish = true;
  bool detect_infeasibility = true;
};

/// Absolute KKT residuals of (x, dual, bound_dual): worst bound or row violation,
/// ||Qx + q - A'dual - bound_dual||_inf, and the largest |dual_i (Ax - c)_i| or |bound_dual_j x_j|.
inline QpResiduals kkt_residuals(const QuadraticProgram& qp, const QpSolution& sol) {
  const Index p = qp.num_vars();
  if (sol.x.size() != p || sol.dual.size() != qp.num_rows() || sol.bound_dual.size() != p)
    throw DimensionMismatch("kkt_residuals: solution does not match the problem");
  QpResiduals r;
  Vector slack = qp.A * sol.x - qp.c;
  for (Index i = 0; i < slack.size(); ++i) {
    r.primal_infeasibility = std::max(r.primal_infeasibility, -slack[i]);
    r.complementarity_gap = std::max(r.complementarity_gap, std::abs(sol.dual[i] * slack[i]));
  }
  for (Index j : qp.nonneg) {
    r.primal_infeasibility = std::max(r.primal_infeasibility, -sol.x[j]);
    r.complementarity_gap = std::max(r.complementarity_gap, std::abs(sol.bound_dual[j] * sol.x[j]));
  }
  Vector grad = qp.Q * sol.x + qp.q - qp.A.transpose() * sol.dual - sol.bound_dual;
  r.dual_infeasibility = p > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  return r;
}

namespace detail {

inline double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// Residuals scaled by problem magnitude, used for the stopping test.
struct ScaledCheck {
  QpResiduals abs;
  double primal_scale = 1.0;
  double dual_scale = 1.0;
  double gap_scale = 1.0;
  double min_dual = 0.0;

  bool passes(const SolveOptions& o) const {
    return abs.primal_infeasibility <= o.tol_primal * primal_scale &&
           abs.dual_infeasibility <= o.tol_dual * dual_scale &&
           abs.complementarity_gap <= o.tol_gap * gap_scale && min_dual >= -o.tol_dual * dual_scale;
  }
  double worst(const SolveOptions& o) const {
    return std::max({abs.primal_infeasibility / (o.tol_primal * primal_scale),
                     abs.dual_infeasibility / (o.tol_dual * dual_scale),
                     abs.complementarity_gap / (o.tol_gap * gap_scale),
                     -min_dual / (o.tol_dual * dual_scale)});
  }
};

inline ScaledCheck scaled_check(const QuadraticProgram& qp, const QpSolution& sol) {
  ScaledCheck s;
  s.abs = kkt_residuals(qp, sol);
  const Vector Ax = qp.A * sol.x;
  const Vector Qx = qp.Q * sol.x;
  const Vector Atz = qp.A.transpose() * sol.dual;
  s.primal_scale = 1.0 + std::max(inf_norm(Ax), inf_norm(qp.c));
  s.dual_scale = 1.0 + std::max({inf_norm(Qx), inf_norm(qp.q), inf_norm(Atz), inf_norm(sol.bound_dual)});
  s.gap_scale = 1.0 + std::abs(qp.objective(sol.x));
  s.min_dual = 0.0;
  if (sol.dual.size()) s.min_dual = std::min(s.min_dual, sol.dual.minCoeff());
  for (Index j : qp.nonneg) s.min_dual = std::min(s.min_dual, sol.bound_dual[j]);
  return s;
}

/// Normal-equation solver for the interior-point Newton system
///   (Q + A' diag(theta) A + diag(d)) dx = g.
/// Variables that appear in a single row and have no Q coupling (slack-like
/// variables) are eliminated first, so the dense factorization only covers
/// the remaining "core" variables.
class NormalSystem {
 public:
  explicit NormalSystem(const QuadraticProgram& qp) : qp_(qp) {
    const Index p = qp.num_vars(), k = qp.num_rows();
    row_sep_.assign(static_cast<std::size_t>(k), -1);
    std::vector<bool> is_sep(static_cast<std::size_t>(p), false);
    for (Index j = 0; j < p; ++j) {
      bool coupled = false;
      for (Index i = 0; i < p && !coupled; ++i)
        if (i != j && qp.Q(i, j) != 0.0) coupled = true;
      if (coupled) continue;
      Index row = -1, count = 0;
      for (Index i = 0; i < k; ++i)
        if (qp.A(i, j) != 0.0) {
          row = i;
          ++count;
        }
      if (count != 1 || row_sep_[static_cast<std::size_t>(row)] != -1) continue;
      row_sep_[static_cast<std::size_t>(row)] = static_cast<Index>(sep_.size());
      sep_.push_back(j);
      sep_row_.push_back(row);
      is_sep[static_cast<std::size_t>(j)] = true;
    }
    for (Index j = 0; j < p; ++j)
      if (!is_sep[static_cast<std::size_t>(j)]) core_.push_back(j);
    const Index nc = static_cast<Index>(core_.size());
    A_core_.resize(k, nc);
    Q_core_.resize(nc, nc);
    for (Index a = 0; a < nc; ++a) {
      A_core_.col(a) = qp.A.col(core_[static_cast<std::size_t>(a)]);
      for (Index b = 0; b < nc; ++b)
        Q_core_(a, b) = qp.Q(core_[static_cast<std::size_t>(a)], core_[static_cast<std::size_t>(b)]);
    }
    sep_coef_.resize(static_cast<Index>(sep_.size()));
    sep_q_.resize(static_cast<Index>(sep_.size()));
    for (std::size_t s = 0; s < sep_.size(); ++s) {
      sep_coef_[static_cast<Index>(s)] = qp.A(sep_row_[s], sep_[s]);
      sep_q_[static_cast<Index>(s)] = qp.Q(sep_[s], sep_[s]);
    }
  }

  /// Returns false if the factorization fails even at the largest regularization.
  bool factor(const Vector& theta, const Vector& d, const SolveOptions& opts) {
    const Index k = qp_.num_rows(), nc = static_cast<Index>(core_.size());
    theta_ = theta;
    sep_diag_.resize(sep_coef_.size());
    Vector theta_eff = theta;
    for (Index s = 0; s < sep_coef_.size(); ++s) {
      const auto us = static_cast<std::size_t>(s);
      const Index i = sep_row_[us];
      const double a = sep_coef_[s];
      const double own = sep_q_[s] + d[sep_[us]];
      sep_diag_[s] = own + theta[i] * a * a;
      theta_eff[i] = theta[i] * own / sep_diag_[s];
    }
    Matrix N = Q_core_;
    if (k > 0 && nc > 0) {
      Matrix W = theta_eff.cwiseSqrt().asDiagonal() * A_core_;
      N.selfadjointView<Eigen::Lower>().rankUpdate(W.transpose());
    }
    for (Index a = 0; a < nc; ++a) N(a, a) += d[core_[static_cast<std::size_t>(a)]];
    N.triangularView<Eigen::StrictlyUpper>() = N.transpose();
    // Symmetric Jacobi scaling: barrier terms spread the diagonal over many orders of
    // magnitude, and regularization must be relative to each row.
    const double top = nc ? N.diagonal().cwiseAbs().maxCoeff() : 0.0;
    jacobi_.resize(nc);
    for (Index a = 0; a < nc; ++a) jacobi_[a] = 1.0 / std::sqrt(std::max(N(a, a), 1e-14 * std::max(top, 1.0)));
    N = jacobi_.asDiagonal() * N * jacobi_.asDiagonal();
    llt_.compute(N);
    if (llt_.info() == Eigen::Success) return true;
    for (double reg = opts.static_regularization; reg <= opts.max_regularization * (1 + 1e-12);
         reg *= 10.0) {
      Matrix Nr = N;
      Nr.diagonal().array() += reg;
      llt_.compute(Nr);
      if (llt_.info() == Eigen::Success) return true;
    }
    return false;
  }

  Vector solve(const Vector& g) const {
    const Index p = qp_.num_vars(), k = qp_.num_rows();
    Vector gc(static_cast<Index>(core_.size()));
    for (std::size_t a = 0; a < core_.size(); ++a) gc[static_cast<Index>(a)] = g[core_[a]];
    if (!sep_.empty()) {
      Vector omega = Vector::Zero(k);
      for (Index s = 0; s < sep_coef_.size(); ++s) {
        const auto us = static_cast<std::size_t>(s);
        const Index i = sep_row_[us];
        omega[i] = theta_[i] * sep_coef_[s] * g[sep_[us]] / sep_diag_[s];
      }
      gc.noalias() -= A_core_.transpose() * omega;
    }
    Vector dc = core_.empty() ? Vector() : Vector(jacobi_.cwiseProduct(llt_.solve(jacobi_.cwiseProduct(gc))));
    Vector dx(p);
    for (std::size_t a = 0; a < core_.size(); ++a) dx[core_[a]] = dc[static_cast<Index>(a)];
    for (Index s = 0; s < sep_coef_.size(); ++s) {
      const auto us = static_cast<std::size_t>(s);
      const Index i = sep_row_[us];
      const double coupling = core_.empty() ? 0.0 : A_core_.row(i).dot(dc);
      dx[sep_[us]] = (g[sep_[us]] - theta_[i] * sep_coef_[s] * coupling) / sep_diag_[s];
    }
    return dx;
  }

 private:
  const QuadraticProgram& qp_;
  std::vector<Index> core_, sep_, sep_row_, row_sep_;
  Vector sep_coef_, sep_q_, sep_diag_, theta_, jacobi_;
  Matrix A_core_, Q_core_;
  Eigen::LLT<Matrix> llt_;
};

/// Largest alpha in (0, 1] keeping v + alpha * dv >= 0 on the masked entries.
inline double max_step(const Vector& v, const Vector& dv, const std::vector<bool>* mask = nullptr) {
  double alpha = 1.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (mask && !(*mask)[static_cast<std::size_t>(i)]) continue;
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

/// Solves the equality-constrained problem with `active_row` rows tight and `at_bound`
/// variables fixed at zero, starting refinement from `ipm`.
inline std::optional<QpSolution> solve_on_active_set(const QuadraticProgram& qp, const QpSolution& ipm,
                                                     const std::vector<bool>& active_row,
                                                     const std::vector<bool>& at_bound) {
  const Index p = qp.num_vars(), k = qp.num_rows();
  std::vector<Index> rows, fixed_vars, free_vars;
  for (Index i = 0; i < k; ++i)
    if (active_row[static_cast<std::size_t>(i)]) rows.push_back(i);
  for (Index j = 0; j < p; ++j)
    (at_bound[static_cast<std::size_t>(j)] ? fixed_vars : free_vars).push_back(j);

  const Index nf = static_cast<Index>(free_vars.size()), na = static_cast<Index>(rows.size());
  Matrix K = Matrix::Zero(nf + na, nf + na);
  Vector rhs(nf + na);
  for (Index a = 0; a < nf; ++a) {
    const Index ja = free_vars[static_cast<std::size_t>(a)];
    for (Index b = 0; b < nf; ++b) K(a, b) = qp.Q(ja, free_vars[static_cast<std::size_t>(b)]);
    rhs[a] = -qp.q[ja];
  }
  for (Index r = 0; r < na; ++r) {
    const Index i = rows[static_cast<std::size_t>(r)];
    for (Index a = 0; a < nf; ++a) {
      K(nf + r, a) = qp.A(i, free_vars[static_cast<std::size_t>(a)]);
      K(a, nf + r) = K(nf + r, a);
    }
    rhs[nf + r] = qp.c[i];
  }
  // Unknowns are (x_F, -z). The quasi-definite regularization keeps the factorization
  // well posed when the active rows are dependent or Q is singular. Refinement started
  // from the interior point is a proximal-point iteration, so on a degenerate optimal
  // face it lands near that point instead of at an arbitrary solution.
  const double delta = 1e-10 * std::max(1.0, K.size() ? K.cwiseAbs().maxCoeff() : 1.0);
  Matrix Kr = K;
  for (Index a = 0; a < nf; ++a) Kr(a, a) += delta;
  for (Index r = 0; r < na; ++r) Kr(nf + r, nf + r) -= delta;
  Eigen::PartialPivLU<Matrix> lu(Kr);
  Vector u(nf + na);
  for (Index a = 0; a < nf; ++a) u[a] = ipm.x[free_vars[static_cast<std::size_t>(a)]];
  for (Index r = 0; r < na; ++r) u[nf + r] = -ipm.dual[rows[static_cast<std::size_t>(r)]];
  const double rhs_scale = 1.0 + (rhs.size() ? rhs.cwiseAbs().maxCoeff() : 0.0);
  for (int it = 0; it < 30; ++it) {
    Vector res = rhs - K * u;
    if (!res.allFinite()) return std::nullopt;
    if (res.size() == 0 || res.cwiseAbs().maxCoeff() <= 1e-15 * rhs_scale) break;
    u += lu.solve(res);
  }
  if (!u.allFinite()) return std::nullopt;

  QpSolution sol;
  sol.x = Vector::Zero(p);
  sol.dual = Vector::Zero(k);
  sol.bound_dual = Vector::Zero(p);
  for (Index a = 0; a < nf; ++a) sol.x[free_vars[static_cast<std::size_t>(a)]] = u[a];
  for (Index r = 0; r < na; ++r) sol.dual[rows[static_cast<std::size_t>(r)]] = -u[nf + r];
  const Vector grad = qp.Q * sol.x + qp.q - qp.A.transpose() * sol.dual;
  for (Index j : fixed_vars) sol.bound_dual[j] = grad[j];
  sol.iterations = ipm.iterations;
  sol.objective = qp.objective(sol.x);
  sol.polished = true;
  return sol;
}

/// Equality-constrained re-solve on the active set guessed from an interior point. A few
/// correction rounds add violated rows and bounds and release wrong-signed multipliers.
/// With `snap_small`, bounded variables that are tiny relative to the iterate start out
/// active (helps when both halves of a split pair are still positive).
inline std::optional<QpSolution> polish(const QuadraticProgram& qp, const QpSolution& ipm,
                                        bool snap_small = false) {
  const Index p = qp.num_vars(), k = qp.num_rows();
  const Vector slack = qp.A * ipm.x - qp.c;
  std::vector<bool> active_row(static_cast<std::size_t>(k), false);
  for (Index i = 0; i < k; ++i) active_row[static_cast<std::size_t>(i)] = ipm.dual[i] > slack[i];
  std::vector<bool> at_bound(static_cast<std::size_t>(p), false);
  const double small = 1e-7 * (1.0 + inf_norm(ipm.x));
  for (Index j : qp.nonneg)
    if (ipm.bound_dual[j] > ipm.x[j] || (snap_small && ipm.x[j] <= small))
      at_bound[static_cast<std::size_t>(j)] = true;

  std::optional<QpSolution> sol;
  for (int round = 0; round < 5; ++round) {
    sol = solve_on_active_set(qp, ipm, active_row, at_bound);
    if (!sol) return sol;
    const Vector sl = qp.A * sol->x - qp.c;
    const double ptol = 1e-9 * (1.0 + inf_norm(qp.c) + inf_norm(sol->x));
    const double dtol = 1e-9 * (1.0 + inf_norm(sol->dual) + inf_norm(sol->bound_dual));
    bool changed = false;
    auto update = [&](std::vector<bool>& set, Index idx, bool violated, bool wrong_sign) {
      const auto u = static_cast<std::size_t>(idx);
      if ((!set[u] && violated) || (set[u] && wrong_sign)) {
        set[u] = !set[u];
        changed = true;
      }
    };
    for (Index i = 0; i < k; ++i) update(active_row, i, sl[i] < -ptol, sol->dual[i] < -dtol);
    for (Index j : qp.nonneg) update(at_bound, j, sol->x[j] < -ptol, sol->bound_dual[j] < -dtol);
    if (!changed) break;
  }
  return sol;
}

inline std::optional<double> min_violation(const QuadraticProgram& qp, const SolveOptions& opts);

/// Diagonal equilibration: the solver works on
///   Q~ = sigma D Q D, q~ = sigma D q, A~ = E A D, c~ = E c,
/// so x = D x~, dual = E dual~ / sigma, bound_dual = D^-1 bound_dual~ / sigma.
struct Scaling {
  Vector D, E;
  double sigma = 1.0;

  QpSolution to_original(const QpSolution& w) const {
    QpSolution o = w;
    o.x = D.cwiseProduct(w.x);
    o.dual = E.cwiseProduct(w.dual) / sigma;
    o.bound_dual = w.bound_dual.cwiseQuotient(D) / sigma;
    return o;
  }
};

/// Ruiz equilibration of [Q A'; A 0] followed by cost scaling.
inline std::pair<QuadraticProgram, Scaling> equilibrate(const QuadraticProgram& qp, int passes = 15) {
  const Index p = qp.num_vars(), k = qp.num_rows();
  QuadraticProgram w = qp;
  Scaling sc;
  sc.D = Vector::Ones(p);
  sc.E = Vector::Ones(k);
  auto safe = [](double v) { return v > 1e-8 ? 1.0 / std::sqrt(v) : 1.0; };
  for (int pass = 0; pass < passes; ++pass) {
    Vector dv(p), ev(k);
    for (Index j = 0; j < p; ++j) {
      double nrm = w.Q.col(j).cwiseAbs().maxCoeff();
      if (k) nrm = std::max(nrm, w.A.col(j).cwiseAbs().maxCoeff());
      dv[j] = safe(nrm);
    }
    for (Index i = 0; i < k; ++i) ev[i] = safe(p ? w.A.row(i).cwiseAbs().maxCoeff() : 0.0);
    w.Q = dv.asDiagonal() * w.Q * dv.asDiagonal();
    w.A = ev.asDiagonal() * w.A * dv.asDiagonal();
    sc.D = sc.D.cwiseProduct(dv);
    sc.E = sc.E.cwiseProduct(ev);
  }
  w.q = sc.D.cwiseProduct(qp.q);
  w.c = sc.E.cwiseProduct(qp.c);
  double qcol = 0.0;
  for (Index j = 0; j < p; ++j) qcol += w.Q.col(j).cwiseAbs().maxCoeff();
  qcol = p ? qcol / static_cast<double>(p) : 0.0;
  const double cost = std::max(qcol, inf_norm(w.q));
  sc.sigma = cost > 1e-8 ? std::clamp(1.0 / cost, 1e-8, 1e8) : 1.0;
  w.Q *= sc.sigma;
  w.q *= sc.sigma;
  return {std::move(w), sc};
}


/// Polishes an original-units iterate on the scaled problem; returns the result only if
/// it passes the stopping test and is no worse than the iterate.
inline std::optional<QpSolution> polish_scaled(const QuadraticProgram& work, const QuadraticProgram& orig,
                                               const Scaling& sc, const QpSolution& sol,
                                               const SolveOptions& opts) {
  QpSolution scaled = sol;
  scaled.x = sol.x.cwiseQuotient(sc.D);
  scaled.dual = sc.sigma * sol.dual.cwiseQuotient(sc.E);
  scaled.bound_dual = sc.sigma * sol.bound_dual.cwiseProduct(sc.D);
  const double before = scaled_check(orig, sol).worst(opts);
  for (bool snap : {false, true}) {
    auto pol_scaled = polish(work, scaled, snap);
    if (!pol_scaled) continue;
    QpSolution pol = sc.to_original(*pol_scaled);
    pol.objective = orig.objective(pol.x);
    const ScaledCheck pc = scaled_check(orig, pol);
    const bool no_worse = sol.status != QpStatus::Optimal || pc.worst(opts) <= std::max(1.0, before);
    if (pc.passes(opts) && no_worse) {
      pol.status = QpStatus::Optimal;
      pol.residuals = pc.abs;
      return pol;
    }
  }
  return std::nullopt;
}

struct IpmOutcome {
  QpSolution sol;
  bool suspect_infeasible = false;
  bool feasible = false;  ///< a feasibility solve already found a feasible point
};

/// Runs on the equilibrated problem `qp`; convergence is judged on `orig`.
inline IpmOutcome interior_point(const QuadraticProgram& qp, const QuadraticProgram& orig,
                                 const Scaling& sc, const SolveOptions& opts) {
  const Index p = qp.num_vars(), k = qp.num_rows();
  std::vector<bool> bounded(static_cast<std::size_t>(p), false);
  for (Index j : qp.nonneg) bounded[static_cast<std::size_t>(j)] = true;
  const Index nb = static_cast<Index>(qp.nonneg.size());
  const Index ncomp = k + nb;

  Vector x = Vector::Zero(p), z = Vector::Ones(k), v = Vector::Zero(p);
  for (Index j : qp.nonneg) {
    x[j] = 1.0;
    v[j] = 1.0;
  }
  if (opts.start_seed) {
    std::mt19937_64 eng(*opts.start_seed);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (Index j = 0; j < p; ++j) x[j] = bounded[static_cast<std::size_t>(j)] ? u(eng) : u(eng) - 1.0;
    for (Index i = 0; i < k; ++i) z[i] = u(eng);
    for (Index j : qp.nonneg) v[j] = u(eng);
  }
  Vector s = (qp.A * x - qp.c).cwiseMax(1.0);

  NormalSystem normal(qp);
  IpmOutcome out;
  QpSolution& sol = out.sol;
  std::vector<double> pinf_history;
  bool cleared_feasible = false;
  QpSolution best;
  std::optional<QpSolution> last_pass;
  int extra = 0;
  double best_worst = std::numeric_limits<double>::infinity();
  const double c_scale = 1.0 + inf_norm(qp.c);

  auto snapshot = [&](int it) {
    QpSolution work;
    work.x = x;
    work.dual = z;
    work.bound_dual = v;
    sol = sc.to_original(work);
    sol.iterations = it;
    sol.objective = orig.objective(sol.x);
  };

  for (int it = 0;; ++it) {
    snapshot(it);
    const ScaledCheck chk = scaled_check(orig, sol);
    if (chk.passes(opts)) {
      sol.status = QpStatus::Optimal;
      if (!opts.polish) return out;
      if (auto pol = polish_scaled(qp, orig, sc, sol, opts)) {
        sol = *pol;
        return out;
      }
      // A loose interior point can hide the active set; tighten a little and retry.
      if (!last_pass) last_pass = sol;
      if (++extra > 6) {
        sol = *last_pass;
        return out;
      }
    }
    if (chk.worst(opts) < best_worst) {
      best_worst = chk.worst(opts);
      best = sol;
    }
    if (last_pass && !chk.passes(opts)) {
      sol = *last_pass;
      return out;
    }
    if (it >= opts.max_iterations) {
      // Hand the least-bad iterate to the polish step.
      sol = best;
      sol.iterations = it;
      sol.status = QpStatus::IterationLimit;
      out.suspect_infeasible = true;
      return out;
    }
    // Divergence signals: primal infeasibility stuck while duals blow up.
    const Vector rp = qp.A * x - s - qp.c;
    const double pinf = inf_norm(rp) / c_scale;
    pinf_history.push_back(pinf);
    if (opts.detect_infeasibility && !cleared_feasible && it >= 20) {
      const double earlier = pinf_history[pinf_history.size() - 11];
      const double dual_size = std::max(inf_norm(sol.dual), inf_norm(sol.bound_dual));
      if ((pinf > 1e-6 && pinf > 0.5 * earlier) || dual_size > 1e10 * chk.dual_scale) {
        // Stalled: settle feasibility once, then either stop or keep iterating.
        const std::optional<double> viol = min_violation(orig, opts);
        if (viol && *viol > 1e-6 * (1.0 + inf_norm(orig.c))) {
          sol.status = QpStatus::Infeasible;
          return out;
        }
        cleared_feasible = true;
        out.feasible = true;
      }
    }

    const bool gap_done = chk.abs.complementarity_gap <= 0.1 * opts.tol_gap * chk.gap_scale &&
                          chk.abs.primal_infeasibility <= opts.tol_primal * chk.primal_scale;
    const Vector rd = qp.Q * x + qp.q - qp.A.transpose() * z - v;
    const double mu = ncomp ? (s.dot(z) + x.dot(v)) / static_cast<double>(ncomp) : 0.0;
    Vector theta(k), dvec = Vector::Zero(p);
    for (Index i = 0; i < k; ++i) theta[i] = z[i] / s[i];
    for (Index j : qp.nonneg) dvec[j] = v[j] / x[j];
    if (!normal.factor(theta, dvec, opts)) {
      if (last_pass) {
        sol = *last_pass;
        return out;
      }
      sol.status = QpStatus::NumericalFailure;
      out.suspect_infeasible = true;
      return out;
    }

    struct Dir { Vector dx, ds, dz, dv; };
    auto direction = [&](const Vector& r_sz, const Vector& r_xv) {
      Vector g = -rd;
      if (k > 0) g += qp.A.transpose() * ((r_sz - z.cwiseProduct(rp)).cwiseQuotient(s));
      for (Index j : qp.nonneg) g[j] += r_xv[j] / x[j];
      Dir d;
      d.dx = normal.solve(g);
      // Refinement against the unregularized system recovers accuracy lost to
      // regularization and to ill-conditioning late in the run.
      auto residual = [&](const Vector& dx) {
        Vector Nd = qp.Q * dx + dvec.cwiseProduct(dx);
        if (k > 0) Nd += qp.A.transpose() * theta.cwiseProduct(qp.A * dx);
        return Vector(g - Nd);
      };
      Vector res = residual(d.dx);
      for (int r = 0; r < 2; ++r) {
        Vector trial = d.dx + normal.solve(res);
        Vector tres = residual(trial);
        if (!(inf_norm(tres) < inf_norm(res))) break;
        d.dx = std::move(trial);
        res = std::move(tres);
      }
      d.ds = qp.A * d.dx + rp;
      d.dz = (r_sz - z.cwiseProduct(d.ds)).cwiseQuotient(s);
      d.dv = Vector::Zero(p);
      for (Index j : qp.nonneg) d.dv[j] = (r_xv[j] - v[j] * d.dx[j]) / x[j];
      return d;
    };
    auto step_to_boundary = [&](const Dir& d) {
      double a = std::min(max_step(s, d.ds), max_step(z, d.dz));
      a = std::min(a, max_step(x, d.dx, &bounded));
      a = std::min(a, max_step(v, d.dv, &bounded));
      return a;
    };

    const Vector r_sz_aff = -s.cwiseProduct(z);
    Vector r_xv_aff = Vector::Zero(p);
    for (Index j : qp.nonneg) r_xv_aff[j] = -x[j] * v[j];
    const Dir aff = direction(r_sz_aff, r_xv_aff);
    double sigma = 0.0;
    Vector r_sz = r_sz_aff, r_xv = r_xv_aff;
    if (ncomp > 0) {
      const double a_aff = step_to_boundary(aff);
      double mu_aff = (s + a_aff * aff.ds).dot(z + a_aff * aff.dz);
      for (Index j : qp.nonneg) mu_aff += (x[j] + a_aff * aff.dx[j]) * (v[j] + a_aff * aff.dv[j]);
      mu_aff /= static_cast<double>(ncomp);
      sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);
      if (gap_done) {
        // Complementarity is already small enough; shrinking it further only worsens the
        // conditioning, so re-center and let the step repair the dual residual.
        r_sz = r_sz_aff.array() + mu;
        for (Index j : qp.nonneg) r_xv[j] += mu;
      } else {
        r_sz.array() += sigma * mu - aff.ds.array() * aff.dz.array();
        for (Index j : qp.nonneg) r_xv[j] += sigma * mu - aff.dx[j] * aff.dv[j];
      }
    }
    const Dir d = ncomp > 0 ? direction(r_sz, r_xv) : aff;
    const double alpha = ncomp > 0 ? std::min(1.0, 0.995 * step_to_boundary(d)) : 1.0;
    if (!d.dx.allFinite() || !d.dz.allFinite() || !d.dv.allFinite()) {
      if (last_pass) {
        sol = *last_pass;
        return out;
      }
      sol.status = QpStatus::NumericalFailure;
      out.suspect_infeasible = true;
      return out;
    }
    x += alpha * d.dx;
    s += alpha * d.ds;
    z += alpha * d.dz;
    v += alpha * d.dv;
  }
}

inline QpSolution solve_impl(const QuadraticProgram& qp, const SolveOptions& opts);

/// Elastic feasibility problem: minimize sum(t) + eps/2 ||x||^2 s.t. A x + t >= c, t >= 0.
/// Returns the optimal total violation, or nullopt if it could not be computed.
inline std::optional<double> min_violation(const QuadraticProgram& qp, const SolveOptions& opts) {
  const Index p = qp.num_vars(), k = qp.num_rows();
  QuadraticProgram el;
  el.Q = Matrix::Zero(p + k, p + k);
  el.Q.topLeftCorner(p, p).diagonal().setConstant(1e-8);
  el.q = Vector::Zero(p + k);
  el.q.tail(k).setOnes();
  el.A.resize(k, p + k);
  el.A << qp.A, Matrix::Identity(k, k);
  el.c = qp.c;
  el.nonneg = qp.nonneg;
  for (Index i = 0; i < k; ++i) el.nonneg.push_back(p + i);
  SolveOptions o = opts;
  o.detect_infeasibility = false;
  o.start_seed.reset();
  o.max_iterations = std::max(opts.max_iterations, 200);
  const QpSolution s = solve_impl(el, o);
  if (s.status != QpStatus::Optimal) return std::nullopt;
  return s.x.tail(k).sum();
}

inline QpSolution solve_impl(const QuadraticProgram& qp, const SolveOptions& opts) {
  const auto [work, sc] = equilibrate(qp);
  IpmOutcome run = interior_point(work, qp, sc, opts);
  QpSolution& sol = run.sol;
  if (sol.status == QpStatus::Infeasible) {
    sol.residuals = kkt_residuals(qp, sol);
    return sol;
  }
  if (opts.polish && !sol.polished && sol.status != QpStatus::Optimal) {
    if (auto pol = polish_scaled(work, qp, sc, sol, opts)) return *pol;
  }
  sol.residuals = kkt_residuals(qp, sol);
  if (sol.status != QpStatus::Optimal && run.suspect_infeasible && !run.feasible &&
      opts.detect_infeasibility && qp.num_rows() > 0) {
    if (auto viol = min_violation(qp, opts))
      if (*viol > 1e-6 * (1.0 + inf_norm(qp.c))) sol.status = QpStatus::Infeasible;
  }
  return sol;
}

}  // namespace detail

/// Primal-dual interior-point method (Mehrotra predictor-corrector) followed by an
/// active-set polish. Reported residuals are absolute; the stopping test scales them by
/// the magnitude of the problem data.
inline QpSolution solve(const QuadraticProgram& qp, const SolveOptions& opts = {}) {
  qp.validate();
  if (opts.tol_primal <= 0 || opts.tol_dual <= 0 || opts.tol_gap <= 0 || opts.max_iterations < 1)
    throw InvalidArgument("SolveOptions: tolerances and iteration limit must be positive");
  return detail::solve_impl(qp, opts);
}

}  // namespace qssvm
