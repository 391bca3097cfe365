#pragma once

#include <limits>
#include <optional>

#include "qssvm/qp.hpp"

namespace qssvm {

namespace detail {

/// Best KKT point over all active sets, or nullopt if no active set yields one.
inline std::optional<QpSolution> enumerate_active_sets(const QuadraticProgram& qp) {
  const Index p = qp.num_vars(), k = qp.num_rows();
  const Index nb = static_cast<Index>(qp.nonneg.size());
  const Index total = k + nb;
  // Stacked constraint rows: A x >= c, then e_j' x >= 0.
  Matrix C(total, p);
  Vector d(total);
  C.topRows(k) = qp.A;
  d.head(k) = qp.c;
  for (Index b = 0; b < nb; ++b) {
    C.row(k + b).setZero();
    C(k + b, qp.nonneg[static_cast<std::size_t>(b)]) = 1.0;
    d[k + b] = 0.0;
  }
  const double scale = 1.0 + std::max({qp.Q.size() ? qp.Q.cwiseAbs().maxCoeff() : 0.0,
                                       qp.q.size() ? qp.q.cwiseAbs().maxCoeff() : 0.0,
                                       C.size() ? C.cwiseAbs().maxCoeff() : 0.0,
                                       d.size() ? d.cwiseAbs().maxCoeff() : 0.0});
  const double tol = 1e-9 * scale;

  std::optional<QpSolution> best;
  for (std::uint32_t mask = 0; mask < (1u << total); ++mask) {
    std::vector<Index> act;
    for (Index i = 0; i < total; ++i)
      if (mask & (1u << i)) act.push_back(i);
    const Index na = static_cast<Index>(act.size());
    if (na > p) continue;
    Matrix K = Matrix::Zero(p + na, p + na);
    Vector rhs(p + na);
    K.topLeftCorner(p, p) = qp.Q;
    rhs.head(p) = -qp.q;
    for (Index r = 0; r < na; ++r) {
      K.block(p + r, 0, 1, p) = C.row(act[static_cast<std::size_t>(r)]);
      K.block(0, p + r, p, 1) = -C.row(act[static_cast<std::size_t>(r)]).transpose();
      rhs[p + r] = d[act[static_cast<std::size_t>(r)]];
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(K);
    const Vector u = cod.solve(rhs);
    if ((K * u - rhs).cwiseAbs().maxCoeff() > tol * (1.0 + u.cwiseAbs().maxCoeff())) continue;
    const Vector x = u.head(p);
    const Vector lam = u.tail(na);
    if (na && lam.minCoeff() < -tol) continue;
    if (total && (C * x - d).minCoeff() < -tol) continue;
    // With a singular Q the face may still be unbounded below; stationarity above already
    // rules that out because a KKT point of a convex problem is a global minimizer.
    QpSolution s;
    s.x = x;
    s.dual = Vector::Zero(k);
    s.bound_dual = Vector::Zero(p);
    for (Index r = 0; r < na; ++r) {
      const Index i = act[static_cast<std::size_t>(r)];
      if (i < k)
        s.dual[i] = lam[r];
      else
        s.bound_dual[qp.nonneg[static_cast<std::size_t>(i - k)]] = lam[r];
    }
    s.objective = qp.objective(x);
    s.status = QpStatus::Optimal;
    if (!best || s.objective < best->objective) best = std::move(s);
  }
  return best;
}

}  // namespace detail

/// Exact solve by enumerating every active set; for tiny problems only
/// (at most 8 variables and 12 constraints including bounds).
/// A feasible problem with no finite optimum is reported as IterationLimit.
inline QpSolution solve_oracle(const QuadraticProgram& qp) {
  qp.validate();
  const Index total = qp.num_rows() + static_cast<Index>(qp.nonneg.size());
  if (qp.num_vars() > 8 || total > 12)
    throw InvalidArgument("solve_oracle: problem too large for enumeration");
  if (auto best = detail::enumerate_active_sets(qp)) {
    best->residuals = kkt_residuals(qp, *best);
    return *best;
  }
  // Nonempty feasible sets always have a projection of the origin, which is a KKT point
  // of this strongly convex problem.
  QuadraticProgram proj = qp;
  proj.Q = Matrix::Identity(qp.num_vars(), qp.num_vars());
  proj.q = Vector::Zero(qp.num_vars());
  QpSolution out;
  out.x = Vector::Zero(qp.num_vars());
  out.dual = Vector::Zero(qp.num_rows());
  out.bound_dual = Vector::Zero(qp.num_vars());
  out.status = detail::enumerate_active_sets(proj) ? QpStatus::IterationLimit : QpStatus::Infeasible;
  out.objective = std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace qssvm
