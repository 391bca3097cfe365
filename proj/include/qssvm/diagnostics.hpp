#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "qssvm/dataset.hpp"
#include "qssvm/halfvec.hpp"
#include "qssvm/models.hpp"
#include "qssvm/qp.hpp"

namespace qssvm {

struct AssumptionCheck {
  bool full_column_rank = false;     ///< X has rank n
  bool ones_outside_columns = false;  ///< 1_m is not in the column space of X
};

inline AssumptionCheck check_assumptions(const Dataset& d) {
  AssumptionCheck out;
  const Index m = d.m(), n = d.n();
  Eigen::JacobiSVD<Matrix> svd(d.X(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cut = 1e-10 * sv[0] * static_cast<double>(std::max(m, n));
  Index rank = 0;
  for (Index k = 0; k < sv.size(); ++k)
    if (sv[k] > cut) ++rank;
  out.full_column_rank = rank == n;
  const Vector ones = Vector::Ones(m);
  const Vector fit = d.X() * Eigen::CompleteOrthogonalDecomposition<Matrix>(d.X()).solve(ones);
  out.ones_outside_columns = (ones - fit).norm() > 1e-8 * std::sqrt(static_cast<double>(m));
  return out;
}

/// Smallest eigenvalue of G compared against 1e-8 ||G||_2.
inline bool is_G_pd(const DesignCache& cache) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(cache.G(), Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  return top > 0.0 && ev.minCoeff() > 1e-8 * top;
}

/// The same test through the Schur complement of the b block (which is 2m I_n).
inline bool is_G_pd_schur(const DesignCache& cache) {
  const Index n = cache.n(), h = half_size(n);
  const Matrix& G = cache.G();
  const double bb = G(h, h);  // 2m
  const Matrix S = G.topLeftCorner(h, h) - G.topRightCorner(h, n) * G.bottomLeftCorner(n, h) / bb;
  Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Matrix> ss(S, Eigen::EigenvaluesOnly);
  return top > 0.0 && ss.eigenvalues().minCoeff() > 1e-8 * top;
}

enum class SeparabilityKind { Linear, Quadratic, None };

inline const char* to_string(SeparabilityKind k) {
  switch (k) {
    case SeparabilityKind::Linear: return "linear";
    case SeparabilityKind::Quadratic: return "quadratic";
    case SeparabilityKind::None: return "none";
  }
  return "?";
}

struct SeparabilityCertificate {
  SeparabilityKind kind = SeparabilityKind::None;
  std::optional<QuadSurfaceModel> witness;
  double min_margin = 0.0;  ///< min_i y_i f(x_i) of the witness
};

/// Looks for a separator of the requested kind with margin 1 by solving
/// min 1/2 ||(w, b, c)||^2 s.t. y_i f(x_i) >= 1.
inline SeparabilityCertificate check_separability(const Dataset& d, SeparabilityKind kind,
                                                  const SolveOptions& opts = {}) {
  if (kind == SeparabilityKind::None) throw InvalidArgument("check_separability: pick Linear or Quadratic");
  const Index n = d.n(), m = d.m();
  const Index nw = kind == SeparabilityKind::Quadratic ? half_size(n) : 0;
  const Index p = nw + n + 1;
  QuadraticProgram qp;
  qp.Q = Matrix::Identity(p, p);
  qp.q = Vector::Zero(p);
  qp.A.resize(m, p);
  qp.c = Vector::Ones(m);
  for (Index i = 0; i < m; ++i) {
    const Vector x = d.x(i);
    if (nw) qp.A.row(i).head(nw) = d.label(i) * feature_s(x).transpose();
    qp.A.row(i).segment(nw, n) = d.label(i) * x.transpose();
    qp.A(i, p - 1) = d.label(i);
  }
  const QpSolution sol = solve(qp, opts);
  SeparabilityCertificate cert;
  if (sol.status == QpStatus::Infeasible) return cert;
  if (sol.status != QpStatus::Optimal)
    throw SolverFailure(std::string("check_separability: solver stopped with status ") + to_string(sol.status));
  QuadSurfaceModel w;
  w.variant = kind == SeparabilityKind::Quadratic ? Variant::QSSVM : Variant::SVM;
  Vector hw = Vector::Zero(half_size(n));
  if (nw) hw = sol.x.head(nw);
  w.W = unhvec(HalfVector(n, hw));
  w.b = sol.x.segment(nw, n);
  w.c = sol.x[p - 1];
  double margin = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < m; ++i) margin = std::min(margin, d.label(i) * quad_eval(w, d.x(i)));
  // Interior-point answers sit on the margin up to solver tolerance.
  if (!(margin > 0.0)) return cert;
  cert.kind = kind;
  cert.witness = std::move(w);
  cert.min_margin = margin;
  return cert;
}

/// zero set carried by a report's layout (hvec positions outside the w block).
inline std::vector<Index> layout_zero_set(const QpLayout& L) {
  std::vector<bool> kept(static_cast<std::size_t>(half_size(L.n)), false);
  for (Index j : L.w_indices) kept[static_cast<std::size_t>(j)] = true;
  std::vector<Index> out;
  for (Index j = 0; j < half_size(L.n); ++j)
    if (!kept[static_cast<std::size_t>(j)]) out.push_back(j);
  return out;
}

/// Re-evaluates the KKT system of the report's formulation from scratch.
inline KktReport verify_kkt(const Dataset& d, const TrainReport& rep) {
  std::optional<std::vector<Index>> zero_set;
  if (rep.model.variant == Variant::RQSSVM) zero_set = layout_zero_set(rep.layout);
  return evaluate_kkt(d, assemble_design(d), rep.model, rep.xi, rep.kkt.alpha, zero_set);
}

struct SvmComparison {
  double w_infnorm = 0.0;
  double b_gap = 0.0;
  double c_gap = 0.0;
};

/// Trains the hard SVM and L1-QSSVM(lambda) and measures how far the latter is from the former.
inline SvmComparison compare_with_svm(const Dataset& d, double lambda, const SolveOptions& opts = {}) {
  TrainConfig svm_cfg;
  svm_cfg.variant = Variant::SVM;
  svm_cfg.solver = opts;
  TrainReport svm;
  try {
    svm = train(d, svm_cfg);
  } catch (const HardMarginInfeasible&) {
    throw NotLinearlySeparable("compare_with_svm: data is not linearly separable");
  }
  TrainConfig l1;
  l1.variant = Variant::L1QSSVM;
  l1.lambda = lambda;
  l1.solver = opts;
  const TrainReport q = train(d, l1);
  SvmComparison out;
  const Vector w = hvec(q.model.W).values();
  out.w_infnorm = w.size() ? w.cwiseAbs().maxCoeff() : 0.0;
  out.b_gap = (q.model.b - svm.model.b).cwiseAbs().maxCoeff();
  out.c_gap = std::abs(q.model.c - svm.model.c);
  return out;
}

/// Gradient of the quadratic part with respect to w at (0, u) minus the multiplier term,
/// i.e. the vector that must stay within [-lambda/2, lambda/2] for the SVM solution to
/// solve L1-QSSVM. `svm` must be a hard SVM report on `d`.
inline double svm_equivalence_residual(const Dataset& d, const TrainReport& svm) {
  if (svm.model.variant != Variant::SVM) throw InvalidArgument("svm_equivalence_residual: needs an SVM report");
  const Index n = d.n(), m = d.m();
  const DesignCache cache = assemble_design(d);
  Vector a = Vector::Zero(half_size(n));
  for (Index i = 0; i < m; ++i) {
    a += cache.M(i).transpose() * svm.model.b;
    a -= static_cast<double>(m) * svm.kkt.alpha[i] * d.label(i) * cache.s().row(i).transpose();
  }
  return a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
}

/// ||W||_F / (||W||_F + ||b|| + |c| + 1e-30); zero exactly when W = 0.
inline double curvature(const QuadSurfaceModel& model) {
  const double wf = model.W.dense().norm();
  return wf / (wf + model.b.norm() + std::abs(model.c) + 1e-30);
}

struct Interval {
  double lo = 0.0, hi = 0.0;
};

/// Range of intercepts c that keep every margin constraint satisfied once (W, b) and the
/// total slack gamma = ||xi||_1 are fixed.
inline Interval intercept_interval(const Dataset& d, const QuadSurfaceModel& model, const Vector& xi) {
  const double gamma = xi.size() ? xi.lpNorm<1>() : 0.0;
  Interval out{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  QuadSurfaceModel no_c = model;
  no_c.c = 0.0;
  for (Index i = 0; i < d.m(); ++i) {
    const double f = quad_eval(no_c, d.x(i));
    if (d.label(i) > 0)
      out.lo = std::max(out.lo, 1.0 - gamma - f);
    else
      out.hi = std::min(out.hi, -1.0 + gamma - f);
  }
  return out;
}

}  // namespace qssvm
