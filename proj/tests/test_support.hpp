#pragma once

#include <random>

#include "qssvm/halfvec.hpp"
#include "qssvm/qp.hpp"

namespace qssvm::testing {

inline Matrix random_matrix(std::mt19937_64& eng, Index r, Index c, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix a(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) a(i, j) = u(eng);
  return a;
}

inline Vector random_vector(std::mt19937_64& eng, Index n, double lo = -1.0, double hi = 1.0) {
  return random_matrix(eng, n, 1, lo, hi);
}

inline SymmetricMatrix random_symmetric(std::mt19937_64& eng, Index n) {
  Matrix a = random_matrix(eng, n, n);
  Matrix s = a + a.transpose();
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return SymmetricMatrix::from_dense(s);
}

/// Random dataset with both classes present; labels are random signs.
inline Dataset random_dataset(std::mt19937_64& eng, Index m, Index n) {
  Matrix X = random_matrix(eng, m, n, -2.0, 2.0);
  Vector y(m);
  std::bernoulli_distribution coin(0.5);
  for (Index i = 0; i < m; ++i) y[i] = coin(eng) ? 1.0 : -1.0;
  y[0] = 1.0;
  y[m - 1] = -1.0;
  return Dataset(std::move(X), std::move(y));
}

/// (I_n kron x') D_n, built from the definitions.
inline Matrix kronecker_design(const Vector& x) {
  const Index n = x.size();
  Matrix K = Matrix::Zero(n, n * n);
  for (Index i = 0; i < n; ++i) K.block(i, i * n, 1, n) = x.transpose();
  return K * duplication_matrix(n).cast<double>();
}

/// 2 sum_i H_i' H_i with H_i = [M_i | I].
inline Matrix G_from_definition(const Dataset& d) {
  const Index n = d.n();
  Matrix G = Matrix::Zero(z_size(n), z_size(n));
  for (Index i = 0; i < d.m(); ++i) {
    Matrix H(n, z_size(n));
    H << kronecker_design(d.x(i)), Matrix::Identity(n, n);
    G += 2.0 * H.transpose() * H;
  }
  return G;
}

/// Random bounded, feasible QP: a feasible point is planted and q is taken from the
/// range of a dual-feasible multiplier so the objective is bounded below.
inline QuadraticProgram random_tiny_qp(std::mt19937_64& eng, Index p, Index k, Index nb, Index rank) {
  QuadraticProgram qp;
  Matrix R = random_matrix(eng, p, rank);
  qp.Q = R * R.transpose();
  qp.Q = 0.5 * (qp.Q + qp.Q.transpose());
  qp.A = random_matrix(eng, k, p);
  Vector x0 = random_vector(eng, p);
  std::vector<Index> idx(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) idx[static_cast<std::size_t>(j)] = j;
  std::shuffle(idx.begin(), idx.end(), eng);
  for (Index b = 0; b < nb; ++b) {
    qp.nonneg.push_back(idx[static_cast<std::size_t>(b)]);
    x0[idx[static_cast<std::size_t>(b)]] = std::abs(x0[idx[static_cast<std::size_t>(b)]]);
  }
  std::sort(qp.nonneg.begin(), qp.nonneg.end());
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  qp.c = qp.A * x0 - random_vector(eng, k, 0.0, 1.0);
  Vector z0 = random_vector(eng, k, 0.0, 1.0);
  for (Index i = 0; i < k; ++i)
    if (u01(eng) < 0.4) z0[i] = 0.0;
  Vector v0 = Vector::Zero(p);
  for (Index j : qp.nonneg) v0[j] = u01(eng) < 0.5 ? u01(eng) : 0.0;
  qp.q = -qp.Q * random_vector(eng, p) + qp.A.transpose() * z0 + v0;
  return qp;
}

}  // namespace qssvm::testing
