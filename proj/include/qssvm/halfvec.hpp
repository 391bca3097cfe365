#pragma once

#include <array>
#include <utility>
#include <vector>

#include "qssvm/dataset.hpp"
#include "qssvm/types.hpp"

namespace qssvm {

/// Position of entry (i, j) of an n x n symmetric matrix in hvec order (0-based).
/// The order stacks the columns of the lower triangle: a11..an1, a22..an2, ..., ann.
constexpr Index hvec_index(Index n, Index i, Index j) {
  if (i < j) std::swap(i, j);
  return j * n - j * (j - 1) / 2 + (i - j);
}

/// (row, col) with row >= col for hvec position k.
inline std::pair<Index, Index> hvec_entry(Index n, Index k) {
  for (Index j = 0; j < n; ++j) {
    const Index len = n - j;
    if (k < len) return {j + k, j};
    k -= len;
  }
  throw InvalidArgument("hvec_entry: index out of range");
}

/// Half-vectorization of a symmetric matrix.
class HalfVector {
 public:
  HalfVector() = default;
  HalfVector(Index n, Vector values) : n_(n), values_(std::move(values)) {
    if (n < 0 || values_.size() != half_size(n))
      throw DimensionMismatch("HalfVector: length " + std::to_string(values_.size()) +
                              " does not match n = " + std::to_string(n));
  }

  Index source_dim() const { return n_; }
  const Vector& values() const { return values_; }
  double operator[](Index k) const { return values_[k]; }

  friend bool operator==(const HalfVector& a, const HalfVector& b) {
    return a.n_ == b.n_ && a.values_ == b.values_;
  }

 private:
  Index n_ = 0;
  Vector values_;
};

inline HalfVector hvec(const SymmetricMatrix& a) {
  const Index n = a.dim();
  Vector v(half_size(n));
  Index k = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i) v[k++] = a(i, j);
  return HalfVector(n, std::move(v));
}

inline SymmetricMatrix unhvec(const HalfVector& h) {
  const Index n = h.source_dim();
  SymmetricMatrix a(n);
  Index k = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i) a.set(i, j, h[k++]);
  return a;
}

/// Recover n from a half-vector length; throws if the length is not triangular.
inline Index dim_from_half_size(Index len) {
  Index n = 0;
  while (half_size(n) < len) ++n;
  if (half_size(n) != len)
    throw DimensionMismatch("length " + std::to_string(len) + " is not n(n+1)/2 for any n");
  return n;
}

inline SymmetricMatrix unhvec(const Vector& v) { return unhvec(HalfVector(dim_from_half_size(v.size()), v)); }

/// Column-stacking vectorization.
inline Vector vec(const Matrix& a) { return Eigen::Map<const Vector>(a.data(), a.size()); }

/// L_n with L_n vec(A) = hvec(A).
inline Eigen::MatrixXi elimination_matrix(Index n) {
  if (n < 1) throw InvalidArgument("elimination_matrix: n must be >= 1");
  Eigen::MatrixXi L = Eigen::MatrixXi::Zero(half_size(n), n * n);
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i) L(hvec_index(n, i, j), j * n + i) = 1;
  return L;
}

/// D_n with D_n hvec(A) = vec(A) for symmetric A.
inline Eigen::MatrixXi duplication_matrix(Index n) {
  if (n < 1) throw InvalidArgument("duplication_matrix: n must be >= 1");
  Eigen::MatrixXi D = Eigen::MatrixXi::Zero(n * n, half_size(n));
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) D(j * n + i, hvec_index(n, i, j)) = 1;
  return D;
}

/// Quadratic features: hvec(W)' s(x) = 1/2 x'Wx.
inline Vector feature_s(const Vector& x) {
  const Index n = x.size();
  Vector s(half_size(n));
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    s[k++] = 0.5 * x[j] * x[j];
    for (Index i = j + 1; i < n; ++i) s[k++] = x[i] * x[j];
  }
  return s;
}

/// r(x) = [s(x); x], so that z'r(x) = 1/2 x'Wx + b'x for z = [hvec(W); b].
inline Vector feature_r(const Vector& x) {
  Vector r(z_size(x.size()));
  r << feature_s(x), x;
  return r;
}

/// M(x) with M(x) hvec(W) = W x. Row k is the gradient of (Wx)_k with respect to hvec(W).
inline Matrix sample_design_M(const Vector& x) {
  const Index n = x.size();
  Matrix M = Matrix::Zero(n, half_size(n));
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i) {
      const Index col = hvec_index(n, i, j);
      M(i, col) += x[j];
      if (i != j) M(j, col) += x[i];
    }
  return M;
}

/// Per-dataset quantities shared by every formulation: features s, r, the design
/// matrices M, and the Hessian G of sum_i ||W x_i + b||^2 in z = [hvec(W); b]
/// (so that 1/2 z'Gz equals that sum).
class DesignCache {
 public:
  explicit DesignCache(const Dataset& d) : n_(d.n()), m_(d.m()) {
    const Index h = half_size(n_);
    S_.resize(m_, h);
    R_.resize(m_, h + n_);
    M_.reserve(static_cast<std::size_t>(m_));
    for (Index i = 0; i < m_; ++i) {
      const Vector x = d.x(i);
      R_.row(i) = feature_r(x).transpose();
      M_.push_back(sample_design_M(x));
    }
    S_ = R_.leftCols(h);
    G_ = assemble_G(d.X());
  }

  Index n() const { return n_; }
  Index m() const { return m_; }
  /// Row i is s(x_i).
  const Matrix& s() const { return S_; }
  /// Row i is r(x_i).
  const Matrix& r() const { return R_; }
  const Matrix& M(Index i) const { return M_[static_cast<std::size_t>(i)]; }
  const Matrix& G() const { return G_; }

 private:
  // Column k of M(x) has at most two nonzeros: (row a, x_b) and (row b, x_a) for the
  // pair {a, b} behind k. Summing M'M over samples then only needs the second-moment
  // matrix X'X and the column sums of X.
  Matrix assemble_G(const Matrix& X) const {
    const Index h = half_size(n_);
    const Matrix S = X.transpose() * X;
    const Vector xs = X.colwise().sum().transpose();
    struct Tap { Index row, feat; };
    std::vector<std::array<Tap, 2>> taps(static_cast<std::size_t>(h));
    std::vector<int> ntaps(static_cast<std::size_t>(h));
    for (Index j = 0; j < n_; ++j)
      for (Index i = j; i < n_; ++i) {
        const auto k = static_cast<std::size_t>(hvec_index(n_, i, j));
        taps[k][0] = {i, j};
        ntaps[k] = 1;
        if (i != j) {
          taps[k][1] = {j, i};
          ntaps[k] = 2;
        }
      }
    Matrix G = Matrix::Zero(h + n_, h + n_);
    for (Index k1 = 0; k1 < h; ++k1) {
      const auto u1 = static_cast<std::size_t>(k1);
      for (Index k2 = k1; k2 < h; ++k2) {
        const auto u2 = static_cast<std::size_t>(k2);
        double acc = 0.0;
        for (int a = 0; a < ntaps[u1]; ++a)
          for (int b = 0; b < ntaps[u2]; ++b)
            if (taps[u1][a].row == taps[u2][b].row) acc += S(taps[u1][a].feat, taps[u2][b].feat);
        G(k1, k2) = G(k2, k1) = 2.0 * acc;
      }
      for (int a = 0; a < ntaps[u1]; ++a) {
        const Tap t = taps[u1][a];
        G(k1, h + t.row) += 2.0 * xs[t.feat];
      }
      G.block(h, k1, n_, 1) = G.block(k1, h, 1, n_).transpose();
    }
    G.bottomRightCorner(n_, n_).diagonal().setConstant(2.0 * static_cast<double>(m_));
    return G;
  }

  Index n_;
  Index m_;
  Matrix S_;
  Matrix R_;
  std::vector<Matrix> M_;
  Matrix G_;
};

inline DesignCache assemble_design(const Dataset& d) { return DesignCache(d); }

/// f(x) = 1/2 x'Wx + b'x + c.
inline double quad_eval(const QuadSurfaceModel& model, const Vector& x) {
  if (x.size() != model.dim() || model.W.dim() != model.dim())
    throw DimensionMismatch("quad_eval: model has n = " + std::to_string(model.dim()) +
                            ", point has " + std::to_string(x.size()) + " entries");
  return 0.5 * x.dot(model.W.dense() * x) + model.b.dot(x) + model.c;
}

/// z = [hvec(W); b].
inline Vector model_z(const QuadSurfaceModel& model) {
  Vector z(z_size(model.dim()));
  z << hvec(model.W).values(), model.b;
  return z;
}

}  // namespace qssvm
