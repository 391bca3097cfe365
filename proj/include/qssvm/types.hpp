#pragma once

#include <Eigen/Dense>

#include <cctype>
#include <optional>
#include <string>
#include <string_view>

#include "qssvm/errors.hpp"

namespace qssvm {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Number of entries on and below the diagonal of an n x n matrix.
constexpr Index half_size(Index n) { return n * (n + 1) / 2; }

/// Length of z = [hvec(W); b].
constexpr Index z_size(Index n) { return half_size(n) + n; }

/// Real symmetric n x n matrix. Symmetry is exact: every write updates both triangles.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(Index n) : a_(Matrix::Zero(n, n)) {
    if (n < 0) throw InvalidArgument("SymmetricMatrix: negative dimension");
  }

  /// Throws DimensionMismatch if `a` is not square, InvalidArgument if not exactly symmetric.
  static SymmetricMatrix from_dense(const Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionMismatch("SymmetricMatrix: matrix is not square");
    for (Index j = 0; j < a.cols(); ++j)
      for (Index i = j + 1; i < a.rows(); ++i)
        if (a(i, j) != a(j, i)) throw InvalidArgument("SymmetricMatrix: matrix is not symmetric");
    SymmetricMatrix s;
    s.a_ = a;
    return s;
  }

  Index dim() const { return a_.rows(); }
  double operator()(Index i, Index j) const { return a_(i, j); }
  void set(Index i, Index j, double v) {
    a_(i, j) = v;
    a_(j, i) = v;
  }
  const Matrix& dense() const { return a_; }

  friend bool operator==(const SymmetricMatrix& l, const SymmetricMatrix& r) {
    return l.a_.rows() == r.a_.rows() && l.a_ == r.a_;
  }

 private:
  Matrix a_;
};

/// Which optimization problem produced a model.
enum class Variant { SVM, SSVM, QSSVM, SQSSVM, L1QSSVM, L1SQSSVM, RQSSVM };

inline constexpr Variant kAllVariants[] = {Variant::SVM,     Variant::SSVM,    Variant::QSSVM,
                                           Variant::SQSSVM,  Variant::L1QSSVM, Variant::L1SQSSVM,
                                           Variant::RQSSVM};

constexpr bool is_soft(Variant v) {
  return v == Variant::SSVM || v == Variant::SQSSVM || v == Variant::L1SQSSVM;
}
constexpr bool is_linear(Variant v) { return v == Variant::SVM || v == Variant::SSVM; }
constexpr bool is_l1(Variant v) { return v == Variant::L1QSSVM || v == Variant::L1SQSSVM; }
/// Variants whose objective may carry a lambda * ||w||_1 term.
constexpr bool accepts_lambda(Variant v) { return is_l1(v) || v == Variant::RQSSVM; }

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::SVM: return "SVM";
    case Variant::SSVM: return "SSVM";
    case Variant::QSSVM: return "QSSVM";
    case Variant::SQSSVM: return "SQSSVM";
    case Variant::L1QSSVM: return "L1-QSSVM";
    case Variant::L1SQSSVM: return "L1-SQSSVM";
    case Variant::RQSSVM: return "R-QSSVM";
  }
  return "?";
}

/// Accepts the display names above, case-insensitively, with or without the dash.
inline std::optional<Variant> parse_variant(std::string_view s) {
  std::string key;
  for (char ch : s)
    if (ch != '-' && ch != '_') key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  for (Variant v : kAllVariants) {
    std::string name;
    for (char ch : to_string(v))
      if (ch != '-') name.push_back(ch);
    if (name == key) return v;
  }
  return std::nullopt;
}

/// f(x) = 1/2 x'Wx + b'x + c, plus the training settings that produced it.
struct QuadSurfaceModel {
  SymmetricMatrix W;
  Vector b;
  double c = 0.0;
  Variant variant = Variant::QSSVM;
  double lambda = 0.0;
  std::optional<double> mu;

  Index dim() const { return b.size(); }
};

}  // namespace qssvm
