#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "qssvm/types.hpp"

namespace qssvm {

/// m labeled samples in R^n. Row i of X is sample i; labels are exactly -1 or +1
/// and both classes are present.
class Dataset {
 public:
  Dataset(Matrix X, Vector y) : X_(std::move(X)), y_(std::move(y)) {
    if (X_.rows() != y_.size())
      throw DimensionMismatch("Dataset: " + std::to_string(X_.rows()) + " samples but " +
                              std::to_string(y_.size()) + " labels");
    if (X_.rows() == 0) throw EmptyDataset("Dataset: no samples");
    if (X_.cols() == 0) throw InvalidArgument("Dataset: no features");
    if (!X_.allFinite()) throw InvalidArgument("Dataset: non-finite feature value");
    Index pos = 0;
    for (Index i = 0; i < y_.size(); ++i) {
      if (y_[i] == 1.0)
        ++pos;
      else if (y_[i] != -1.0)
        throw InvalidArgument("Dataset: label at row " + std::to_string(i) + " is not -1 or +1");
    }
    if (pos == 0 || pos == y_.size()) throw NotTwoClasses("Dataset: both classes must be present");
    num_pos_ = pos;
  }

  Index m() const { return X_.rows(); }
  Index n() const { return X_.cols(); }
  const Matrix& X() const { return X_; }
  const Vector& y() const { return y_; }
  Vector x(Index i) const { return X_.row(i).transpose(); }
  double label(Index i) const { return y_[i]; }
  Index num_positive() const { return num_pos_; }
  Index num_negative() const { return m() - num_pos_; }

  /// Rows picked by `rows`, in that order. Throws NotTwoClasses if the pick is single-class.
  Dataset subset(std::span<const Index> rows) const {
    Matrix X(static_cast<Index>(rows.size()), n());
    Vector y(static_cast<Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k] < 0 || rows[k] >= m()) throw InvalidArgument("Dataset::subset: row out of range");
      X.row(static_cast<Index>(k)) = X_.row(rows[k]);
      y[static_cast<Index>(k)] = y_[rows[k]];
    }
    return Dataset(std::move(X), std::move(y));
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.X_.rows() == b.X_.rows() && a.X_.cols() == b.X_.cols() && a.X_ == b.X_ &&
           a.y_ == b.y_;
  }

 private:
  Matrix X_;
  Vector y_;
  Index num_pos_ = 0;
};

}  // namespace qssvm
