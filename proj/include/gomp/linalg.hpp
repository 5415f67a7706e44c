#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <span>
#include <vector>

#include "gomp/errors.hpp"

namespace gomp {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;

/// Dense m x n measurement operator. Column-major, finite entries, m, n >= 1.
class Matrix {
 public:
  explicit Matrix(Eigen::MatrixXd data);

  static Matrix identity(Index n);

  Index rows() const { return data_.rows(); }
  Index cols() const { return data_.cols(); }

  const Eigen::MatrixXd& data() const { return data_; }
  auto col(Index j) const { return data_.col(j); }
  double operator()(Index i, Index j) const { return data_(i, j); }

  Vector operator*(const Vector& x) const;

 private:
  Eigen::MatrixXd data_;
};

/// Strictly increasing list of distinct column indices.
class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(std::initializer_list<Index> indices);

  /// Validates ordering; throws ArgumentError on duplicates or disorder.
  static IndexSet from_sorted(std::vector<Index> indices);
  /// Sorts; throws ArgumentError on duplicates.
  static IndexSet from_unsorted(std::vector<Index> indices);

  Index size() const { return static_cast<Index>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  Index operator[](Index i) const { return indices_[static_cast<std::size_t>(i)]; }
  bool contains(Index j) const;

  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }
  const std::vector<Index>& values() const { return indices_; }

  IndexSet united(const IndexSet& other) const;
  IndexSet minus(const IndexSet& other) const;
  IndexSet intersected(const IndexSet& other) const;
  bool disjoint(const IndexSet& other) const;

  /// Largest index must be below `bound`.
  void check_bound(Index bound) const;

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<Index> indices_;
};

struct LsSolution {
  IndexSet support;
  Vector coefficients;  // aligned with support
  Vector residual;
  double residual_norm = 0.0;

  /// Coefficients scattered into a dense length-n vector.
  Vector dense(Index n) const;
};

/// Relative threshold on R's diagonal below which a column counts as dependent.
inline constexpr double kSingularityTolerance = 1e-10;

/// Phi' r.
Vector correlations(const Matrix& phi, const Vector& r);

/// Columns of phi indexed by `support`, in order.
Eigen::MatrixXd submatrix(const Matrix& phi, const IndexSet& support);

/// Least squares restricted to `support` from a fresh factorization.
LsSolution least_squares(const Matrix& phi, const IndexSet& support, const Vector& y);

/// Thin QR factorization of a growing column subset, Phi_T = Q R.
///
/// Columns are appended by classical Gram-Schmidt with one full
/// reorthogonalization pass, so Q stays orthonormal to working precision and
/// appending s columns to a k-column factor costs O(m k s).
class IncrementalQr {
 public:
  IncrementalQr(const Matrix& phi, Index capacity = 0);

  /// Appends columns of `added` (disjoint from the current set) in ascending
  /// order. Throws SingularSystemError and leaves the state unchanged if any
  /// appended column is numerically in the span of the others.
  void append(const IndexSet& added);

  /// Least-squares fit of y on the current columns.
  LsSolution solve(const Vector& y) const;

  Index size() const { return static_cast<Index>(order_.size()); }
  const IndexSet& support() const { return support_; }
  /// Columns in factorization order (the order they were appended).
  const std::vector<Index>& column_order() const { return order_; }
  auto q() const { return q_.leftCols(size()); }
  auto r() const { return r_.topLeftCorner(size(), size()); }

 private:
  const Matrix* phi_;
  Eigen::MatrixXd q_;
  Eigen::MatrixXd r_;
  std::vector<Index> order_;
  IndexSet support_;
  double max_diagonal_ = 0.0;
};

/// Convenience wrapper matching the functional form: returns the factor with
/// `added` appended.
IncrementalQr append_columns(IncrementalQr state, const IndexSet& added);

}  // namespace gomp
