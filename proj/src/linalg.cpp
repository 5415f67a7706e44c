#include "gomp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gomp {

Matrix::Matrix(Eigen::MatrixXd data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw ArgumentError("matrix must have at least one row and one column");
  }
  if (!data_.allFinite()) {
    throw ArgumentError("matrix entries must be finite");
  }
}

Matrix Matrix::identity(Index n) {
  return Matrix(Eigen::MatrixXd::Identity(n, n));
}

Vector Matrix::operator*(const Vector& x) const {
  if (x.size() != cols()) {
    throw ArgumentError("matrix-vector product: expected length " + std::to_string(cols()) +
                        ", got " + std::to_string(x.size()));
  }
  return data_ * x;
}

// ---------------------------------------------------------------------------
// IndexSet

IndexSet::IndexSet(std::initializer_list<Index> indices)
    : IndexSet(from_unsorted(std::vector<Index>(indices))) {}

IndexSet IndexSet::from_sorted(std::vector<Index> indices) {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0) throw ArgumentError("index set contains a negative index");
    if (i > 0 && indices[i] <= indices[i - 1]) {
      throw ArgumentError("index set must be strictly increasing");
    }
  }
  IndexSet out;
  out.indices_ = std::move(indices);
  return out;
}

IndexSet IndexSet::from_unsorted(std::vector<Index> indices) {
  std::sort(indices.begin(), indices.end());
  return from_sorted(std::move(indices));
}

bool IndexSet::contains(Index j) const {
  return std::binary_search(indices_.begin(), indices_.end(), j);
}

IndexSet IndexSet::united(const IndexSet& other) const {
  IndexSet out;
  std::set_union(begin(), end(), other.begin(), other.end(), std::back_inserter(out.indices_));
  return out;
}

IndexSet IndexSet::minus(const IndexSet& other) const {
  IndexSet out;
  std::set_difference(begin(), end(), other.begin(), other.end(),
                      std::back_inserter(out.indices_));
  return out;
}

IndexSet IndexSet::intersected(const IndexSet& other) const {
  IndexSet out;
  std::set_intersection(begin(), end(), other.begin(), other.end(),
                        std::back_inserter(out.indices_));
  return out;
}

bool IndexSet::disjoint(const IndexSet& other) const { return intersected(other).empty(); }

void IndexSet::check_bound(Index bound) const {
  if (!indices_.empty() && indices_.back() >= bound) {
    throw ArgumentError("index " + std::to_string(indices_.back()) + " out of range [0, " +
                        std::to_string(bound) + ")");
  }
}

Vector LsSolution::dense(Index n) const {
  Vector out = Vector::Zero(n);
  for (Index i = 0; i < support.size(); ++i) out(support[i]) = coefficients(i);
  return out;
}

// ---------------------------------------------------------------------------

Vector correlations(const Matrix& phi, const Vector& r) {
  if (r.size() != phi.rows()) {
    throw ArgumentError("correlations: residual has length " + std::to_string(r.size()) +
                        ", expected " + std::to_string(phi.rows()));
  }
  return phi.data().transpose() * r;
}

Eigen::MatrixXd submatrix(const Matrix& phi, const IndexSet& support) {
  support.check_bound(phi.cols());
  Eigen::MatrixXd out(phi.rows(), support.size());
  for (Index i = 0; i < support.size(); ++i) out.col(i) = phi.col(support[i]);
  return out;
}

LsSolution least_squares(const Matrix& phi, const IndexSet& support, const Vector& y) {
  if (support.size() > phi.rows()) {
    throw ArgumentError("least_squares: support larger than the number of rows");
  }
  IncrementalQr qr(phi, support.size());
  qr.append(support);
  return qr.solve(y);
}

// ---------------------------------------------------------------------------
// IncrementalQr

IncrementalQr::IncrementalQr(const Matrix& phi, Index capacity) : phi_(&phi) {
  const Index cap = std::clamp<Index>(capacity, 0, phi.rows());
  q_.resize(phi.rows(), cap);
  r_.resize(cap, cap);
}

void IncrementalQr::append(const IndexSet& added) {
  added.check_bound(phi_->cols());
  if (!support_.disjoint(added)) {
    throw ArgumentError("append: columns already present in the factorization");
  }
  const Index m = phi_->rows();
  const Index k0 = size();
  const Index k1 = k0 + added.size();
  if (k1 > m) {
    throw SingularSystemError("append: " + std::to_string(k1) +
                              " columns cannot be independent in dimension " +
                              std::to_string(m));
  }
  if (q_.cols() < k1) {
    const Index cap = std::min<Index>(m, std::max<Index>(k1, 2 * q_.cols()));
    q_.conservativeResize(Eigen::NoChange, cap);
    Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(cap, cap);
    grown.topLeftCorner(k0, k0) = r_.topLeftCorner(k0, k0);
    r_ = std::move(grown);
  }

  double max_diag = max_diagonal_;
  Index k = k0;
  for (Index j : added) {
    Vector v = phi_->col(j);
    const double col_norm = v.norm();
    auto qk = q_.leftCols(k);
    Vector h = qk.transpose() * v;
    v.noalias() -= qk * h;
    Vector h2 = qk.transpose() * v;
    v.noalias() -= qk * h2;
    h += h2;
    const double diag = v.norm();
    max_diag = std::max(max_diag, diag);
    if (col_norm == 0.0 || diag <= kSingularityTolerance * std::max(max_diag, col_norm)) {
      throw SingularSystemError("column " + std::to_string(j) +
                                " is numerically dependent on the selected columns");
    }
    q_.col(k) = v / diag;
    r_.col(k).head(k) = h;
    r_.col(k).segment(k, r_.rows() - k).setZero();
    r_(k, k) = diag;
    ++k;
  }
  // Commit only after every column passed the rank test.
  order_.insert(order_.end(), added.begin(), added.end());
  support_ = support_.united(added);
  max_diagonal_ = max_diag;
}

LsSolution IncrementalQr::solve(const Vector& y) const {
  if (y.size() != phi_->rows()) {
    throw ArgumentError("least squares: measurement vector has length " +
                        std::to_string(y.size()) + ", expected " +
                        std::to_string(phi_->rows()));
  }
  const Index k = size();
  LsSolution out;
  out.support = support_;
  if (k == 0) {
    out.coefficients = Vector(0);
    out.residual = y;
    out.residual_norm = y.norm();
    return out;
  }
  auto q = this->q();
  Vector qty = q.transpose() * y;
  Vector residual = y - q * qty;
  // Second projection pass keeps the residual orthogonal to working precision.
  Vector correction = q.transpose() * residual;
  residual.noalias() -= q * correction;
  qty += correction;

  Vector ordered = r().triangularView<Eigen::Upper>().solve(qty);
  // Map factorization order back to ascending support order.
  out.coefficients.resize(k);
  for (Index i = 0; i < k; ++i) {
    const auto pos = std::lower_bound(support_.begin(), support_.end(), order_[i]) -
                     support_.begin();
    out.coefficients(pos) = ordered(i);
  }
  out.residual = std::move(residual);
  out.residual_norm = out.residual.norm();
  return out;
}

IncrementalQr append_columns(IncrementalQr state, const IndexSet& added) {
  state.append(added);
  return state;
}

}  // namespace gomp
