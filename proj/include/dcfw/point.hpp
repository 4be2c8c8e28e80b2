#pragma once

#include <memory>
#include <variant>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "dcfw/error.hpp"

namespace dcfw {

using Index = Eigen::Index;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Thin SVD triple X = U diag(s) Wᵀ of an m×n matrix.
struct FactoredMatrix {
  Index rows = 0;
  Index cols = 0;
  Eigen::MatrixXd U;  // rows × r, orthonormal columns
  Eigen::VectorXd s;  // r, nonnegative
  Eigen::MatrixXd W;  // cols × r, orthonormal columns

  Index rank() const { return s.size(); }
  Eigen::MatrixXd dense() const;
  double entry(Index i, Index j) const;

  /// Rank-one matrix scale·u vᵀ. A negative scale flips u.
  static FactoredMatrix rank_one(double scale, const Eigen::VectorXd& u, const Eigen::VectorXd& v);
  static FactoredMatrix zero(Index rows, Index cols);
};

/// An element of the ambient space: a dense vector or an m×n matrix.
///
/// Matrices may be held densely, sparsely (gradients of entrywise losses) or as a
/// thin SVD (solver iterates, oracle outputs). All matrix kinds of the same shape
/// are mutually compatible for inner products.
///
/// Copies share storage; the only mutable accessor detaches first.
class Point {
 public:
  enum class Kind { Vector, DenseMatrix, SparseMatrix, Factored };

  Point() : data_(std::make_shared<Storage>(Eigen::VectorXd())) {}
  Point(Eigen::VectorXd v) : data_(std::make_shared<Storage>(std::move(v))) {}
  Point(Eigen::MatrixXd m) : data_(std::make_shared<Storage>(std::move(m))) {}
  Point(SparseMatrix m) : data_(std::make_shared<Storage>(std::move(m))) {}
  Point(FactoredMatrix f) : data_(std::make_shared<Storage>(std::move(f))) {}

  Kind kind() const { return static_cast<Kind>(data_->index()); }
  bool is_vector() const { return kind() == Kind::Vector; }
  bool is_matrix() const { return !is_vector(); }

  /// Vector length (rows) or matrix row count.
  Index rows() const;
  /// 1 for vectors.
  Index cols() const;
  Index size() const { return rows() * cols(); }

  const Eigen::VectorXd& vector() const;
  Eigen::VectorXd& vector();
  const Eigen::MatrixXd& dense_matrix() const;
  const SparseMatrix& sparse() const;
  const FactoredMatrix& factored() const;

  /// Dense copy; a vector becomes a single column.
  Eigen::MatrixXd to_dense() const;

  /// Matrix-vector products for matrix kinds.
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& u) const;

  /// A zero of the same shape (vectors stay vectors, matrices become rank-0 factored).
  static Point zeros_like(const Point& p);

 private:
  using Storage = std::variant<Eigen::VectorXd, Eigen::MatrixXd, SparseMatrix, FactoredMatrix>;
  std::shared_ptr<Storage> data_;
};

/// Throws DimensionMismatch unless x and y live in the same space.
void require_compatible(const Point& x, const Point& y);

/// Euclidean / Frobenius inner product.
double inner(const Point& x, const Point& y);

/// Euclidean / Frobenius norm.
double norm(const Point& x);

bool is_zero(const Point& x);

/// c·x, keeping the representation (factored scaling only touches s and the sign of U).
Point scaled(const Point& x, double c);

/// x + y for same-kind dense operands; any matrix kinds fall back to a dense sum.
Point sum(const Point& x, const Point& y);

/// Frobenius defect ‖QᵀQ − I‖ of the columns of Q.
double orthonormality_defect(const Eigen::MatrixXd& Q);

}  // namespace dcfw
