#include "dcfw/point.hpp"

#include <cmath>

namespace dcfw {

Eigen::MatrixXd FactoredMatrix::dense() const {
  if (rank() == 0) return Eigen::MatrixXd::Zero(rows, cols);
  return U * s.asDiagonal() * W.transpose();
}

double FactoredMatrix::entry(Index i, Index j) const {
  double acc = 0.0;
  for (Index k = 0; k < rank(); ++k) acc += U(i, k) * s(k) * W(j, k);
  return acc;
}

FactoredMatrix FactoredMatrix::rank_one(double scale, const Eigen::VectorXd& u,
                                        const Eigen::VectorXd& v) {
  FactoredMatrix f;
  f.rows = u.size();
  f.cols = v.size();
  const double nu = u.norm();
  const double nv = v.norm();
  const double value = std::abs(scale) * nu * nv;
  if (value == 0.0) return zero(f.rows, f.cols);
  f.U = (scale < 0 ? -u : u) / nu;
  f.W = v / nv;
  f.s = Eigen::VectorXd::Constant(1, value);
  return f;
}

FactoredMatrix FactoredMatrix::zero(Index rows, Index cols) {
  FactoredMatrix f;
  f.rows = rows;
  f.cols = cols;
  f.U.resize(rows, 0);
  f.W.resize(cols, 0);
  f.s.resize(0);
  return f;
}

Index Point::rows() const {
  switch (kind()) {
    case Kind::Vector: return std::get<0>(*data_).size();
    case Kind::DenseMatrix: return std::get<1>(*data_).rows();
    case Kind::SparseMatrix: return std::get<2>(*data_).rows();
    case Kind::Factored: return std::get<3>(*data_).rows;
  }
  return 0;
}

Index Point::cols() const {
  switch (kind()) {
    case Kind::Vector: return 1;
    case Kind::DenseMatrix: return std::get<1>(*data_).cols();
    case Kind::SparseMatrix: return std::get<2>(*data_).cols();
    case Kind::Factored: return std::get<3>(*data_).cols;
  }
  return 0;
}

const Eigen::VectorXd& Point::vector() const {
  if (!is_vector()) throw DimensionMismatch("point is a matrix, expected a vector");
  return std::get<0>(*data_);
}

Eigen::VectorXd& Point::vector() {
  if (!is_vector()) throw DimensionMismatch("point is a matrix, expected a vector");
  if (data_.use_count() > 1) data_ = std::make_shared<Storage>(*data_);
  return std::get<0>(*data_);
}

const Eigen::MatrixXd& Point::dense_matrix() const {
  if (kind() != Kind::DenseMatrix) throw DimensionMismatch("point is not a dense matrix");
  return std::get<1>(*data_);
}

const SparseMatrix& Point::sparse() const {
  if (kind() != Kind::SparseMatrix) throw DimensionMismatch("point is not a sparse matrix");
  return std::get<2>(*data_);
}

const FactoredMatrix& Point::factored() const {
  if (kind() != Kind::Factored) throw DimensionMismatch("point is not a factored matrix");
  return std::get<3>(*data_);
}

Eigen::MatrixXd Point::to_dense() const {
  switch (kind()) {
    case Kind::Vector: return std::get<0>(*data_);
    case Kind::DenseMatrix: return std::get<1>(*data_);
    case Kind::SparseMatrix: return Eigen::MatrixXd(std::get<2>(*data_));
    case Kind::Factored: return std::get<3>(*data_).dense();
  }
  return {};
}

Eigen::VectorXd Point::apply(const Eigen::VectorXd& v) const {
  if (v.size() != cols()) throw DimensionMismatch("apply: operand length mismatch");
  switch (kind()) {
    case Kind::Vector: throw DimensionMismatch("apply: point is a vector");
    case Kind::DenseMatrix: return std::get<1>(*data_) * v;
    case Kind::SparseMatrix: return std::get<2>(*data_) * v;
    case Kind::Factored: {
      const auto& f = std::get<3>(*data_);
      if (f.rank() == 0) return Eigen::VectorXd::Zero(f.rows);
      return f.U * (f.s.cwiseProduct(f.W.transpose() * v));
    }
  }
  return {};
}

Eigen::VectorXd Point::apply_transpose(const Eigen::VectorXd& u) const {
  if (u.size() != rows()) throw DimensionMismatch("apply_transpose: operand length mismatch");
  switch (kind()) {
    case Kind::Vector: throw DimensionMismatch("apply_transpose: point is a vector");
    case Kind::DenseMatrix: return std::get<1>(*data_).transpose() * u;
    case Kind::SparseMatrix: return std::get<2>(*data_).transpose() * u;
    case Kind::Factored: {
      const auto& f = std::get<3>(*data_);
      if (f.rank() == 0) return Eigen::VectorXd::Zero(f.cols);
      return f.W * (f.s.cwiseProduct(f.U.transpose() * u));
    }
  }
  return {};
}

Point Point::zeros_like(const Point& p) {
  if (p.is_vector()) return Point(Eigen::VectorXd(Eigen::VectorXd::Zero(p.rows())));
  return Point(FactoredMatrix::zero(p.rows(), p.cols()));
}

void require_compatible(const Point& x, const Point& y) {
  if (x.is_vector() != y.is_vector() || x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionMismatch("incompatible points: " + std::to_string(x.rows()) + "x" +
                            std::to_string(x.cols()) + " vs " + std::to_string(y.rows()) + "x" +
                            std::to_string(y.cols()));
  }
}

namespace {

double sparse_dot(const SparseMatrix& S, const Eigen::MatrixXd& D) {
  double acc = 0.0;
  for (Index j = 0; j < S.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(S, j); it; ++it) acc += it.value() * D(it.row(), j);
  return acc;
}

double sparse_factored_dot(const SparseMatrix& S, const FactoredMatrix& F) {
  if (F.rank() == 0) return 0.0;
  const Eigen::MatrixXd WS = F.W * F.s.asDiagonal();
  double acc = 0.0;
  for (Index j = 0; j < S.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(S, j); it; ++it)
      acc += it.value() * F.U.row(it.row()).dot(WS.row(j));
  return acc;
}

double factored_dense_dot(const FactoredMatrix& F, const Eigen::MatrixXd& D) {
  if (F.rank() == 0) return 0.0;
  // Σ_k s_k u_kᵀ D w_k
  const Eigen::MatrixXd DW = D * F.W;
  double acc = 0.0;
  for (Index k = 0; k < F.rank(); ++k) acc += F.s(k) * F.U.col(k).dot(DW.col(k));
  return acc;
}

double factored_factored_dot(const FactoredMatrix& A, const FactoredMatrix& B) {
  if (A.rank() == 0 || B.rank() == 0) return 0.0;
  const Eigen::MatrixXd left = A.U.transpose() * B.U;
  const Eigen::MatrixXd right = A.W.transpose() * B.W;
  return A.s.dot(left.cwiseProduct(right) * B.s);
}

}  // namespace

double inner(const Point& x, const Point& y) {
  require_compatible(x, y);
  using K = Point::Kind;
  const K kx = x.kind();
  const K ky = y.kind();
  if (kx == K::Vector) return x.vector().dot(y.vector());
  if (kx == K::DenseMatrix && ky == K::DenseMatrix)
    return x.dense_matrix().cwiseProduct(y.dense_matrix()).sum();
  if (kx == K::SparseMatrix && ky == K::SparseMatrix)
    return x.sparse().cwiseProduct(y.sparse()).sum();
  if (kx == K::SparseMatrix && ky == K::DenseMatrix) return sparse_dot(x.sparse(), y.dense_matrix());
  if (kx == K::DenseMatrix && ky == K::SparseMatrix) return sparse_dot(y.sparse(), x.dense_matrix());
  if (kx == K::SparseMatrix && ky == K::Factored) return sparse_factored_dot(x.sparse(), y.factored());
  if (kx == K::Factored && ky == K::SparseMatrix) return sparse_factored_dot(y.sparse(), x.factored());
  if (kx == K::Factored && ky == K::DenseMatrix) return factored_dense_dot(x.factored(), y.dense_matrix());
  if (kx == K::DenseMatrix && ky == K::Factored) return factored_dense_dot(y.factored(), x.dense_matrix());
  return factored_factored_dot(x.factored(), y.factored());
}

double norm(const Point& x) {
  switch (x.kind()) {
    case Point::Kind::Vector: return x.vector().norm();
    case Point::Kind::DenseMatrix: return x.dense_matrix().norm();
    case Point::Kind::SparseMatrix: return x.sparse().norm();
    case Point::Kind::Factored: return x.factored().s.norm();
  }
  return 0.0;
}

bool is_zero(const Point& x) {
  switch (x.kind()) {
    case Point::Kind::Vector: return x.vector().isZero(0.0);
    case Point::Kind::DenseMatrix: return x.dense_matrix().isZero(0.0);
    case Point::Kind::SparseMatrix: {
      const auto& s = x.sparse();
      for (Index k = 0; k < s.nonZeros(); ++k)
        if (s.valuePtr()[k] != 0.0) return false;
      return true;
    }
    case Point::Kind::Factored: return x.factored().rank() == 0 || x.factored().s.isZero(0.0);
  }
  return true;
}

Point scaled(const Point& x, double c) {
  switch (x.kind()) {
    case Point::Kind::Vector: return Point(Eigen::VectorXd(c * x.vector()));
    case Point::Kind::DenseMatrix: return Point(Eigen::MatrixXd(c * x.dense_matrix()));
    case Point::Kind::SparseMatrix: return Point(SparseMatrix(c * x.sparse()));
    case Point::Kind::Factored: {
      FactoredMatrix f = x.factored();
      if (c == 0.0) return Point(FactoredMatrix::zero(f.rows, f.cols));
      f.s *= std::abs(c);
      if (c < 0) f.U = -f.U;
      return Point(std::move(f));
    }
  }
  return x;
}

Point sum(const Point& x, const Point& y) {
  require_compatible(x, y);
  if (x.is_vector()) return Point(Eigen::VectorXd(x.vector() + y.vector()));
  if (x.kind() == Point::Kind::SparseMatrix && y.kind() == Point::Kind::SparseMatrix)
    return Point(SparseMatrix(x.sparse() + y.sparse()));
  return Point(Eigen::MatrixXd(x.to_dense() + y.to_dense()));
}

double orthonormality_defect(const Eigen::MatrixXd& Q) {
  if (Q.cols() == 0) return 0.0;
  return (Q.transpose() * Q - Eigen::MatrixXd::Identity(Q.cols(), Q.cols())).norm();
}

}  // namespace dcfw
