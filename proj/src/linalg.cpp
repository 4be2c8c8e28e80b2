#include "dcfw/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace dcfw::linalg {

namespace {

constexpr double kTruncation = 1e-12;
constexpr double kReorthogonalize = 1e-11;

FactoredMatrix truncated(Index rows, Index cols, const Eigen::MatrixXd& U, const Eigen::VectorXd& s,
                         const Eigen::MatrixXd& W, double threshold) {
  Index keep = 0;
  while (keep < s.size() && s(keep) > threshold) ++keep;
  FactoredMatrix f;
  f.rows = rows;
  f.cols = cols;
  f.U = U.leftCols(keep);
  f.s = s.head(keep);
  f.W = W.leftCols(keep);
  return f;
}

// Restores orthonormal factors after drift: X = U S Wᵀ = Qu (Ru S Rwᵀ) Qwᵀ.
FactoredMatrix reorthonormalize(const FactoredMatrix& x) {
  const Index r = x.rank();
  Eigen::HouseholderQR<Eigen::MatrixXd> qu(x.U);
  Eigen::HouseholderQR<Eigen::MatrixXd> qw(x.W);
  const Eigen::MatrixXd Qu = qu.householderQ() * Eigen::MatrixXd::Identity(x.rows, r);
  const Eigen::MatrixXd Qw = qw.householderQ() * Eigen::MatrixXd::Identity(x.cols, r);
  const Eigen::MatrixXd Ru = qu.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rw = qw.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd core = Ru * x.s.asDiagonal() * Rw.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(core, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  return truncated(x.rows, x.cols, Qu * svd.matrixU(), svd.singularValues(), Qw * svd.matrixV(),
                   kTruncation * smax);
}

}  // namespace

FactoredMatrix thin_svd(const Eigen::MatrixXd& a) {
  if (!a.allFinite()) throw PreconditionViolation("thin_svd: non-finite entries");
  if (a.size() == 0 || a.isZero(0.0)) return FactoredMatrix::zero(a.rows(), a.cols());
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  return truncated(a.rows(), a.cols(), svd.matrixU(), s, svd.matrixV(), kTruncation * s(0));
}

FactoredMatrix svd_rank_one_update(const FactoredMatrix& x, double scalar_old, double scalar_new,
                                   const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != x.rows || v.size() != x.cols)
    throw DimensionMismatch("svd_rank_one_update: factor lengths do not match the matrix");
  if (std::abs(u.norm() - 1.0) > 1e-10 || std::abs(v.norm() - 1.0) > 1e-10)
    throw PreconditionViolation("svd_rank_one_update: u and v must be unit vectors");

  const Index r = x.rank();
  if (r == 0 || scalar_old == 0.0) {
    return scalar_new == 0.0 ? FactoredMatrix::zero(x.rows, x.cols)
                             : FactoredMatrix::rank_one(scalar_new, u, v);
  }

  // Components of u, v outside the current column spaces (two Gram–Schmidt passes).
  Eigen::VectorXd mu = x.U.transpose() * u;
  Eigen::VectorXd p = u - x.U * mu;
  const Eigen::VectorXd mu2 = x.U.transpose() * p;
  p -= x.U * mu2;
  mu += mu2;
  Eigen::VectorXd nv = x.W.transpose() * v;
  Eigen::VectorXd q = v - x.W * nv;
  const Eigen::VectorXd nv2 = x.W.transpose() * q;
  q -= x.W * nv2;
  nv += nv2;

  const double ra = p.norm();
  const double rb = q.norm();
  const bool grow_u = ra > kTruncation;
  const bool grow_w = rb > kTruncation;
  const Index ku = r + (grow_u ? 1 : 0);
  const Index kw = r + (grow_w ? 1 : 0);

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(ku, kw);
  K.topLeftCorner(r, r) = scalar_old * x.s.asDiagonal();
  Eigen::VectorXd left(ku), right(kw);
  left.head(r) = mu;
  right.head(r) = nv;
  if (grow_u) left(r) = ra;
  if (grow_w) right(r) = rb;
  K.noalias() += scalar_new * left * right.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(K, Eigen::ComputeThinU | Eigen::ComputeThinV);

  Eigen::MatrixXd Ub(x.rows, ku);
  Ub.leftCols(r) = x.U;
  if (grow_u) Ub.col(r) = p / ra;
  Eigen::MatrixXd Wb(x.cols, kw);
  Wb.leftCols(r) = x.W;
  if (grow_w) Wb.col(r) = q / rb;

  const Eigen::VectorXd& s = svd.singularValues();
  const double scale = std::max({std::abs(scalar_old) * x.s.maxCoeff(), std::abs(scalar_new),
                                 s.size() ? s(0) : 0.0});
  FactoredMatrix out = truncated(x.rows, x.cols, Ub * svd.matrixU(), s, Wb * svd.matrixV(),
                                 kTruncation * scale);
  if (out.rank() > 0 &&
      std::max(orthonormality_defect(out.U), orthonormality_defect(out.W)) > kReorthogonalize) {
    out = reorthonormalize(out);
  }
  return out;
}

Point affine_combination(const Point& x, const Point& u, double t) {
  require_compatible(x, u);
  if (x.is_vector()) return Point(Eigen::VectorXd(x.vector() + t * (u.vector() - x.vector())));
  if (x.kind() == Point::Kind::Factored && u.kind() == Point::Kind::Factored &&
      u.factored().rank() <= 1) {
    const FactoredMatrix& target = u.factored();
    if (target.rank() == 0) return scaled(x, 1.0 - t);
    return Point(svd_rank_one_update(x.factored(), 1.0 - t, t * target.s(0), target.U.col(0),
                                     target.W.col(0)));
  }
  return Point(Eigen::MatrixXd((1.0 - t) * x.to_dense() + t * u.to_dense()));
}

PencilOperator make_pencil(const Point& a, const Point& xi) {
  if (!a.is_matrix() || !xi.is_matrix())
    throw DimensionMismatch("make_pencil: a and xi must be matrices");
  require_compatible(a, xi);
  const Index m = a.rows();
  const Index n = a.cols();
  auto pa = std::make_shared<const Point>(a);
  auto px = std::make_shared<const Point>(xi);
  PencilOperator p;
  p.dim = m + n;
  p.split = m;
  p.apply_A = [pa, m, n](const Eigen::VectorXd& z) {
    Eigen::VectorXd out(m + n);
    out.head(m) = pa->apply(z.tail(n));
    out.tail(n) = pa->apply_transpose(z.head(m));
    return out;
  };
  p.apply_B = [px, m, n](const Eigen::VectorXd& z) {
    Eigen::VectorXd out = z;
    out.head(m) -= px->apply(z.tail(n));
    out.tail(n) -= px->apply_transpose(z.head(m));
    return out;
  };
  return p;
}

namespace {

EigenPair dense_smallest(const PencilOperator& p) {
  const Index d = p.dim;
  Eigen::MatrixXd A(d, d), B(d, d);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
  for (Index j = 0; j < d; ++j) {
    e(j) = 1.0;
    A.col(j) = p.apply_A(e);
    B.col(j) = p.apply_B(e);
    e(j) = 0.0;
  }
  A = 0.5 * (A + A.transpose()).eval();
  B = 0.5 * (B + B.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(A, B);
  if (ges.info() != Eigen::Success) throw NonConvergence("gen_eig_smallest: dense solve failed");
  EigenPair out;
  out.lambda = ges.eigenvalues()(0);
  out.z = ges.eigenvectors().col(0);
  out.z /= std::sqrt(out.z.dot(B * out.z));
  out.residual = (A * out.z - out.lambda * (B * out.z)).norm();
  out.iterations = 1;
  return out;
}

// Appends w to the Euclidean-orthonormal basis Z after two orthogonalisation passes.
bool extend_basis(Eigen::MatrixXd& Z, Index& k, Eigen::VectorXd w, double reference) {
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXd coeff = Z.leftCols(k).transpose() * w;
    w.noalias() -= Z.leftCols(k) * coeff;
  }
  const double nrm = w.norm();
  if (!(nrm > 1e-13 * reference)) return false;
  Z.col(k++) = w / nrm;
  return true;
}

Eigen::VectorXd probe_vector(Index d) {
  Eigen::VectorXd v(d);
  for (Index i = 0; i < d; ++i) v(i) = std::sin(2.399963 * static_cast<double>(i + 1) + 0.5);
  return v;
}

EigenPair krylov_smallest(const PencilOperator& p, const Eigen::VectorXd& initial,
                          const EigenOptions& opt) {
  const Index d = p.dim;
  const Index m = std::min<Index>(d, std::max(2, opt.krylov_dim));

  Eigen::VectorXd x = initial;
  Eigen::VectorXd Bx = p.apply_B(x);
  double bnorm = std::sqrt(x.dot(Bx));
  x /= bnorm;
  Bx /= bnorm;
  Eigen::VectorXd Ax = p.apply_A(x);
  double rho = x.dot(Ax);
  Eigen::VectorXd previous;  // last step direction, kept for acceleration

  EigenPair best;
  double best_ratio = std::numeric_limits<double>::infinity();

  Eigen::MatrixXd Z(d, m + 1), AZ(d, m + 1), BZ(d, m + 1);
  for (int it = 1; it <= opt.max_iter; ++it) {
    const Eigen::VectorXd r = Ax - rho * Bx;
    const double res = r.norm();
    const double scale = Ax.norm();
    const double ratio = scale > 0 ? res / scale : (res == 0 ? 0.0 : res);
    // The start may be an eigenvector of some other eigenvalue, so convergence is only
    // accepted after at least one sweep that includes the probe direction.
    if (it == 1 || ratio < best_ratio) {
      if (it > 1) best_ratio = ratio;
      best.lambda = rho;
      best.z = x;
      best.residual = res;
      best.iterations = it;
    }
    if (it > 1 && (res <= opt.tol * scale || res == 0.0)) return best;

    // Basis of K_m(A − ρB, x) plus the previous step direction.
    const double xnorm = x.norm();
    Index k = 0;
    Z.col(k++) = x / xnorm;
    const double reference = std::max(1.0, std::abs(rho)) * 1.0;
    Eigen::VectorXd w = r / xnorm;
    for (Index j = 1; j < m; ++j) {
      if (!extend_basis(Z, k, w, reference * 1e-3)) break;
      AZ.col(k - 1) = p.apply_A(Z.col(k - 1));
      BZ.col(k - 1) = p.apply_B(Z.col(k - 1));
      w = AZ.col(k - 1) - rho * BZ.col(k - 1);
    }
    AZ.col(0) = Ax / xnorm;
    BZ.col(0) = Bx / xnorm;
    // The previous step direction, or on the first sweep a fixed probe that breaks
    // invariant subspaces of symmetric starting vectors.
    Eigen::VectorXd extra = previous.size() == d ? previous : probe_vector(d);
    if (k < Z.cols() && extend_basis(Z, k, extra, extra.norm())) {
      AZ.col(k - 1) = p.apply_A(Z.col(k - 1));
      BZ.col(k - 1) = p.apply_B(Z.col(k - 1));
    }

    Eigen::MatrixXd Am = Z.leftCols(k).transpose() * AZ.leftCols(k);
    Eigen::MatrixXd Bm = Z.leftCols(k).transpose() * BZ.leftCols(k);
    Am = 0.5 * (Am + Am.transpose()).eval();
    Bm = 0.5 * (Bm + Bm.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Am, Bm);
    if (ges.info() != Eigen::Success) break;
    const Eigen::VectorXd y = ges.eigenvectors().col(0);

    Eigen::VectorXd xn = Z.leftCols(k) * y;
    Eigen::VectorXd Axn = AZ.leftCols(k) * y;
    Eigen::VectorXd Bxn = BZ.leftCols(k) * y;
    bnorm = std::sqrt(xn.dot(Bxn));
    xn /= bnorm;
    Axn /= bnorm;
    Bxn /= bnorm;
    previous = xn - x;
    x = std::move(xn);
    Ax = std::move(Axn);
    Bx = std::move(Bxn);
    rho = x.dot(Ax);
  }
  throw EigenNonConvergence("gen_eig_smallest: no convergence within " +
                                std::to_string(opt.max_iter) + " iterations",
                            best);
}

}  // namespace

EigenPair gen_eig_smallest(const PencilOperator& p, const Eigen::VectorXd& initial,
                           const EigenOptions& options) {
  if (initial.size() != p.dim) throw DimensionMismatch("gen_eig_smallest: initial vector length");
  if (initial.isZero(0.0)) throw PreconditionViolation("gen_eig_smallest: initial vector is zero");
  switch (options.method) {
    case EigenMethod::Dense:
      if (p.dim > 4096) throw PreconditionViolation("gen_eig_smallest: dense solve limited to 4096");
      return dense_smallest(p);
    case EigenMethod::Krylov: return krylov_smallest(p, initial, options);
    case EigenMethod::Automatic:
      try {
        return krylov_smallest(p, initial, options);
      } catch (const EigenNonConvergence&) {
        if (p.dim > 512) throw;
        return dense_smallest(p);
      }
  }
  return {};
}

SingularTriplet top_singular_triplet(const Point& a) {
  if (!a.is_matrix()) throw DimensionMismatch("top_singular_triplet: expected a matrix");
  if (is_zero(a)) throw PreconditionViolation("top_singular_triplet: zero operator");
  const Index m = a.rows();
  const Index n = a.cols();
  // Smallest eigenpair of [0 a; aᵀ 0] is (−s, (u; −v)/√2).
  const PencilOperator p = make_pencil(a, Point(FactoredMatrix::zero(m, n)));
  Eigen::VectorXd start(m + n);
  for (Index i = 0; i < m + n; ++i) start(i) = 1.0 + 0.37 * std::sin(1.7 * static_cast<double>(i) + 0.3);
  EigenOptions opt;
  opt.tol = 1e-12;
  opt.max_iter = 5000;
  const EigenPair e = gen_eig_smallest(p, start, opt);
  SingularTriplet t;
  t.s = -e.lambda;
  t.u = e.z.head(m).normalized();
  t.v = (-e.z.tail(n)).normalized();
  return t;
}

}  // namespace dcfw::linalg
