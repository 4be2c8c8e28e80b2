#include "dcfw/model.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "dcfw/linalg.hpp"

namespace dcfw {

void validate_partition(const Partition& blocks, Index n) {
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  for (const auto& block : blocks) {
    if (block.empty()) throw PreconditionViolation("partition contains an empty block");
    for (Index i : block) {
      if (i < 0 || i >= n) throw PreconditionViolation("partition index out of range");
      if (seen[static_cast<std::size_t>(i)]++) throw PreconditionViolation("partition blocks overlap");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw PreconditionViolation("partition does not cover every coordinate");
}

Partition singleton_partition(Index n) {
  Partition p(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = {i};
  return p;
}

Partition contiguous_partition(Index n, Index groups) {
  if (groups <= 0 || groups > n) throw PreconditionViolation("contiguous_partition: bad group count");
  Partition p;
  Index start = 0;
  for (Index g = 0; g < groups; ++g) {
    const Index len = n / groups + (g < n % groups ? 1 : 0);
    std::vector<Index> block(static_cast<std::size_t>(len));
    for (Index k = 0; k < len; ++k) block[static_cast<std::size_t>(k)] = start + k;
    p.push_back(std::move(block));
    start += len;
  }
  return p;
}

// --- convex functions -------------------------------------------------------

double L1Norm::value(const Point& x) const { return x.vector().lpNorm<1>(); }

Point L1Norm::subgradient(const Point& x) const { return min_norm_subgradient(x); }

Point L1Norm::min_norm_subgradient(const Point& x) const {
  const auto& v = x.vector();
  Eigen::VectorXd g(v.size());
  for (Index i = 0; i < v.size(); ++i) g(i) = v(i) > 0 ? 1.0 : (v(i) < 0 ? -1.0 : 0.0);
  return Point(std::move(g));
}

double GroupL1Norm::value(const Point& x) const {
  const auto& v = x.vector();
  double total = 0.0;
  for (const auto& block : blocks_) {
    double sq = 0.0;
    for (Index i : block) sq += v(i) * v(i);
    total += std::sqrt(sq);
  }
  return total;
}

Point GroupL1Norm::subgradient(const Point& x) const { return min_norm_subgradient(x); }

Point GroupL1Norm::min_norm_subgradient(const Point& x) const {
  const auto& v = x.vector();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(v.size());
  for (const auto& block : blocks_) {
    double sq = 0.0;
    for (Index i : block) sq += v(i) * v(i);
    if (sq == 0.0) continue;
    const double nrm = std::sqrt(sq);
    for (Index i : block) g(i) = v(i) / nrm;
  }
  return Point(std::move(g));
}

namespace {

FactoredMatrix factored_view(const Point& x) {
  if (x.kind() == Point::Kind::Factored) return x.factored();
  return linalg::thin_svd(x.to_dense());
}

}  // namespace

double NuclearNorm::value(const Point& x) const {
  if (x.is_vector()) throw DimensionMismatch("nuclear norm needs a matrix");
  return factored_view(x).s.sum();
}

Point NuclearNorm::subgradient(const Point& x) const { return min_norm_subgradient(x); }

Point NuclearNorm::min_norm_subgradient(const Point& x) const {
  if (x.is_vector()) throw DimensionMismatch("nuclear norm needs a matrix");
  FactoredMatrix f = factored_view(x);
  f.s.setOnes();
  return Point(std::move(f));
}

double ScaledEuclideanNorm::value(const Point& x) const { return scale_ * norm(x); }

Point ScaledEuclideanNorm::min_norm_subgradient(const Point& x) const {
  const double nrm = norm(x);
  if (nrm == 0.0 || scale_ == 0.0) return Point::zeros_like(x);
  return scaled(x, scale_ / nrm);
}

double ElasticNet::value(const Point& x) const {
  const auto& v = x.vector();
  return v.lpNorm<1>() + 0.5 * rho_ * v.squaredNorm();
}

Point ElasticNet::min_norm_subgradient(const Point& x) const {
  const auto& v = x.vector();
  Eigen::VectorXd g(v.size());
  for (Index i = 0; i < v.size(); ++i)
    g(i) = v(i) > 0 ? 1.0 + rho_ * v(i) : (v(i) < 0 ? -1.0 + rho_ * v(i) : 0.0);
  return Point(std::move(g));
}

// --- constraint -------------------------------------------------------------

std::string structure_name(const Structure& s) {
  struct Visitor {
    std::string operator()(const structure::ElementwiseL1&) const { return "elementwise-l1"; }
    std::string operator()(const structure::GroupL1&) const { return "group-l1"; }
    std::string operator()(const structure::Nuclear&) const { return "nuclear"; }
    std::string operator()(const structure::StronglyConvex&) const { return "strongly-convex"; }
    std::string operator()(const structure::Generic&) const { return "generic"; }
  };
  return std::visit(Visitor{}, s);
}

bool is_atomic(const Structure& s) {
  return std::holds_alternative<structure::ElementwiseL1>(s) ||
         std::holds_alternative<structure::GroupL1>(s) ||
         std::holds_alternative<structure::Nuclear>(s);
}

void DCConstraint::validate() const {
  if (!p1 || !p2) throw PreconditionViolation("constraint needs both P1 and P2");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw PreconditionViolation("sigma must be positive");
  if (!(mu_bound >= 0.0 && mu_bound < 1.0)) throw PreconditionViolation("mu_bound must lie in [0, 1)");
  if (const auto* sc = std::get_if<structure::StronglyConvex>(&structure)) {
    if (!(sc->rho > 0.0)) throw PreconditionViolation("strongly convex structure needs rho > 0");
    if (!sc->prox) throw PreconditionViolation("strongly convex structure needs a prox oracle");
  }
}

DCConstraint l1_minus_l2(double mu, double sigma) {
  DCConstraint c;
  c.p1 = std::make_shared<L1Norm>();
  c.p2 = std::make_shared<ScaledEuclideanNorm>(mu);
  c.sigma = sigma;
  c.mu_bound = mu;
  c.structure = structure::ElementwiseL1{};
  c.positively_homogeneous = true;
  c.validate();
  return c;
}

DCConstraint group_minus_l2(Partition blocks, double mu, double sigma) {
  DCConstraint c;
  c.p1 = std::make_shared<GroupL1Norm>(blocks);
  c.p2 = std::make_shared<ScaledEuclideanNorm>(mu);
  c.sigma = sigma;
  c.mu_bound = mu;
  c.structure = structure::GroupL1{std::move(blocks)};
  c.positively_homogeneous = true;
  c.validate();
  return c;
}

DCConstraint nuclear_minus_frobenius(double mu, double sigma) {
  DCConstraint c;
  c.p1 = std::make_shared<NuclearNorm>();
  c.p2 = std::make_shared<ScaledEuclideanNorm>(mu);
  c.sigma = sigma;
  c.mu_bound = mu;
  c.structure = structure::Nuclear{};
  c.positively_homogeneous = true;
  c.validate();
  return c;
}

DCConstraint elastic_net_minus_l2(double rho, double mu, double sigma) {
  DCConstraint c;
  c.p1 = std::make_shared<ElasticNet>(rho);
  if (mu == 0.0)
    c.p2 = std::make_shared<ZeroFunction>();
  else
    c.p2 = std::make_shared<ScaledEuclideanNorm>(mu);
  c.sigma = sigma;
  c.mu_bound = mu;
  // P̃₁ = ‖·‖₁, whose prox is soft thresholding.
  c.structure = structure::StronglyConvex{rho, [](const Eigen::VectorXd& v, double t) {
                                            return Eigen::VectorXd(
                                                v.array().sign() *
                                                (v.array().abs() - t).max(0.0));
                                          }};
  c.positively_homogeneous = false;
  c.validate();
  return c;
}

double constraint_value(const DCConstraint& c, const Point& x) {
  return c.p1->value(x) - c.p2->value(x);
}

bool is_feasible(const DCConstraint& c, const Point& x, double tol) {
  if (tol < 0.0) throw PreconditionViolation("is_feasible: negative tolerance");
  return constraint_value(c, x) <= c.sigma + tol;
}

Point min_norm_subgradient_P2(const DCConstraint& c, const Point& x) {
  return c.p2->min_norm_subgradient(x);
}

// --- objectives -------------------------------------------------------------

std::function<double(double)> SmoothObjective::along_segment(const Point& x, const Point& u) const {
  return [this, x, u](double t) { return value(linalg::affine_combination(x, u, t)); };
}

LeastSquares::LeastSquares(Eigen::MatrixXd A, Eigen::VectorXd b) : A_(std::move(A)), b_(std::move(b)) {
  if (A_.rows() != b_.size()) throw DimensionMismatch("LeastSquares: A and b row counts differ");
  const Eigen::MatrixXd gram = A_.transpose() * A_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  lipschitz_hint = es.eigenvalues().size() ? es.eigenvalues().maxCoeff() : 0.0;
}

double LeastSquares::value(const Point& x) const {
  if (x.rows() != A_.cols()) throw DimensionMismatch("LeastSquares: dimension mismatch");
  return 0.5 * (A_ * x.vector() - b_).squaredNorm();
}

Point LeastSquares::gradient(const Point& x) const {
  if (x.rows() != A_.cols()) throw DimensionMismatch("LeastSquares: dimension mismatch");
  return Point(Eigen::VectorXd(A_.transpose() * (A_ * x.vector() - b_)));
}

double ShiftedQuadratic::value(const Point& x) const {
  if (x.rows() != center_.size()) throw DimensionMismatch("ShiftedQuadratic: dimension mismatch");
  return 0.5 * (x.vector() - center_).squaredNorm();
}

Point ShiftedQuadratic::gradient(const Point& x) const {
  if (x.rows() != center_.size()) throw DimensionMismatch("ShiftedQuadratic: dimension mismatch");
  return Point(Eigen::VectorXd(x.vector() - center_));
}

Eigen::VectorXd entries_at(const Point& x, const Observations& obs) {
  if (!x.is_matrix() || x.rows() != obs.rows || x.cols() != obs.cols)
    throw DimensionMismatch("entries_at: point shape differs from the observation grid");
  const std::size_t n = obs.size();
  Eigen::VectorXd out(static_cast<Index>(n));
  switch (x.kind()) {
    case Point::Kind::Factored: {
      const FactoredMatrix& f = x.factored();
      if (f.rank() == 0) return Eigen::VectorXd::Zero(static_cast<Index>(n));
      const Eigen::MatrixXd US = f.U * f.s.asDiagonal();
      for (std::size_t k = 0; k < n; ++k)
        out(static_cast<Index>(k)) = US.row(obs.row[k]).dot(f.W.row(obs.col[k]));
      break;
    }
    case Point::Kind::DenseMatrix: {
      const auto& d = x.dense_matrix();
      for (std::size_t k = 0; k < n; ++k) out(static_cast<Index>(k)) = d(obs.row[k], obs.col[k]);
      break;
    }
    default: {
      const Eigen::MatrixXd d = x.to_dense();
      for (std::size_t k = 0; k < n; ++k) out(static_cast<Index>(k)) = d(obs.row[k], obs.col[k]);
    }
  }
  return out;
}

MatrixCompletionObjective::MatrixCompletionObjective(Observations obs) : obs_(std::move(obs)) {
  const std::size_t n = obs_.size();
  if (obs_.col.size() != n || static_cast<std::size_t>(obs_.value.size()) != n)
    throw DimensionMismatch("observations: row, col and value lengths differ");
  for (std::size_t k = 0; k < n; ++k) {
    if (obs_.row[k] < 0 || obs_.row[k] >= obs_.rows || obs_.col[k] < 0 || obs_.col[k] >= obs_.cols)
      throw PreconditionViolation("observation index outside the matrix");
  }
  lipschitz_hint = 1.0;
}

double MatrixCompletionObjective::value(const Point& x) const {
  return 0.5 * (entries_at(x, obs_) - obs_.value).squaredNorm();
}

namespace {

SparseMatrix residual_matrix(const Observations& obs, const Eigen::VectorXd& r) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(obs.size());
  for (std::size_t k = 0; k < obs.size(); ++k)
    trip.emplace_back(obs.row[k], obs.col[k], r(static_cast<Index>(k)));
  SparseMatrix g(obs.rows, obs.cols);
  g.setFromTriplets(trip.begin(), trip.end());
  return g;
}

}  // namespace

Point MatrixCompletionObjective::gradient(const Point& x) const {
  return Point(residual_matrix(obs_, entries_at(x, obs_) - obs_.value));
}

std::pair<double, Point> MatrixCompletionObjective::value_and_gradient(const Point& x) const {
  const Eigen::VectorXd r = entries_at(x, obs_) - obs_.value;
  return {0.5 * r.squaredNorm(), Point(residual_matrix(obs_, r))};
}

std::function<double(double)> MatrixCompletionObjective::along_segment(const Point& x,
                                                                       const Point& u) const {
  const Eigen::VectorXd ex = entries_at(x, obs_);
  Eigen::VectorXd diff = entries_at(u, obs_) - ex;
  Eigen::VectorXd r = ex - obs_.value;
  return [r = std::move(r), diff = std::move(diff)](double t) {
    return 0.5 * (r + t * diff).squaredNorm();
  };
}

void ProblemInstance::validate() const {
  if (!objective) throw PreconditionViolation("problem has no objective");
  constraint.validate();
  const double v = constraint_value(constraint, initial_point);
  if (!(v <= constraint.sigma + 1e-12))
    throw PreconditionViolation("initial point is infeasible: P1 - P2 = " + std::to_string(v));
}

}  // namespace dcfw
