#pragma once

#include <functional>

#include <Eigen/Core>

#include "dcfw/point.hpp"

namespace dcfw::linalg {

/// Thin SVD of a dense matrix; singular values ≤ 1e-12·σ_max are dropped.
FactoredMatrix thin_svd(const Eigen::MatrixXd& a);

/// Thin SVD of scalar_old·x + scalar_new·u vᵀ (Brand's rank-one update).
///
/// u and v must be unit vectors. Singular values ≤ 1e-12 of the largest are
/// truncated, and the factors are re-orthonormalised when their defect
/// exceeds 1e-11.
FactoredMatrix svd_rank_one_update(const FactoredMatrix& x, double scalar_old, double scalar_new,
                                   const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// (1 − t)·x + t·u for compatible points. Factored x with rank-≤1 factored u takes
/// the rank-one update path; other matrix combinations are summed densely.
Point affine_combination(const Point& x, const Point& u, double t);

/// The symmetric-definite pencil (Ã, I − Ξ̃) with Ã = [0 a; aᵀ 0] and Ξ̃ = [0 ξ; ξᵀ 0].
struct PencilOperator {
  Index dim = 0;
  Index split = 0;  // m: z = (z₁ ∈ ℝᵐ, z₂ ∈ ℝⁿ)
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply_A;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply_B;
};

/// Builds the pencil from matrix points a and ξ of the same shape.
PencilOperator make_pencil(const Point& a, const Point& xi);

enum class EigenMethod {
  Automatic,  // Krylov, dense fallback on stagnation when dim ≤ 512
  Krylov,     // inverse-free preconditioned Krylov iteration only
  Dense,      // dense symmetric-definite solve (dim ≤ 4096)
};

struct EigenOptions {
  double tol = 1e-6;
  int max_iter = 2000;
  EigenMethod method = EigenMethod::Automatic;
  int krylov_dim = 16;
};

struct EigenPair {
  double lambda = 0.0;
  Eigen::VectorXd z;  // zᵀBz = 1
  int iterations = 0;
  double residual = 0.0;  // ‖Az − λBz‖
};

/// Raised when the iteration budget is exhausted; carries the best iterate.
class EigenNonConvergence : public NonConvergence {
 public:
  EigenNonConvergence(const std::string& what, EigenPair best)
      : NonConvergence(what), best_(std::move(best)) {}
  const EigenPair& best() const { return best_; }

 private:
  EigenPair best_;
};

/// Smallest generalized eigenpair of (A, B) with B ≻ 0.
///
/// Stops when ‖Az − λBz‖ ≤ tol·‖Az‖. `initial` need not be normalised.
EigenPair gen_eig_smallest(const PencilOperator& p, const Eigen::VectorXd& initial,
                           const EigenOptions& options = {});

struct SingularTriplet {
  double s = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd v;
};

/// Largest singular value of a matrix point with unit singular vectors.
SingularTriplet top_singular_triplet(const Point& a);

}  // namespace dcfw::linalg
