#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dcfw/oracles.hpp"
#include "dcfw/random.hpp"
#include "dcfw/solver.hpp"

// Reference computations used to check the production oracles and solver.
// Nothing here calls into oracles.cpp or linalg.cpp; the references use their
// own formulas and dense Eigen paths.
namespace dcfw::verify {

struct CertificateReport {
  double kkt_residual = 0.0;        // ‖a + λ(w − ξ)‖
  double complementarity = 0.0;     // |λ·(P₁(u) − ⟨ξ, u − y⟩ − P₂(y) − σ)|
  double feasibility_slack = 0.0;   // max{0, P₁(u) − ⟨ξ, u − y⟩ − P₂(y) − σ}
  double subgradient_defect = 0.0;  // distance-like measure of w ∉ ∂P₁(u)
  bool passed = false;
  std::string detail;
};

/// Checks the optimality certificate of an oracle output.
///
/// Residuals are compared against tol scaled by max{1, ‖a‖}, max{1, λσ̃} and
/// max{1, σ̃} respectively; the subgradient defect against tol. Throws
/// PreconditionViolation when the output carries no active subgradient or λ < 0.
CertificateReport kkt_check(const LOQuery& query, const LOOutput& output, double tol = 1e-8);

/// min ⟨a, p⟩ over n_samples random points of ℱ(y, ξ).
///
/// Homogeneous structures sample Gaussian directions and scale them onto the
/// boundary. The strongly convex structure uses rejection sampling in a ball
/// that contains ℱ (valid when P₁ − (ρ/2)‖·‖² ≥ 0). Returns +∞ for n_samples = 0.
/// Throws NonConvergence when no proposal is accepted within 10⁷ draws.
double sampled_lo_reference(const LOQuery& query, std::size_t n_samples, std::uint64_t seed);

struct PencilReference {
  double lambda = 0.0;
  Eigen::VectorXd z;  // zᵀBz = 1
};

/// Smallest eigenpair of ([0 a; aᵀ 0], I − [0 ξ; ξᵀ 0]) via Cholesky reduction.
/// Requires m + n ≤ 64; throws PreconditionViolation when B is not positive definite.
PencilReference dense_pencil_reference(const Eigen::MatrixXd& a, const Eigen::MatrixXd& xi);

struct LOReference {
  double value = std::numeric_limits<double>::infinity();
  Point point;
};

/// Nuclear LO answer 2σ̃ z₁z₂ᵀ built from the dense pencil reference.
LOReference nuclear_lo_reference(const LOQuery& query);

/// Brute-force LO for vectors of length ≤ 3.
///
/// Every direction on an angular (n = 2) or spherical (n = 3) grid of about
/// `resolution` points is scaled onto the boundary of ℱ(y, ξ); the best grid
/// direction is then refined on successively finer local grids.
LOReference grid_lo_reference(const LOQuery& query, std::size_t resolution);

struct FiniteDifferenceReport {
  bool passed = false;
  double max_error = 0.0;  // worst ‖fd − g‖ / max{1, ‖g‖} (per direction for matrices)
  std::string detail;
};

/// Central differences with step 1e-6·(1 + ‖x‖) against the gradient oracle.
/// Vectors are checked coordinate-wise, matrices along 8 random directions.
FiniteDifferenceReport finite_difference_check(const SmoothObjective& f, const std::vector<Point>& points,
                                               double rel_tol);

/// Classic Frank–Wolfe on an ℓ₁ ball: vertex oracle, backtracking from the unit
/// step with the config's c and η, stop at zero gap or max_iter. Iterates are
/// always recorded. Throws PreconditionViolation unless P₂ ≡ 0 and P₁ = ‖·‖₁.
SolveResult classic_fw_reference(const ProblemInstance& problem, const SolverConfig& config);

enum class QueryFamily { Elementwise, Group, Nuclear, StronglyConvex };
std::string family_name(QueryFamily f);

/// A random LO query: feasible y, ξ the least-norm subgradient of P₂ at y, Gaussian a.
/// `n` is the vector length; nuclear queries are n × cols matrices.
/// Group queries split the coordinates into two contiguous blocks.
LOQuery random_query(QueryFamily family, Index n, Rng& rng, Index cols = 0);

/// Replaces u by u + scale·d for a random unit direction d.
LOOutput perturbed(const LOOutput& out, double scale, Rng& rng);

}  // namespace dcfw::verify
