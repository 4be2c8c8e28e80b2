#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "dcfw/linalg.hpp"
#include "dcfw/model.hpp"

namespace dcfw {

/// min ⟨a, x⟩ over ℱ(y, ξ) = {x : P₁(x) − ⟨ξ, x − y⟩ − P₂(y) ≤ σ}.
struct LOQuery {
  Point a;
  Point y;
  Point xi;
  DCConstraint constraint;
};

struct LOOutput {
  Point u;
  /// λ ≥ 0 with a + λ(w − ξ) = 0.
  double multiplier = 0.0;
  /// w ∈ ∂P₁(u). Optional for the matrix oracle, where it is a dense m×n matrix.
  std::optional<Point> active_subgradient;
  double objective_value = 0.0;
  /// Eigenvector of the matrix oracle, reusable as the next warm start.
  std::optional<Eigen::VectorXd> warm_start;
  int eig_iterations = 0;
};

/// Right-hand side of the convexified constraint: σ + P₂(y) − ⟨ξ, y⟩.
double effective_level(const DCConstraint& c, const Point& y, const Point& xi);

/// Sgn(x): x/‖x‖, or the normalised all-ones vector at 0.
Eigen::VectorXd unit_sign(const Eigen::VectorXd& x);

/// Minimises ⟨a, x⟩ over ‖x‖₁ − ⟨ξ, x⟩ ≤ sigma. Ties go to the lowest index.
/// A zero `a` returns `y` (zero when empty) with λ = 0.
LOOutput lo_elementwise(const Eigen::VectorXd& a, const Eigen::VectorXd& xi, double sigma,
                        const Eigen::VectorXd& y = {});

struct AngularSolution {
  Eigen::VectorXd w;  // unit minimiser of ⟨b, w⟩/(1 − ⟨c, w⟩)
  double kappa = 0.0;
  double t = 0.0;  // w = c − t·b
};

/// min over ‖w‖ = 1 of ⟨b, w⟩/(1 − ⟨c, w⟩) for ‖c‖ < 1.
AngularSolution solve_angular_subproblem(const Eigen::VectorXd& b, const Eigen::VectorXd& c);

/// Minimises ⟨a, x⟩ over Σ_J ‖x_J‖ − ⟨ξ, x⟩ ≤ sigma.
LOOutput lo_group(const Eigen::VectorXd& a, const Eigen::VectorXd& xi, double sigma,
                  const Partition& blocks, const Eigen::VectorXd& y = {});

struct NuclearOracleOptions {
  linalg::EigenOptions eig;
  std::optional<Eigen::VectorXd> warm_start;
  /// Also form the dense active subgradient w = ξ − a/λ.
  bool want_certificate = false;
};

/// Minimises ⟨a, x⟩ over ‖x‖_* − ⟨ξ, x⟩ ≤ sigma via the smallest eigenpair of the pencil.
/// A zero `a` returns `y` (zero when absent) with λ = 0.
LOOutput lo_nuclear(const Point& a, const Point& xi, double sigma,
                    const NuclearOracleOptions& options = {},
                    const std::optional<Point>& y = std::nullopt);

/// Strongly convex P₁ with modulus ρ: root-finds ι with P₁(x(ι)) − ⟨ξ, x(ι)⟩ = σ̃,
/// x(ι) = Prox_{P̃₁/ρ}((ξ − ιa)/ρ).
LOOutput lo_strongly_convex(const Eigen::VectorXd& a, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& xi, const DCConstraint& constraint);

/// y = scale·Σ rᵢ sᵢ with unit atoms sᵢ.
struct AtomicDecomposition {
  std::vector<Point> atoms;
  std::vector<double> weights;
  double scale = 0.0;
};

/// Singular values at or below this are not treated as atoms.
inline constexpr double kRankThreshold = 1e-6;

AtomicDecomposition atomic_decomposition(const Point& y, const Structure& structure);

/// Points vᵢ on the boundary of ℱ(y, ξ) with convex weights reproducing y.
struct AwaySet {
  std::vector<Point> points;
  std::vector<double> weights;
};

/// Index of the unpadded away point maximising ⟨a, vᵢ⟩; the padding atom is chosen there.
std::size_t away_pad_index(const Point& a, const Point& xi, const AtomicDecomposition& d,
                           double sigma);

/// Builds vᵢ = σ sᵢ/(1 − ⟨ξ, sᵢ⟩). When the weights fall short of 1, the opposite point
/// −σ s_p/(1 + ⟨ξ, s_p⟩) of atom `pad_index` is appended.
AwaySet build_away_set(const Point& y, const Point& xi, const AtomicDecomposition& d, double sigma,
                       std::size_t pad_index);

/// argmax ⟨a, vᵢ⟩ with lowest-index ties.
std::pair<Point, std::size_t> awo_select(const Point& a, const AwaySet& s);

/// min{c/(1 − c), ζ}, or ζ when the selected weight is 1.
double max_away_step(const AwaySet& s, std::size_t index, double zeta);

/// Dispatches on the constraint structure.
LOOutput linear_oracle(const LOQuery& q, const NuclearOracleOptions& nuclear = {});

}  // namespace dcfw
