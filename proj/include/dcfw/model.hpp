#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dcfw/point.hpp"

namespace dcfw {

/// Default tolerance for feasibility tests on solver iterates.
inline constexpr double kFeasibilityTol = 1e-9;

/// A partition of {0, …, n−1} into blocks.
using Partition = std::vector<std::vector<Index>>;

/// Checks that the blocks cover {0, …, n−1} exactly once.
void validate_partition(const Partition& blocks, Index n);
Partition singleton_partition(Index n);
/// `groups` consecutive blocks of (nearly) equal size.
Partition contiguous_partition(Index n, Index groups);

/// Value and subgradient oracle for a finite convex function.
class ConvexFunctionOracle {
 public:
  virtual ~ConvexFunctionOracle() = default;

  virtual double value(const Point& x) const = 0;
  /// Any element of ∂h(x).
  virtual Point subgradient(const Point& x) const = 0;
  /// The least-norm element of ∂h(x).
  virtual Point min_norm_subgradient(const Point& x) const = 0;
  virtual bool is_norm() const { return false; }
  virtual std::string name() const = 0;
};

using ConvexFunctionPtr = std::shared_ptr<const ConvexFunctionOracle>;

/// h ≡ 0.
class ZeroFunction final : public ConvexFunctionOracle {
 public:
  double value(const Point&) const override { return 0.0; }
  Point subgradient(const Point& x) const override { return Point::zeros_like(x); }
  Point min_norm_subgradient(const Point& x) const override { return Point::zeros_like(x); }
  bool is_norm() const override { return false; }
  std::string name() const override { return "zero"; }
};

/// ‖x‖₁ on vectors.
class L1Norm final : public ConvexFunctionOracle {
 public:
  double value(const Point& x) const override;
  Point subgradient(const Point& x) const override;
  Point min_norm_subgradient(const Point& x) const override;
  bool is_norm() const override { return true; }
  std::string name() const override { return "l1"; }
};

/// Σ_J ‖x_J‖ over a partition of the coordinates.
class GroupL1Norm final : public ConvexFunctionOracle {
 public:
  explicit GroupL1Norm(Partition blocks) : blocks_(std::move(blocks)) {}
  double value(const Point& x) const override;
  Point subgradient(const Point& x) const override;
  Point min_norm_subgradient(const Point& x) const override;
  bool is_norm() const override { return true; }
  std::string name() const override { return "group-l1"; }
  const Partition& blocks() const { return blocks_; }

 private:
  Partition blocks_;
};

/// Nuclear norm (sum of singular values) on matrices.
class NuclearNorm final : public ConvexFunctionOracle {
 public:
  double value(const Point& x) const override;
  Point subgradient(const Point& x) const override;
  Point min_norm_subgradient(const Point& x) const override;
  bool is_norm() const override { return true; }
  std::string name() const override { return "nuclear"; }
};

/// scale·‖x‖ with the Euclidean (vectors) or Frobenius (matrices) norm.
class ScaledEuclideanNorm final : public ConvexFunctionOracle {
 public:
  explicit ScaledEuclideanNorm(double scale) : scale_(scale) {}
  double value(const Point& x) const override;
  Point subgradient(const Point& x) const override { return min_norm_subgradient(x); }
  Point min_norm_subgradient(const Point& x) const override;
  bool is_norm() const override { return scale_ > 0; }
  std::string name() const override { return "scaled-l2"; }
  double scale() const { return scale_; }

 private:
  double scale_;
};

/// ‖x‖₁ + (ρ/2)‖x‖², strongly convex with modulus ρ.
class ElasticNet final : public ConvexFunctionOracle {
 public:
  explicit ElasticNet(double rho) : rho_(rho) {}
  double value(const Point& x) const override;
  Point subgradient(const Point& x) const override { return min_norm_subgradient(x); }
  Point min_norm_subgradient(const Point& x) const override;
  std::string name() const override { return "elastic-net"; }
  double rho() const { return rho_; }

 private:
  double rho_;
};

/// Proximal map of t·P̃ where P̃ = P₁ − (ρ/2)‖·‖²: argmin_x t·P̃(x) + ½‖x − v‖².
using ProxOracle = std::function<Eigen::VectorXd(const Eigen::VectorXd& v, double t)>;

namespace structure {
struct ElementwiseL1 {};
struct GroupL1 {
  Partition blocks;
};
struct Nuclear {};
struct StronglyConvex {
  double rho = 1.0;
  ProxOracle prox;
};
struct Generic {};
}  // namespace structure

/// Closed-form oracle family available for a constraint.
using Structure = std::variant<structure::ElementwiseL1, structure::GroupL1, structure::Nuclear,
                               structure::StronglyConvex, structure::Generic>;

std::string structure_name(const Structure& s);
/// Structures whose P₁ is an atomic norm (away steps are available).
bool is_atomic(const Structure& s);

/// The level set {x : P₁(x) − P₂(x) ≤ σ}.
struct DCConstraint {
  ConvexFunctionPtr p1;
  ConvexFunctionPtr p2;
  double sigma = 1.0;
  /// P₂ ≤ mu_bound·P₁.
  double mu_bound = 0.0;
  Structure structure = structure::Generic{};
  bool positively_homogeneous = false;

  /// Throws PreconditionViolation on an invalid combination of fields.
  void validate() const;
};

/// ℓ₁ − μℓ₂ ≤ σ.
DCConstraint l1_minus_l2(double mu, double sigma);
/// Σ_J‖x_J‖ − μ‖x‖ ≤ σ.
DCConstraint group_minus_l2(Partition blocks, double mu, double sigma);
/// ‖x‖_* − μ‖x‖_F ≤ σ.
DCConstraint nuclear_minus_frobenius(double mu, double sigma);
/// ‖x‖₁ + (ρ/2)‖x‖² − μ‖x‖ ≤ σ; μ = 0 drops P₂.
DCConstraint elastic_net_minus_l2(double rho, double mu, double sigma);

/// P₁(x) − P₂(x).
double constraint_value(const DCConstraint& c, const Point& x);
bool is_feasible(const DCConstraint& c, const Point& x, double tol = kFeasibilityTol);
/// The least-norm element of ∂P₂(x) (zero at x = 0 for norms).
Point min_norm_subgradient_P2(const DCConstraint& c, const Point& x);

/// A continuously differentiable objective.
class SmoothObjective {
 public:
  virtual ~SmoothObjective() = default;

  virtual double value(const Point& x) const = 0;
  virtual Point gradient(const Point& x) const = 0;
  /// Both at once; objectives sharing work between the two override this.
  virtual std::pair<double, Point> value_and_gradient(const Point& x) const {
    return {value(x), gradient(x)};
  }

  /// t ↦ f(x + t(u − x)). The default materialises each trial point.
  virtual std::function<double(double)> along_segment(const Point& x, const Point& u) const;

  std::optional<double> lipschitz_hint;
};

using ObjectivePtr = std::shared_ptr<const SmoothObjective>;

/// f(x) = ½‖Ax − b‖².
class LeastSquares final : public SmoothObjective {
 public:
  LeastSquares(Eigen::MatrixXd A, Eigen::VectorXd b);
  double value(const Point& x) const override;
  Point gradient(const Point& x) const override;

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
};

/// f(x) = ½‖x − c‖².
class ShiftedQuadratic final : public SmoothObjective {
 public:
  explicit ShiftedQuadratic(Eigen::VectorXd center) : center_(std::move(center)) {
    lipschitz_hint = 1.0;
  }
  double value(const Point& x) const override;
  Point gradient(const Point& x) const override;

 private:
  Eigen::VectorXd center_;
};

/// f(x) = ⟨c, x⟩ + offset.
class LinearObjective final : public SmoothObjective {
 public:
  explicit LinearObjective(Point c, double offset = 0.0) : c_(std::move(c)), offset_(offset) {
    lipschitz_hint = 0.0;
  }
  double value(const Point& x) const override { return inner(c_, x) + offset_; }
  Point gradient(const Point&) const override { return c_; }

 private:
  Point c_;
  double offset_;
};

/// Observed entries (i, j, value) of an m×n matrix.
struct Observations {
  Index rows = 0;
  Index cols = 0;
  std::vector<Index> row;
  std::vector<Index> col;
  Eigen::VectorXd value;

  std::size_t size() const { return row.size(); }
};

/// Entries of x at the observed positions.
Eigen::VectorXd entries_at(const Point& x, const Observations& obs);

/// f(x) = ½ Σ_Ω (x_ij − x̄_ij)².
class MatrixCompletionObjective final : public SmoothObjective {
 public:
  explicit MatrixCompletionObjective(Observations obs);
  double value(const Point& x) const override;
  /// Sparse, supported on Ω.
  Point gradient(const Point& x) const override;
  std::pair<double, Point> value_and_gradient(const Point& x) const override;
  std::function<double(double)> along_segment(const Point& x, const Point& u) const override;
  const Observations& observations() const { return obs_; }

 private:
  Observations obs_;
};

/// Objective assembled from callables; used in tests and bindings.
class FunctionObjective final : public SmoothObjective {
 public:
  FunctionObjective(std::function<double(const Point&)> value,
                    std::function<Point(const Point&)> gradient)
      : value_(std::move(value)), gradient_(std::move(gradient)) {}
  double value(const Point& x) const override { return value_(x); }
  Point gradient(const Point& x) const override { return gradient_(x); }

 private:
  std::function<double(const Point&)> value_;
  std::function<Point(const Point&)> gradient_;
};

struct ProblemInstance {
  ObjectivePtr objective;
  DCConstraint constraint;
  Point initial_point;

  /// Constraint validity plus feasibility of the initial point (slack 1e-12).
  void validate() const;
};

}  // namespace dcfw
