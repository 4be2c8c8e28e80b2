#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dcfw/oracles.hpp"

namespace dcfw {

enum class Variant { FW, AFW };

/// How α⁰_k is chosen for FW steps.
enum class StepRule {
  Adaptive,     // 1 at k = 0, then max{floor, min{2α_fw, 1}} after an unshrunk FW step, else max{floor, min{α_fw, 1}}
  ConstantOne,  // always 1 (plain backtracking from the unit step)
};

struct SolverConfig {
  Variant variant = Variant::FW;
  double c = 1e-4;
  double eta = 0.5;
  double eps_aw = 1e-5;
  double zeta = 1e5;
  double rel_gap_tol = 1e-6;
  int max_iter = 40000;
  std::optional<double> time_budget_s;
  double alpha0_floor = 1e-8;
  bool boundary_boost = true;
  std::uint64_t seed = 0;
  StepRule step_rule = StepRule::Adaptive;
  int max_backtracks = 100;
  linalg::EigenOptions eig;
  /// Keep a copy of every iterate in the result (tests and small problems only).
  bool record_iterates = false;

  /// Throws PreconditionViolation on out-of-range parameters.
  void validate() const;
};

std::string variant_name(Variant v);
Variant parse_variant(const std::string& s);

struct IterateState {
  Point x;
  Point xi;
  double f_val = 0.0;
  Point grad;
  double last_fw_alpha = 1.0;
  bool last_step_was_fw_with_j0 = false;
  std::optional<Eigen::VectorXd> warm_start;
};

enum class StepType { FW, AW, Terminal };
std::string step_type_name(StepType t);

struct TraceRecord {
  int iter = 0;
  double elapsed_s = 0.0;
  double f = 0.0;
  double fw_gap = 0.0;  // −⟨∇f(xᵏ), d_fw⟩, an upper bound on the stationarity measure
  StepType step_type = StepType::FW;
  double alpha = 0.0;
  int backtracks = 0;
  /// Singular values above 1e-6 (matrices) or entries above 1e-6 in magnitude (vectors).
  int rank = 0;
  double constraint_value = 0.0;
  // Diagnostics beyond the CSV schema.
  double fw_slope = 0.0;  // ⟨∇f, d_fw⟩
  double aw_slope = std::numeric_limits<double>::quiet_NaN();
  double alpha_aw = std::numeric_limits<double>::quiet_NaN();
  double alpha0 = 0.0;
};

enum class Termination { GapConverged, MaxIter, TimeBudget, StationaryExact };
std::string termination_name(Termination t);

struct SolveResult {
  Point x_final;
  std::vector<TraceRecord> trace;
  Termination termination = Termination::MaxIter;
  std::vector<Point> iterates;  // filled when record_iterates is set
  double wall_time_s = 0.0;
};

/// A failure inside solve(); carries everything computed before it.
class SolveError : public Error {
 public:
  SolveError(const std::string& what, SolveResult partial)
      : Error(what), partial_(std::move(partial)) {}
  const SolveResult& partial() const { return partial_; }

 private:
  SolveResult partial_;
};

using TraceSink = std::function<void(const TraceRecord&)>;

struct ArmijoResult {
  double alpha = 0.0;
  int backtracks = 0;
  double f_new = 0.0;
};

/// Smallest j ≥ 0 with φ(α₀ηʲ) ≤ f0 + c·α₀ηʲ·slope, where φ(α) = f(x + αd).
ArmijoResult armijo_search(const std::function<double(double)>& phi, double f0, double alpha0,
                           double c, double eta, double slope, int max_backtracks = 100);

/// Same rule on an explicit point and direction.
ArmijoResult armijo_search(const SmoothObjective& f, const Point& x, const Point& d, double alpha0,
                           double c, double eta, double slope, int max_backtracks = 100);

double initial_stepsize(const IterateState& state, int k, const SolverConfig& config = {});

/// Rescales a strictly interior x̂ onto the boundary when that does not increase f.
Point boundary_boost(const Point& x_hat, const DCConstraint& constraint, const SmoothObjective& f);

struct FWDirection {
  Point u;
  double slope = 0.0;  // ⟨∇f, u − x⟩
  double gap = 0.0;    // −slope
  LOOutput oracle;
};

FWDirection fw_direction(const IterateState& state, const ProblemInstance& problem,
                         const linalg::EigenOptions& eig = {});

struct StepChoice {
  StepType type = StepType::FW;
  Point target;        // u_fw, or u_aw for away steps
  double slope = 0.0;  // ⟨∇f, d⟩
  double alpha0 = 1.0;
  double aw_slope = std::numeric_limits<double>::quiet_NaN();
  double alpha_aw = std::numeric_limits<double>::quiet_NaN();
};

/// Away-step gate: AW iff ⟨∇f, d_fw⟩ > ⟨∇f, d_aw⟩ and α_aw ∈ (ε, ζ]; skipped at x = 0.
StepChoice afw_choose_direction(const IterateState& state, const FWDirection& fw, int k,
                                const ProblemInstance& problem, const SolverConfig& config);

/// ⟨∇f(x), x − u_fw⟩ for the solver's ξ choice; an upper bound on the merit function.
double stationarity_bound(const IterateState& state, const ProblemInstance& problem,
                          const linalg::EigenOptions& eig = {});

/// Builds the solver state at x: ξ, f and ∇f.
IterateState make_state(const Point& x, const ProblemInstance& problem);

/// Count of singular values (matrices) or entries (vectors) above 1e-6.
int reported_rank(const Point& x);

SolveResult solve(const ProblemInstance& problem, const SolverConfig& config = {},
                  const TraceSink& sink = {});

}  // namespace dcfw
