#include "dcfw/solver.hpp"

#include <chrono>
#include <cmath>

namespace dcfw {

void SolverConfig::validate() const {
  if (!(c > 0 && c < 1)) throw PreconditionViolation("solver: c must lie in (0, 1)");
  if (!(eta > 0 && eta < 1)) throw PreconditionViolation("solver: eta must lie in (0, 1)");
  if (!(eps_aw > 0 && eps_aw < zeta)) throw PreconditionViolation("solver: need 0 < eps_aw < zeta");
  if (!(rel_gap_tol >= 0)) throw PreconditionViolation("solver: rel_gap_tol must be nonnegative");
  if (max_iter < 0) throw PreconditionViolation("solver: max_iter must be nonnegative");
  if (!(alpha0_floor > 0 && alpha0_floor <= 1))
    throw PreconditionViolation("solver: alpha0_floor must lie in (0, 1]");
  if (time_budget_s && !(*time_budget_s > 0))
    throw PreconditionViolation("solver: time budget must be positive");
  if (max_backtracks < 0) throw PreconditionViolation("solver: max_backtracks must be nonnegative");
}

std::string variant_name(Variant v) { return v == Variant::FW ? "fw" : "afw"; }

Variant parse_variant(const std::string& s) {
  if (s == "fw") return Variant::FW;
  if (s == "afw") return Variant::AFW;
  throw PreconditionViolation("unknown variant '" + s + "' (expected fw or afw)");
}

std::string step_type_name(StepType t) {
  switch (t) {
    case StepType::FW: return "FW";
    case StepType::AW: return "AW";
    case StepType::Terminal: return "terminal";
  }
  return "?";
}

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::GapConverged: return "gap_converged";
    case Termination::MaxIter: return "max_iter";
    case Termination::TimeBudget: return "time_budget";
    case Termination::StationaryExact: return "stationary_exact";
  }
  return "?";
}

ArmijoResult armijo_search(const std::function<double(double)>& phi, double f0, double alpha0,
                           double c, double eta, double slope, int max_backtracks) {
  if (!(slope < 0)) throw PreconditionViolation("armijo_search: direction is not a descent direction");
  if (!(alpha0 > 0)) throw PreconditionViolation("armijo_search: alpha0 must be positive");
  double alpha = alpha0;
  for (int j = 0; j <= max_backtracks; ++j) {
    const double value = phi(alpha);
    if (value <= f0 + c * alpha * slope) return {alpha, j, value};
    alpha *= eta;
  }
  throw LineSearchStalled("armijo_search: no sufficient decrease after " +
                          std::to_string(max_backtracks) + " backtracks");
}

ArmijoResult armijo_search(const SmoothObjective& f, const Point& x, const Point& d, double alpha0,
                           double c, double eta, double slope, int max_backtracks) {
  require_compatible(x, d);
  const double f0 = f.value(x);
  return armijo_search([&](double alpha) { return f.value(sum(x, scaled(d, alpha))); }, f0, alpha0, c,
                       eta, slope, max_backtracks);
}

double initial_stepsize(const IterateState& state, int k, const SolverConfig& config) {
  if (k == 0 || config.step_rule == StepRule::ConstantOne) return 1.0;
  const double base = state.last_step_was_fw_with_j0 ? 2.0 * state.last_fw_alpha : state.last_fw_alpha;
  return std::max(config.alpha0_floor, std::min(base, 1.0));
}

Point boundary_boost(const Point& x_hat, const DCConstraint& constraint, const SmoothObjective& f) {
  if (!constraint.positively_homogeneous) return x_hat;
  const double c1 = constraint_value(constraint, x_hat);
  if (!(c1 > 0 && c1 < constraint.sigma)) return x_hat;
  Point boosted = scaled(x_hat, constraint.sigma / c1);
  if (f.value(boosted) <= f.value(x_hat)) return boosted;
  return x_hat;
}

namespace {

// ⟨g, u − x⟩, formed from the difference for vectors so rounding matches x + t(u − x).
double slope_towards(const Point& g, const Point& x, const Point& u) {
  if (g.is_vector()) return g.vector().dot(u.vector() - x.vector());
  return inner(g, u) - inner(g, x);
}

}  // namespace

IterateState make_state(const Point& x, const ProblemInstance& problem) {
  IterateState s;
  s.x = x;
  s.xi = is_zero(x) ? Point::zeros_like(x) : min_norm_subgradient_P2(problem.constraint, x);
  auto [f, g] = problem.objective->value_and_gradient(x);
  s.f_val = f;
  s.grad = std::move(g);
  return s;
}

FWDirection fw_direction(const IterateState& state, const ProblemInstance& problem,
                         const linalg::EigenOptions& eig) {
  NuclearOracleOptions opts;
  opts.eig = eig;
  opts.warm_start = state.warm_start;
  FWDirection d;
  d.oracle = linear_oracle(LOQuery{state.grad, state.x, state.xi, problem.constraint}, opts);
  d.u = d.oracle.u;
  d.slope = slope_towards(state.grad, state.x, d.u);
  d.gap = -d.slope;
  return d;
}

double stationarity_bound(const IterateState& state, const ProblemInstance& problem,
                          const linalg::EigenOptions& eig) {
  return fw_direction(state, problem, eig).gap;
}

StepChoice afw_choose_direction(const IterateState& state, const FWDirection& fw, int k,
                                const ProblemInstance& problem, const SolverConfig& config) {
  StepChoice choice;
  choice.type = StepType::FW;
  choice.target = fw.u;
  choice.slope = fw.slope;
  choice.alpha0 = initial_stepsize(state, k, config);
  if (is_zero(state.x)) return choice;

  const DCConstraint& c = problem.constraint;
  AtomicDecomposition dec;
  try {
    dec = atomic_decomposition(state.x, c.structure);
  } catch (const PreconditionViolation&) {
    return choice;  // nothing above the atom threshold
  }
  const double level = effective_level(c, state.x, state.xi);
  const std::size_t pad = away_pad_index(state.grad, state.xi, dec, level);
  const AwaySet set = build_away_set(state.x, state.xi, dec, level, pad);
  auto [u_aw, index] = awo_select(state.grad, set);
  choice.aw_slope = -slope_towards(state.grad, state.x, u_aw);
  choice.alpha_aw = max_away_step(set, index, config.zeta);

  if (fw.slope > choice.aw_slope && choice.alpha_aw > config.eps_aw && choice.alpha_aw <= config.zeta) {
    choice.type = StepType::AW;
    choice.target = std::move(u_aw);
    choice.slope = choice.aw_slope;
    choice.alpha0 = choice.alpha_aw;
  }
  return choice;
}

int reported_rank(const Point& x) {
  if (x.is_vector()) return static_cast<int>((x.vector().array().abs() > kRankThreshold).count());
  if (x.kind() == Point::Kind::Factored)
    return static_cast<int>((x.factored().s.array() > kRankThreshold).count());
  return static_cast<int>((linalg::thin_svd(x.to_dense()).s.array() > kRankThreshold).count());
}

SolveResult solve(const ProblemInstance& problem, const SolverConfig& config, const TraceSink& sink) {
  config.validate();
  problem.validate();
  if (config.variant == Variant::AFW && !is_atomic(problem.constraint.structure))
    throw PreconditionViolation("solve: the away-step variant needs an atomic-norm structure, got " +
                                structure_name(problem.constraint.structure));

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  SolveResult result;
  IterateState state = make_state(problem.initial_point, problem);
  auto emit = [&](const TraceRecord& r) {
    result.trace.push_back(r);
    if (config.record_iterates) result.iterates.push_back(state.x);
    if (sink) sink(r);
  };

  try {
    for (int k = 0;; ++k) {
      TraceRecord rec;
      rec.iter = k;
      rec.f = state.f_val;
      rec.rank = reported_rank(state.x);
      rec.constraint_value = constraint_value(problem.constraint, state.x);

      const FWDirection fw = fw_direction(state, problem, config.eig);
      if (fw.oracle.warm_start) state.warm_start = fw.oracle.warm_start;
      rec.fw_slope = fw.slope;
      rec.fw_gap = fw.gap;

      auto finish = [&](Termination t) {
        rec.step_type = StepType::Terminal;
        rec.alpha = 0.0;
        rec.backtracks = 0;
        rec.elapsed_s = elapsed();
        result.termination = t;
        emit(rec);
      };

      if (fw.gap <= 0.0) {
        finish(Termination::StationaryExact);
        break;
      }

      StepChoice choice;
      if (config.variant == Variant::AFW) {
        choice = afw_choose_direction(state, fw, k, problem, config);
      } else {
        choice.type = StepType::FW;
        choice.target = fw.u;
        choice.slope = fw.slope;
        choice.alpha0 = initial_stepsize(state, k, config);
      }
      rec.aw_slope = choice.aw_slope;
      rec.alpha_aw = choice.alpha_aw;
      rec.alpha0 = choice.alpha0;

      if (std::abs(choice.slope) <
          config.rel_gap_tol * std::max(std::abs(state.f_val + choice.slope), 1.0)) {
        finish(Termination::GapConverged);
        break;
      }
      if (k >= config.max_iter) {
        finish(Termination::MaxIter);
        break;
      }
      if (config.time_budget_s && elapsed() >= *config.time_budget_s) {
        finish(Termination::TimeBudget);
        break;
      }

      // φ(α) = f(x + α d) with d = u − x (FW) or x − u (AW), i.e. t = ±α along [x, u].
      const double sign = choice.type == StepType::AW ? -1.0 : 1.0;
      const auto segment = problem.objective->along_segment(state.x, choice.target);
      const ArmijoResult ls = armijo_search([&](double a) { return segment(sign * a); }, state.f_val,
                                            choice.alpha0, config.c, config.eta, choice.slope,
                                            config.max_backtracks);
      Point x_next = linalg::affine_combination(state.x, choice.target, sign * ls.alpha);
      if (config.boundary_boost)
        x_next = boundary_boost(x_next, problem.constraint, *problem.objective);

      rec.step_type = choice.type;
      rec.alpha = ls.alpha;
      rec.backtracks = ls.backtracks;
      rec.elapsed_s = elapsed();
      emit(rec);

      IterateState next = make_state(x_next, problem);
      next.warm_start = std::move(state.warm_start);
      if (choice.type == StepType::FW) {
        next.last_fw_alpha = ls.alpha;
        next.last_step_was_fw_with_j0 = ls.backtracks == 0;
      } else {
        next.last_fw_alpha = state.last_fw_alpha;
        next.last_step_was_fw_with_j0 = false;
      }
      state = std::move(next);
    }
  } catch (const SolveError&) {
    throw;
  } catch (const std::exception& e) {
    result.x_final = state.x;
    result.wall_time_s = elapsed();
    throw SolveError(std::string("solve failed at iteration ") + std::to_string(result.trace.size()) +
                         ": " + e.what(),
                     std::move(result));
  }
  result.x_final = state.x;
  result.wall_time_s = elapsed();
  return result;
}

}  // namespace dcfw
