#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcfw/experiment.hpp"
#include "dcfw/verify.hpp"

// Parameterised end-to-end checks shared by the `verify` subcommand and the
// acceptance binary. Each returns a named pass/fail result with a short detail.
namespace dcfw::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Closed-form vector oracles against grid_lo_reference (absolute objective error ≤ tol).
CheckResult check_oracle_grid(QueryFamily family, int queries, std::size_t resolution, double tol,
                              std::uint64_t seed);

/// lo_nuclear against the dense pencil construction (relative objective error ≤ rel_tol), m, n ≤ max_dim.
CheckResult check_oracle_nuclear(int queries, Index max_dim, double rel_tol, std::uint64_t seed);

/// Closed-form output lower-bounds the sampled reference, which stays within `band` of it.
CheckResult check_oracle_sampled(QueryFamily family, int queries, std::size_t samples, double band,
                                 std::uint64_t seed);

/// Every output passes kkt_check at tol; every perturbation of size `perturbation` fails.
CheckResult check_kkt(QueryFamily family, int queries, double tol, double perturbation, std::uint64_t seed);

/// Feasibility, monotone f, gap sign and AW gate on random instances of one family, both variants.
/// cs: n = 100; gl: n = 120 in 10 groups; mc: 60 × 40 rank 3.
CheckResult check_feasibility_descent(ProblemKind family, int instances, int max_iter, std::uint64_t seed);

/// f = ½‖x − (3, 0)‖² over ‖x‖₁ − 0.5‖x‖ ≤ 1 from 0; optimum certified by a grid of grid_points.
CheckResult check_stationarity(Variant variant, int max_iter, std::size_t grid_points);

/// Solver with P₂ ≡ 0 against classic_fw_reference, bitwise over `iterations` iterations.
CheckResult check_classic_reduction(int iterations, std::uint64_t seed);

/// k·min_{t≤k} gap_t at k = k_late is below `ratio` times its value at k_early, on
/// f = ½‖Ax − b‖² over ‖x‖₁ + ½‖x‖² − 0.5‖x‖ ≤ 1 with n = 50 and b far outside the set.
CheckResult check_complexity_trend(int k_early, int k_late, double ratio, std::uint64_t seed);

/// Gradient oracles of the least-squares and matrix-completion objectives against finite differences.
CheckResult check_finite_differences(std::uint64_t seed);

/// The default configuration carries the reference constants.
CheckResult check_default_constants();

/// `updates` rank-one SVD updates against a dense recomputation (relative Frobenius error ≤ tol).
CheckResult check_svd_accumulation(int updates, double tol, std::uint64_t seed);

/// Krylov eigensolver against dense_pencil_reference for m + n ≤ max_dim.
CheckResult check_eigensolver(int pencils, Index max_dim, double tol, std::uint64_t seed);

struct DeskMCReport {
  CheckResult check;
  double fw_test_rmse = 0.0, afw_test_rmse = 0.0;
  int fw_rank = 0, afw_rank = 0;
};

/// Synthetic 200 × 150 rank-5 matrix completion, both variants, budget `max_iter`:
/// monotone training error, relative gap ≤ gap_tol, test RMSE ≤ 2·noise, within `seconds_budget`.
DeskMCReport check_desk_matrix_completion(int max_iter, double gap_tol, double seconds_budget);

/// Named suites: "oracles", "solver" or "all" (a reduced-size pass over the checks above).
std::vector<CheckResult> run_suite(const std::string& suite);

}  // namespace dcfw::verify
