#include <doctest.h>

#include <cmath>
#include <limits>

#include "dcfw/checks.hpp"
#include "dcfw/verify.hpp"
#include "helpers.hpp"

using namespace dcfw;
using namespace dcfw::verify;
using testing::mat;
using testing::pvec;
using testing::vec;

namespace {

LOQuery elementwise_query() {
  return {pvec({3.0, -1.0}), pvec({0.0, 0.0}), pvec({0.5, 0.0}), l1_minus_l2(0.5, 1.0)};
}

}  // namespace

TEST_CASE("KKT certificates") {
  const LOQuery q = elementwise_query();
  const LOOutput out = linear_oracle(q);
  CHECK(out.multiplier == doctest::Approx(2.0).epsilon(1e-14));
  const CertificateReport r = kkt_check(q, out);
  CHECK(r.passed);
  CHECK(r.kkt_residual <= 1e-12);
  CHECK(r.complementarity <= 1e-12);

  Rng rng(1);
  CHECK_FALSE(kkt_check(q, perturbed(out, 0.01, rng)).passed);

  LOOutput flipped = out;
  flipped.u = scaled(out.u, -1.0);
  CHECK_FALSE(kkt_check(q, flipped).passed);

  const LOQuery zero{pvec({0.0, 0.0}), pvec({0.1, 0.0}), pvec({0.05, 0.0}), l1_minus_l2(0.5, 1.0)};
  CHECK(kkt_check(zero, linear_oracle(zero)).passed);

  LOOutput bare = out;
  bare.active_subgradient.reset();
  CHECK_THROWS_AS(kkt_check(q, bare), PreconditionViolation);
}

TEST_CASE("sampled reference") {
  const LOQuery ball{pvec({1.0, 0.0}), pvec({0.0, 0.0}), pvec({0.0, 0.0}), l1_minus_l2(0.0, 1.0)};
  const double v = sampled_lo_reference(ball, 100000, 3);
  CHECK(v >= -1.0);
  CHECK(v <= -0.999);

  const double s = sampled_lo_reference(elementwise_query(), 100000, 5);
  CHECK(s >= -2.0 - 1e-9);
  CHECK(-2.0 <= s + 1e-2);
  CHECK(sampled_lo_reference(elementwise_query(), 100000, 5) == s);

  CHECK(sampled_lo_reference(ball, 0, 1) == std::numeric_limits<double>::infinity());
}

TEST_CASE("dense pencil reference") {
  CHECK(dense_pencil_reference(mat({{1.0}}), mat({{0.0}})).lambda == doctest::Approx(-1.0).epsilon(1e-14));
  const PencilReference near = dense_pencil_reference(mat({{1.0, 0.0}, {0.0, 1.0}}), mat({{0.999, 0.0}, {0.0, 0.0}}));
  CHECK(std::isfinite(near.lambda));
  CHECK(dense_pencil_reference(Eigen::MatrixXd::Zero(2, 3), Eigen::MatrixXd::Zero(2, 3)).lambda == 0.0);
  CHECK_THROWS_AS(dense_pencil_reference(mat({{1.0}}), mat({{1.5}})), PreconditionViolation);
}

TEST_CASE("grid reference") {
  CHECK(std::abs(grid_lo_reference(elementwise_query(), 1000000).value + 2.0) <= 1e-5);
  const LOQuery g{pvec({1.0, 0.0}), pvec({0.0, 0.0}), pvec({0.0, 0.5}), group_minus_l2({{0, 1}}, 0.5, 1.0)};
  CHECK(std::abs(grid_lo_reference(g, 1000000).value + 1.1547005383792515) <= 1e-4);

  const LOQuery z{pvec({0.0, 0.0, 0.0}), pvec({0.0, 0.0, 0.0}), pvec({0.0, 0.0, 0.0}), l1_minus_l2(0.5, 1.0)};
  CHECK(grid_lo_reference(z, 1000).value == 0.0);

  const LOQuery big{pvec({1.0, 0.0, 0.0, 0.0}), pvec({0.0, 0.0, 0.0, 0.0}), pvec({0.0, 0.0, 0.0, 0.0}),
                    l1_minus_l2(0.5, 1.0)};
  CHECK_THROWS_AS(grid_lo_reference(big, 1000), PreconditionViolation);
}

TEST_CASE("finite differences") {
  Rng rng(2);
  const Eigen::MatrixXd A = rng.normal_matrix(6, 4);
  const LeastSquares ls(A, rng.normal_vector(6));
  std::vector<Point> pts;
  for (int i = 0; i < 5; ++i) pts.emplace_back(rng.normal_vector(4));
  CHECK(finite_difference_check(ls, pts, 1e-6).passed);

  Observations obs;
  obs.rows = 5;
  obs.cols = 4;
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 4; ++j)
      if ((i + j) % 2 == 0) {
        obs.row.push_back(i);
        obs.col.push_back(j);
      }
  obs.value = rng.normal_vector(static_cast<Index>(obs.row.size()));
  const MatrixCompletionObjective mc(obs);
  std::vector<Point> mpts;
  for (int i = 0; i < 3; ++i) mpts.emplace_back(rng.normal_matrix(5, 4));
  CHECK(finite_difference_check(mc, mpts, 1e-5).passed);

  const FunctionObjective wrong([&](const Point& x) { return ls.value(x); },
                                [&](const Point& x) { return scaled(ls.gradient(x), 1.01); });
  CHECK_FALSE(finite_difference_check(wrong, pts, 1e-6).passed);
}

TEST_CASE("classic Frank-Wolfe reference") {
  SolverConfig cfg;
  cfg.max_iter = 50;
  const ProblemInstance constant{std::make_shared<LinearObjective>(pvec({0.0, 0.0}), 1.0), l1_minus_l2(0.0, 1.0),
                                 pvec({0.0, 0.0})};
  CHECK(classic_fw_reference(constant, cfg).iterates.size() == 1);

  const ProblemInstance lin{std::make_shared<LinearObjective>(pvec({0.5, -2.0, 1.0})), l1_minus_l2(0.0, 3.0),
                            pvec({0.0, 0.0, 0.0})};
  const SolveResult r = classic_fw_reference(lin, cfg);
  REQUIRE(r.iterates.size() == 2);
  CHECK((r.iterates[1].vector() - vec({0.0, 3.0, 0.0})).norm() == 0.0);

  const ProblemInstance dc{std::make_shared<LinearObjective>(pvec({1.0, 0.0})), l1_minus_l2(0.5, 1.0),
                           pvec({0.0, 0.0})};
  CHECK_THROWS_AS(classic_fw_reference(dc, cfg), PreconditionViolation);
}

TEST_CASE("named checks pass on small budgets") {
  CHECK(check_default_constants().passed);
  CHECK(check_oracle_grid(QueryFamily::Group, 5, 20000, 1e-3, 1).passed);
  CHECK(check_oracle_nuclear(5, 5, 1e-6, 1).passed);
  CHECK(check_kkt(QueryFamily::Elementwise, 20, 1e-8, 1e-3, 1).passed);
  CHECK(check_stationarity(Variant::AFW, 2000, 10000).passed);
}
