#include <doctest.h>

#include <cmath>

#include "dcfw/model.hpp"
#include "dcfw/random.hpp"
#include "helpers.hpp"

using namespace dcfw;
using testing::pvec;
using testing::vec;

TEST_CASE("constraint_value on vectors and factored matrices") {
  const DCConstraint c = l1_minus_l2(0.5, 1.0);
  CHECK(constraint_value(c, pvec({0.0})) == 0.0);
  CHECK(constraint_value(c, pvec({3.0, 4.0})) == doctest::Approx(4.5).epsilon(1e-15));

  const DCConstraint nuc = nuclear_minus_frobenius(0.5, 1.0);
  const Point x(FactoredMatrix::rank_one(2.0, vec({1.0}), vec({1.0})));
  CHECK(constraint_value(nuc, x) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("is_feasible at, inside and beyond the boundary") {
  const DCConstraint c = l1_minus_l2(0.5, 1.0);
  CHECK(is_feasible(c, pvec({0.5, 0.0}), 0.0));
  CHECK(is_feasible(c, pvec({2.0, 0.0}), 0.0));
  CHECK_FALSE(is_feasible(c, pvec({3.0, 0.0}), 0.0));
}

TEST_CASE("least-norm subgradient of the subtracted norm") {
  const DCConstraint c = l1_minus_l2(0.5, 1.0);
  const Eigen::VectorXd g = min_norm_subgradient_P2(c, pvec({3.0, 4.0})).vector();
  CHECK((g - vec({0.3, 0.4})).norm() < 1e-15);
  CHECK(min_norm_subgradient_P2(c, pvec({0.0, 0.0})).vector().norm() == 0.0);

  const DCConstraint nuc = nuclear_minus_frobenius(0.5, 1.0);
  const Point x(FactoredMatrix::rank_one(2.0, vec({1.0, 0.0}), vec({1.0, 0.0})));
  const Eigen::MatrixXd expect = testing::mat({{0.5, 0.0}, {0.0, 0.0}});
  CHECK((min_norm_subgradient_P2(nuc, x).to_dense() - expect).norm() < 1e-15);
}

TEST_CASE("subgradient inequality holds for every convex function") {
  Rng rng(11);
  const Partition blocks = contiguous_partition(6, 3);
  const std::vector<std::pair<ConvexFunctionPtr, bool>> fns = {
      {std::make_shared<L1Norm>(), false},
      {std::make_shared<GroupL1Norm>(blocks), false},
      {std::make_shared<ScaledEuclideanNorm>(0.7), false},
      {std::make_shared<ElasticNet>(1.3), false},
      {std::make_shared<NuclearNorm>(), true},
  };
  for (const auto& [h, matrix] : fns) {
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      Point x, y;
      if (matrix) {
        x = Point(rng.normal_matrix(4, 3));
        y = Point(rng.normal_matrix(4, 3));
      } else {
        Eigen::VectorXd xv = rng.normal_vector(6);
        if (t % 4 == 0) xv(t % 6) = 0.0;  // exercise the nondifferentiable points
        if (t % 10 == 0) xv.head(2).setZero();
        x = Point(xv);
        y = Point(rng.normal_vector(6));
      }
      const double slack = h->value(y) - h->value(x) - inner(h->subgradient(x), sum(y, scaled(x, -1.0)));
      worst = std::min(worst, slack);
    }
    INFO(h->name());
    CHECK(worst >= -1e-10);
  }
}

TEST_CASE("norms are recovered from their least-norm subgradient") {
  Rng rng(3);
  const ScaledEuclideanNorm p2(0.5);
  for (int t = 0; t < 100; ++t) {
    const Point y(rng.normal_vector(5));
    CHECK(inner(p2.min_norm_subgradient(y), y) == doctest::Approx(p2.value(y)).epsilon(1e-12));
  }
}

TEST_CASE("partition validation") {
  CHECK_NOTHROW(validate_partition({{0, 1}, {2}}, 3));
  CHECK_THROWS_AS(validate_partition({{0, 1}, {1, 2}}, 3), PreconditionViolation);
  CHECK_THROWS_AS(validate_partition({{0}, {2}}, 3), PreconditionViolation);
  CHECK(contiguous_partition(10, 3).size() == 3);
}

TEST_CASE("problem validation rejects infeasible starts") {
  ProblemInstance p{std::make_shared<ShiftedQuadratic>(vec({3.0, 0.0})), l1_minus_l2(0.5, 1.0),
                    pvec({3.0, 0.0})};
  CHECK_THROWS_AS(p.validate(), PreconditionViolation);
  p.initial_point = pvec({0.0, 0.0});
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("matrix completion objective") {
  Observations obs;
  obs.rows = 2;
  obs.cols = 2;
  obs.row = {0, 1};
  obs.col = {1, 0};
  obs.value = vec({1.0, -2.0});
  const MatrixCompletionObjective f(obs);
  const Point x(testing::mat({{5.0, 2.0}, {0.0, 7.0}}));
  CHECK(f.value(x) == doctest::Approx(0.5 * (1.0 + 4.0)));
  const Eigen::MatrixXd g = f.gradient(x).to_dense();
  CHECK(g(0, 1) == doctest::Approx(1.0));
  CHECK(g(1, 0) == doctest::Approx(2.0));
  CHECK(g(0, 0) == 0.0);
}
