#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "dcfw/oracles.hpp"
#include "dcfw/random.hpp"
#include "dcfw/verify.hpp"
#include "helpers.hpp"

using namespace dcfw;
using testing::mat;
using testing::pvec;
using testing::unit;
using testing::vec;

TEST_CASE("elementwise oracle") {
  const LOOutput a = lo_elementwise(vec({0.0, -2.0, 1.0}), Eigen::VectorXd::Zero(3), 2.0);
  CHECK((a.u.vector() - vec({0.0, 2.0, 0.0})).norm() < 1e-15);
  CHECK(a.objective_value == doctest::Approx(-4.0));

  const LOOutput b = lo_elementwise(vec({3.0, -1.0}), vec({0.5, 0.0}), 1.0);
  CHECK((b.u.vector() - vec({-2.0 / 3.0, 0.0})).norm() < 1e-15);
  CHECK(b.objective_value == doctest::Approx(-2.0));
  const Eigen::VectorXd u = b.u.vector();
  CHECK(u.lpNorm<1>() - 0.5 * u(0) == doctest::Approx(1.0));

  const LOOutput c = lo_elementwise(vec({1.0, 1.0}), Eigen::VectorXd::Zero(2), 1.0);
  CHECK((c.u.vector() - vec({-1.0, 0.0})).norm() == 0.0);
}

TEST_CASE("angular subproblem") {
  const AngularSolution a = solve_angular_subproblem(vec({1.0, 0.0}), vec({0.0, 0.0}));
  CHECK((a.w - vec({-1.0, 0.0})).norm() < 1e-15);
  CHECK(a.kappa == doctest::Approx(-1.0));

  const AngularSolution b = solve_angular_subproblem(vec({1.0, 0.0}), vec({0.0, 0.5}));
  CHECK((b.w - vec({-std::sqrt(0.75), 0.5})).norm() < 1e-12);
  CHECK(b.kappa == doctest::Approx(-std::sqrt(0.75) / 0.75).epsilon(1e-12));

  // independent check: dense scan of the unit circle
  double best = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    const double th = 2.0 * std::numbers::pi * i / 1000000.0;
    best = std::min(best, std::cos(th) / (1.0 - 0.5 * std::sin(th)));
  }
  CHECK(std::abs(best - b.kappa) < 1e-9);

  const AngularSolution z = solve_angular_subproblem(vec({0.0, 0.0}), vec({0.0, 0.5}));
  CHECK(z.kappa == 0.0);
  CHECK((z.w - vec({1.0, 1.0}) / std::sqrt(2.0)).norm() < 1e-15);
}

TEST_CASE("group oracle") {
  const Partition p = {{0, 1}, {2}};
  const LOOutput a = lo_group(vec({0.0, 4.0, -3.0}), Eigen::VectorXd::Zero(3), 1.0, p);
  CHECK((a.u.vector() - vec({0.0, -1.0, 0.0})).norm() < 1e-15);
  CHECK(a.objective_value == doctest::Approx(-4.0));

  const LOOutput b = lo_group(vec({1.0, 0.0}), vec({0.0, 0.5}), 1.0, {{0, 1}});
  CHECK((b.u.vector() - vec({-std::sqrt(0.75) / 0.75, 0.5 / 0.75})).norm() < 1e-12);
  CHECK(b.objective_value == doctest::Approx(-1.15470).epsilon(1e-5));

  const LOOutput c = lo_group(vec({3.0, -1.0}), vec({0.5, 0.0}), 1.0, singleton_partition(2));
  CHECK((c.u.vector() - vec({-2.0 / 3.0, 0.0})).norm() < 1e-15);
}

TEST_CASE("singleton partitions agree with the elementwise oracle") {
  Rng rng(41);
  for (int t = 0; t < 500; ++t) {
    const Index n = 1 + static_cast<Index>(rng.below(8));
    const Eigen::VectorXd a = rng.normal_vector(n);
    Eigen::VectorXd xi = rng.normal_vector(n);
    xi *= rng.uniform(0.0, 0.9) / xi.norm();
    const double sigma = rng.uniform(0.5, 2.0);
    const LOOutput e = lo_elementwise(a, xi, sigma);
    const LOOutput g = lo_group(a, xi, sigma, singleton_partition(n));
    Index ie = 0, ig = 0;
    e.u.vector().cwiseAbs().maxCoeff(&ie);
    g.u.vector().cwiseAbs().maxCoeff(&ig);
    CHECK(ie == ig);
    CHECK(std::abs(e.objective_value - g.objective_value) <= 1e-12 * std::abs(e.objective_value));
  }
}

TEST_CASE("nuclear oracle") {
  const Point z2(Eigen::MatrixXd(Eigen::MatrixXd::Zero(2, 2)));
  const LOOutput a = lo_nuclear(Point(mat({{1.0, 0.0}, {0.0, 0.0}})), z2, 2.0);
  CHECK((a.u.to_dense() - mat({{-2.0, 0.0}, {0.0, 0.0}})).norm() < 1e-6);
  CHECK(a.objective_value == doctest::Approx(-2.0).epsilon(1e-8));

  const LOOutput b = lo_nuclear(Point(mat({{0.0, 1.0}, {0.0, 0.0}})), z2, 1.0);
  CHECK((b.u.to_dense() - mat({{0.0, -1.0}, {0.0, 0.0}})).norm() < 1e-6);
  CHECK(b.objective_value == doctest::Approx(-1.0).epsilon(1e-8));

  Rng rng(8);
  const DCConstraint c = nuclear_minus_frobenius(0.5, 1.0);
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXd a4 = rng.normal_matrix(4, 3);
    Eigen::MatrixXd y = rng.normal_matrix(4, 3);
    y *= 0.5 / y.jacobiSvd().singularValues().sum();
    const Point yp(y), xi(Eigen::MatrixXd(0.5 * y / y.norm()));
    const LOQuery q{Point(a4), yp, xi, c};
    const LOOutput out = linear_oracle(q);
    const verify::LOReference ref = verify::nuclear_lo_reference(q);
    CHECK(std::abs(out.objective_value - ref.value) <= 1e-6 * std::max(1.0, std::abs(ref.value)));
  }
}

TEST_CASE("strongly convex oracle") {
  const DCConstraint c = elastic_net_minus_l2(1.0, 0.0, 1.5);
  const LOOutput a = lo_strongly_convex(vec({1.0}), vec({0.0}), vec({0.0}), c);
  CHECK(std::abs(a.u.vector()(0) + 1.0) < 1e-8);
  CHECK(a.multiplier == doctest::Approx(0.5).epsilon(1e-8));

  const LOOutput b = lo_strongly_convex(vec({-1.0}), vec({0.0}), vec({0.0}), c);
  CHECK(std::abs(b.u.vector()(0) - 1.0) < 1e-8);

  const LOOutput d = lo_strongly_convex(vec({1.0, 0.0}), vec({0.0, 0.0}), vec({0.0, 0.0}), c);
  CHECK((d.u.vector() - vec({-1.0, 0.0})).norm() < 1e-8);
  const LOQuery q{pvec({1.0, 0.0}), pvec({0.0, 0.0}), pvec({0.0, 0.0}), c};
  CHECK(std::abs(verify::grid_lo_reference(q, 100000).value - d.objective_value) < 1e-5);
}

TEST_CASE("atomic decompositions") {
  const structure::GroupL1 g{{{0, 1}, {2}}};
  const AtomicDecomposition a = atomic_decomposition(pvec({3.0, 4.0, 0.0}), g);
  REQUIRE(a.atoms.size() == 1);
  CHECK((a.atoms[0].vector() - vec({0.6, 0.8, 0.0})).norm() < 1e-15);
  CHECK(a.weights[0] == doctest::Approx(1.0));
  CHECK(a.scale == doctest::Approx(5.0));

  const AtomicDecomposition b = atomic_decomposition(pvec({1.0, 0.0, 1.0}), g);
  REQUIRE(b.atoms.size() == 2);
  CHECK((b.atoms[0].vector() - vec({1.0, 0.0, 0.0})).norm() < 1e-15);
  CHECK((b.atoms[1].vector() - vec({0.0, 0.0, 1.0})).norm() < 1e-15);
  CHECK(b.weights[0] == doctest::Approx(0.5));
  CHECK(b.scale == doctest::Approx(2.0));

  const AtomicDecomposition m = atomic_decomposition(Point(mat({{2.0, 0.0}, {0.0, 1.0}})), structure::Nuclear{});
  REQUIRE(m.atoms.size() == 2);
  CHECK(m.scale == doctest::Approx(3.0));
  CHECK(m.weights[0] == doctest::Approx(2.0 / 3.0));
  CHECK((m.atoms[0].to_dense() - mat({{1.0, 0.0}, {0.0, 0.0}})).norm() < 1e-12);
}

TEST_CASE("away sets reproduce the current point") {
  const Point y = pvec({0.5, 0.0}), xi = pvec({0.5, 0.0});
  const AtomicDecomposition d = atomic_decomposition(y, structure::ElementwiseL1{});
  const AwaySet s = build_away_set(y, xi, d, 1.0, 0);
  REQUIRE(s.points.size() == 2);
  CHECK((s.points[0].vector() - vec({2.0, 0.0})).norm() < 1e-15);
  CHECK((s.points[1].vector() - vec({-2.0 / 3.0, 0.0})).norm() < 1e-15);
  CHECK(s.weights[0] == doctest::Approx(0.4375).epsilon(1e-14));
  CHECK(s.weights[1] == doctest::Approx(0.5625).epsilon(1e-14));

  const Point yb = pvec({0.25, -0.75});
  const Point z2 = pvec({0.0, 0.0});
  const AwaySet sb = build_away_set(yb, z2, atomic_decomposition(yb, structure::ElementwiseL1{}), 1.0, 0);
  CHECK(sb.points.size() == 2);
  CHECK(sb.weights[0] + sb.weights[1] == doctest::Approx(1.0).epsilon(1e-15));

  const Point ym(FactoredMatrix::rank_one(2.0, unit(3, 0), unit(2, 0)));
  const Point zm(Eigen::MatrixXd(Eigen::MatrixXd::Zero(3, 2)));
  const AwaySet sm = build_away_set(ym, zm, atomic_decomposition(ym, structure::Nuclear{}), 2.0, 0);
  REQUIRE(sm.points.size() == 1);
  CHECK(sm.weights[0] == doctest::Approx(1.0));
  CHECK((sm.points[0].to_dense() - ym.to_dense()).norm() < 1e-12);

  Rng rng(4);
  const DCConstraint c = l1_minus_l2(0.5, 1.0);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd yv = rng.normal_vector(6);
    yv *= rng.uniform(0.05, 1.0) / yv.lpNorm<1>();
    const Point yp(yv);
    const Point x = min_norm_subgradient_P2(c, yp);
    const AtomicDecomposition dd = atomic_decomposition(yp, structure::ElementwiseL1{});
    const double level = effective_level(c, yp, x);
    const AwaySet as = build_away_set(yp, x, dd, level, static_cast<std::size_t>(t) % dd.atoms.size());
    Eigen::VectorXd rec = Eigen::VectorXd::Zero(6);
    double total = 0.0;
    for (std::size_t i = 0; i < as.points.size(); ++i) {
      CHECK(as.weights[i] >= 0.0);
      rec += as.weights[i] * as.points[i].vector();
      total += as.weights[i];
      CHECK(is_feasible(c, as.points[i], 1e-9));
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    CHECK((rec - yv).norm() < 1e-12);
  }
}

TEST_CASE("away selection and maximal away step") {
  const AwaySet s{{pvec({1.0, 0.0}), pvec({-1.0, 0.0})}, {0.5, 0.5}};
  const auto [u, i] = awo_select(pvec({2.0, 0.0}), s);
  CHECK(i == 0);
  CHECK((u.vector() - vec({1.0, 0.0})).norm() == 0.0);

  const AwaySet s2{{pvec({2.0, 0.0}), pvec({-2.0 / 3.0, 0.0})}, {0.4375, 0.5625}};
  CHECK(awo_select(pvec({-1.0, 0.0}), s2).second == 1);
  CHECK(awo_select(pvec({-1.0}), AwaySet{{pvec({4.0})}, {1.0}}).second == 0);

  CHECK(max_away_step(s, 0, 1e5) == doctest::Approx(1.0));
  CHECK(max_away_step(AwaySet{{pvec({1.0}), pvec({-1.0})}, {0.9, 0.1}}, 0, 1e5) == doctest::Approx(9.0));
  CHECK(max_away_step(AwaySet{{pvec({1.0}), pvec({-1.0})}, {1.0 - 1e-7, 1e-7}}, 0, 1e5) == 1e5);
}

TEST_CASE("oracle outputs are feasible and no worse than y") {
  Rng rng(77);
  for (auto family : {verify::QueryFamily::Elementwise, verify::QueryFamily::Group,
                      verify::QueryFamily::Nuclear, verify::QueryFamily::StronglyConvex}) {
    const int count = family == verify::QueryFamily::Nuclear ? 200 : 1000;
    for (int t = 0; t < count; ++t) {
      const Index n = 2 + static_cast<Index>(rng.below(6));
      const LOQuery q = verify::random_query(family, n, rng, family == verify::QueryFamily::Nuclear ? 3 : 0);
      const LOOutput out = linear_oracle(q);
      const double level = effective_level(q.constraint, q.y, q.xi);
      const double lhs = q.constraint.p1->value(out.u) - inner(q.xi, out.u);
      INFO(verify::family_name(family));
      CHECK(lhs - level <= 1e-8 * std::max(1.0, std::abs(level)));
      CHECK(constraint_value(q.constraint, out.u) <= q.constraint.sigma + 1e-8);
      CHECK(inner(q.a, out.u) <= inner(q.a, q.y) + 1e-10);
    }
  }
}

TEST_CASE("oracle values lower-bound random feasible samples") {
  Rng rng(91);
  for (auto family : {verify::QueryFamily::Elementwise, verify::QueryFamily::Group,
                      verify::QueryFamily::StronglyConvex}) {
    for (int t = 0; t < 3; ++t) {
      const LOQuery q = verify::random_query(family, 2 + static_cast<Index>(rng.below(9)), rng);
      const double v = linear_oracle(q).objective_value;
      CHECK(v <= verify::sampled_lo_reference(q, 10000, rng.below(1000)) + 1e-6);
    }
  }
}
