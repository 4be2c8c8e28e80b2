#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "dcfw/linalg.hpp"
#include "dcfw/random.hpp"
#include "dcfw/verify.hpp"
#include "helpers.hpp"

using namespace dcfw;
using namespace dcfw::linalg;
using testing::mat;
using testing::unit;
using testing::vec;

namespace {

Eigen::MatrixXd dense_of(const FactoredMatrix& f) { return Point(f).to_dense(); }

}  // namespace

TEST_CASE("thin_svd") {
  CHECK(thin_svd(Eigen::MatrixXd::Zero(3, 2)).rank() == 0);

  const FactoredMatrix d = thin_svd(mat({{3.0, 0.0}, {0.0, 1.0}}));
  REQUIRE(d.rank() == 2);
  CHECK(d.s(0) == doctest::Approx(3.0));
  CHECK(d.s(1) == doctest::Approx(1.0));
  CHECK(std::abs(d.U(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(d.W(1, 1)) == doctest::Approx(1.0));

  Rng rng(5);
  const Eigen::MatrixXd a = rng.normal_matrix(5, 4);
  const FactoredMatrix f = thin_svd(a);
  CHECK((dense_of(f) - a).norm() < 1e-12 * a.norm());
  CHECK(orthonormality_defect(f.U) < 1e-12);
  CHECK(orthonormality_defect(f.W) < 1e-12);
}

TEST_CASE("rank-one SVD update") {
  const Eigen::VectorXd u = vec({0.6, 0.8, 0.0});
  const Eigen::VectorXd v = vec({0.0, 1.0});
  const FactoredMatrix x = FactoredMatrix::rank_one(1.0, u, v);
  CHECK(svd_rank_one_update(x, 1.0, -1.0, u, v).rank() == 0);

  const FactoredMatrix e11 = FactoredMatrix::rank_one(1.0, unit(2, 0), unit(2, 0));
  const FactoredMatrix two = svd_rank_one_update(e11, 1.0, 1.0, unit(2, 1), unit(2, 1));
  CHECK(two.rank() == 2);
  CHECK((dense_of(two) - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-14);

  Rng rng(17);
  const Eigen::MatrixXd base = rng.normal_matrix(200, 3) * rng.normal_matrix(3, 150);
  const FactoredMatrix start = thin_svd(base);
  Eigen::VectorXd p = rng.normal_vector(200), q = rng.normal_vector(150);
  p.normalize();
  q.normalize();
  const FactoredMatrix upd = svd_rank_one_update(start, 0.7, 2.5, p, q);
  const Eigen::MatrixXd expect = 0.7 * base + 2.5 * p * q.transpose();
  CHECK((dense_of(upd) - expect).norm() <= 1e-8 * expect.norm());
  CHECK(upd.rank() == 4);
}

TEST_CASE("generalized eigensolver on small pencils") {
  const Point xi0(Eigen::MatrixXd(Eigen::MatrixXd::Zero(1, 1)));
  const PencilOperator p1 = make_pencil(Point(mat({{1.0}})), xi0);
  const EigenPair e1 = gen_eig_smallest(p1, vec({1.0, 0.3}), {1e-12, 2000, EigenMethod::Krylov, 16});
  CHECK(e1.lambda == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(e1.z(0) + e1.z(1)) < 1e-8);
  CHECK(std::abs(std::abs(e1.z(0)) - 1.0 / std::sqrt(2.0)) < 1e-8);

  const Point xi2(Eigen::MatrixXd(Eigen::MatrixXd::Zero(2, 2)));
  const PencilOperator p2 = make_pencil(Point(mat({{2.0, 0.0}, {0.0, 0.0}})), xi2);
  const EigenPair e2 = gen_eig_smallest(p2, Eigen::VectorXd::Ones(4), {1e-12, 2000, EigenMethod::Krylov, 16});
  CHECK(e2.lambda == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("eigensolver matches the dense reference and is Rayleigh optimal") {
  Rng rng(23);
  for (int t = 0; t < 5; ++t) {
    const Eigen::MatrixXd a = rng.normal_matrix(6, 5);
    Eigen::MatrixXd xi = rng.normal_matrix(6, 5);
    xi *= 0.5 / xi.jacobiSvd().singularValues()(0);
    const PencilOperator p = make_pencil(Point(a), Point(xi));
    const EigenPair e = gen_eig_smallest(p, Eigen::VectorXd::Ones(11), {1e-12, 5000, EigenMethod::Krylov, 16});
    const verify::PencilReference ref = verify::dense_pencil_reference(a, xi);
    CHECK(std::abs(e.lambda - ref.lambda) <= 1e-8 * std::max(1.0, std::abs(ref.lambda)));

    const double zAz = e.z.dot(p.apply_A(e.z));
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd w = rng.normal_vector(11);
      w /= std::sqrt(w.dot(p.apply_B(w)));
      CHECK(zAz <= w.dot(p.apply_A(w)) + 1e-10);
    }
  }
}

TEST_CASE("top singular triplet") {
  const SingularTriplet d = top_singular_triplet(Point(mat({{3.0, 0.0}, {0.0, 1.0}})));
  CHECK(d.s == doctest::Approx(3.0));
  CHECK(std::abs(d.u(0)) == doctest::Approx(1.0));
  CHECK(std::abs(d.v(0)) == doctest::Approx(1.0));

  const SingularTriplet r = top_singular_triplet(Point(mat({{0.0, 1.0}, {0.0, 0.0}})));
  CHECK(r.s == doctest::Approx(1.0));

  Rng rng(2);
  const Eigen::MatrixXd a = rng.normal_matrix(8, 6);
  const SingularTriplet t = top_singular_triplet(Point(a));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  CHECK(std::abs(t.s - svd.singularValues()(0)) < 1e-8);
  CHECK(std::abs(std::abs(t.u.dot(svd.matrixU().col(0))) - 1.0) < 1e-8);
}

TEST_CASE("affine combination of factored iterates") {
  Rng rng(9);
  const Eigen::MatrixXd base = rng.normal_matrix(7, 2) * rng.normal_matrix(2, 5);
  const Point x(thin_svd(base));
  const Point u(FactoredMatrix::rank_one(-3.0, unit(7, 2), unit(5, 4)));
  const Point z = affine_combination(x, u, 0.25);
  CHECK(z.kind() == Point::Kind::Factored);
  CHECK((z.to_dense() - (0.75 * base + 0.25 * u.to_dense())).norm() < 1e-12);
}
