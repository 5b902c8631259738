#include <doctest.h>

#include <cmath>
#include <random>

#include "coarsen/meshops.hpp"
#include "coarsen/metrics.hpp"
#include "coarsen/pipeline.hpp"
#include "oracles/oracles.hpp"

using namespace coarsen;

namespace {

FunctionalMap make_map(const Eigen::MatrixXd& C, const Eigen::VectorXd& lambda, const Eigen::VectorXd& lambda_tilde) {
  FunctionalMap fm;
  fm.C = C;
  fm.source_values = lambda;
  fm.target_values = lambda_tilde;
  return fm;
}

Eigen::MatrixXd random_orthogonal(Index n, std::mt19937& rng) {
  return Eigen::HouseholderQR<Eigen::MatrixXd>(oracle::random_symmetric(n, rng)).householderQ();
}

Eigen::MatrixXd random_signs(Index n, std::mt19937& rng) {
  Eigen::VectorXd s(n);
  for (Index i = 0; i < n; ++i) s[i] = rng() % 2 ? 1.0 : -1.0;
  return s.asDiagonal();
}

}  // namespace

TEST_CASE("laplacian_commutativity and orthonormality examples") {
  const Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::Vector2d lam(0, 1);
  CHECK(laplacian_commutativity(make_map(I2, lam, lam)) == 0.0);
  CHECK(laplacian_commutativity(make_map(I2, lam, Eigen::Vector2d(0, 2))) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(orthonormality(make_map(I2, lam, lam)) == 0.0);
  CHECK(orthonormality(make_map(2.0 * I2, lam, lam)) == doctest::Approx(3.0 * std::sqrt(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(laplacian_commutativity(make_map(Eigen::MatrixXd::Zero(2, 2), lam, lam)), std::invalid_argument);
}

TEST_CASE("norms are invariant under eigenvector sign flips") {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const Index k = 2 + trial % 7;
    Eigen::VectorXd lam(k), lamt(k);
    for (Index i = 0; i < k; ++i) {
      lam[i] = i + 0.3 * (rng() % 10);
      lamt[i] = i + 0.2 * (rng() % 10);
    }
    const Eigen::MatrixXd C = oracle::random_symmetric(k, rng) + Eigen::MatrixXd::Identity(k, k);
    const FunctionalMap a = make_map(C, lam, lamt);
    const FunctionalMap b = make_map(random_signs(k, rng) * C * random_signs(k, rng), lam, lamt);
    CHECK(laplacian_commutativity(a) == doctest::Approx(laplacian_commutativity(b)).epsilon(1e-12));
    CHECK(orthonormality(a) == doctest::Approx(orthonormality(b)).epsilon(1e-12));
  }
}

TEST_CASE("functional_map") {
  std::mt19937 rng(19);
  const Index n = 8;
  Eigen::VectorXd mass(n), mass_t(n);
  for (Index i = 0; i < n; ++i) {
    mass[i] = 0.5 + 0.25 * (rng() % 5);
    mass_t[i] = 0.5 + 0.25 * (rng() % 5);
  }
  EigenBasis fine, coarse;
  fine.vectors = mass.cwiseSqrt().cwiseInverse().asDiagonal() * random_orthogonal(n, rng);
  fine.values = Eigen::VectorXd::LinSpaced(n, 0, 7);
  coarse.vectors = mass_t.cwiseSqrt().cwiseInverse().asDiagonal() * random_orthogonal(n, rng);
  coarse.values = fine.values;
  const auto R = restriction(std::vector<Index>{0, 1, 2, 3, 4, 5, 6, 7}, n);
  const FunctionalMap mixed = functional_map(coarse, mass, R, fine);
  CHECK(mixed.k() == n);
  CHECK_FALSE(mixed.truncated);
  CHECK(orthonormality(mixed) > 1e-3);

  EigenBasis c2 = coarse;
  c2.vectors = mass.cwiseSqrt().cwiseInverse().asDiagonal() * random_orthogonal(n, rng);
  const FunctionalMap orth = functional_map(c2, mass, R, fine);
  CHECK((orth.C.transpose() * orth.C - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-12);

  EigenBasis c1, f1;
  c1.values = f1.values = Eigen::VectorXd::Zero(1);
  c1.vectors = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(mass.sum()));
  f1.vectors = c1.vectors;
  CHECK(std::abs(std::abs(functional_map(c1, mass, R, f1).C(0, 0)) - 1.0) <= 1e-12);

  EigenBasis shorter = fine;
  shorter.values = fine.values.head(5);
  shorter.vectors = fine.vectors.leftCols(5);
  const FunctionalMap t = functional_map(c2, mass, R, shorter);
  CHECK(t.truncated);
  CHECK(t.k() == 5);

  CHECK_THROWS_AS(functional_map(c2, mass.head(4), R, fine), std::invalid_argument);
}

TEST_CASE("identity coarsening gives a diagonal sign map") {
  const FineOperator fine = prepare_fine(grid_mesh(8, 7, 0.25, 13));
  const auto R = restriction(identity_setup(fine.L, fine.mass).samples, fine.L.size());
  const Evaluation ev = evaluate(fine.L, fine.mass, fine.L, fine.mass, R, 20);
  const Eigen::MatrixXd& C = ev.fmap.C;
  for (Index i = 0; i < C.rows(); ++i)
    for (Index j = 0; j < C.cols(); ++j) CHECK(std::abs(std::abs(C(i, j)) - (i == j ? 1.0 : 0.0)) <= 1e-8);
  CHECK(ev.norm_L <= 1e-7);
  CHECK(ev.norm_D <= 1e-7);
  CHECK(ev.eigenvalue_errors.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("eigenvalue_errors") {
  const Eigen::Vector3d lam(0.0, 1.0, 2.5);
  CHECK(eigenvalue_errors(lam, lam).isZero(0));
  CHECK(eigenvalue_errors(lam.tail(2), 2.0 * lam.tail(2)).isApprox(Eigen::Vector2d::Ones()));
  CHECK(eigenvalue_errors(lam, Eigen::Vector2d(1e-8, 1.0))[0] == doctest::Approx(1.0));
  CHECK(eigenvalue_errors(lam, lam.head(2)).size() == 2);
}

TEST_CASE("biharmonic_distance") {
  const FineOperator tet = prepare_fine(regular_tetrahedron());
  const EigenBasis tb = smallest_eigenpairs(tet.L, tet.mass, 4);
  const Eigen::VectorXd d = biharmonic_distance(tb, 0);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == doctest::Approx(d[2]).epsilon(1e-10));
  CHECK(d[1] == doctest::Approx(d[3]).epsilon(1e-10));

  const FineOperator ico = prepare_fine(icosphere(0));
  const EigenBasis ib = smallest_eigenpairs(ico.L, ico.mass, 12);
  const Eigen::VectorXd di = biharmonic_distance(ib, 4);
  CHECK(di.minCoeff() >= 0.0);
  CHECK(di[4] == 0.0);
  const Eigen::VectorXd ref = oracle::pinv_biharmonic(ico.L.to_dense(), ico.mass, 4);
  CHECK((di - ref).cwiseAbs().maxCoeff() <= 1e-6);

  CHECK_THROWS_AS(biharmonic_distance(ib, 12), std::out_of_range);
}
