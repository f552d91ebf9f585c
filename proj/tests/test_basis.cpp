#include <doctest.h>

#include <cmath>
#include <string>

#include "dualbound/basis.hpp"

using namespace dualbound;

namespace {

NoiseModel two_point_pm1() {
  return NoiseModel::finite(
      {Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0)},
      Eigen::Vector2d(0.5, 0.5));
}

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

}  // namespace

TEST_CASE("taylor basis: centered monomials") {
  const NoiseModel n = NoiseModel::standard_normal(1);
  CHECK(taylor_basis_eval(1, 0.5, n) == doctest::Approx(0.5));
  CHECK(taylor_basis_eval(2, 1.0, n) == doctest::Approx(0.0));
  CHECK(taylor_basis_eval(3, 2.0, n) == doctest::Approx(8.0));
  CHECK_THROWS_AS(taylor_basis_eval(0, 1.0, n), std::invalid_argument);
}

TEST_CASE("coordinate weights for the standard normal, R = 2") {
  const NoiseModel n = NoiseModel::standard_normal(1);
  const CoordinateWeights w = coordinate_weights(n, 2);
  REQUIRE(w.per_component.size() == 1);
  const Eigen::MatrixXd& W = w.per_component[0];
  // Cov(z, z^2) = diag(1, 2), so W = diag(1, 1/2).
  CHECK(std::abs(W(0, 0) - 1.0) <= 1e-12);
  CHECK(std::abs(W(1, 1) - 0.5) <= 1e-12);
  CHECK(std::abs(W(0, 1)) <= 1e-12);
  CHECK(std::abs(W(1, 0)) <= 1e-12);
  // l_1(z) = z, l_2(z) = (z^2 - 1)/2.
  CHECK(w.weight_eval(0, 1, 0.7, n) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(w.weight_eval(0, 2, 0.7, n) ==
        doctest::Approx((0.49 - 1.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("coordinate weights: two-point noise") {
  const NoiseModel n = two_point_pm1();
  const CoordinateWeights w = coordinate_weights(n, 1);
  CHECK(w.per_component[0](0, 0) == doctest::Approx(1.0));
  // z^2 is a.s. constant, so R = 2 must fail and name the monomial.
  bool threw = false;
  try {
    coordinate_weights(n, 2);
  } catch (const std::invalid_argument& e) {
    threw = true;
    CHECK(std::string(e.what()).find("z^2") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("hermite polynomials: normalized family") {
  CHECK(hermite_eval(1, 0.37) == doctest::Approx(0.37));
  CHECK(hermite_eval(2, 1.0) == doctest::Approx(0.0));
  CHECK(hermite_eval(2, 2.0) == doctest::Approx(3.0 / std::sqrt(2.0)));
  CHECK(hermite_eval(3, std::sqrt(3.0)) == doctest::Approx(0.0));
  CHECK(hermite_eval(4, 1.0) == doctest::Approx(-2.0 / std::sqrt(24.0)));
  CHECK_THROWS_AS(hermite_eval(0, 1.0), std::invalid_argument);
}

TEST_CASE("hermite orthonormality under gauss-hermite quadrature") {
  std::vector<double> nodes, weights;
  gauss_hermite_points(64, nodes, weights);
  for (int i = 1; i <= 4; ++i) {
    for (int j = 1; j <= 4; ++j) {
      double inner = 0.0;
      for (std::size_t q = 0; q < nodes.size(); ++q) {
        inner += weights[q] * hermite_eval(i, nodes[q]) *
                 hermite_eval(j, nodes[q]);
      }
      CHECK(std::abs(inner - (i == j ? 1.0 : 0.0)) <= 1e-8);
    }
  }
}

TEST_CASE("gauss-hermite integrates normal moments exactly") {
  std::vector<double> nodes, weights;
  gauss_hermite_points(64, nodes, weights);
  double m0 = 0.0, m2 = 0.0, m4 = 0.0;
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    m0 += weights[q];
    m2 += weights[q] * nodes[q] * nodes[q];
    m4 += weights[q] * std::pow(nodes[q], 4);
  }
  CHECK(m0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("indicator basis: raw and mean-subtracted forms") {
  const NoiseModel two = two_point_pm1();
  CHECK(indicator_eval(0, scalar(-1.0), two) ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK(indicator_eval(0, scalar(1.0), two) == doctest::Approx(0.0));

  const NoiseModel three = NoiseModel::finite(
      {scalar(0.0), scalar(1.0), scalar(2.0)},
      Eigen::Vector3d(0.5, 0.25, 0.25));
  CHECK(indicator_eval(2, scalar(2.0), three) == doctest::Approx(2.0));
  CHECK_THROWS_AS(indicator_eval(0, scalar(9.0), three), std::invalid_argument);

  // The penalty-basis variant subtracts the mean.
  const BasisSpec spec = BasisSpec::indicator(three);
  const ZeroMeanCheck chk = basis_zero_mean_check(spec, 1000, 1);
  CHECK(chk.exact);
  CHECK(chk.pass);
}

TEST_CASE("zero-mean check: monte carlo pass and adversarial fail") {
  const NoiseModel n = NoiseModel::standard_normal(1);
  const BasisSpec taylor = BasisSpec::taylor(n, 2);
  const ZeroMeanCheck ok = basis_zero_mean_check(taylor, 100000, 7);
  CHECK(ok.pass);

  // Checking Hermite functions built for unit variance against a variance-2
  // measure leaves e_2 with mean (2-1)/sqrt(2) != 0.
  const NoiseModel wide =
      NoiseModel::gaussian_diag(Eigen::VectorXd::Constant(1, 2.0));
  const BasisSpec hermite = BasisSpec::hermite(n, 2);
  const ZeroMeanCheck bad = basis_zero_mean_check(hermite, 100000, 7, &wide);
  CHECK_FALSE(bad.pass);
  CHECK(bad.means[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.1));

  CHECK_THROWS_AS(basis_zero_mean_check(taylor, 10, 1), std::invalid_argument);
}

TEST_CASE("zero mean holds under quadrature for both scalar bases") {
  const NoiseModel n = NoiseModel::standard_normal(1);
  std::vector<double> nodes, weights;
  gauss_hermite_points(64, nodes, weights);
  for (const BasisSpec& spec :
       {BasisSpec::taylor(n, 2), BasisSpec::hermite(n, 4)}) {
    for (int i = 0; i < spec.index_count(); ++i) {
      double mean = 0.0;
      for (std::size_t q = 0; q < nodes.size(); ++q) {
        mean += weights[q] * spec.eval(i, scalar(nodes[q]));
      }
      CHECK(std::abs(mean) <= 1e-8);
    }
  }
}

TEST_CASE("taylor and hermite families agree up to normalization") {
  // For symmetric noise d_1 = e_1 and d_2 = sqrt(2) e_2 pointwise.
  const NoiseModel n = NoiseModel::standard_normal(1);
  const BasisSpec taylor = BasisSpec::taylor(n, 2);
  const BasisSpec hermite = BasisSpec::hermite(n, 2);
  for (double z = -3.0; z <= 3.0; z += 0.25) {
    const Eigen::VectorXd zv = scalar(z);
    CHECK(std::abs(taylor.eval(0, zv) - hermite.eval(0, zv)) <= 1e-12);
    CHECK(std::abs(taylor.eval(1, zv) -
                   std::sqrt(2.0) * hermite.eval(1, zv)) <= 1e-12);
  }
}

TEST_CASE("componentwise layout for multivariate noise") {
  const NoiseModel n = NoiseModel::gaussian_diag(Eigen::Vector2d(0.5, 2.0));
  const BasisSpec spec = BasisSpec::taylor(n, 2);
  CHECK(spec.index_count() == 4);
  CHECK(spec.component_of(0) == 0);
  CHECK(spec.degree_of(0) == 1);
  CHECK(spec.component_of(3) == 1);
  CHECK(spec.degree_of(3) == 2);
  Eigen::VectorXd z(2);
  z << 0.3, -0.7;
  CHECK(spec.eval(2, z) == doctest::Approx(-0.7));          // component 1, d1
  CHECK(spec.eval(3, z) == doctest::Approx(0.49 - 2.0));    // component 1, d2
  CHECK(spec.eval(1, z) == doctest::Approx(0.09 - 0.5));    // component 0, d2

  // Correlated Gaussian components are rejected for componentwise bases.
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.3, 0.3, 1.0;
  CHECK_THROWS_AS(BasisSpec::taylor(NoiseModel::gaussian(cov), 2),
                  std::invalid_argument);
}
