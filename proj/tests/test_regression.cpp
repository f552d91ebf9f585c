#include <doctest.h>

#include <cmath>
#include <vector>

#include "dualbound/lqc.hpp"
#include "dualbound/mdp.hpp"
#include "dualbound/regression.hpp"

using namespace dualbound;

TEST_CASE("ols: intercept-only mean") {
  Eigen::MatrixXd X(2, 1);
  X << 1.0, 1.0;
  Eigen::VectorXd y(2);
  y << 2.0, 4.0;
  const OlsResult fit = ols_solve(X, y);
  CHECK(fit.coefficients[0] == doctest::Approx(3.0));
  CHECK_FALSE(fit.rank_deficient);
}

TEST_CASE("ols: exact linear recovery and residual orthogonality") {
  const int m = 200, k = 3;
  Eigen::MatrixXd X(m, k);
  Eigen::VectorXd theta(k);
  theta << 1.5, -2.0, 0.25;
  for (int i = 0; i < m; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = std::sin(0.1 * i);
    X(i, 2) = 0.01 * i * i;
  }
  const Eigen::VectorXd y = X * theta;
  const OlsResult fit = ols_solve(X, y);
  CHECK((fit.coefficients - theta).lpNorm<Eigen::Infinity>() <= 1e-10);
  const Eigen::VectorXd resid = y - X * fit.coefficients;
  const double rel = (X.transpose() * resid).lpNorm<Eigen::Infinity>() /
                     std::max(1.0, y.lpNorm<Eigen::Infinity>());
  CHECK(rel <= 1e-8);
}

TEST_CASE("ols: duplicated column gives the minimum-norm solution") {
  Eigen::MatrixXd X(4, 2);
  X << 1, 1, 2, 2, 3, 3, 4, 4;
  Eigen::VectorXd y(4);
  y << 2, 4, 6, 8;  // y = 2 * col
  const OlsResult fit = ols_solve(X, y);
  CHECK(fit.rank_deficient);
  CHECK(fit.rank == 1);
  CHECK(fit.coefficients[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fit.coefficients[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("ols: argument errors") {
  Eigen::MatrixXd X(1, 2);
  X << 1.0, 2.0;
  Eigen::VectorXd y(1);
  y << 1.0;
  CHECK_THROWS_AS(ols_solve(X, y), std::invalid_argument);
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(5, 2);
  Eigen::VectorXd y5 = Eigen::VectorXd::Ones(5);
  CHECK_THROWS_AS(ols_solve(Z, y5), std::invalid_argument);
}

TEST_CASE("ols: ridge path") {
  Eigen::MatrixXd X(3, 1);
  X << 1, 1, 1;
  Eigen::VectorXd y(3);
  y << 1, 1, 1;
  const OlsResult fit = ols_solve(X, y, 3.0);
  // (X'X + 3) theta = X'y -> theta = 3/6.
  CHECK(fit.coefficients[0] == doctest::Approx(0.5));
}

namespace {

// Hand-built paths: two periods, scalar state/action, scalar noise.
std::vector<SamplePath> crafted_paths(int count) {
  std::vector<SamplePath> paths;
  for (int j = 0; j < count; ++j) {
    SamplePath p;
    const double x0 = 0.1 * j;
    const double a0 = -0.05 * j;
    const double x1 = 0.3 * j - 1.0;
    const double a1 = 0.02 * j + 0.5;
    p.states = {Eigen::VectorXd::Constant(1, x0),
                Eigen::VectorXd::Constant(1, x1),
                Eigen::VectorXd::Constant(1, 0.0)};
    p.actions = {Eigen::VectorXd::Constant(1, a0),
                 Eigen::VectorXd::Constant(1, a1)};
    p.noises = {Eigen::VectorXd::Constant(1, 1.0),
                Eigen::VectorXd::Constant(1, 1.0)};
    p.rewards = {0.0, 0.0};
    // Tail values chosen so response = V_{n+1} * l_1(1) is exactly linear in
    // the features {1, x + a}; for unit-variance noise l_1(z) = z.
    p.tail_values = {0.0, 2.0 + 3.0 * (x0 + a0), 2.0 + 3.0 * (x1 + a1)};
    paths.push_back(std::move(p));
  }
  return paths;
}

RegressorSpec affine_xa_spec(int periods) {
  RegressorSpec reg;
  reg.periods = periods;
  reg.index_count = 1;
  reg.affine_in_action = true;
  reg.features = [](int, int, const State& x, const Action& a) {
    Eigen::VectorXd phi(2);
    phi << 1.0, x[0] + a[0];
    return phi;
  };
  return reg;
}

}  // namespace

TEST_CASE("fit_coordinates: exact linear responses are reproduced pointwise") {
  const auto paths = crafted_paths(50);
  const BasisSpec basis = BasisSpec::taylor(NoiseModel::standard_normal(1), 1);
  const PenaltyModel pm = fit_coordinates(paths, basis, affine_xa_spec(2));
  for (double x = -2.0; x <= 2.0; x += 0.5) {
    for (double a = -1.0; a <= 1.0; a += 0.5) {
      const double beta =
          pm.coordinate(0, 0, Eigen::VectorXd::Constant(1, x),
                        Eigen::VectorXd::Constant(1, a));
      CHECK(beta == doctest::Approx(2.0 + 3.0 * (x + a)).epsilon(1e-10));
    }
  }
}

TEST_CASE("fit_coordinates: intercept-only regressors give sample means") {
  const auto paths = crafted_paths(40);
  const BasisSpec basis = BasisSpec::taylor(NoiseModel::standard_normal(1), 1);
  RegressorSpec reg;
  reg.periods = 2;
  reg.index_count = 1;
  reg.features = [](int, int, const State&, const Action&) {
    return Eigen::VectorXd::Ones(1);
  };
  const PenaltyModel pm = fit_coordinates(paths, basis, reg);
  double mean = 0.0;
  for (const auto& p : paths) mean += p.tail_values[1] * p.noises[0][0];
  mean /= static_cast<double>(paths.size());
  CHECK(pm.coefficients[0][0][0] == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("fit_coordinates: deterministic across repeated calls") {
  const auto paths = crafted_paths(30);
  const BasisSpec basis = BasisSpec::taylor(NoiseModel::standard_normal(1), 1);
  const PenaltyModel a = fit_coordinates(paths, basis, affine_xa_spec(2));
  const PenaltyModel b = fit_coordinates(paths, basis, affine_xa_spec(2));
  for (int n = 0; n < 2; ++n) {
    CHECK((a.coefficients[n][0] - b.coefficients[n][0]).norm() == 0.0);
  }
}

TEST_CASE("fit_coordinates: empty feature sets declare zero coordinates") {
  const auto paths = crafted_paths(30);
  const BasisSpec basis = BasisSpec::taylor(NoiseModel::standard_normal(1), 1);
  RegressorSpec reg = affine_xa_spec(2);
  reg.features = [](int n, int, const State& x, const Action& a) {
    if (n == 1) return Eigen::VectorXd();
    Eigen::VectorXd phi(2);
    phi << 1.0, x[0] + a[0];
    return phi;
  };
  const PenaltyModel pm = fit_coordinates(paths, basis, reg);
  CHECK(pm.coefficients[1][0].size() == 0);
  CHECK(pm.coordinate(1, 0, paths[0].states[1], paths[0].actions[1]) == 0.0);
}

TEST_CASE("fitted coordinates match closed-form linear-policy values") {
  // Scalar controlled walk under the linear rule a = c x.  The policy value
  // function is quadratic, K~_n = Q + c^2 R + K~_{n+1} (A + B c)^2, so the
  // first-order coordinate at (x, a) is 2 K~_{n+1} (A x + B a) and the
  // second-order one is K~_{n+1}; both are recovered by regression on the
  // reused paths within a few regression standard errors.
  const double A = 1.0, B = 1.0, Q = 1.0, R = 1.0, c = -0.3;
  const int N = 3;
  const std::size_t M = 60000;

  std::vector<double> Ktilde(N + 1, 0.0);
  Ktilde[N] = Q;  // terminal cost x'Qx
  for (int n = N - 1; n >= 0; --n) {
    Ktilde[n] = Q + c * c * R + Ktilde[n + 1] * (A + B * c) * (A + B * c);
  }

  MdpModel m;
  m.horizon = N;
  m.state_dim = 1;
  m.action_dim = 1;
  m.noise = NoiseModel::standard_normal(1);
  m.initial_state = Eigen::VectorXd::Constant(1, 1.0);
  m.transition = [=](int, const State& x, const Action& a, const Noise& z) {
    return State(A * x + B * a + z);
  };
  m.stage_reward = [=](int, const State& x, const Action& a) {
    return -(Q * x[0] * x[0] + R * a[0] * a[0]);
  };
  m.terminal_reward = [=](const State& x) { return -Q * x[0] * x[0]; };
  Policy policy;
  policy.act = [=](int, const State& x) {
    return Action(Eigen::VectorXd::Constant(1, c * x[0]));
  };

  const auto paths = simulate_paths(m, policy, M, 314, 0, 4);
  const BasisSpec basis = BasisSpec::taylor(m.noise, 2);
  RegressorSpec reg;
  reg.periods = N;
  reg.index_count = 2;
  reg.affine_in_action = true;
  reg.features = [](int, int i, const State& x, const Action& a) {
    Eigen::VectorXd phi(2);
    phi << 1.0, (i == 0 ? x[0] + a[0] : 1.0);
    return i == 0 ? phi : Eigen::VectorXd::Ones(1);
  };
  const PenaltyModel pm = fit_coordinates(paths, basis, reg);

  // Rebuild the regression standard errors for the slope at n = 0.
  for (int n = 0; n < N; ++n) {
    Eigen::MatrixXd X(M, 2);
    Eigen::VectorXd y(M);
    for (std::size_t j = 0; j < M; ++j) {
      const double xa = paths[j].states[n][0] + paths[j].actions[n][0];
      X(j, 0) = 1.0;
      X(j, 1) = xa;
      // Reward form flips the sign of the cost-to-go, so the fitted
      // first-order coordinate is -2 K~ (A x + B a).
      y[j] = paths[j].tail_values[n + 1] *
             basis.response_weight(0, paths[j].noises[n]);
    }
    const Eigen::VectorXd theta = pm.coefficients[n][0];
    const Eigen::VectorXd resid = y - X * theta;
    const double sigma2 = resid.squaredNorm() / (M - 2);
    const Eigen::MatrixXd cov =
        sigma2 * (X.transpose() * X).inverse();
    // With A = B = 1 the coordinate is exactly -2 K~_{n+1} (x + a).
    const double slope_true = -2.0 * Ktilde[n + 1];
    CHECK(std::abs(theta[1] - slope_true) <= 3.0 * std::sqrt(cov(1, 1)));
    CHECK(std::abs(theta[0]) <= 3.0 * std::sqrt(cov(0, 0)));

    // Second-order coordinate: constant -K~_{n+1}.
    const Eigen::VectorXd theta2 = pm.coefficients[n][1];
    Eigen::VectorXd y2(M);
    for (std::size_t j = 0; j < M; ++j) {
      y2[j] = paths[j].tail_values[n + 1] *
              basis.response_weight(1, paths[j].noises[n]);
    }
    const double se2 =
        std::sqrt((y2.array() - y2.mean()).square().sum() / (M - 1) / M);
    CHECK(std::abs(theta2[0] - (-Ktilde[n + 1])) <= 3.0 * se2);
  }
}
