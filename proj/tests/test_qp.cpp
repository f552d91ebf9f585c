#include <doctest.h>

#include <cmath>

#include "dualbound/qp.hpp"
#include "dualbound/rng.hpp"

using namespace dualbound;

namespace {

QpProblem box_problem(const Eigen::MatrixXd& P, const Eigen::VectorXd& q,
                      const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  const int n = static_cast<int>(q.size());
  QpProblem p = QpProblem::unconstrained(P, q);
  p.G.resize(2 * n, n);
  p.h.resize(2 * n);
  p.G.topRows(n) = Eigen::MatrixXd::Identity(n, n);
  p.h.head(n) = hi;
  p.G.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
  p.h.tail(n) = -lo;
  return p;
}

// Coarse grid minimization over a box, refined twice around the incumbent.
void grid_search(const QpProblem& p, const Eigen::VectorXd& lo,
                 const Eigen::VectorXd& hi, Eigen::Vector2d& best_u,
                 double& best_v) {
  Eigen::Vector2d a = lo, b = hi;
  best_v = std::numeric_limits<double>::infinity();
  for (int round = 0; round < 3; ++round) {
    const int steps = 200;
    Eigen::Vector2d local_best = best_u;
    for (int i = 0; i <= steps; ++i) {
      for (int j = 0; j <= steps; ++j) {
        Eigen::Vector2d u;
        u[0] = a[0] + (b[0] - a[0]) * i / steps;
        u[1] = a[1] + (b[1] - a[1]) * j / steps;
        const double v = 0.5 * u.dot(p.P * u) + p.q.dot(u);
        if (v < best_v) {
          best_v = v;
          local_best = u;
        }
      }
    }
    best_u = local_best;
    const Eigen::Vector2d width = 2.0 * (b - a) / 200;
    a = best_u - width;
    b = best_u + width;
    for (int k = 0; k < 2; ++k) {
      a[k] = std::max(a[k], lo[k]);
      b[k] = std::min(b[k], hi[k]);
    }
  }
}

}  // namespace

TEST_CASE("single active constraint") {
  // min u^2 s.t. u >= 1.
  QpProblem p = QpProblem::unconstrained(Eigen::MatrixXd::Constant(1, 1, 2.0),
                                         Eigen::VectorXd::Zero(1));
  p.G = Eigen::MatrixXd::Constant(1, 1, -1.0);
  p.h = Eigen::VectorXd::Constant(1, -1.0);
  const QpSolution s = solve_qp(p);
  CHECK(s.status == QpStatus::optimal);
  CHECK(s.u[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(s.value == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("unconstrained stationarity") {
  // min 0.5 u^2 - u.
  const QpSolution s =
      solve_qp(QpProblem::unconstrained(Eigen::MatrixXd::Identity(1, 1),
                                        Eigen::VectorXd::Constant(1, -1.0)));
  CHECK(s.status == QpStatus::optimal);
  CHECK(s.u[0] == doctest::Approx(1.0));
  CHECK(s.value == doctest::Approx(-0.5));
}

TEST_CASE("contradictory bounds are reported infeasible") {
  // u <= 0 and u >= 1.
  QpProblem p = QpProblem::unconstrained(Eigen::MatrixXd::Identity(1, 1),
                                         Eigen::VectorXd::Zero(1));
  p.G.resize(2, 1);
  p.G << 1.0, -1.0;
  p.h.resize(2);
  p.h << 0.0, -1.0;
  const QpSolution s = solve_qp(p);
  CHECK(s.status == QpStatus::infeasible);
}

TEST_CASE("equality-constrained solve") {
  QpProblem p = QpProblem::unconstrained(Eigen::MatrixXd::Identity(1, 1),
                                         Eigen::VectorXd::Zero(1));
  p.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
  p.b = Eigen::VectorXd::Constant(1, 3.0);
  const QpSolution s = solve_qp(p);
  CHECK(s.status == QpStatus::optimal);
  CHECK(s.u[0] == doctest::Approx(3.0));
  CHECK(s.value == doctest::Approx(4.5));
}

TEST_CASE("kkt residuals") {
  // min (u-1)^2 = u^2 - 2u + 1 (offset outside): optimizer u = 1.
  QpProblem p = QpProblem::unconstrained(
      Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Constant(1, -2.0));
  const Eigen::VectorXd none;
  KktResiduals r = kkt_residuals(p, Eigen::VectorXd::Constant(1, 1.0), none, none);
  CHECK(r.primal <= 1e-12);
  CHECK(r.stationarity <= 1e-12);
  CHECK(r.complementarity <= 1e-12);

  r = kkt_residuals(p, Eigen::VectorXd::Constant(1, 1.1), none, none);
  CHECK(r.stationarity >= 0.05);

  QpProblem zero = QpProblem::unconstrained(Eigen::MatrixXd::Zero(1, 1),
                                            Eigen::VectorXd::Zero(1));
  r = kkt_residuals(zero, Eigen::VectorXd::Zero(1), none, none);
  CHECK(r.primal == 0.0);
  CHECK(r.stationarity == 0.0);
  CHECK(r.complementarity == 0.0);
}

TEST_CASE("random box-constrained problems satisfy the kkt system") {
  PathRng rng(99, 3, 0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform01() * 8.999);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) M(i, j) = rng.normal();
    }
    const Eigen::MatrixXd P =
        M.transpose() * M + 0.1 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd q(n), lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      q[i] = 2.0 * rng.normal();
      lo[i] = -0.5 - rng.uniform01();
      hi[i] = 0.5 + rng.uniform01();
    }
    const QpProblem p = box_problem(P, q, lo, hi);
    const QpSolution s = solve_qp(p);
    REQUIRE(s.status == QpStatus::optimal);
    const KktResiduals r =
        kkt_residuals(p, s.u, s.ineq_multipliers, s.eq_multipliers);
    CHECK(r.primal <= 1e-8);
    CHECK(r.stationarity <= 1e-8);
    CHECK(r.complementarity <= 1e-8);
  }
}

TEST_CASE("grid-search oracle agreement on 2-variable boxes") {
  PathRng rng(123, 3, 1);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd M(2, 2);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) M(i, j) = rng.normal();
    }
    const Eigen::MatrixXd P =
        M.transpose() * M + 0.2 * Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd q(2);
    q << rng.normal(), rng.normal();
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -1.0);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, 1.0);
    const QpProblem p = box_problem(P, q, lo, hi);

    const QpSolution s = solve_qp(p);
    REQUIRE(s.status == QpStatus::optimal);
    Eigen::Vector2d gu = Eigen::Vector2d::Zero();
    double gv = 0.0;
    grid_search(p, lo, hi, gu, gv);
    CHECK((s.u - gu).lpNorm<Eigen::Infinity>() <= 1e-4);
    CHECK(std::abs(s.value - gv) <= 1e-6);
  }
}

TEST_CASE("tightening an active constraint never improves the minimum") {
  // min 0.5u'u + q'u s.t. u <= h; tighten the active row.
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd q(2);
  q << -2.0, -2.0;
  QpProblem p = QpProblem::unconstrained(P, q);
  p.G = Eigen::MatrixXd::Identity(2, 2);
  p.h = Eigen::VectorXd::Constant(2, 1.0);  // active: unconstrained opt is 2
  const double v0 = solve_qp(p).value;
  p.h[0] -= 0.25;
  const double v1 = solve_qp(p).value;
  CHECK(v1 >= v0 - 1e-9);
}

TEST_CASE("indefinite quadratic terms are rejected") {
  Eigen::MatrixXd P(2, 2);
  P << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(solve_qp(QpProblem::unconstrained(P, Eigen::VectorXd::Zero(2))),
                  std::invalid_argument);
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(
      solve_qp(QpProblem::unconstrained(asym, Eigen::VectorXd::Zero(2))),
      std::invalid_argument);
}

TEST_CASE("identical inputs produce identical outputs") {
  PathRng rng(5, 3, 2);
  Eigen::MatrixXd M(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) M(i, j) = rng.normal();
  }
  const Eigen::MatrixXd P = M.transpose() * M;
  Eigen::VectorXd q(3);
  q << 1.0, -2.0, 0.5;
  const QpProblem p = box_problem(P, q, Eigen::VectorXd::Constant(3, -2.0),
                                  Eigen::VectorXd::Constant(3, 2.0));
  const QpSolution a = solve_qp(p);
  const QpSolution b = solve_qp(p);
  CHECK(a.value == b.value);
  CHECK((a.u - b.u).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(a.iterations == b.iterations);
}
