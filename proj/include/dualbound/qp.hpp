#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

namespace dualbound {

// Dense convex quadratic program
//   minimize   0.5 u'Pu + q'u + c0
//   subject to G u <= h,  A u = b.
struct QpProblem {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd G;  // may have zero rows
  Eigen::VectorXd h;
  Eigen::MatrixXd A;  // may have zero rows
  Eigen::VectorXd b;
  double c0 = 0.0;

  int num_vars() const { return static_cast<int>(q.size()); }
  int num_ineq() const { return static_cast<int>(h.size()); }
  int num_eq() const { return static_cast<int>(b.size()); }

  static QpProblem unconstrained(Eigen::MatrixXd P, Eigen::VectorXd q,
                                 double c0 = 0.0);
};

enum class QpStatus { optimal, infeasible, max_iterations };

struct QpSolution {
  Eigen::VectorXd u;
  Eigen::VectorXd ineq_multipliers;
  Eigen::VectorXd eq_multipliers;
  double value = 0.0;  // includes c0
  QpStatus status = QpStatus::max_iterations;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double comp_residual = 0.0;
  int iterations = 0;
};

struct QpSettings {
  double tol = 1e-8;
  int max_iter = 200;
  // Rejects P with an eigenvalue below -1e-6 * ||P||.  Callers solving many
  // problems that share one P matrix validate once and switch this off.
  bool check_convexity = true;
  // Off by default: warm starts trade run-to-run determinism for speed.
  std::optional<Eigen::VectorXd> warm_start;
};

// Primal-dual interior-point solve.  Deterministic: identical inputs produce
// identical outputs.  Detected primal infeasibility is a status, not an
// exception; inconsistent dimensions and indefinite P throw.
QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings = {});

struct KktResiduals {
  double primal = 0.0;
  double stationarity = 0.0;
  double complementarity = 0.0;
};

KktResiduals kkt_residuals(const QpProblem& problem, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& ineq_multipliers,
                           const Eigen::VectorXd& eq_multipliers);

}  // namespace dualbound
