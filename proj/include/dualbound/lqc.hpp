#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dualbound/mdp.hpp"
#include "dualbound/noise.hpp"
#include "dualbound/regression.hpp"

namespace dualbound {

// Linear-quadratic control: dynamics x_{n+1} = A_n x_n + B_n a_n + z_{n+1}
// with expected cost E[ x_N' Q_N x_N + sum_n (x_n' Q_n x_n + a_n' R_n a_n) ]
// minimized over non-anticipative policies.
struct LqcProblem {
  std::vector<Eigen::MatrixXd> A, B, Q, R;  // one entry per period
  Eigen::MatrixXd QN;
  NoiseModel noise = NoiseModel::standard_normal(1);
  int horizon = 0;

  int state_dim() const { return static_cast<int>(A.front().rows()); }
  int action_dim() const { return static_cast<int>(B.front().cols()); }

  static LqcProblem time_invariant(const Eigen::MatrixXd& A,
                                   const Eigen::MatrixXd& B,
                                   const Eigen::MatrixXd& Q,
                                   const Eigen::MatrixXd& R,
                                   const Eigen::MatrixXd& QN,
                                   const NoiseModel& noise, int horizon);
};

// Backward recursion output: cost-to-go matrices K_0..K_N, gains L_0..L_{N-1}
// (optimal action a_n = L_n x_n) and the additive noise offsets so that
// V_n(x) = x' K_n x + offsets[n].
struct LqcSolution {
  std::vector<Eigen::MatrixXd> K;
  std::vector<Eigen::MatrixXd> L;
  std::vector<double> offsets;
};

// Throws when B_n' K_{n+1} B_n + R_n is singular (message names the period).
LqcSolution solve_riccati(const LqcProblem& problem);

// Optimal cost-to-go V_n(x).
double lqc_value(const LqcSolution& sol, int n, const Eigen::VectorXd& x);

// E[z' K z] under the problem's noise (exact).
double expected_quadratic(const NoiseModel& noise, const Eigen::MatrixXd& K);

// The value-based optimal dual penalty of the cost-minimization problem,
//   M* = sum_n { 2 (A_n x_n + B_n a_n)' K_{n+1} z_{n+1}
//                + z_{n+1}' K_{n+1} z_{n+1} - E[z' K_{n+1} z] },
// evaluated on one trajectory.  The reward-maximization wiring uses -M*.
double lqc_exact_penalty(const LqcProblem& problem, const LqcSolution& sol,
                         const std::vector<State>& states,
                         const std::vector<Action>& actions,
                         const std::vector<Noise>& noises);

// Penalty assembled from the Taylor coordinates of the cost-to-go around the
// predicted state: order-1 coordinates 2 K_{n+1}(A_n x + B_n a) per noise
// component, order-2 coordinates diag(K_{n+1}).  With order 2 and diagonal
// K this reproduces lqc_exact_penalty pointwise; order 1 is the first-order
// variant.  Coefficients are exact (no regression).
PenaltyModel make_lqc_taylor_penalty(const LqcProblem& problem,
                                     const LqcSolution& sol, int order);

// The reward-form MDP (rewards = negated costs) and the closed-form optimal
// policy, for plugging LQC instances into the generic bound machinery.
MdpModel lqc_as_mdp(const LqcProblem& problem, const State& initial_state);
Policy lqc_optimal_policy(const LqcSolution& sol);

}  // namespace dualbound
