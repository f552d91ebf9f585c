#include "dualbound/lqc.hpp"

#include <stdexcept>
#include <string>

namespace dualbound {

LqcProblem LqcProblem::time_invariant(const Eigen::MatrixXd& A,
                                      const Eigen::MatrixXd& B,
                                      const Eigen::MatrixXd& Q,
                                      const Eigen::MatrixXd& R,
                                      const Eigen::MatrixXd& QN,
                                      const NoiseModel& noise, int horizon) {
  LqcProblem p;
  p.A.assign(horizon, A);
  p.B.assign(horizon, B);
  p.Q.assign(horizon, Q);
  p.R.assign(horizon, R);
  p.QN = QN;
  p.noise = noise;
  p.horizon = horizon;
  return p;
}

double expected_quadratic(const NoiseModel& noise, const Eigen::MatrixXd& K) {
  if (noise.is_finite()) {
    double v = 0.0;
    const auto& atoms = noise.atoms();
    const auto& probs = noise.probabilities();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      v += probs[static_cast<Eigen::Index>(i)] *
           atoms[i].dot(K * atoms[i]);
    }
    return v;
  }
  return (noise.covariance() * K).trace();
}

LqcSolution solve_riccati(const LqcProblem& problem) {
  const int N = problem.horizon;
  if (N < 1 || static_cast<int>(problem.A.size()) != N) {
    throw std::invalid_argument("solve_riccati: malformed horizon/matrices");
  }
  LqcSolution sol;
  sol.K.assign(N + 1, Eigen::MatrixXd());
  sol.L.assign(N, Eigen::MatrixXd());
  sol.offsets.assign(N + 1, 0.0);

  sol.K[N] = problem.QN;
  for (int n = N - 1; n >= 0; --n) {
    const Eigen::MatrixXd& A = problem.A[n];
    const Eigen::MatrixXd& B = problem.B[n];
    const Eigen::MatrixXd& Kn1 = sol.K[n + 1];
    const Eigen::MatrixXd S = B.transpose() * Kn1 * B + problem.R[n];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
    if (!lu.isInvertible()) {
      throw std::runtime_error(
          "solve_riccati: B'K B + R is singular at period " +
          std::to_string(n));
    }
    const Eigen::MatrixXd Sinv = lu.inverse();
    sol.L[n] = -Sinv * B.transpose() * Kn1 * A;
    Eigen::MatrixXd K =
        A.transpose() * (Kn1 - Kn1 * B * Sinv * B.transpose() * Kn1) * A +
        problem.Q[n];
    sol.K[n] = 0.5 * (K + K.transpose());  // keep exactly symmetric
  }
  for (int n = N - 1; n >= 0; --n) {
    sol.offsets[n] = sol.offsets[n + 1] +
                     expected_quadratic(problem.noise, sol.K[n + 1]);
  }
  return sol;
}

double lqc_value(const LqcSolution& sol, int n, const Eigen::VectorXd& x) {
  return x.dot(sol.K.at(n) * x) + sol.offsets.at(n);
}

double lqc_exact_penalty(const LqcProblem& problem, const LqcSolution& sol,
                         const std::vector<State>& states,
                         const std::vector<Action>& actions,
                         const std::vector<Noise>& noises) {
  const int N = problem.horizon;
  if (static_cast<int>(actions.size()) != N ||
      static_cast<int>(noises.size()) != N ||
      static_cast<int>(states.size()) < N) {
    throw std::invalid_argument("lqc_exact_penalty: trajectory length mismatch");
  }
  double penalty = 0.0;
  for (int n = 0; n < N; ++n) {
    const Eigen::MatrixXd& Kn1 = sol.K[n + 1];
    const Eigen::VectorXd xhat =
        problem.A[n] * states[n] + problem.B[n] * actions[n];
    penalty += 2.0 * xhat.dot(Kn1 * noises[n]) +
               noises[n].dot(Kn1 * noises[n]) -
               expected_quadratic(problem.noise, Kn1);
  }
  return penalty;
}

PenaltyModel make_lqc_taylor_penalty(const LqcProblem& problem,
                                     const LqcSolution& sol, int order) {
  if (order != 1 && order != 2) {
    throw std::invalid_argument("make_lqc_taylor_penalty: order must be 1 or 2");
  }
  const int N = problem.horizon;
  const int d = problem.noise.dim();
  const BasisSpec basis = BasisSpec::taylor(problem.noise, order);

  // Copies of what the evaluators need; the spec object must own its data.
  auto A = problem.A;
  auto B = problem.B;
  auto K = sol.K;

  RegressorSpec reg;
  reg.periods = N;
  reg.index_count = basis.index_count();
  reg.affine_in_action = true;
  reg.features = [A, B, K, order](int n, int i, const State& x,
                                  const Action& a) -> Eigen::VectorXd {
    const int k = i / order;
    const int r = i % order + 1;
    Eigen::VectorXd phi(1);
    if (r == 1) {
      const Eigen::VectorXd xhat = A[n] * x + B[n] * a;
      phi[0] = 2.0 * (K[n + 1].row(k) * xhat)(0);
    } else {
      phi[0] = K[n + 1](k, k);
    }
    return phi;
  };
  reg.control_variate = [order](int /*n*/, int i) {
    return i % order + 1 == 2;
  };

  PenaltyModel pm{basis, reg, {}, {}};
  pm.coefficients.assign(
      N, std::vector<Eigen::VectorXd>(static_cast<std::size_t>(d * order),
                                      Eigen::VectorXd::Ones(1)));
  return pm;
}

MdpModel lqc_as_mdp(const LqcProblem& problem, const State& initial_state) {
  MdpModel m;
  m.horizon = problem.horizon;
  m.state_dim = problem.state_dim();
  m.action_dim = problem.action_dim();
  m.noise = problem.noise;
  m.initial_state = initial_state;
  auto A = problem.A;
  auto B = problem.B;
  auto Q = problem.Q;
  auto R = problem.R;
  auto QN = problem.QN;
  m.transition = [A, B](int n, const State& x, const Action& a,
                        const Noise& z) -> State {
    return A[n] * x + B[n] * a + z;
  };
  m.stage_reward = [Q, R](int n, const State& x, const Action& a) {
    return -(x.dot(Q[n] * x) + a.dot(R[n] * a));
  };
  m.terminal_reward = [QN](const State& x) { return -x.dot(QN * x); };
  return m;
}

Policy lqc_optimal_policy(const LqcSolution& sol) {
  Policy p;
  auto L = sol.L;
  p.act = [L](int n, const State& x) -> Action { return L.at(n) * x; };
  p.non_anticipative = true;
  return p;
}

}  // namespace dualbound
