#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dualbound/noise.hpp"
#include "dualbound/stats.hpp"

namespace dualbound {

using State = Eigen::VectorXd;
using Action = Eigen::VectorXd;
using Noise = Eigen::VectorXd;

// Finite-horizon Markov decision process with deterministic transition
// x_{n+1} = f(x_n, a_n, z_{n+1}) and additive rewards
// r_0 + ... + r_{N-1} + r_N, maximized over non-anticipative policies.
struct MdpModel {
  int horizon = 0;  // N >= 1
  int state_dim = 0;
  int action_dim = 0;
  NoiseModel noise = NoiseModel::standard_normal(1);
  State initial_state;

  std::function<State(int n, const State& x, const Action& a, const Noise& z)>
      transition;
  std::function<double(int n, const State& x, const Action& a)> stage_reward;
  std::function<double(const State& x)> terminal_reward;

  // Admissibility description: returns the violated constraint as text, or
  // nullopt when the action is admissible at (n, x).  Unset means
  // unconstrained.
  std::function<std::optional<std::string>(int n, const State& x,
                                           const Action& a)>
      admissible;
};

// A sequence of decision rules a_n = act(n, x_n).  The flag records whether
// the rules use only period-n information; feasibility arguments require it.
struct Policy {
  std::function<Action(int n, const State& x)> act;
  bool non_anticipative = true;
};

// One simulated trajectory with everything the regression stage reuses:
// noises z_1..z_N, states x_0..x_N, actions a_0..a_{N-1}, stage rewards, and
// tail values V_n = sum_{k>=n} r_k + r_N.
struct SamplePath {
  std::vector<Noise> noises;
  std::vector<State> states;
  std::vector<Action> actions;
  std::vector<double> rewards;
  double terminal_reward = 0.0;
  std::vector<double> tail_values;
};

// Simulates `count` independent paths under the policy.  Path j is a pure
// function of (seed, stream, j): rerunning with any thread count reproduces
// the same paths bit for bit.  Throws if the policy emits an inadmissible
// action (the error names the period and constraint).
std::vector<SamplePath> simulate_paths(const MdpModel& model,
                                       const Policy& policy,
                                       std::size_t count, std::uint64_t seed,
                                       std::uint64_t stream = 0,
                                       int threads = 1);

// Recomputes the tail values V_0..V_N of a recorded path from the model's
// rewards (the simulated path already carries them; this is the audit route).
std::vector<double> pathwise_values(const SamplePath& path,
                                    const MdpModel& model);

// Mean of V_0 over paths with a CI half-width (default multiplier 1.96).
BoundEstimate estimate_lower_bound(const std::vector<SamplePath>& paths,
                                   double ci_multiplier = 1.96);

// Simulates the noise sequences alone (z_1..z_N per path); used for dual
// (upper bound) paths where actions come from the inner optimizer.
std::vector<std::vector<Noise>> simulate_noise_paths(const NoiseModel& noise,
                                                     int horizon,
                                                     std::size_t count,
                                                     std::uint64_t seed,
                                                     std::uint64_t stream);

}  // namespace dualbound
