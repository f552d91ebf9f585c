#include "dualbound/mdp.hpp"

#include <stdexcept>

#include "dualbound/parallel.hpp"
#include "dualbound/rng.hpp"

namespace dualbound {

namespace {

void validate_model(const MdpModel& model) {
  if (model.horizon < 1) {
    throw std::invalid_argument("MdpModel: horizon must be >= 1");
  }
  if (!model.transition || !model.stage_reward || !model.terminal_reward) {
    throw std::invalid_argument("MdpModel: transition/reward maps must be set");
  }
  if (model.initial_state.size() != model.state_dim) {
    throw std::invalid_argument("MdpModel: initial state has wrong dimension");
  }
}

SamplePath simulate_one(const MdpModel& model, const Policy& policy,
                        std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t index) {
  const int N = model.horizon;
  PathRng rng(seed, stream, index);

  SamplePath path;
  path.noises.reserve(N);
  path.states.reserve(N + 1);
  path.actions.reserve(N);
  path.rewards.reserve(N);

  State x = model.initial_state;
  path.states.push_back(x);
  for (int n = 0; n < N; ++n) {
    const Action a = policy.act(n, x);
    if (model.admissible) {
      if (auto violation = model.admissible(n, x, a)) {
        throw std::runtime_error("simulate_paths: inadmissible action at period " +
                                 std::to_string(n) + ": " + *violation);
      }
    }
    const Noise z = model.noise.sample(rng);
    path.rewards.push_back(model.stage_reward(n, x, a));
    x = model.transition(n, x, a, z);
    path.actions.push_back(a);
    path.noises.push_back(z);
    path.states.push_back(x);
  }
  path.terminal_reward = model.terminal_reward(x);

  path.tail_values.assign(N + 1, 0.0);
  path.tail_values[N] = path.terminal_reward;
  for (int n = N - 1; n >= 0; --n) {
    path.tail_values[n] = path.rewards[n] + path.tail_values[n + 1];
  }
  return path;
}

}  // namespace

std::vector<SamplePath> simulate_paths(const MdpModel& model,
                                       const Policy& policy, std::size_t count,
                                       std::uint64_t seed, std::uint64_t stream,
                                       int threads) {
  validate_model(model);
  if (!policy.act) {
    throw std::invalid_argument("simulate_paths: policy has no decision rule");
  }
  if (count == 0) {
    throw std::invalid_argument("simulate_paths: count must be >= 1");
  }
  std::vector<SamplePath> paths(count);
  parallel_for(count, threads, [&](std::size_t j) {
    paths[j] = simulate_one(model, policy, seed, stream, j);
  });
  return paths;
}

std::vector<double> pathwise_values(const SamplePath& path,
                                    const MdpModel& model) {
  const int N = model.horizon;
  if (static_cast<int>(path.actions.size()) != N ||
      static_cast<int>(path.states.size()) != N + 1) {
    throw std::invalid_argument("pathwise_values: path/model horizon mismatch");
  }
  std::vector<double> values(N + 1, 0.0);
  values[N] = model.terminal_reward(path.states[N]);
  for (int n = N - 1; n >= 0; --n) {
    values[n] =
        model.stage_reward(n, path.states[n], path.actions[n]) + values[n + 1];
  }
  return values;
}

BoundEstimate estimate_lower_bound(const std::vector<SamplePath>& paths,
                                   double ci_multiplier) {
  if (paths.empty()) {
    throw std::invalid_argument("estimate_lower_bound: empty path set");
  }
  std::vector<double> v0(paths.size());
  for (std::size_t j = 0; j < paths.size(); ++j) {
    v0[j] = paths[j].tail_values.front();
  }
  return estimate_mean(v0, ci_multiplier);
}

std::vector<std::vector<Noise>> simulate_noise_paths(const NoiseModel& noise,
                                                     int horizon,
                                                     std::size_t count,
                                                     std::uint64_t seed,
                                                     std::uint64_t stream) {
  if (horizon < 1) {
    throw std::invalid_argument("simulate_noise_paths: horizon must be >= 1");
  }
  if (count == 0) {
    throw std::invalid_argument("simulate_noise_paths: count must be >= 1");
  }
  std::vector<std::vector<Noise>> out(count);
  for (std::size_t j = 0; j < count; ++j) {
    PathRng rng(seed, stream, j);
    out[j].reserve(horizon);
    for (int n = 0; n < horizon; ++n) out[j].push_back(noise.sample(rng));
  }
  return out;
}

}  // namespace dualbound
