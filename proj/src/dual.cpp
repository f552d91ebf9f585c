#include "dualbound/dual.hpp"

#include <cmath>
#include <stdexcept>

#include "dualbound/parallel.hpp"
#include "dualbound/rng.hpp"

namespace dualbound {

namespace {

// x_n = base[n] + coef[n] * u for the stacked decision vector u; the states
// at which penalty coordinates are evaluated.
struct AffineTrajectoryMap {
  std::vector<Eigen::VectorXd> base;
  std::vector<Eigen::MatrixXd> coef;
};

void check_penalty_affine(const PenaltyModel& pm, int state_dim,
                          int action_dim) {
  if (!pm.regressors.affine_in_action) {
    throw std::invalid_argument(
        "inner problem: penalty regressors are not declared affine in the "
        "action; convexity of the inner problems requires affine regressors");
  }
  // Midpoint test on every coordinate: exact for affine maps.
  const State sa = State::Zero(state_dim);
  State sb = State::Ones(state_dim);
  const Action aa = Action::Zero(action_dim);
  Action ab = -Action::Ones(action_dim);
  for (int n = 0; n < pm.periods(); ++n) {
    for (int i = 0; i < pm.index_count(); ++i) {
      if (pm.coefficients[n][i].size() == 0) continue;
      const double ca = pm.coordinate(n, i, sa, aa);
      const double cb = pm.coordinate(n, i, sb, ab);
      const double cm = pm.coordinate(n, i, 0.5 * (sa + sb), 0.5 * (aa + ab));
      const double scale = std::abs(ca) + std::abs(cb) + 1.0;
      if (std::abs(cm - 0.5 * (ca + cb)) > 1e-8 * scale) {
        throw std::invalid_argument(
            "inner problem: penalty coordinate (n=" + std::to_string(n) +
            ", i=" + std::to_string(i) +
            ") is not affine in (state, action); use affine regressors");
      }
    }
  }
}

// Adds sign * M(a, z) for the fitted penalty to the inner objective pieces.
// Coordinates flagged as control variates are constants per path and
// accumulate separately.
void accumulate_affine_penalty(const PenaltyModel& pm, double sign,
                               const std::vector<Noise>& z_path,
                               const AffineTrajectoryMap& map, int action_dim,
                               Eigen::VectorXd& q, double& c0, double& cv) {
  const int N = pm.periods();
  const State zero_state = State::Zero(map.base[0].size());
  const Action zero_action = Action::Zero(action_dim);
  State probe_state = zero_state;
  Action probe_action = zero_action;

  for (int n = 0; n < N; ++n) {
    for (int i = 0; i < pm.index_count(); ++i) {
      if (pm.coefficients[n][i].size() == 0) continue;
      const double b = pm.basis.eval(i, z_path[n]);
      if (b == 0.0) continue;
      if (pm.regressors.is_control_variate(n, i)) {
        cv += sign * b * pm.coordinate(n, i, zero_state, zero_action);
        continue;
      }
      const double c00 = pm.coordinate(n, i, zero_state, zero_action);
      const int sd = static_cast<int>(map.base[n].size());
      Eigen::VectorXd gs(sd);
      for (int k = 0; k < sd; ++k) {
        probe_state[k] = 1.0;
        gs[k] = pm.coordinate(n, i, probe_state, zero_action) - c00;
        probe_state[k] = 0.0;
      }
      Eigen::VectorXd ga(action_dim);
      for (int k = 0; k < action_dim; ++k) {
        probe_action[k] = 1.0;
        ga[k] = pm.coordinate(n, i, zero_state, probe_action) - c00;
        probe_action[k] = 0.0;
      }
      const double w = sign * b;
      c0 += w * (c00 + gs.dot(map.base[n]));
      q += w * (map.coef[n].transpose() * gs);
      q.segment(n * action_dim, action_dim) += w * ga;
    }
  }
}

void check_convex_base(const Eigen::MatrixXd& P, const char* where) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P, Eigen::EigenvaluesOnly);
  const double max_abs = es.eigenvalues().cwiseAbs().maxCoeff();
  if (es.eigenvalues().minCoeff() < -1e-6 * std::max(1e-30, max_abs)) {
    throw std::invalid_argument(std::string(where) +
                                ": assembled quadratic term is indefinite");
  }
}

}  // namespace

double penalty_evaluate(const PenaltyModel& pm, const std::vector<State>& states,
                        const std::vector<Action>& actions,
                        const std::vector<Noise>& noises) {
  const int N = pm.periods();
  if (static_cast<int>(actions.size()) < N ||
      static_cast<int>(noises.size()) < N ||
      static_cast<int>(states.size()) < N) {
    throw std::invalid_argument("penalty_evaluate: trajectory too short");
  }
  double value = 0.0;
  for (int n = 0; n < N; ++n) {
    for (int i = 0; i < pm.index_count(); ++i) {
      if (pm.coefficients[n][i].size() == 0) continue;
      const double b = pm.basis.eval(i, noises[n]);
      if (b == 0.0) continue;
      value += pm.coordinate(n, i, states[n], actions[n]) * b;
    }
  }
  return value;
}

double penalty_evaluate(const PenaltyModel& pm, const SamplePath& path) {
  return penalty_evaluate(pm, path.states, path.actions, path.noises);
}

TrajectoryFunctional as_trajectory_functional(const PenaltyModel& pm) {
  return [pm](const std::vector<State>& states,
              const std::vector<Action>& actions,
              const std::vector<Noise>& noises) {
    return penalty_evaluate(pm, states, actions, noises);
  };
}

FeasibilityCheck check_feasibility(const TrajectoryFunctional& penalty,
                                   const Policy& policy, const MdpModel& model,
                                   std::size_t count, std::uint64_t seed) {
  if (!policy.non_anticipative) {
    throw std::invalid_argument(
        "check_feasibility: the zero-mean property is only guaranteed for "
        "non-anticipative policies");
  }
  FeasibilityCheck out;

  if (model.noise.is_finite()) {
    const std::size_t atoms = model.noise.atoms().size();
    double sequences = 1.0;
    for (int n = 0; n < model.horizon; ++n) sequences *= static_cast<double>(atoms);
    if (sequences <= 131072.0) {
      // Exact expectation by enumerating every noise sequence.
      const int N = model.horizon;
      std::vector<std::size_t> idx(N, 0);
      double mean = 0.0;
      std::size_t leaves = 0;
      while (true) {
        std::vector<State> states{model.initial_state};
        std::vector<Action> actions;
        std::vector<Noise> noises;
        double prob = 1.0;
        for (int n = 0; n < N; ++n) {
          const Action a = policy.act(n, states.back());
          const Noise& z = model.noise.atoms()[idx[n]];
          prob *= model.noise.probabilities()[static_cast<Eigen::Index>(idx[n])];
          actions.push_back(a);
          noises.push_back(z);
          states.push_back(model.transition(n, states.back(), a, z));
        }
        mean += prob * penalty(states, actions, noises);
        ++leaves;
        int pos = N - 1;
        while (pos >= 0 && ++idx[pos] == atoms) idx[pos--] = 0;
        if (pos < 0) break;
      }
      out.mean = mean;
      out.exact = true;
      out.paths = leaves;
      out.pass = std::abs(mean) <= 1e-10;
      return out;
    }
  }

  if (count < 1000) {
    throw std::invalid_argument("check_feasibility: need at least 1e3 paths");
  }
  const auto paths = simulate_paths(model, policy, count, seed,
                                    streams::kFeasibility);
  std::vector<double> values(paths.size());
  for (std::size_t j = 0; j < paths.size(); ++j) {
    values[j] = penalty(paths[j].states, paths[j].actions, paths[j].noises);
  }
  const BoundEstimate est = estimate_mean(values, 1.0);
  out.mean = est.mean;
  out.std_error = est.std_error;
  out.paths = count;
  out.pass = std::abs(est.mean) <= 4.0 * est.std_error;
  return out;
}

FeasibilityCheck check_feasibility(const PenaltyModel& pm, const Policy& policy,
                                   const MdpModel& model, std::size_t count,
                                   std::uint64_t seed) {
  return check_feasibility(as_trajectory_functional(pm), policy, model, count,
                           seed);
}

double inner_value(const InnerProblem& problem, const QpSolution& sol) {
  return -sol.value - problem.control_variate;
}

TradingInnerBuilder::TradingInnerBuilder(TradingModel model,
                                         std::optional<PenaltyModel> penalty,
                                         bool with_constraints)
    : model_(std::move(model)), penalty_(std::move(penalty)) {
  const int D = model_.D;
  const int T = model_.T;
  const int n = D * T;

  base_.P = Eigen::MatrixXd::Zero(n, n);
  for (int t = 0; t < T; ++t) {
    base_.P.block(t * D, t * D, D, D) = model_.Lambda;
  }
  q_risk_ = Eigen::VectorXd::Zero(n);
  c_risk_ = 0.0;
  if (model_.gamma_risk != 0.0) {
    for (int t1 = 0; t1 < T; ++t1) {
      for (int t2 = 0; t2 < T; ++t2) {
        base_.P.block(t1 * D, t2 * D, D, D) +=
            model_.gamma_risk * static_cast<double>(T - std::max(t1, t2)) *
            model_.Sigma;
      }
      q_risk_.segment(t1 * D, D) = model_.gamma_risk *
                                   static_cast<double>(T - t1) *
                                   (model_.Sigma * model_.x0);
    }
    c_risk_ = 0.5 * model_.gamma_risk * static_cast<double>(T) *
              model_.x0.dot(model_.Sigma * model_.x0);
  }
  check_convex_base(base_.P, "TradingInnerBuilder");

  if (with_constraints) {
    base_.G = Eigen::MatrixXd::Zero(2 * n, n);
    base_.h = Eigen::VectorXd::Zero(2 * n);
    base_.G.topLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    for (int t = 0; t < T; ++t) {
      for (int s = 0; s <= t; ++s) {
        base_.G.block(n + t * D, s * D, D, D) =
            -Eigen::MatrixXd::Identity(D, D);
      }
      base_.h.segment(n + t * D, D) = model_.x0;
    }
    base_.A = Eigen::MatrixXd::Zero(D, n);
    for (int t = 0; t < T; ++t) {
      base_.A.block(0, t * D, D, D) = Eigen::MatrixXd::Identity(D, D);
    }
    base_.b = -model_.x0;
  } else {
    base_.G.resize(0, n);
    base_.h.resize(0);
    base_.A.resize(0, n);
    base_.b.resize(0);
  }

  if (penalty_) {
    if (penalty_->periods() != T) {
      throw std::invalid_argument(
          "TradingInnerBuilder: penalty horizon does not match the model");
    }
    check_penalty_affine(*penalty_, D + model_.K, D);
  }
}

std::vector<Eigen::VectorXd> TradingInnerBuilder::factor_path(
    const std::vector<Noise>& z_path) const {
  const int T = model_.T;
  if (static_cast<int>(z_path.size()) < T - 1) {
    throw std::invalid_argument("TradingInnerBuilder: noise path too short");
  }
  const Eigen::MatrixXd IPhi =
      Eigen::MatrixXd::Identity(model_.K, model_.K) - model_.Phi;
  std::vector<Eigen::VectorXd> f(T);
  f[0] = model_.f1;
  for (int t = 1; t < T; ++t) f[t] = IPhi * f[t - 1] + z_path[t - 1];
  return f;
}

InnerProblem TradingInnerBuilder::build(
    const std::vector<Noise>& z_path) const {
  const int D = model_.D;
  const int T = model_.T;
  const int n = D * T;

  InnerProblem ip;
  ip.qp = base_;
  ip.qp.q = q_risk_;
  ip.qp.c0 = c_risk_;
  ip.control_variate = 0.0;

  const std::vector<Eigen::VectorXd> f = factor_path(z_path);
  // Suffix sums turn sum_t x_t'B f_t into per-trade linear coefficients.
  Eigen::VectorXd suffix = Eigen::VectorXd::Zero(model_.K);
  std::vector<Eigen::VectorXd> w(T);
  for (int t = T - 1; t >= 0; --t) {
    suffix += f[t];
    w[t] = model_.B * suffix;
  }
  for (int t = 0; t < T; ++t) ip.qp.q.segment(t * D, D) -= w[t];
  ip.qp.c0 -= model_.x0.dot(w[0]);

  if (penalty_) {
    AffineTrajectoryMap map;
    map.base.resize(T);
    map.coef.resize(T);
    const int sd = D + model_.K;
    for (int t = 0; t < T; ++t) {
      map.base[t] = Eigen::VectorXd::Zero(sd);
      map.base[t].head(D) = model_.x0;
      map.base[t].tail(model_.K) = f[t];
      map.coef[t] = Eigen::MatrixXd::Zero(sd, n);
      for (int s = 0; s < t; ++s) {
        map.coef[t].block(0, s * D, D, D) = Eigen::MatrixXd::Identity(D, D);
      }
    }
    accumulate_affine_penalty(*penalty_, +1.0, z_path, map, D, ip.qp.q,
                              ip.qp.c0, ip.control_variate);
  }
  return ip;
}

InnerProblem build_inner_problem(const TradingModel& model,
                                 const std::vector<Noise>& z_path,
                                 const PenaltyModel* penalty,
                                 bool with_constraints) {
  TradingInnerBuilder builder(
      model, penalty ? std::optional<PenaltyModel>(*penalty) : std::nullopt,
      with_constraints);
  return builder.build(z_path);
}

namespace {

UpperBoundResult run_upper_bound(
    const std::function<InnerProblem(std::size_t)>& make_problem,
    std::size_t count, const QpSettings& settings, int threads,
    double ci_multiplier) {
  UpperBoundResult result;
  result.values.assign(count, 0.0);
  result.statuses.assign(count, QpStatus::max_iterations);

  QpSettings per_path = settings;
  per_path.check_convexity = false;  // validated once at builder construction

  parallel_for(count, threads, [&](std::size_t j) {
    const InnerProblem ip = make_problem(j);
    const QpSolution sol = solve_qp(ip.qp, per_path);
    result.statuses[j] = sol.status;
    if (sol.status == QpStatus::infeasible) {
      throw std::runtime_error(
          "estimate_upper_bound: inner problem infeasible at path " +
          std::to_string(j) +
          " (the trading constraint set is never empty, so this indicates a "
          "construction bug)");
    }
    result.values[j] = inner_value(ip, sol);
  });

  for (const QpStatus s : result.statuses) {
    if (s != QpStatus::optimal) ++result.non_optimal;
  }
  result.estimate = estimate_mean(result.values, ci_multiplier);
  return result;
}

}  // namespace

UpperBoundResult estimate_upper_bound(
    const TradingModel& model, const PenaltyModel* penalty,
    const std::vector<std::vector<Noise>>& noise_paths,
    const QpSettings& settings, int threads, double ci_multiplier) {
  if (noise_paths.size() < 2) {
    throw std::invalid_argument("estimate_upper_bound: need at least 2 paths");
  }
  TradingInnerBuilder builder(
      model, penalty ? std::optional<PenaltyModel>(*penalty) : std::nullopt);
  return run_upper_bound(
      [&](std::size_t j) { return builder.build(noise_paths[j]); },
      noise_paths.size(), settings, threads, ci_multiplier);
}

UpperBoundResult estimate_upper_bound(const TradingModel& model,
                                      const PenaltyModel* penalty,
                                      std::size_t count, std::uint64_t seed,
                                      const QpSettings& settings, int threads,
                                      double ci_multiplier) {
  const auto paths = simulate_noise_paths(model.factor_noise(), model.T, count,
                                          seed, streams::kUpperBound);
  return estimate_upper_bound(model, penalty, paths, settings, threads,
                              ci_multiplier);
}

namespace {

class LqcInnerBuilder {
 public:
  LqcInnerBuilder(const LqcProblem& problem, const LqcSolution& sol,
                  const State& x0, LqcPenaltyKind kind)
      : problem_(problem), sol_(sol), x0_(x0), kind_(kind) {
    const int N = problem.horizon;
    const int sd = problem.state_dim();
    const int ad = problem.action_dim();
    const int n = N * ad;

    // State maps x_n = base_n(z) + coef_n u; coefficients are
    // path-independent, the bases absorb the noise.
    coef_.resize(N + 1);
    coef_[0] = Eigen::MatrixXd::Zero(sd, n);
    for (int m = 0; m < N; ++m) {
      coef_[m + 1] = problem.A[m] * coef_[m];
      coef_[m + 1].block(0, m * ad, sd, ad) += problem.B[m];
    }

    P_ = Eigen::MatrixXd::Zero(n, n);
    for (int m = 0; m < N; ++m) {
      P_ += 2.0 * coef_[m].transpose() * problem.Q[m] * coef_[m];
      P_.block(m * ad, m * ad, ad, ad) += 2.0 * problem.R[m];
    }
    P_ += 2.0 * coef_[N].transpose() * problem.QN * coef_[N];
    P_ = 0.5 * (P_ + P_.transpose()).eval();
    check_convex_base(P_, "LqcInnerBuilder");

    if (kind_ == LqcPenaltyKind::taylor_first_order) {
      taylor_ = make_lqc_taylor_penalty(problem_, sol_, 1);
    } else if (kind_ == LqcPenaltyKind::taylor_second_order) {
      taylor_ = make_lqc_taylor_penalty(problem_, sol_, 2);
    }
    if (taylor_) check_penalty_affine(*taylor_, sd, ad);
  }

  InnerProblem build(const std::vector<Noise>& z_path) const {
    const int N = problem_.horizon;
    const int sd = problem_.state_dim();
    const int ad = problem_.action_dim();
    const int n = N * ad;

    std::vector<Eigen::VectorXd> base(N + 1);
    base[0] = x0_;
    for (int m = 0; m < N; ++m) {
      base[m + 1] = problem_.A[m] * base[m] + z_path[m];
    }

    InnerProblem ip;
    ip.qp = QpProblem::unconstrained(P_, Eigen::VectorXd::Zero(n));
    for (int m = 0; m < N; ++m) {
      ip.qp.q += 2.0 * coef_[m].transpose() * (problem_.Q[m] * base[m]);
      ip.qp.c0 += base[m].dot(problem_.Q[m] * base[m]);
    }
    ip.qp.q += 2.0 * coef_[N].transpose() * (problem_.QN * base[N]);
    ip.qp.c0 += base[N].dot(problem_.QN * base[N]);

    // Reward form: costs are negated rewards, so the minimization objective
    // is total cost plus the reward-form penalty, which is the negated
    // cost-form penalty of the recursion.
    if (kind_ == LqcPenaltyKind::exact) {
      for (int m = 0; m < N; ++m) {
        const Eigen::VectorXd v = sol_.K[m + 1] * z_path[m];
        ip.qp.q.segment(m * ad, ad) -=
            2.0 * problem_.B[m].transpose() * v;
        ip.qp.q -= 2.0 * coef_[m].transpose() *
                   (problem_.A[m].transpose() * v);
        ip.qp.c0 -= 2.0 * base[m].dot(problem_.A[m].transpose() * v);
        ip.control_variate -=
            z_path[m].dot(v) - expected_quadratic(problem_.noise, sol_.K[m + 1]);
      }
    } else if (taylor_) {
      AffineTrajectoryMap map;
      map.base.assign(base.begin(), base.begin() + N);
      map.coef.assign(coef_.begin(), coef_.begin() + N);
      accumulate_affine_penalty(*taylor_, -1.0, z_path, map, ad, ip.qp.q,
                                ip.qp.c0, ip.control_variate);
    }
    return ip;
  }

 private:
  const LqcProblem& problem_;
  const LqcSolution& sol_;
  State x0_;
  LqcPenaltyKind kind_;
  std::vector<Eigen::MatrixXd> coef_;
  Eigen::MatrixXd P_;
  std::optional<PenaltyModel> taylor_;
};

}  // namespace

InnerProblem build_lqc_inner(const LqcProblem& problem, const LqcSolution& sol,
                             const State& x0, const std::vector<Noise>& z_path,
                             LqcPenaltyKind kind) {
  return LqcInnerBuilder(problem, sol, x0, kind).build(z_path);
}

UpperBoundResult estimate_upper_bound_lqc(const LqcProblem& problem,
                                          const LqcSolution& sol,
                                          const State& x0, LqcPenaltyKind kind,
                                          std::size_t count, std::uint64_t seed,
                                          const QpSettings& settings,
                                          int threads, double ci_multiplier) {
  if (count < 2) {
    throw std::invalid_argument("estimate_upper_bound_lqc: need >= 2 paths");
  }
  const auto paths = simulate_noise_paths(problem.noise, problem.horizon,
                                          count, seed, streams::kUpperBound);
  LqcInnerBuilder builder(problem, sol, x0, kind);
  return run_upper_bound(
      [&](std::size_t j) { return builder.build(paths[j]); }, count, settings,
      threads, ci_multiplier);
}

double inner_value_enumeration(
    const MdpModel& model,
    const std::vector<std::vector<Action>>& actions_per_period,
    const std::vector<Noise>& z_path, const TrajectoryFunctional& penalty) {
  const int N = model.horizon;
  if (static_cast<int>(actions_per_period.size()) != N) {
    throw std::invalid_argument(
        "inner_value_enumeration: need one action set per period");
  }
  std::vector<std::size_t> idx(N, 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<State> states{model.initial_state};
    std::vector<Action> actions;
    double total = 0.0;
    for (int n = 0; n < N; ++n) {
      const Action& a = actions_per_period[n][idx[n]];
      total += model.stage_reward(n, states.back(), a);
      states.push_back(model.transition(n, states.back(), a, z_path[n]));
      actions.push_back(a);
    }
    total += model.terminal_reward(states.back());
    if (penalty) total -= penalty(states, actions, z_path);
    best = std::max(best, total);

    int pos = N - 1;
    while (pos >= 0 && ++idx[pos] == actions_per_period[pos].size()) {
      idx[pos--] = 0;
    }
    if (pos < 0) break;
  }
  return best;
}

EnumeratedUpperBound estimate_upper_bound_enumeration(
    const MdpModel& model,
    const std::vector<std::vector<Action>>& actions_per_period,
    const TrajectoryFunctional& penalty) {
  if (!model.noise.is_finite()) {
    throw std::invalid_argument(
        "estimate_upper_bound_enumeration: requires finite-discrete noise");
  }
  const int N = model.horizon;
  const auto& atoms = model.noise.atoms();
  const auto& probs = model.noise.probabilities();

  EnumeratedUpperBound out;
  std::vector<std::size_t> idx(N, 0);
  while (true) {
    std::vector<Noise> z_path;
    double prob = 1.0;
    for (int n = 0; n < N; ++n) {
      z_path.push_back(atoms[idx[n]]);
      prob *= probs[static_cast<Eigen::Index>(idx[n])];
    }
    const double v =
        inner_value_enumeration(model, actions_per_period, z_path, penalty);
    out.inner_values.push_back(v);
    out.probabilities.push_back(prob);
    out.value += prob * v;

    int pos = N - 1;
    while (pos >= 0 && ++idx[pos] == atoms.size()) idx[pos--] = 0;
    if (pos < 0) break;
  }
  return out;
}

DualityReport duality_gap(
    const BoundEstimate& lower,
    const std::vector<std::pair<std::string, BoundEstimate>>& uppers) {
  if (uppers.empty()) {
    throw std::invalid_argument("duality_gap: no upper bounds supplied");
  }
  DualityReport report;
  report.lower = lower;
  report.uppers = uppers;
  double tightest = uppers.front().second.mean;
  for (const auto& [label, ub] : uppers) {
    tightest = std::min(tightest, ub.mean);
  }
  report.gap_abs = tightest - lower.mean;
  report.ratio_valid = lower.mean > 0.0;
  if (report.ratio_valid) {
    report.gap_pct = report.gap_abs / lower.mean;
  }
  return report;
}

}  // namespace dualbound
