#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dualbound/lqc.hpp"
#include "dualbound/mdp.hpp"
#include "dualbound/qp.hpp"
#include "dualbound/regression.hpp"
#include "dualbound/stats.hpp"
#include "dualbound/trading.hpp"

namespace dualbound {

// A functional of one trajectory (states x_0..x_N, actions a_0..a_{N-1},
// noises z_1..z_N); the shape of every dual penalty.
using TrajectoryFunctional = std::function<double(
    const std::vector<State>&, const std::vector<Action>&,
    const std::vector<Noise>&)>;

// M(a, z) = sum_n sum_i beta_{n,i}(x_n, a_n) b_i(z_{n+1}) for a fitted model.
double penalty_evaluate(const PenaltyModel& pm, const std::vector<State>& states,
                        const std::vector<Action>& actions,
                        const std::vector<Noise>& noises);
double penalty_evaluate(const PenaltyModel& pm, const SamplePath& path);
TrajectoryFunctional as_trajectory_functional(const PenaltyModel& pm);

// Verifies E[M] = 0 under a non-anticipative policy on fresh simulation:
// exact enumeration for small finite-noise models, otherwise a Monte Carlo
// 4-sigma gate.  Throws if the policy declares itself anticipative.
struct FeasibilityCheck {
  double mean = 0.0;
  double std_error = 0.0;
  bool exact = false;
  bool pass = false;
  std::size_t paths = 0;
};

FeasibilityCheck check_feasibility(const TrajectoryFunctional& penalty,
                                   const Policy& policy, const MdpModel& model,
                                   std::size_t count, std::uint64_t seed);
FeasibilityCheck check_feasibility(const PenaltyModel& pm, const Policy& policy,
                                   const MdpModel& model, std::size_t count,
                                   std::uint64_t seed);

// One pathwise inner optimization problem in minimization form.  The
// reported inner value is -qp_value - control_variate: the action-
// independent penalty part stays out of the optimization and is added back
// when the value is recorded.
struct InnerProblem {
  QpProblem qp;
  double control_variate = 0.0;
};

double inner_value(const InnerProblem& problem, const QpSolution& sol);

// Builds trading inner problems: variables are the stacked trades (D*T),
// states are eliminated through the cumulative-sum identity, constraints are
// a_t <= 0, x_t >= 0 and the terminal liquidation equality.  The quadratic
// structure is shared across paths; only the linear term changes with the
// noise.  A null penalty model means the zero penalty.
class TradingInnerBuilder {
 public:
  TradingInnerBuilder(TradingModel model, std::optional<PenaltyModel> penalty,
                      bool with_constraints = true);

  InnerProblem build(const std::vector<Noise>& z_path) const;
  const TradingModel& model() const { return model_; }

  // Factor path f_1..f_T implied by a noise path (Eq. of the factor
  // dynamics applied to the known initial factor).
  std::vector<Eigen::VectorXd> factor_path(
      const std::vector<Noise>& z_path) const;

 private:
  TradingModel model_;
  std::optional<PenaltyModel> penalty_;
  QpProblem base_;           // P, G, h, A, b; q/c0 filled per path
  Eigen::VectorXd q_risk_;   // path-independent linear part of the risk term
  double c_risk_ = 0.0;
};

InnerProblem build_inner_problem(const TradingModel& model,
                                 const std::vector<Noise>& z_path,
                                 const PenaltyModel* penalty,
                                 bool with_constraints = true);

// Upper-bound estimation: solves one inner problem per fresh noise path.
struct UpperBoundResult {
  BoundEstimate estimate;
  std::vector<double> values;
  std::vector<QpStatus> statuses;
  int non_optimal = 0;
};

UpperBoundResult estimate_upper_bound(
    const TradingModel& model, const PenaltyModel* penalty,
    const std::vector<std::vector<Noise>>& noise_paths,
    const QpSettings& settings = {}, int threads = 1,
    double ci_multiplier = 1.96);

UpperBoundResult estimate_upper_bound(const TradingModel& model,
                                      const PenaltyModel* penalty,
                                      std::size_t count, std::uint64_t seed,
                                      const QpSettings& settings = {},
                                      int threads = 1,
                                      double ci_multiplier = 1.96);

// Unconstrained LQC duals for the analytic oracle: the cost-form penalties
// are negated to match the reward-maximization relaxation.
enum class LqcPenaltyKind { none, exact, taylor_first_order, taylor_second_order };

InnerProblem build_lqc_inner(const LqcProblem& problem, const LqcSolution& sol,
                             const State& x0, const std::vector<Noise>& z_path,
                             LqcPenaltyKind kind);

UpperBoundResult estimate_upper_bound_lqc(const LqcProblem& problem,
                                          const LqcSolution& sol,
                                          const State& x0, LqcPenaltyKind kind,
                                          std::size_t count, std::uint64_t seed,
                                          const QpSettings& settings = {},
                                          int threads = 1,
                                          double ci_multiplier = 1.96);

// Brute-force inner optimization for finite-action models: maximizes total
// reward minus penalty over every action sequence for one noise path.
double inner_value_enumeration(
    const MdpModel& model,
    const std::vector<std::vector<Action>>& actions_per_period,
    const std::vector<Noise>& z_path, const TrajectoryFunctional& penalty);

// Exact dual value for finite noise: enumerates every noise sequence and
// weights the inner values by their probabilities.
struct EnumeratedUpperBound {
  double value = 0.0;
  std::vector<double> inner_values;
  std::vector<double> probabilities;
};

EnumeratedUpperBound estimate_upper_bound_enumeration(
    const MdpModel& model,
    const std::vector<std::vector<Action>>& actions_per_period,
    const TrajectoryFunctional& penalty);

// Gap summary across penalties.  The percentage form requires a positive
// lower bound; otherwise only the absolute difference is meaningful.
struct DualityReport {
  BoundEstimate lower;
  std::vector<std::pair<std::string, BoundEstimate>> uppers;
  double gap_abs = 0.0;
  std::optional<double> gap_pct;
  bool ratio_valid = false;
};

DualityReport duality_gap(
    const BoundEstimate& lower,
    const std::vector<std::pair<std::string, BoundEstimate>>& uppers);

}  // namespace dualbound
