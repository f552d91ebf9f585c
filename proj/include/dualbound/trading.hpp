#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "dualbound/mdp.hpp"
#include "dualbound/regression.hpp"

namespace dualbound {

// Multi-security liquidation problem: trade D securities over periods
// t = 1..T, returns predicted by K = 2 mean-reverting factors, quadratic
// transaction costs, sell-only / no-short / full-liquidation constraints.
struct TradingModel {
  int D = 0;
  int K = 2;
  int T = 0;
  Eigen::MatrixXd B;       // D x K factor loadings
  Eigen::MatrixXd Phi;     // K x K mean reversion
  Eigen::MatrixXd Psi;     // K x K factor-noise covariance (diagonal)
  Eigen::MatrixXd Sigma;   // D x D return-noise covariance (risk term only)
  Eigen::MatrixXd Gamma;   // D x D upper-triangular cost factor
  Eigen::MatrixXd Lambda;  // lambda * Gamma * Gamma'
  double lambda_cost = 0.0;
  double gamma_risk = 0.0;
  Eigen::VectorXd mu;  // deterministic risk-free drift; never enters rewards
  Eigen::VectorXd x0;
  Eigen::VectorXd f0, f1;

  NoiseModel factor_noise() const;
};

struct TradingOverrides {
  std::optional<double> gamma_risk;
  std::optional<Eigen::VectorXd> x0;
  std::optional<Eigen::MatrixXd> Sigma;
  std::optional<Eigen::MatrixXd> Psi;
};

// Replicated single-stock calibration: every row of B is [0.3375, -0.0720],
// Sigma = diag(0.048), Psi = diag(0.0379, 0.0947), x0 = 10000 per security,
// f0 = (1,1)', f1 = (I-Phi) f0, and Gamma chosen upper triangular with unit
// diag(Gamma Gamma').
TradingModel build_model(int D, int T, double lambda = 2.14e-5,
                         const std::optional<Eigen::MatrixXd>& Phi = {},
                         const TradingOverrides& overrides = {});

// Named mean-reversion matrices for the sensitivity sweeps ("base",
// "phi1".."phi4") and the alternative cost levels.
Eigen::MatrixXd phi_preset(const std::string& label);
const std::vector<double>& lambda_presets();

// Stage reward x_t'B f_t - 0.5 a_t'Lambda a_t - (gamma/2) x_t'Sigma x_t.
double reward(const Eigen::VectorXd& x_t, const Eigen::VectorXd& a_t,
              const Eigen::VectorXd& f_t, const TradingModel& model);

// Value-function coefficients of the unconstrained risk-neutral problem,
// indexed by t = 1..T (slot 0 unused):
//   J_t(x_{t-1}, f_t) = -0.5 x'Axx_t x + x'Axf_t f + 0.5 f'Aff_t f + Aconst_t
// with terminal values Axx_T = Lambda, Axf_T = 0, Aff_T = 0, Aconst_T = 0.
struct TradingLqcSolution {
  std::vector<Eigen::MatrixXd> Axx, Axf, Aff;
  std::vector<double> Aconst;
};

TradingLqcSolution trading_value_recursion(const TradingModel& model);

double trading_value(const TradingLqcSolution& sol, int t,
                     const Eigen::VectorXd& x_prev, const Eigen::VectorXd& f_t);

// Unconstrained optimal trade; at t = T the terminal condition forces full
// liquidation.
Eigen::VectorXd unconstrained_policy(int t, const Eigen::VectorXd& x_prev,
                                     const Eigen::VectorXd& f_t,
                                     const TradingLqcSolution& sol,
                                     const TradingModel& model);

// Componentwise projection max{-x, min{0, unconstrained}} onto the sell-only
// / no-short set; full liquidation at t = T.
Eigen::VectorXd plqc_policy(int t, const Eigen::VectorXd& x_prev,
                            const Eigen::VectorXd& f_t,
                            const TradingLqcSolution& sol,
                            const TradingModel& model);

// Equal trade -x0/T each period (clamped at the remaining position).
Eigen::VectorXd twap_policy(int t, const Eigen::VectorXd& x_prev,
                            const TradingModel& model);

// Martingale-difference sum of the unconstrained value functions along one
// trading trajectory (states packed as [x; f]); the exact dual penalty of
// the unconstrained problem.
double trading_exact_penalty(const TradingModel& model,
                             const TradingLqcSolution& sol,
                             const std::vector<State>& states,
                             const std::vector<Noise>& noises);

// Regressors for the penalty coordinates: per factor component,
// order 1 -> {1, gradient of the unconstrained value in f}, order 2 adds the
// constant curvature feature diag(Aff_{t+1}).  All features affine in the
// action; the order-2 coordinates are the control-variate terms.
RegressorSpec penalty_regressors(const TradingModel& model,
                                 const TradingLqcSolution& sol, int order);

// The MDP embedding with state [x_{t-1}; f_t] and period n = t-1, including
// the admissibility checks a <= 0, x >= 0, x_T = 0.
MdpModel trading_as_mdp(const TradingModel& model);

Policy plqc_as_policy(const TradingModel& model,
                      const TradingLqcSolution& sol);
Policy twap_as_policy(const TradingModel& model);

// State packing helpers.
Eigen::VectorXd pack_state(const Eigen::VectorXd& x, const Eigen::VectorXd& f);
Eigen::VectorXd position_part(const State& s, const TradingModel& model);
Eigen::VectorXd factor_part(const State& s, const TradingModel& model);

}  // namespace dualbound
