#include "dualbound/trading.hpp"

#include <cmath>
#include <stdexcept>

namespace dualbound {

namespace {

constexpr double kAdmissTol = 1e-6;

void check_psd(const Eigen::MatrixXd& M, const std::string& name) {
  if (M.rows() != M.cols()) {
    throw std::invalid_argument("build_model: " + name + " must be square");
  }
  if (!M.isApprox(M.transpose(), 1e-10)) {
    throw std::invalid_argument("build_model: " + name + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, M.norm())) {
    throw std::invalid_argument("build_model: " + name +
                                " must be positive semi-definite");
  }
}

}  // namespace

NoiseModel TradingModel::factor_noise() const {
  return NoiseModel::gaussian_diag(Psi.diagonal());
}

TradingModel build_model(int D, int T, double lambda,
                         const std::optional<Eigen::MatrixXd>& Phi,
                         const TradingOverrides& overrides) {
  if (D < 1 || T < 1) {
    throw std::invalid_argument("build_model: D and T must be >= 1");
  }
  if (lambda <= 0.0) {
    throw std::invalid_argument("build_model: lambda must be positive");
  }
  TradingModel m;
  m.D = D;
  m.T = T;
  m.lambda_cost = lambda;
  m.gamma_risk = overrides.gamma_risk.value_or(0.0);

  m.B.resize(D, m.K);
  for (int d = 0; d < D; ++d) m.B.row(d) << 0.3375, -0.0720;

  m.Phi = Phi.value_or(phi_preset("base"));
  if (m.Phi.rows() != m.K || m.Phi.cols() != m.K) {
    throw std::invalid_argument("build_model: Phi must be 2x2");
  }

  m.Psi = overrides.Psi.value_or(
      Eigen::Vector2d(0.0379, 0.0947).asDiagonal().toDenseMatrix());
  check_psd(m.Psi, "Psi");
  if (!m.Psi.isDiagonal(1e-14)) {
    throw std::invalid_argument("build_model: Psi must be diagonal");
  }

  m.Sigma = overrides.Sigma.value_or(
      (0.048 * Eigen::MatrixXd::Identity(D, D)).eval());
  check_psd(m.Sigma, "Sigma");

  // Row d (0-based) holds 1/sqrt(D-d) from column d rightward, which makes
  // every diagonal entry of Gamma*Gamma' equal to one.
  m.Gamma = Eigen::MatrixXd::Zero(D, D);
  for (int d = 0; d < D; ++d) {
    const double v = 1.0 / std::sqrt(static_cast<double>(D - d));
    for (int c = d; c < D; ++c) m.Gamma(d, c) = v;
  }
  m.Lambda = lambda * m.Gamma * m.Gamma.transpose();

  m.mu = 0.0726 * Eigen::VectorXd::Ones(D);
  m.x0 = overrides.x0.value_or(10000.0 * Eigen::VectorXd::Ones(D));
  if (m.x0.size() != D) {
    throw std::invalid_argument("build_model: x0 must have D entries");
  }
  m.f0 = Eigen::Vector2d(1.0, 1.0);
  m.f1 = (Eigen::MatrixXd::Identity(m.K, m.K) - m.Phi) * m.f0;
  return m;
}

Eigen::MatrixXd phi_preset(const std::string& label) {
  auto diag2 = [](double a, double b) {
    return Eigen::Vector2d(a, b).asDiagonal().toDenseMatrix();
  };
  if (label == "base") return diag2(0.5, 0.7);
  if (label == "phi1") return diag2(0.3, 0.5);
  if (label == "phi2") return diag2(0.3, 0.7);
  if (label == "phi3") return diag2(0.5, 0.3);
  if (label == "phi4") return diag2(0.7, 0.5);
  throw std::invalid_argument("phi_preset: unknown label '" + label + "'");
}

const std::vector<double>& lambda_presets() {
  static const std::vector<double> values = {1.07e-5, 2.67e-5, 3.21e-5,
                                             4.28e-5};
  return values;
}

double reward(const Eigen::VectorXd& x_t, const Eigen::VectorXd& a_t,
              const Eigen::VectorXd& f_t, const TradingModel& model) {
  double r = x_t.dot(model.B * f_t) - 0.5 * a_t.dot(model.Lambda * a_t);
  if (model.gamma_risk != 0.0) {
    r -= 0.5 * model.gamma_risk * x_t.dot(model.Sigma * x_t);
  }
  return r;
}

TradingLqcSolution trading_value_recursion(const TradingModel& model) {
  const int T = model.T;
  TradingLqcSolution sol;
  sol.Axx.assign(T + 1, Eigen::MatrixXd());
  sol.Axf.assign(T + 1, Eigen::MatrixXd());
  sol.Aff.assign(T + 1, Eigen::MatrixXd());
  sol.Aconst.assign(T + 1, 0.0);

  sol.Axx[T] = model.Lambda;
  sol.Axf[T] = Eigen::MatrixXd::Zero(model.D, model.K);
  sol.Aff[T] = Eigen::MatrixXd::Zero(model.K, model.K);

  const Eigen::MatrixXd IPhi =
      Eigen::MatrixXd::Identity(model.K, model.K) - model.Phi;
  for (int t = T - 1; t >= 1; --t) {
    const Eigen::MatrixXd S = model.Lambda + sol.Axx[t + 1];
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error(
          "trading_value_recursion: Lambda + Axx is singular at period " +
          std::to_string(t));
    }
    const Eigen::MatrixXd SinvLambda = llt.solve(model.Lambda);
    const Eigen::MatrixXd C = model.B + sol.Axf[t + 1] * IPhi;
    const Eigen::MatrixXd SinvC = llt.solve(C);

    Eigen::MatrixXd Axx = model.Lambda - model.Lambda * SinvLambda;
    sol.Axx[t] = 0.5 * (Axx + Axx.transpose());
    sol.Axf[t] = model.Lambda * SinvC;
    Eigen::MatrixXd Aff = C.transpose() * SinvC +
                          IPhi.transpose() * sol.Aff[t + 1] * IPhi;
    sol.Aff[t] = 0.5 * (Aff + Aff.transpose());
    // E[0.5 f'Aff f] contributes half the trace of Psi*Aff.
    sol.Aconst[t] =
        sol.Aconst[t + 1] + 0.5 * (model.Psi * sol.Aff[t + 1]).trace();
  }
  return sol;
}

double trading_value(const TradingLqcSolution& sol, int t,
                     const Eigen::VectorXd& x_prev,
                     const Eigen::VectorXd& f_t) {
  return -0.5 * x_prev.dot(sol.Axx.at(t) * x_prev) +
         x_prev.dot(sol.Axf.at(t) * f_t) + 0.5 * f_t.dot(sol.Aff.at(t) * f_t) +
         sol.Aconst.at(t);
}

Eigen::VectorXd unconstrained_policy(int t, const Eigen::VectorXd& x_prev,
                                     const Eigen::VectorXd& f_t,
                                     const TradingLqcSolution& sol,
                                     const TradingModel& model) {
  if (t == model.T) return -x_prev;
  const Eigen::MatrixXd IPhi =
      Eigen::MatrixXd::Identity(model.K, model.K) - model.Phi;
  const Eigen::MatrixXd S = model.Lambda + sol.Axx.at(t + 1);
  const Eigen::VectorXd rhs =
      model.Lambda * x_prev + (model.B + sol.Axf.at(t + 1) * IPhi) * f_t;
  return S.llt().solve(rhs) - x_prev;
}

Eigen::VectorXd plqc_policy(int t, const Eigen::VectorXd& x_prev,
                            const Eigen::VectorXd& f_t,
                            const TradingLqcSolution& sol,
                            const TradingModel& model) {
  if (t == model.T) return -x_prev;
  return unconstrained_policy(t, x_prev, f_t, sol, model)
      .cwiseMin(0.0)
      .cwiseMax(-x_prev);
}

Eigen::VectorXd twap_policy(int t, const Eigen::VectorXd& x_prev,
                            const TradingModel& model) {
  if (t == model.T) return -x_prev;
  return (-model.x0 / static_cast<double>(model.T)).cwiseMax(-x_prev);
}

double trading_exact_penalty(const TradingModel& model,
                             const TradingLqcSolution& sol,
                             const std::vector<State>& states,
                             const std::vector<Noise>& noises) {
  const int N = model.T;
  if (static_cast<int>(states.size()) < N ||
      static_cast<int>(noises.size()) < N - 1) {
    throw std::invalid_argument("trading_exact_penalty: trajectory too short");
  }
  const Eigen::MatrixXd IPhi =
      Eigen::MatrixXd::Identity(model.K, model.K) - model.Phi;
  double penalty = 0.0;
  for (int n = 0; n + 1 < N; ++n) {
    const int t1 = n + 2;  // coefficient index t+1 for paper period t = n+1
    const Eigen::VectorXd x_t = position_part(states[n + 1], model);
    const Eigen::VectorXd f_t = factor_part(states[n], model);
    const Eigen::VectorXd fhat = IPhi * f_t;
    const Eigen::VectorXd& z = noises[n];
    penalty += x_t.dot(sol.Axf.at(t1) * z) +
               fhat.dot(sol.Aff.at(t1) * z) +
               0.5 * (z.dot(sol.Aff.at(t1) * z) -
                      (model.Psi * sol.Aff.at(t1)).trace());
  }
  return penalty;
}

RegressorSpec penalty_regressors(const TradingModel& model,
                                 const TradingLqcSolution& sol, int order) {
  if (order != 1 && order != 2) {
    throw std::invalid_argument("penalty_regressors: order must be 1 or 2");
  }
  const int N = model.T;
  const int D = model.D;
  const Eigen::MatrixXd IPhi =
      Eigen::MatrixXd::Identity(model.K, model.K) - model.Phi;
  // Copies captured by value; the spec must outlive the solution object.
  auto Axf = sol.Axf;
  auto Aff = sol.Aff;

  RegressorSpec reg;
  reg.periods = N;
  reg.index_count = model.K * order;
  reg.affine_in_action = true;
  reg.features = [N, D, order, IPhi, Axf, Aff](
                     int n, int i, const State& s,
                     const Action& a) -> Eigen::VectorXd {
    // Period n trades at t = n+1; coefficients of J_{t+1} live at t+1 = n+2.
    // The last period has no penalty term, and at n = N-2 the terminal
    // coefficients vanish, which empties the gradient and curvature features.
    if (n >= N - 1) return Eigen::VectorXd();
    const int t1 = n + 2;
    const int k = i / order;
    const int r = i % order + 1;
    if (r == 1) {
      if (n == N - 2) {
        return Eigen::VectorXd::Ones(1);
      }
      const Eigen::VectorXd x_t = s.head(D) + a;
      const Eigen::VectorXd grad =
          Axf[t1].transpose() * x_t + Aff[t1] * (IPhi * s.tail(s.size() - D));
      Eigen::VectorXd phi(2);
      phi << 1.0, grad[k];
      return phi;
    }
    if (n == N - 2) return Eigen::VectorXd();
    Eigen::VectorXd phi(1);
    phi << Aff[t1](k, k);
    return phi;
  };
  reg.control_variate = [order](int /*n*/, int i) {
    return i % order + 1 == 2;
  };
  return reg;
}

MdpModel trading_as_mdp(const TradingModel& model) {
  MdpModel m;
  m.horizon = model.T;
  m.state_dim = model.D + model.K;
  m.action_dim = model.D;
  m.noise = model.factor_noise();
  m.initial_state = pack_state(model.x0, model.f1);

  const int D = model.D;
  const int T = model.T;
  const Eigen::MatrixXd IPhi =
      Eigen::MatrixXd::Identity(model.K, model.K) - model.Phi;
  TradingModel copy = model;

  m.transition = [D, IPhi](int /*n*/, const State& s, const Action& a,
                           const Noise& z) -> State {
    State next(s.size());
    next.head(D) = s.head(D) + a;
    next.tail(s.size() - D) = IPhi * s.tail(s.size() - D) + z;
    return next;
  };
  m.stage_reward = [copy, D](int /*n*/, const State& s, const Action& a) {
    const Eigen::VectorXd x_t = s.head(D) + a;
    return reward(x_t, a, s.tail(s.size() - D), copy);
  };
  m.terminal_reward = [](const State&) { return 0.0; };
  m.admissible = [D, T](int n, const State& s,
                        const Action& a) -> std::optional<std::string> {
    for (int d = 0; d < D; ++d) {
      if (a[d] > kAdmissTol) {
        return "sell-only violated: a[" + std::to_string(d) + "] = " +
               std::to_string(a[d]) + " > 0";
      }
      const double x_next = s[d] + a[d];
      if (x_next < -kAdmissTol) {
        return "no-short violated: x[" + std::to_string(d) + "] = " +
               std::to_string(x_next) + " < 0";
      }
      if (n == T - 1 && std::abs(x_next) > kAdmissTol) {
        return "terminal liquidation violated: x_T[" + std::to_string(d) +
               "] = " + std::to_string(x_next);
      }
    }
    return std::nullopt;
  };
  return m;
}

Policy plqc_as_policy(const TradingModel& model,
                      const TradingLqcSolution& sol) {
  // Precompute the per-period affine maps of the unconstrained trade
  // a*_t = gain_x[t] x + gain_f[t] f - x, so path simulation stays cheap.
  const int T = model.T;
  const int D = model.D;
  const Eigen::MatrixXd IPhi =
      Eigen::MatrixXd::Identity(model.K, model.K) - model.Phi;
  std::vector<Eigen::MatrixXd> gain_x(T + 1), gain_f(T + 1);
  for (int t = 1; t < T; ++t) {
    const Eigen::MatrixXd S = model.Lambda + sol.Axx[t + 1];
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    gain_x[t] = llt.solve(model.Lambda);
    gain_f[t] = llt.solve(model.B + sol.Axf[t + 1] * IPhi);
  }
  Policy p;
  p.act = [T, D, gain_x, gain_f](int n, const State& s) -> Action {
    const int t = n + 1;
    const Eigen::VectorXd x = s.head(D);
    if (t == T) return -x;
    const Eigen::VectorXd f = s.tail(s.size() - D);
    const Eigen::VectorXd astar = gain_x[t] * x + gain_f[t] * f - x;
    return astar.cwiseMin(0.0).cwiseMax(-x);
  };
  p.non_anticipative = true;
  return p;
}

Policy twap_as_policy(const TradingModel& model) {
  TradingModel copy = model;
  Policy p;
  p.act = [copy](int n, const State& s) -> Action {
    return twap_policy(n + 1, s.head(copy.D), copy);
  };
  p.non_anticipative = true;
  return p;
}

Eigen::VectorXd pack_state(const Eigen::VectorXd& x,
                           const Eigen::VectorXd& f) {
  Eigen::VectorXd s(x.size() + f.size());
  s << x, f;
  return s;
}

Eigen::VectorXd position_part(const State& s, const TradingModel& model) {
  return s.head(model.D);
}

Eigen::VectorXd factor_part(const State& s, const TradingModel& model) {
  return s.tail(model.K);
}

}  // namespace dualbound
