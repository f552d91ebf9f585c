#include "dualbound/qp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dualbound {

namespace {

void validate(const QpProblem& p, bool check_convexity) {
  const int n = p.num_vars();
  if (p.P.rows() != n || p.P.cols() != n) {
    throw std::invalid_argument("solve_qp: P must be n x n");
  }
  if (p.G.rows() != p.h.size() || (p.G.rows() > 0 && p.G.cols() != n)) {
    throw std::invalid_argument("solve_qp: inconsistent inequality system");
  }
  if (p.A.rows() != p.b.size() || (p.A.rows() > 0 && p.A.cols() != n)) {
    throw std::invalid_argument("solve_qp: inconsistent equality system");
  }
  const double scale = std::max(1.0, p.P.cwiseAbs().maxCoeff());
  if ((p.P - p.P.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("solve_qp: P is not symmetric");
  }
  if (check_convexity && n > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.P,
                                                      Eigen::EigenvaluesOnly);
    const double max_abs = es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.eigenvalues().minCoeff() < -1e-6 * std::max(1e-30, max_abs)) {
      throw std::invalid_argument(
          "solve_qp: P is indefinite (minimum eigenvalue " +
          std::to_string(es.eigenvalues().minCoeff()) + ")");
    }
  }
}

double objective(const QpProblem& p, const Eigen::VectorXd& u) {
  return 0.5 * u.dot(p.P * u) + p.q.dot(u) + p.c0;
}

// Largest alpha in (0, 1] keeping v + alpha*dv > 0.
double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

QpSolution solve_equality_only(const QpProblem& p, const QpSettings& settings) {
  const int n = p.num_vars();
  const int pe = p.num_eq();
  QpSolution sol;
  sol.ineq_multipliers.resize(0);

  if (pe == 0) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(p.P);
    Eigen::VectorXd u;
    if (ldlt.info() == Eigen::Success) {
      u = ldlt.solve(-p.q);
    } else {
      u = Eigen::FullPivLU<Eigen::MatrixXd>(p.P).solve(-p.q);
    }
    sol.u = u;
    sol.eq_multipliers.resize(0);
    sol.value = objective(p, u);
    sol.dual_residual = (p.P * u + p.q).lpNorm<Eigen::Infinity>();
    sol.status = sol.dual_residual <= settings.tol ? QpStatus::optimal
                                                   : QpStatus::max_iterations;
    sol.iterations = 1;
    return sol;
  }

  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + pe, n + pe);
  kkt.topLeftCorner(n, n) = p.P;
  kkt.topRightCorner(n, pe) = p.A.transpose();
  kkt.bottomLeftCorner(pe, n) = p.A;
  Eigen::VectorXd rhs(n + pe);
  rhs.head(n) = -p.q;
  rhs.tail(pe) = p.b;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);
  Eigen::VectorXd z = lu.solve(rhs);
  z -= lu.solve(kkt * z - rhs);  // one refinement step
  sol.u = z.head(n);
  sol.eq_multipliers = z.tail(pe);
  sol.value = objective(p, sol.u);
  sol.primal_residual = (p.A * sol.u - p.b).lpNorm<Eigen::Infinity>();
  sol.dual_residual = (p.P * sol.u + p.q + p.A.transpose() * sol.eq_multipliers)
                          .lpNorm<Eigen::Infinity>();
  sol.iterations = 1;
  if (sol.primal_residual <= settings.tol &&
      sol.dual_residual <= settings.tol) {
    sol.status = QpStatus::optimal;
  } else {
    // An inconsistent equality system has no solution at all.
    sol.status = sol.primal_residual > std::sqrt(settings.tol)
                     ? QpStatus::infeasible
                     : QpStatus::max_iterations;
  }
  return sol;
}

}  // namespace

QpProblem QpProblem::unconstrained(Eigen::MatrixXd P, Eigen::VectorXd q,
                                   double c0) {
  QpProblem p;
  const int n = static_cast<int>(q.size());
  p.P = std::move(P);
  p.q = std::move(q);
  p.G.resize(0, n);
  p.h.resize(0);
  p.A.resize(0, n);
  p.b.resize(0);
  p.c0 = c0;
  return p;
}

QpSolution solve_qp(const QpProblem& p, const QpSettings& settings) {
  validate(p, settings.check_convexity);
  const int n = p.num_vars();
  const int m = p.num_ineq();
  const int pe = p.num_eq();

  if (m == 0) return solve_equality_only(p, settings);

  // Starting point: regularized equality KKT for u, slacks pushed inside the
  // positive orthant.
  Eigen::VectorXd u;
  if (settings.warm_start && settings.warm_start->size() == n) {
    u = *settings.warm_start;
  } else {
    Eigen::MatrixXd kkt0 = Eigen::MatrixXd::Zero(n + pe, n + pe);
    kkt0.topLeftCorner(n, n) =
        p.P + 1e-8 * std::max(1.0, p.P.cwiseAbs().maxCoeff()) *
                  Eigen::MatrixXd::Identity(n, n);
    if (pe > 0) {
      kkt0.topRightCorner(n, pe) = p.A.transpose();
      kkt0.bottomLeftCorner(pe, n) = p.A;
    }
    Eigen::VectorXd rhs0(n + pe);
    rhs0.head(n) = -p.q;
    if (pe > 0) rhs0.tail(pe) = p.b;
    u = Eigen::PartialPivLU<Eigen::MatrixXd>(kkt0).solve(rhs0).head(n);
  }

  Eigen::VectorXd s = p.h - p.G * u;
  const double shift = std::max(0.0, -s.minCoeff()) + 1.0;
  s.array() += shift;
  Eigen::VectorXd lambda = Eigen::VectorXd::Ones(m);
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(pe);

  QpSolution sol;
  sol.status = QpStatus::max_iterations;

  Eigen::MatrixXd kkt(n + pe, n + pe);
  Eigen::VectorXd rhs(n + pe);

  for (int iter = 0; iter < settings.max_iter; ++iter) {
    const Eigen::VectorXd r_dual =
        p.P * u + p.q + p.G.transpose() * lambda +
        (pe > 0 ? Eigen::VectorXd(p.A.transpose() * nu)
                : Eigen::VectorXd::Zero(n));
    const Eigen::VectorXd r_prim = p.G * u + s - p.h;
    const Eigen::VectorXd r_eq =
        pe > 0 ? Eigen::VectorXd(p.A * u - p.b) : Eigen::VectorXd(0);
    const double mu = s.dot(lambda) / m;

    sol.dual_residual = r_dual.lpNorm<Eigen::Infinity>();
    sol.primal_residual = r_prim.lpNorm<Eigen::Infinity>();
    if (pe > 0) {
      sol.primal_residual =
          std::max(sol.primal_residual, r_eq.lpNorm<Eigen::Infinity>());
    }
    sol.comp_residual = (s.array() * lambda.array()).abs().maxCoeff();
    sol.iterations = iter;

    if (sol.primal_residual <= settings.tol &&
        sol.dual_residual <= settings.tol &&
        sol.comp_residual <= settings.tol) {
      sol.status = QpStatus::optimal;
      break;
    }

    // Farkas-type certificate: lambda >= 0 with G'lambda + A'nu ~ 0 and
    // h'lambda + b'nu < 0 proves primal infeasibility.  Only credible once
    // the duals have grown far beyond their initial scale.
    const double dual_scale = lambda.lpNorm<1>() + nu.lpNorm<1>();
    if (iter >= 5 && dual_scale > 1e6) {
      const Eigen::VectorXd cert =
          p.G.transpose() * lambda +
          (pe > 0 ? Eigen::VectorXd(p.A.transpose() * nu)
                  : Eigen::VectorXd::Zero(n));
      const double gap = p.h.dot(lambda) + (pe > 0 ? p.b.dot(nu) : 0.0);
      if (cert.lpNorm<Eigen::Infinity>() <= 1e-8 * dual_scale &&
          gap < -1e-8 * dual_scale) {
        sol.status = QpStatus::infeasible;
        break;
      }
    }

    const Eigen::ArrayXd d = lambda.array() / s.array();
    kkt.setZero();
    kkt.topLeftCorner(n, n) =
        p.P + p.G.transpose() * d.matrix().asDiagonal() * p.G;
    if (pe > 0) {
      kkt.topRightCorner(n, pe) = p.A.transpose();
      kkt.bottomLeftCorner(pe, n) = p.A;
      kkt.bottomRightCorner(pe, pe) =
          -1e-12 * Eigen::MatrixXd::Identity(pe, pe);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);

    auto solve_direction = [&](const Eigen::VectorXd& r_comp,
                               Eigen::VectorXd& du, Eigen::VectorXd& ds,
                               Eigen::VectorXd& dlambda,
                               Eigen::VectorXd& dnu) {
      // r_comp is the right-hand side of S dlambda + Lambda ds = r_comp.
      rhs.head(n) =
          -r_dual - p.G.transpose() *
                        (r_comp.array() / s.array() + d * r_prim.array())
                            .matrix();
      if (pe > 0) rhs.tail(pe) = -r_eq;
      Eigen::VectorXd step = lu.solve(rhs);
      step -= lu.solve(kkt * step - rhs);  // refinement
      du = step.head(n);
      if (pe > 0) {
        dnu = step.tail(pe);
      } else {
        dnu.resize(0);
      }
      ds = -r_prim - p.G * du;
      dlambda = (r_comp.array() - lambda.array() * ds.array()).matrix();
      dlambda.array() /= s.array();
    };

    // Predictor.
    Eigen::VectorXd du, ds, dlambda, dnu;
    const Eigen::VectorXd r_comp_aff = (-(s.array() * lambda.array())).matrix();
    solve_direction(r_comp_aff, du, ds, dlambda, dnu);

    const double alpha_aff =
        std::min(max_step(s, ds), max_step(lambda, dlambda));
    const double mu_aff = (s + alpha_aff * ds).dot(lambda + alpha_aff * dlambda) / m;
    double sigma = 0.0;
    if (mu > 1e-300) {
      sigma = std::pow(mu_aff / mu, 3);
      sigma = std::clamp(sigma, 0.0, 1.0);
    }

    // Corrector with centering.
    const Eigen::VectorXd r_comp =
        (-(s.array() * lambda.array()) - ds.array() * dlambda.array() +
         sigma * mu)
            .matrix();
    solve_direction(r_comp, du, ds, dlambda, dnu);

    const double eta = 0.995;
    const double alpha_p = std::min(1.0, eta * max_step(s, ds));
    const double alpha_d = std::min(1.0, eta * max_step(lambda, dlambda));
    u += alpha_p * du;
    s += alpha_p * ds;
    lambda += alpha_d * dlambda;
    if (pe > 0) nu += alpha_d * dnu;
  }

  sol.u = u;
  sol.ineq_multipliers = lambda;
  sol.eq_multipliers = nu;
  sol.value = objective(p, u);
  return sol;
}

KktResiduals kkt_residuals(const QpProblem& p, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& ineq_multipliers,
                           const Eigen::VectorXd& eq_multipliers) {
  KktResiduals r;
  Eigen::VectorXd stat = p.P * u + p.q;
  if (p.num_ineq() > 0) {
    const Eigen::VectorXd s = p.h - p.G * u;
    r.primal = std::max(0.0, (-s).maxCoeff());
    r.complementarity =
        (ineq_multipliers.array() * s.array()).abs().maxCoeff();
    stat += p.G.transpose() * ineq_multipliers;
  }
  if (p.num_eq() > 0) {
    r.primal = std::max(r.primal, (p.A * u - p.b).lpNorm<Eigen::Infinity>());
    stat += p.A.transpose() * eq_multipliers;
  }
  r.stationarity = stat.size() > 0 ? stat.lpNorm<Eigen::Infinity>() : 0.0;
  return r;
}

}  // namespace dualbound
