#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "dualbound/basis.hpp"
#include "dualbound/mdp.hpp"

namespace dualbound {

struct OlsResult {
  Eigen::VectorXd coefficients;
  int rank = 0;
  bool rank_deficient = false;
};

// Ordinary least squares through a pivoted complete orthogonal
// decomposition: full-rank designs give the unique minimizer, rank-deficient
// designs the minimum-norm one with the deficiency flagged.  Rank is decided
// at 1e-10 relative to the largest pivot.  ridge > 0 switches to the
// regularized normal equations.
OlsResult ols_solve(const Eigen::MatrixXd& design,
                    const Eigen::VectorXd& responses, double ridge = 0.0);

// Regressors phi_{n,i}(x_n, a_n) for every period/basis-index pair.  An
// empty feature vector declares the coordinate identically zero (no
// regression is run for it).  `control_variate(n, i)` marks coordinates
// whose features do not depend on (x, a); their penalty contribution is
// constant per noise path and is kept out of the inner optimization.
struct RegressorSpec {
  int periods = 0;
  int index_count = 0;
  std::function<Eigen::VectorXd(int n, int i, const State& x, const Action& a)>
      features;
  bool affine_in_action = false;
  std::function<bool(int n, int i)> control_variate;

  bool is_control_variate(int n, int i) const {
    return control_variate && control_variate(n, i);
  }
};

// A fitted (or directly assembled) dual penalty
//   M(a, z) = sum_n sum_i beta_{n,i}(x_n, a_n) b_i(z_{n+1}),
// with beta_{n,i}(x, a) = phi_{n,i}(x, a)' theta_{n,i}.  Feasibility is
// structural: it relies only on every b_i having zero mean, never on the
// coefficient values.
struct PenaltyModel {
  BasisSpec basis;
  RegressorSpec regressors;
  std::vector<std::vector<Eigen::VectorXd>> coefficients;  // [n][i]
  std::vector<std::string> warnings;

  int periods() const { return regressors.periods; }
  int index_count() const { return regressors.index_count; }

  // beta_{n,i}(x, a); zero for declared-empty coordinates.
  double coordinate(int n, int i, const State& x, const Action& a) const;
};

// Algorithm step 2: one regression per (period, basis index) on the reused
// primal sample paths.  Responses are V_{n+1}^j * h_i(z_{n+1}^j); no new
// simulation happens here.
PenaltyModel fit_coordinates(const std::vector<SamplePath>& paths,
                             const BasisSpec& basis, const RegressorSpec& reg,
                             double ridge = 0.0);

}  // namespace dualbound
