#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dualbound/rng.hpp"

namespace dualbound {

// Distribution of the i.i.d. per-period noise.  Two concrete families are
// supported: a finite discrete measure given by atoms and probabilities, and
// a centered Gaussian given by its covariance.  Raw moments are analytic in
// both cases; nothing is ever estimated from samples.
class NoiseModel {
 public:
  static NoiseModel finite(std::vector<Eigen::VectorXd> atoms,
                           Eigen::VectorXd probabilities);
  static NoiseModel gaussian(Eigen::MatrixXd covariance);
  static NoiseModel gaussian_diag(const Eigen::VectorXd& variances);
  static NoiseModel standard_normal(int dim = 1);

  int dim() const { return dim_; }
  bool is_finite() const { return finite_; }
  bool is_diagonal() const { return diagonal_; }

  Eigen::VectorXd sample(PathRng& rng) const;

  // E[z_k^r] for a single component, exact.
  double raw_moment(int component, int order) const;
  double component_variance(int k) const { return raw_moment(k, 2); }
  double component_stddev(int k) const;

  const std::vector<Eigen::VectorXd>& atoms() const;
  const Eigen::VectorXd& probabilities() const;
  const Eigen::MatrixXd& covariance() const;

 private:
  NoiseModel() = default;

  bool finite_ = false;
  bool diagonal_ = true;
  int dim_ = 0;

  std::vector<Eigen::VectorXd> atoms_;
  Eigen::VectorXd probs_;
  Eigen::VectorXd cum_probs_;

  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;  // lower factor, Gaussian only
};

}  // namespace dualbound
