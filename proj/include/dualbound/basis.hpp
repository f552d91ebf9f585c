#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "dualbound/noise.hpp"

namespace dualbound {

// Per-component weight matrices W = Cov(z, z^2, ..., z^R)^{-1}.  Applied to
// the centered monomial vector they give the polynomial weight functions
// l_r(z) used as regression responses for the Taylor basis.
struct CoordinateWeights {
  int order = 0;
  std::vector<Eigen::MatrixXd> per_component;

  // l_r(z) for component k, r in 1..R.
  double weight_eval(int component, int r, double z,
                     const NoiseModel& noise) const;
};

// Throws when the monomial covariance is singular (the message names the
// lowest-degree a.s.-constant monomial when there is one).
CoordinateWeights coordinate_weights(const NoiseModel& noise, int order);

// Centered monomial d_r(z) = z^r - E[z^r] for one component of the noise.
double taylor_basis_eval(int r, double z, const NoiseModel& noise,
                         int component = 0);

// Normalized (probabilists') Hermite polynomial of index i >= 1 at z; the
// family is {z, (z^2-1)/sqrt(2), (z^3-3z)/sqrt(6), ...}.  Index 0 (the
// constant) is not a penalty basis function and is rejected.
double hermite_eval(int i, double z);

// Raw indicator basis function g_i(y) = 1{y=y_i}/sqrt(rho_i) for a finite
// measure.  Throws when y is outside the support.
double indicator_eval(int atom_index, const Eigen::VectorXd& y,
                      const NoiseModel& noise);

enum class BasisKind { taylor, hermite, indicator };

// A concrete zero-mean functional basis tied to a noise model.  For taylor
// and hermite the scalar family is applied per component (index = component *
// order + (r-1)); multivariate Gaussian noise must therefore have a diagonal
// covariance.  The indicator basis is mean-subtracted so every member
// integrates to zero.
class BasisSpec {
 public:
  static BasisSpec taylor(const NoiseModel& noise, int order);
  static BasisSpec hermite(const NoiseModel& noise, int order = 4);
  static BasisSpec indicator(const NoiseModel& noise);

  BasisKind kind() const { return kind_; }
  int order() const { return order_; }
  int index_count() const;
  const NoiseModel& noise() const { return noise_; }
  const CoordinateWeights& weights() const;

  // b_i(z): the penalty basis function.
  double eval(int index, const Eigen::VectorXd& z) const;

  // h_i(z): the response weight solving the coordinate linear system
  // (coincides with b_i for the orthonormal bases).
  double response_weight(int index, const Eigen::VectorXd& z) const;

  int component_of(int index) const;
  int degree_of(int index) const;  // r for taylor/hermite, atom id otherwise

 private:
  BasisSpec(BasisKind kind, int order, NoiseModel noise);

  BasisKind kind_;
  int order_;
  NoiseModel noise_;
  CoordinateWeights weights_;             // taylor only
  std::vector<double> sqrt_probs_;        // indicator only
  std::vector<double> component_stddev_;  // hermite only
};

struct ZeroMeanCheck {
  std::vector<double> means;
  std::vector<double> std_errors;  // zero when computed by enumeration
  bool exact = false;
  bool pass = false;
};

// Verifies E[b_i(z)] = 0 for every basis index: exactly (enumeration) for
// finite noise, otherwise by `draws` Monte Carlo samples with a 4-sigma gate.
// `noise` defaults to the spec's own measure; passing a different one checks
// a basis against a mismatched distribution (which should fail).
ZeroMeanCheck basis_zero_mean_check(const BasisSpec& spec, std::size_t draws,
                                    std::uint64_t seed,
                                    const NoiseModel* noise = nullptr);

// Nodes and weights integrating smooth f against the standard normal density:
// E[f(Z)] ~= sum_i w_i f(z_i).  Exact for polynomials up to degree 2n-1.
void gauss_hermite_points(int n, std::vector<double>& nodes,
                          std::vector<double>& weights);

}  // namespace dualbound
