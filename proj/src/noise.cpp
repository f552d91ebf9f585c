#include "dualbound/noise.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dualbound {

NoiseModel NoiseModel::finite(std::vector<Eigen::VectorXd> atoms,
                              Eigen::VectorXd probabilities) {
  if (atoms.empty()) {
    throw std::invalid_argument("NoiseModel::finite: no atoms");
  }
  if (static_cast<Eigen::Index>(atoms.size()) != probabilities.size()) {
    throw std::invalid_argument(
        "NoiseModel::finite: atom/probability count mismatch");
  }
  const int d = static_cast<int>(atoms.front().size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    if (atoms[static_cast<std::size_t>(i)].size() != d) {
      throw std::invalid_argument("NoiseModel::finite: inconsistent atom dims");
    }
    if (probabilities[i] <= 0.0) {
      throw std::invalid_argument(
          "NoiseModel::finite: probabilities must be strictly positive");
    }
    total += probabilities[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("NoiseModel::finite: probabilities must sum to 1, got " +
                                std::to_string(total));
  }

  NoiseModel m;
  m.finite_ = true;
  m.dim_ = d;
  m.atoms_ = std::move(atoms);
  m.probs_ = std::move(probabilities);
  m.cum_probs_.resize(m.probs_.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m.probs_.size(); ++i) {
    acc += m.probs_[i];
    m.cum_probs_[i] = acc;
  }
  m.cum_probs_[m.probs_.size() - 1] = 1.0;
  return m;
}

NoiseModel NoiseModel::gaussian(Eigen::MatrixXd covariance) {
  if (covariance.rows() != covariance.cols() || covariance.rows() == 0) {
    throw std::invalid_argument("NoiseModel::gaussian: covariance must be square");
  }
  if (!covariance.isApprox(covariance.transpose(), 1e-12)) {
    throw std::invalid_argument("NoiseModel::gaussian: covariance must be symmetric");
  }
  NoiseModel m;
  m.dim_ = static_cast<int>(covariance.rows());
  m.cov_ = std::move(covariance);
  m.diagonal_ = m.cov_.isDiagonal(1e-14);
  if (m.diagonal_) {
    for (int k = 0; k < m.dim_; ++k) {
      if (m.cov_(k, k) < 0.0) {
        throw std::invalid_argument("NoiseModel::gaussian: negative variance");
      }
    }
  } else {
    Eigen::LLT<Eigen::MatrixXd> llt(m.cov_);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument(
          "NoiseModel::gaussian: covariance is not positive semi-definite");
    }
    m.chol_ = llt.matrixL();
  }
  return m;
}

NoiseModel NoiseModel::gaussian_diag(const Eigen::VectorXd& variances) {
  return gaussian(Eigen::MatrixXd(variances.asDiagonal()));
}

NoiseModel NoiseModel::standard_normal(int dim) {
  return gaussian_diag(Eigen::VectorXd::Ones(dim));
}

Eigen::VectorXd NoiseModel::sample(PathRng& rng) const {
  if (finite_) {
    const double u = rng.uniform01();
    Eigen::Index i = 0;
    while (i + 1 < cum_probs_.size() && u > cum_probs_[i]) ++i;
    return atoms_[static_cast<std::size_t>(i)];
  }
  Eigen::VectorXd g(dim_);
  for (int k = 0; k < dim_; ++k) g[k] = rng.normal();
  if (diagonal_) {
    for (int k = 0; k < dim_; ++k) g[k] *= std::sqrt(cov_(k, k));
    return g;
  }
  return chol_ * g;
}

double NoiseModel::raw_moment(int component, int order) const {
  if (component < 0 || component >= dim_) {
    throw std::invalid_argument("NoiseModel::raw_moment: component out of range");
  }
  if (order < 0) {
    throw std::invalid_argument("NoiseModel::raw_moment: negative order");
  }
  if (order == 0) return 1.0;
  if (finite_) {
    double m = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      m += probs_[static_cast<Eigen::Index>(i)] *
           std::pow(atoms_[i][component], order);
    }
    return m;
  }
  if (order % 2 == 1) return 0.0;
  // (order-1)!! * variance^{order/2}
  double dfact = 1.0;
  for (int k = order - 1; k > 1; k -= 2) dfact *= k;
  return dfact * std::pow(cov_(component, component), order / 2);
}

double NoiseModel::component_stddev(int k) const {
  return std::sqrt(raw_moment(k, 2));
}

const std::vector<Eigen::VectorXd>& NoiseModel::atoms() const {
  if (!finite_) throw std::logic_error("NoiseModel: not a finite measure");
  return atoms_;
}

const Eigen::VectorXd& NoiseModel::probabilities() const {
  if (!finite_) throw std::logic_error("NoiseModel: not a finite measure");
  return probs_;
}

const Eigen::MatrixXd& NoiseModel::covariance() const {
  if (finite_) throw std::logic_error("NoiseModel: finite measure has no covariance field");
  return cov_;
}

}  // namespace dualbound
