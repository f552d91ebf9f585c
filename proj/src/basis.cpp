#include "dualbound/basis.hpp"

#include <cmath>
#include <stdexcept>

#include "dualbound/rng.hpp"
#include "dualbound/stats.hpp"

namespace dualbound {

namespace {

constexpr double kAtomMatchTol = 1e-9;

int find_atom(const Eigen::VectorXd& y, const NoiseModel& noise) {
  const auto& atoms = noise.atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if ((y - atoms[i]).lpNorm<Eigen::Infinity>() <= kAtomMatchTol) {
      return static_cast<int>(i);
    }
  }
  throw std::invalid_argument("indicator basis: point outside the atom support");
}

}  // namespace

double CoordinateWeights::weight_eval(int component, int r, double z,
                                      const NoiseModel& noise) const {
  if (r < 1 || r > order) {
    throw std::invalid_argument("CoordinateWeights: order index out of range");
  }
  const Eigen::MatrixXd& W = per_component.at(component);
  double value = 0.0;
  double zs = 1.0;
  for (int s = 1; s <= order; ++s) {
    zs *= z;
    value += W(r - 1, s - 1) * (zs - noise.raw_moment(component, s));
  }
  return value;
}

CoordinateWeights coordinate_weights(const NoiseModel& noise, int order) {
  if (order < 1) {
    throw std::invalid_argument("coordinate_weights: order must be >= 1");
  }
  if (!noise.is_finite() && !noise.is_diagonal()) {
    throw std::invalid_argument(
        "coordinate_weights: componentwise Taylor basis requires independent "
        "(diagonal-covariance) noise components");
  }
  CoordinateWeights cw;
  cw.order = order;
  cw.per_component.reserve(noise.dim());
  for (int k = 0; k < noise.dim(); ++k) {
    Eigen::MatrixXd C(order, order);
    for (int r = 1; r <= order; ++r) {
      for (int s = 1; s <= order; ++s) {
        C(r - 1, s - 1) = noise.raw_moment(k, r + s) -
                          noise.raw_moment(k, r) * noise.raw_moment(k, s);
      }
    }
    const double scale = std::max(1.0, C.cwiseAbs().maxCoeff());
    for (int r = 1; r <= order; ++r) {
      if (C(r - 1, r - 1) <= 1e-14 * scale) {
        throw std::invalid_argument(
            "coordinate_weights: monomial z^" + std::to_string(r) +
            " is a.s. constant for component " + std::to_string(k) +
            "; the covariance system is singular");
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(C);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
      throw std::invalid_argument(
          "coordinate_weights: monomial covariance matrix is singular for "
          "component " +
          std::to_string(k));
    }
    cw.per_component.push_back(lu.inverse());
  }
  return cw;
}

double taylor_basis_eval(int r, double z, const NoiseModel& noise,
                         int component) {
  if (r < 1) {
    throw std::invalid_argument("taylor_basis_eval: order index must be >= 1");
  }
  return std::pow(z, r) - noise.raw_moment(component, r);
}

double hermite_eval(int i, double z) {
  if (i < 1) {
    throw std::invalid_argument(
        "hermite_eval: index 0 is the constant and is excluded from the "
        "penalty basis");
  }
  // He_{k+1}(z) = z He_k(z) - k He_{k-1}(z), normalized by sqrt(i!).
  double prev = 1.0;
  double cur = z;
  double fact = 1.0;
  for (int k = 1; k < i; ++k) {
    const double next = z * cur - k * prev;
    prev = cur;
    cur = next;
    fact *= (k + 1);
  }
  return cur / std::sqrt(fact);
}

double indicator_eval(int atom_index, const Eigen::VectorXd& y,
                      const NoiseModel& noise) {
  if (!noise.is_finite()) {
    throw std::invalid_argument("indicator_eval: noise is not finite-discrete");
  }
  const auto& probs = noise.probabilities();
  if (atom_index < 0 || atom_index >= probs.size()) {
    throw std::invalid_argument("indicator_eval: atom index out of range");
  }
  const int hit = find_atom(y, noise);
  return hit == atom_index ? 1.0 / std::sqrt(probs[atom_index]) : 0.0;
}

BasisSpec::BasisSpec(BasisKind kind, int order, NoiseModel noise)
    : kind_(kind), order_(order), noise_(std::move(noise)) {}

BasisSpec BasisSpec::taylor(const NoiseModel& noise, int order) {
  BasisSpec spec(BasisKind::taylor, order, noise);
  spec.weights_ = coordinate_weights(noise, order);
  return spec;
}

BasisSpec BasisSpec::hermite(const NoiseModel& noise, int order) {
  if (order < 1) {
    throw std::invalid_argument("BasisSpec::hermite: order must be >= 1");
  }
  if (noise.is_finite()) {
    throw std::invalid_argument(
        "BasisSpec::hermite: Hermite basis requires Gaussian noise");
  }
  if (!noise.is_diagonal()) {
    throw std::invalid_argument(
        "BasisSpec::hermite: componentwise basis requires diagonal covariance");
  }
  BasisSpec spec(BasisKind::hermite, order, noise);
  spec.component_stddev_.resize(noise.dim());
  for (int k = 0; k < noise.dim(); ++k) {
    const double sd = noise.component_stddev(k);
    if (sd <= 0.0) {
      throw std::invalid_argument(
          "BasisSpec::hermite: component " + std::to_string(k) +
          " has zero variance");
    }
    spec.component_stddev_[k] = sd;
  }
  return spec;
}

BasisSpec BasisSpec::indicator(const NoiseModel& noise) {
  if (!noise.is_finite()) {
    throw std::invalid_argument(
        "BasisSpec::indicator: indicator basis requires finite-discrete noise");
  }
  const auto& probs = noise.probabilities();
  BasisSpec spec(BasisKind::indicator, static_cast<int>(probs.size()), noise);
  spec.sqrt_probs_.resize(probs.size());
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    spec.sqrt_probs_[static_cast<std::size_t>(i)] = std::sqrt(probs[i]);
  }
  return spec;
}

int BasisSpec::index_count() const {
  if (kind_ == BasisKind::indicator) return order_;
  return noise_.dim() * order_;
}

int BasisSpec::component_of(int index) const {
  if (kind_ == BasisKind::indicator) return 0;
  return index / order_;
}

int BasisSpec::degree_of(int index) const {
  if (kind_ == BasisKind::indicator) return index;
  return index % order_ + 1;
}

const CoordinateWeights& BasisSpec::weights() const {
  if (kind_ != BasisKind::taylor) {
    throw std::logic_error("BasisSpec: only the Taylor basis carries weights");
  }
  return weights_;
}

double BasisSpec::eval(int index, const Eigen::VectorXd& z) const {
  if (index < 0 || index >= index_count()) {
    throw std::invalid_argument("BasisSpec::eval: index out of range");
  }
  switch (kind_) {
    case BasisKind::taylor: {
      const int k = component_of(index);
      return taylor_basis_eval(degree_of(index), z[k], noise_, k);
    }
    case BasisKind::hermite: {
      const int k = component_of(index);
      return hermite_eval(degree_of(index), z[k] / component_stddev_[k]);
    }
    case BasisKind::indicator: {
      // Mean-subtracted indicator: g_i - sqrt(rho_i), so E[b_i] = 0.
      const int hit = find_atom(z, noise_);
      const double g = (hit == index) ? 1.0 / sqrt_probs_[index] : 0.0;
      return g - sqrt_probs_[index];
    }
  }
  throw std::logic_error("BasisSpec::eval: unknown kind");
}

double BasisSpec::response_weight(int index, const Eigen::VectorXd& z) const {
  if (kind_ == BasisKind::taylor) {
    const int k = component_of(index);
    return weights_.weight_eval(k, degree_of(index), z[k], noise_);
  }
  // Orthonormal families (and the projected indicator family) solve the
  // coordinate system with h_i = b_i.
  return eval(index, z);
}

ZeroMeanCheck basis_zero_mean_check(const BasisSpec& spec, std::size_t draws,
                                    std::uint64_t seed,
                                    const NoiseModel* noise) {
  const NoiseModel& measure = noise ? *noise : spec.noise();
  const int count = spec.index_count();
  ZeroMeanCheck out;
  out.means.assign(count, 0.0);
  out.std_errors.assign(count, 0.0);

  if (measure.is_finite()) {
    out.exact = true;
    const auto& atoms = measure.atoms();
    const auto& probs = measure.probabilities();
    for (int i = 0; i < count; ++i) {
      double m = 0.0;
      for (std::size_t a = 0; a < atoms.size(); ++a) {
        m += probs[static_cast<Eigen::Index>(a)] * spec.eval(i, atoms[a]);
      }
      out.means[i] = m;
    }
    out.pass = true;
    for (int i = 0; i < count; ++i) {
      if (std::abs(out.means[i]) > 1e-12) out.pass = false;
    }
    return out;
  }

  if (draws < 1000) {
    throw std::invalid_argument("basis_zero_mean_check: need at least 1e3 draws");
  }
  std::vector<std::vector<double>> samples(count,
                                           std::vector<double>(draws, 0.0));
  PathRng rng(seed, streams::kScratch, 0);
  for (std::size_t d = 0; d < draws; ++d) {
    const Eigen::VectorXd z = measure.sample(rng);
    for (int i = 0; i < count; ++i) samples[i][d] = spec.eval(i, z);
  }
  out.pass = true;
  for (int i = 0; i < count; ++i) {
    const BoundEstimate est = estimate_mean(samples[i], 1.0);
    out.means[i] = est.mean;
    out.std_errors[i] = est.std_error;
    if (std::abs(est.mean) > 4.0 * est.std_error) out.pass = false;
  }
  return out;
}

void gauss_hermite_points(int n, std::vector<double>& nodes,
                          std::vector<double>& weights) {
  if (n < 1) {
    throw std::invalid_argument("gauss_hermite_points: n must be >= 1");
  }
  // Golub-Welsch on the Jacobi matrix of the physicists' Hermite weight,
  // then rescale to the standard normal measure.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(k / 2.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()[i] * std::sqrt(2.0);
    const double v = es.eigenvectors()(0, i);
    weights[i] = v * v;  // already sums to 1 after normal rescaling
  }
}

}  // namespace dualbound
