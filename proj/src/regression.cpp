#include "dualbound/regression.hpp"

#include <stdexcept>

namespace dualbound {

OlsResult ols_solve(const Eigen::MatrixXd& design,
                    const Eigen::VectorXd& responses, double ridge) {
  const Eigen::Index m = design.rows();
  const Eigen::Index k = design.cols();
  if (m != responses.size()) {
    throw std::invalid_argument("ols_solve: design/response row mismatch");
  }
  if (k == 0) {
    throw std::invalid_argument("ols_solve: design has no columns");
  }
  if (m < k) {
    throw std::invalid_argument("ols_solve: fewer observations than coefficients");
  }
  if (design.cwiseAbs().maxCoeff() == 0.0) {
    throw std::invalid_argument("ols_solve: all-zero design matrix");
  }

  OlsResult result;
  if (ridge > 0.0) {
    const Eigen::MatrixXd gram =
        design.transpose() * design +
        ridge * Eigen::MatrixXd::Identity(k, k);
    result.coefficients =
        gram.ldlt().solve(design.transpose() * responses);
    result.rank = static_cast<int>(k);
    return result;
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(1e-10);
  cod.compute(design);
  result.coefficients = cod.solve(responses);
  result.rank = static_cast<int>(cod.rank());
  result.rank_deficient = result.rank < k;
  return result;
}

double PenaltyModel::coordinate(int n, int i, const State& x,
                                const Action& a) const {
  const Eigen::VectorXd& theta = coefficients.at(n).at(i);
  if (theta.size() == 0) return 0.0;
  const Eigen::VectorXd phi = regressors.features(n, i, x, a);
  if (phi.size() != theta.size()) {
    throw std::logic_error("PenaltyModel: feature/coefficient size mismatch");
  }
  return phi.dot(theta);
}

PenaltyModel fit_coordinates(const std::vector<SamplePath>& paths,
                             const BasisSpec& basis, const RegressorSpec& reg,
                             double ridge) {
  if (paths.empty()) {
    throw std::invalid_argument("fit_coordinates: empty path set");
  }
  if (reg.index_count != basis.index_count()) {
    throw std::invalid_argument(
        "fit_coordinates: regressor spec and basis disagree on index count");
  }
  const int N = reg.periods;
  const std::size_t M = paths.size();
  for (const auto& p : paths) {
    if (static_cast<int>(p.actions.size()) != N) {
      throw std::invalid_argument("fit_coordinates: path horizon mismatch");
    }
  }

  PenaltyModel pm{basis, reg, {}, {}};
  pm.coefficients.assign(N, std::vector<Eigen::VectorXd>(
                                static_cast<std::size_t>(reg.index_count)));

  Eigen::MatrixXd X;
  Eigen::VectorXd y(static_cast<Eigen::Index>(M));
  for (int n = 0; n < N; ++n) {
    for (int i = 0; i < reg.index_count; ++i) {
      const Eigen::VectorXd probe =
          reg.features(n, i, paths[0].states[n], paths[0].actions[n]);
      const Eigen::Index k = probe.size();
      if (k == 0) {
        pm.coefficients[n][i] = Eigen::VectorXd();
        continue;
      }
      X.resize(static_cast<Eigen::Index>(M), k);
      X.row(0) = probe.transpose();
      y[0] = paths[0].tail_values[n + 1] *
             basis.response_weight(i, paths[0].noises[n]);
      for (std::size_t j = 1; j < M; ++j) {
        const Eigen::VectorXd phi =
            reg.features(n, i, paths[j].states[n], paths[j].actions[n]);
        if (phi.size() != k) {
          throw std::logic_error("fit_coordinates: ragged feature vectors at (" +
                                 std::to_string(n) + "," + std::to_string(i) +
                                 ")");
        }
        X.row(static_cast<Eigen::Index>(j)) = phi.transpose();
        y[static_cast<Eigen::Index>(j)] =
            paths[j].tail_values[n + 1] *
            basis.response_weight(i, paths[j].noises[n]);
      }
      try {
        OlsResult fit = ols_solve(X, y, ridge);
        if (fit.rank_deficient) {
          pm.warnings.push_back("rank-deficient design at (n=" +
                                std::to_string(n) + ", i=" + std::to_string(i) +
                                "), minimum-norm solution used");
        }
        pm.coefficients[n][i] = std::move(fit.coefficients);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("fit_coordinates at (n=" +
                                    std::to_string(n) + ", i=" +
                                    std::to_string(i) + "): " + e.what());
      }
    }
  }
  return pm;
}

}  // namespace dualbound
