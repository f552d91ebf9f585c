#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dualbound {

struct PhiChoice {
  std::string label;       // "base", "phi1".."phi4", or "custom"
  Eigen::MatrixXd matrix;  // 2x2

  bool operator==(const PhiChoice& other) const {
    return label == other.label && matrix.isApprox(other.matrix, 0.0);
  }
};

// Thrown on malformed or inconsistent configuration; messages carry the
// offending field path.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Declarative experiment description.  Vector-valued model fields sweep the
// cross product of their entries; run parameters are shared by every cell.
struct ExperimentConfig {
  // [model]
  std::vector<int> D = {5};
  std::vector<int> T = {12};
  std::vector<double> lambda = {2.14e-5};
  std::vector<PhiChoice> phi;  // defaults to the base calibration
  double gamma = 0.0;

  // [run]
  std::int64_t lb_paths = 100000;  // M: primal paths, reused by the regression
  std::int64_t ub_paths = 100;     // L: fresh dual paths
  std::uint64_t seed = 20260810;
  double ci_multiplier = 1.96;
  int threads = 1;

  // [penalties]
  std::vector<std::string> penalties = {"zero", "t1", "t2"};

  // [output]
  std::string out_dir = "out";

  bool operator==(const ExperimentConfig& other) const;
};

ExperimentConfig default_config();

// Parsers validate on the way out; both formats describe the same schema.
ExperimentConfig parse_config_toml(const std::string& text);
ExperimentConfig parse_config_json(const std::string& text);

// Dispatches on extension (.json vs anything else = TOML).
ExperimentConfig load_config_file(const std::string& path);

std::string config_to_toml(const ExperimentConfig& config);

void validate_config(const ExperimentConfig& config);

}  // namespace dualbound
