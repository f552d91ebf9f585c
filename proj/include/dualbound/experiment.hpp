#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dualbound/config.hpp"
#include "dualbound/stats.hpp"

namespace dualbound {

// One sweep cell's results.  Penalty columns are empty when the penalty was
// not requested; a failed cell keeps its identifying columns and the error.
struct ReportRow {
  int D = 0;
  int T = 0;
  std::string phi_label;
  double lambda = 0.0;
  double gamma = 0.0;
  std::optional<BoundEstimate> lb;
  std::optional<BoundEstimate> ub_zero;
  std::optional<BoundEstimate> ub_t1;
  std::optional<BoundEstimate> ub_t2;
  std::optional<double> gap_pct;  // percent
  std::optional<double> gap_abs;
  std::uint64_t seed = 0;
  std::int64_t M = 0;
  std::int64_t L = 0;
  std::string error;  // non-empty marks a failed cell
};

struct ExperimentResult {
  std::vector<ReportRow> rows;
  int failed_cells = 0;
  std::string csv_path;
  std::string json_path;
};

// Runs every sweep cell: simulate M primal paths under the projected policy,
// estimate the lower bound, refit the requested penalties on the same paths,
// then price L fresh inner problems per penalty.  Cell failures are recorded
// and the remaining cells continue.  `log` receives progress and per-path
// solver diagnostics (pass nullptr to discard).
ExperimentResult run_experiment(const ExperimentConfig& config,
                                std::ostream* log = nullptr);

// Bound and gap values are reported in thousands (the lower bound of the
// base desk configuration is ~14.9).
void emit_report_csv(const std::vector<ReportRow>& rows,
                     const std::string& destination);
void emit_report_json(const std::vector<ReportRow>& rows,
                      const std::string& destination);
std::string report_csv_string(const std::vector<ReportRow>& rows);

}  // namespace dualbound
