#include "dualbound/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dualbound/dual.hpp"
#include "dualbound/rng.hpp"
#include "dualbound/trading.hpp"

namespace dualbound {

namespace {

constexpr double kThousand = 1e-3;  // report unit: thousands

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string opt_mean(const std::optional<BoundEstimate>& e) {
  return e ? fmt6(e->mean) : "";
}
std::string opt_hw(const std::optional<BoundEstimate>& e) {
  return e ? fmt6(e->half_width) : "";
}

BoundEstimate scaled(const BoundEstimate& e) {
  BoundEstimate out = e;
  out.mean *= kThousand;
  out.std_error *= kThousand;
  out.half_width *= kThousand;
  return out;
}

struct Cell {
  int D;
  int T;
  PhiChoice phi;
  double lambda;
};

void log_line(std::ostream* log, const std::string& line) {
  if (log) (*log) << line << '\n';
}

ReportRow run_cell(const ExperimentConfig& config, const Cell& cell,
                   std::uint64_t cell_seed, std::ostream* log) {
  ReportRow row;
  row.D = cell.D;
  row.T = cell.T;
  row.phi_label = cell.phi.label;
  row.lambda = cell.lambda;
  row.gamma = config.gamma;
  row.seed = config.seed;
  row.M = config.lb_paths;
  row.L = config.ub_paths;

  TradingOverrides overrides;
  overrides.gamma_risk = config.gamma;
  const TradingModel model =
      build_model(cell.D, cell.T, cell.lambda, cell.phi.matrix, overrides);
  const TradingLqcSolution sol = trading_value_recursion(model);
  const MdpModel mdp = trading_as_mdp(model);
  const Policy policy = plqc_as_policy(model, sol);

  const auto paths =
      simulate_paths(mdp, policy, static_cast<std::size_t>(config.lb_paths),
                     cell_seed, streams::kPrimalPaths, config.threads);
  const BoundEstimate lb = estimate_lower_bound(paths, config.ci_multiplier);
  row.lb = scaled(lb);
  log_line(log, "  lb = " + fmt6(lb.mean * kThousand) + " (+-" +
                    fmt6(lb.half_width * kThousand) + ")");

  const auto ub_noise = simulate_noise_paths(
      model.factor_noise(), model.T, static_cast<std::size_t>(config.ub_paths),
      cell_seed, streams::kUpperBound);

  QpSettings qp_settings;
  std::vector<std::pair<std::string, BoundEstimate>> uppers;
  for (const std::string& name : config.penalties) {
    std::optional<PenaltyModel> pm;
    if (name == "t1" || name == "t2") {
      const int order = (name == "t1") ? 1 : 2;
      const BasisSpec basis = BasisSpec::taylor(model.factor_noise(), order);
      pm = fit_coordinates(paths, basis, penalty_regressors(model, sol, order));
      for (const std::string& w : pm->warnings) {
        log_line(log, "  fit " + name + ": " + w);
      }
    }
    const UpperBoundResult ub = estimate_upper_bound(
        model, pm ? &*pm : nullptr, ub_noise, qp_settings, config.threads,
        config.ci_multiplier);
    for (std::size_t j = 0; j < ub.statuses.size(); ++j) {
      if (log) {
        (*log) << "  ub " << name << " path " << j << ": "
               << (ub.statuses[j] == QpStatus::optimal ? "optimal"
                                                       : "max-iterations")
               << " value " << fmt6(ub.values[j] * kThousand) << '\n';
      }
    }
    if (ub.non_optimal > 0) {
      log_line(log, "  ub " + name + ": " + std::to_string(ub.non_optimal) +
                        " inner solves stopped at the iteration cap");
    }
    uppers.emplace_back(name, ub.estimate);
    const BoundEstimate s = scaled(ub.estimate);
    if (name == "zero") row.ub_zero = s;
    if (name == "t1") row.ub_t1 = s;
    if (name == "t2") row.ub_t2 = s;
    log_line(log, "  ub " + name + " = " + fmt6(s.mean) + " (+-" +
                      fmt6(s.half_width) + ")");
  }

  const DualityReport report = duality_gap(lb, uppers);
  row.gap_abs = report.gap_abs * kThousand;
  if (report.gap_pct) row.gap_pct = *report.gap_pct * 100.0;
  return row;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config,
                                std::ostream* log) {
  validate_config(config);

  std::vector<Cell> cells;
  for (int D : config.D) {
    for (int T : config.T) {
      for (const PhiChoice& phi : config.phi) {
        for (double lambda : config.lambda) {
          cells.push_back(Cell{D, T, phi, lambda});
        }
      }
    }
  }

  ExperimentResult result;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const std::uint64_t cell_seed = mix64(config.seed ^ mix64(c + 1));
    log_line(log, "cell " + std::to_string(c) + ": D=" +
                      std::to_string(cells[c].D) + " T=" +
                      std::to_string(cells[c].T) + " phi=" +
                      cells[c].phi.label + " lambda=" + fmt6(cells[c].lambda));
    try {
      result.rows.push_back(run_cell(config, cells[c], cell_seed, log));
    } catch (const std::exception& e) {
      ReportRow row;
      row.D = cells[c].D;
      row.T = cells[c].T;
      row.phi_label = cells[c].phi.label;
      row.lambda = cells[c].lambda;
      row.gamma = config.gamma;
      row.seed = config.seed;
      row.M = config.lb_paths;
      row.L = config.ub_paths;
      row.error = e.what();
      result.rows.push_back(row);
      ++result.failed_cells;
      log_line(log, std::string("  cell failed: ") + e.what());
    }
  }

  std::filesystem::create_directories(config.out_dir);
  result.csv_path = config.out_dir + "/report.csv";
  result.json_path = config.out_dir + "/report.json";
  emit_report_csv(result.rows, result.csv_path);
  emit_report_json(result.rows, result.json_path);
  return result;
}

std::string report_csv_string(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "D,T,phi_label,lambda,gamma,lb,lb_hw,ub_zero,ub_zero_hw,ub_t1,"
         "ub_t1_hw,ub_t2,ub_t2_hw,gap_pct,gap_abs,seed,M,L\n";
  for (const ReportRow& r : rows) {
    out << r.D << ',' << r.T << ',' << r.phi_label << ',' << fmt6(r.lambda)
        << ',' << fmt6(r.gamma) << ',' << opt_mean(r.lb) << ',' << opt_hw(r.lb)
        << ',' << opt_mean(r.ub_zero) << ',' << opt_hw(r.ub_zero) << ','
        << opt_mean(r.ub_t1) << ',' << opt_hw(r.ub_t1) << ','
        << opt_mean(r.ub_t2) << ',' << opt_hw(r.ub_t2) << ','
        << (r.gap_pct ? fmt6(*r.gap_pct) : "") << ','
        << (r.gap_abs ? fmt6(*r.gap_abs) : "") << ',' << r.seed << ',' << r.M
        << ',' << r.L << '\n';
  }
  return out.str();
}

void emit_report_csv(const std::vector<ReportRow>& rows,
                     const std::string& destination) {
  if (rows.empty()) {
    throw std::invalid_argument("emit_report_csv: no rows");
  }
  std::ofstream out(destination, std::ios::binary);
  if (!out) {
    throw std::runtime_error("emit_report_csv: cannot write '" + destination +
                             "'");
  }
  out << report_csv_string(rows);
  if (!out) {
    throw std::runtime_error("emit_report_csv: write failed for '" +
                             destination + "'");
  }
}

void emit_report_json(const std::vector<ReportRow>& rows,
                      const std::string& destination) {
  if (rows.empty()) {
    throw std::invalid_argument("emit_report_json: no rows");
  }
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  auto put_bound = [](nlohmann::ordered_json& j, const char* key,
                      const std::optional<BoundEstimate>& e) {
    if (!e) return;
    j[key] = {{"mean", e->mean},
              {"half_width", e->half_width},
              {"std_error", e->std_error},
              {"count", e->count}};
  };
  for (const ReportRow& r : rows) {
    nlohmann::ordered_json j;
    j["D"] = r.D;
    j["T"] = r.T;
    j["phi_label"] = r.phi_label;
    j["lambda"] = r.lambda;
    j["gamma"] = r.gamma;
    put_bound(j, "lb", r.lb);
    put_bound(j, "ub_zero", r.ub_zero);
    put_bound(j, "ub_t1", r.ub_t1);
    put_bound(j, "ub_t2", r.ub_t2);
    if (r.gap_pct) j["gap_pct"] = *r.gap_pct;
    if (r.gap_abs) j["gap_abs"] = *r.gap_abs;
    j["seed"] = r.seed;
    j["M"] = r.M;
    j["L"] = r.L;
    if (!r.error.empty()) j["error"] = r.error;
    doc.push_back(j);
  }
  std::ofstream out(destination, std::ios::binary);
  if (!out) {
    throw std::runtime_error("emit_report_json: cannot write '" + destination +
                             "'");
  }
  out << doc.dump(2) << '\n';
  if (!out) {
    throw std::runtime_error("emit_report_json: write failed for '" +
                             destination + "'");
  }
}

}  // namespace dualbound
