#include "dualbound/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dualbound/toml.hpp"
#include "dualbound/trading.hpp"

namespace dualbound {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string normalize_penalty(const std::string& name) {
  if (name == "zero") return "zero";
  if (name == "t1" || name == "taylor-1") return "t1";
  if (name == "t2" || name == "taylor-2") return "t2";
  if (name == "exact-lqc") return "exact-lqc";
  throw ConfigError("penalties.list: unknown penalty '" + name +
                    "' (expected zero, taylor-1/t1, taylor-2/t2)");
}

PhiChoice phi_from_label(const std::string& label) {
  return PhiChoice{label, phi_preset(label)};
}

PhiChoice phi_from_matrix(const Eigen::MatrixXd& m) {
  for (const char* label : {"base", "phi1", "phi2", "phi3", "phi4"}) {
    if (m.isApprox(phi_preset(label), 1e-12)) return PhiChoice{label, m};
  }
  return PhiChoice{"custom", m};
}

// ---- TOML extraction helpers ----

using minitoml::Value;

std::vector<double> numbers_from(const Value& v, const std::string& field) {
  std::vector<double> out;
  if (v.is_number()) {
    out.push_back(v.as_number());
    return out;
  }
  if (v.kind == Value::Kind::array) {
    for (const Value& e : v.array) {
      if (!e.is_number()) throw ConfigError(field + ": expected numbers");
      out.push_back(e.as_number());
    }
    return out;
  }
  throw ConfigError(field + ": expected a number or an array of numbers");
}

std::vector<int> ints_from(const Value& v, const std::string& field) {
  std::vector<int> out;
  for (double d : numbers_from(v, field)) {
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) {
      throw ConfigError(field + ": expected integers");
    }
    out.push_back(i);
  }
  return out;
}

Eigen::MatrixXd matrix_from(const Value& v, const std::string& field) {
  if (v.kind != Value::Kind::array || v.array.empty()) {
    throw ConfigError(field + ": expected a matrix as array of rows");
  }
  const std::size_t rows = v.array.size();
  const std::size_t cols = v.array.front().array.size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const Value& row = v.array[r];
    if (row.kind != Value::Kind::array || row.array.size() != cols) {
      throw ConfigError(field + ": ragged matrix rows");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row.array[c].is_number()) {
        throw ConfigError(field + ": matrix entries must be numbers");
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          row.array[c].as_number();
    }
  }
  return m;
}

std::vector<PhiChoice> phi_from_value(const Value& v) {
  std::vector<PhiChoice> out;
  if (v.kind == Value::Kind::string) {
    out.push_back(phi_from_label(v.str));
    return out;
  }
  if (v.kind == Value::Kind::array) {
    if (!v.array.empty() && v.array.front().kind == Value::Kind::string) {
      for (const Value& e : v.array) {
        if (e.kind != Value::Kind::string) {
          throw ConfigError("model.phi: mixed label/matrix array");
        }
        out.push_back(phi_from_label(e.str));
      }
      return out;
    }
    out.push_back(phi_from_matrix(matrix_from(v, "model.phi")));
    return out;
  }
  throw ConfigError("model.phi: expected a label, list of labels, or matrix");
}

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& other) const {
  return D == other.D && T == other.T && lambda == other.lambda &&
         phi == other.phi && gamma == other.gamma &&
         lb_paths == other.lb_paths && ub_paths == other.ub_paths &&
         seed == other.seed && ci_multiplier == other.ci_multiplier &&
         threads == other.threads && penalties == other.penalties &&
         out_dir == other.out_dir;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.phi = {phi_from_label("base")};
  return c;
}

void validate_config(const ExperimentConfig& c) {
  if (c.D.empty() || c.T.empty() || c.lambda.empty() || c.phi.empty()) {
    throw ConfigError("model: D, T, lambda, phi must be non-empty");
  }
  for (int d : c.D) {
    if (d < 1) throw ConfigError("model.D: entries must be >= 1");
  }
  for (int t : c.T) {
    if (t < 1) throw ConfigError("model.T: entries must be >= 1");
  }
  for (double l : c.lambda) {
    if (l <= 0.0) throw ConfigError("model.lambda: entries must be positive");
  }
  for (const PhiChoice& p : c.phi) {
    if (p.matrix.rows() != 2 || p.matrix.cols() != 2) {
      throw ConfigError("model.phi: matrices must be 2x2");
    }
  }
  if (c.ub_paths < 2) throw ConfigError("run.ub_paths: need L >= 2");
  if (c.lb_paths < c.ub_paths) {
    throw ConfigError("run.lb_paths: need M >= L");
  }
  if (c.ci_multiplier <= 0.0) {
    throw ConfigError("run.ci_multiplier: must be positive");
  }
  if (c.penalties.empty()) {
    throw ConfigError("penalties.list: must name at least one penalty");
  }
  std::set<std::string> seen;
  for (const std::string& p : c.penalties) {
    const std::string norm = normalize_penalty(p);
    if (norm == "exact-lqc") {
      throw ConfigError(
          "penalties.list: 'exact-lqc' is the analytic oracle penalty for "
          "linear-quadratic runs; trading experiments support zero, t1, t2");
    }
    if (!seen.insert(norm).second) {
      throw ConfigError("penalties.list: duplicate penalty '" + norm + "'");
    }
  }
  if (c.out_dir.empty()) throw ConfigError("output.dir: must be non-empty");
}

ExperimentConfig parse_config_toml(const std::string& text) {
  minitoml::Document doc;
  try {
    doc = minitoml::parse(text);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }

  ExperimentConfig c = default_config();
  if (const Value* v = doc.find("model", "D")) c.D = ints_from(*v, "model.D");
  if (const Value* v = doc.find("model", "T")) c.T = ints_from(*v, "model.T");
  if (const Value* v = doc.find("model", "lambda")) {
    c.lambda = numbers_from(*v, "model.lambda");
  }
  if (const Value* v = doc.find("model", "phi")) c.phi = phi_from_value(*v);
  if (const Value* v = doc.find("model", "gamma")) {
    c.gamma = v->as_number();
  }
  if (const Value* v = doc.find("run", "lb_paths")) {
    c.lb_paths = static_cast<std::int64_t>(v->as_number());
  }
  if (const Value* v = doc.find("run", "ub_paths")) {
    c.ub_paths = static_cast<std::int64_t>(v->as_number());
  }
  if (const Value* v = doc.find("run", "seed")) {
    if (v->kind != Value::Kind::integer || v->int_v < 0) {
      throw ConfigError("run.seed: expected a non-negative integer");
    }
    c.seed = static_cast<std::uint64_t>(v->int_v);
  }
  if (const Value* v = doc.find("run", "ci_multiplier")) {
    c.ci_multiplier = v->as_number();
  }
  if (const Value* v = doc.find("run", "threads")) {
    c.threads = static_cast<int>(v->as_number());
  }
  if (const Value* v = doc.find("penalties", "list")) {
    if (v->kind != Value::Kind::array) {
      throw ConfigError("penalties.list: expected an array of strings");
    }
    c.penalties.clear();
    for (const Value& e : v->array) {
      if (e.kind != Value::Kind::string) {
        throw ConfigError("penalties.list: expected strings");
      }
      c.penalties.push_back(normalize_penalty(e.str));
    }
  }
  if (const Value* v = doc.find("output", "dir")) {
    if (v->kind != Value::Kind::string) {
      throw ConfigError("output.dir: expected a string");
    }
    c.out_dir = v->str;
  }
  validate_config(c);
  return c;
}

ExperimentConfig parse_config_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("json parse error: ") + e.what());
  }

  ExperimentConfig c = default_config();
  try {
    if (j.contains("model")) {
      const auto& m = j["model"];
      auto read_list = [](const nlohmann::json& v) {
        std::vector<double> out;
        if (v.is_array()) {
          for (const auto& e : v) out.push_back(e.get<double>());
        } else {
          out.push_back(v.get<double>());
        }
        return out;
      };
      if (m.contains("D")) {
        c.D.clear();
        for (double d : read_list(m["D"])) c.D.push_back(static_cast<int>(d));
      }
      if (m.contains("T")) {
        c.T.clear();
        for (double t : read_list(m["T"])) c.T.push_back(static_cast<int>(t));
      }
      if (m.contains("lambda")) c.lambda = read_list(m["lambda"]);
      if (m.contains("gamma")) c.gamma = m["gamma"].get<double>();
      if (m.contains("phi")) {
        const auto& p = m["phi"];
        c.phi.clear();
        if (p.is_string()) {
          c.phi.push_back(phi_from_label(p.get<std::string>()));
        } else if (p.is_array() && !p.empty() && p[0].is_string()) {
          for (const auto& e : p) {
            c.phi.push_back(phi_from_label(e.get<std::string>()));
          }
        } else if (p.is_array()) {
          Eigen::MatrixXd mat(p.size(), p[0].size());
          for (std::size_t r = 0; r < p.size(); ++r) {
            for (std::size_t col = 0; col < p[r].size(); ++col) {
              mat(static_cast<Eigen::Index>(r),
                  static_cast<Eigen::Index>(col)) = p[r][col].get<double>();
            }
          }
          c.phi.push_back(phi_from_matrix(mat));
        }
      }
    }
    if (j.contains("run")) {
      const auto& r = j["run"];
      if (r.contains("lb_paths")) c.lb_paths = r["lb_paths"].get<std::int64_t>();
      if (r.contains("ub_paths")) c.ub_paths = r["ub_paths"].get<std::int64_t>();
      if (r.contains("seed")) c.seed = r["seed"].get<std::uint64_t>();
      if (r.contains("ci_multiplier")) {
        c.ci_multiplier = r["ci_multiplier"].get<double>();
      }
      if (r.contains("threads")) c.threads = r["threads"].get<int>();
    }
    if (j.contains("penalties")) {
      const auto& p = j["penalties"];
      const auto& list = p.is_object() ? p["list"] : p;
      c.penalties.clear();
      for (const auto& e : list) {
        c.penalties.push_back(normalize_penalty(e.get<std::string>()));
      }
    }
    if (j.contains("output") && j["output"].contains("dir")) {
      c.out_dir = j["output"]["dir"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("json config: ") + e.what());
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    return parse_config_json(text);
  }
  return parse_config_toml(text);
}

std::string config_to_toml(const ExperimentConfig& c) {
  std::ostringstream out;
  auto write_ints = [&](const char* key, const std::vector<int>& v) {
    if (v.size() == 1) {
      out << key << " = " << v[0] << "\n";
      return;
    }
    out << key << " = [";
    for (std::size_t i = 0; i < v.size(); ++i) {
      out << (i ? ", " : "") << v[i];
    }
    out << "]\n";
  };
  auto write_doubles = [&](const char* key, const std::vector<double>& v) {
    if (v.size() == 1) {
      out << key << " = " << format_double(v[0]) << "\n";
      return;
    }
    out << key << " = [";
    for (std::size_t i = 0; i < v.size(); ++i) {
      out << (i ? ", " : "") << format_double(v[i]);
    }
    out << "]\n";
  };

  out << "[model]\n";
  write_ints("D", c.D);
  write_ints("T", c.T);
  write_doubles("lambda", c.lambda);
  bool all_labeled = true;
  for (const PhiChoice& p : c.phi) {
    if (p.label == "custom") all_labeled = false;
  }
  if (all_labeled && c.phi.size() == 1) {
    out << "phi = \"" << c.phi[0].label << "\"\n";
  } else if (all_labeled) {
    out << "phi = [";
    for (std::size_t i = 0; i < c.phi.size(); ++i) {
      out << (i ? ", " : "") << '"' << c.phi[i].label << '"';
    }
    out << "]\n";
  } else {
    if (c.phi.size() != 1) {
      throw ConfigError("config_to_toml: only a single custom phi matrix is "
                        "serializable");
    }
    const Eigen::MatrixXd& m = c.phi[0].matrix;
    out << "phi = [[" << format_double(m(0, 0)) << ", "
        << format_double(m(0, 1)) << "], [" << format_double(m(1, 0)) << ", "
        << format_double(m(1, 1)) << "]]\n";
  }
  out << "gamma = " << format_double(c.gamma) << "\n\n";

  out << "[run]\n";
  out << "lb_paths = " << c.lb_paths << "\n";
  out << "ub_paths = " << c.ub_paths << "\n";
  out << "seed = " << c.seed << "\n";
  out << "ci_multiplier = " << format_double(c.ci_multiplier) << "\n";
  out << "threads = " << c.threads << "\n\n";

  out << "[penalties]\n";
  out << "list = [";
  for (std::size_t i = 0; i < c.penalties.size(); ++i) {
    out << (i ? ", " : "") << '"' << c.penalties[i] << '"';
  }
  out << "]\n\n";

  out << "[output]\n";
  out << "dir = \"" << c.out_dir << "\"\n";
  return out.str();
}

}  // namespace dualbound
