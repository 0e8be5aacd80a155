#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "drbandit/core.hpp"
#include "drbandit/env.hpp"
#include "drbandit/io.hpp"
#include "drbandit/probcalc.hpp"

namespace drbandit {

/// Configuration problems map to exit code 1 in the CLI.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using ConfigValue =
    std::variant<std::int64_t, double, bool, std::string, std::vector<double>>;

/// Flat key = value table, TOML-compatible syntax: comments (#), strings in
/// double quotes, integers, floats, booleans, and arrays of numbers.
class ConfigTable {
 public:
  static ConfigTable parse(const std::string& text) {
    ConfigTable table;
    std::size_t line_start = 0;
    int line_no = 0;
    while (line_start <= text.size()) {
      std::size_t line_end = text.find('\n', line_start);
      if (line_end == std::string::npos) line_end = text.size();
      std::string line = text.substr(line_start, line_end - line_start);
      ++line_no;
      line_start = line_end + 1;

      const std::size_t comment = find_comment(line);
      if (comment != std::string::npos) line = line.substr(0, comment);
      line = trim(line);
      if (line.empty()) continue;

      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string raw = trim(line.substr(eq + 1));
      if (key.empty() || raw.empty())
        throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
      table.set(key, parse_value(raw, line_no));
    }
    return table;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  void set(const std::string& key, ConfigValue value) {
    if (!has(key)) order_.push_back(key);
    values_[key] = std::move(value);
  }

  const std::vector<std::string>& keys() const { return order_; }

  std::int64_t get_int(const std::string& key) const {
    const ConfigValue& v = at(key);
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    throw ConfigError("config key '" + key + "' must be an integer");
  }

  double get_double(const std::string& key) const {
    const ConfigValue& v = at(key);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    throw ConfigError("config key '" + key + "' must be a number");
  }

  bool get_bool(const std::string& key) const {
    const ConfigValue& v = at(key);
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    throw ConfigError("config key '" + key + "' must be a boolean");
  }

  std::string get_string(const std::string& key) const {
    const ConfigValue& v = at(key);
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    throw ConfigError("config key '" + key + "' must be a string");
  }

  std::vector<double> get_array(const std::string& key) const {
    const ConfigValue& v = at(key);
    if (const auto* a = std::get_if<std::vector<double>>(&v)) return *a;
    throw ConfigError("config key '" + key + "' must be an array of numbers");
  }

  /// Number, or the string "auto" mapped to nullopt.
  std::optional<double> get_auto_double(const std::string& key) const {
    const ConfigValue& v = at(key);
    if (const auto* s = std::get_if<std::string>(&v)) {
      if (*s == "auto") return std::nullopt;
      throw ConfigError("config key '" + key + "' must be a number or \"auto\"");
    }
    return get_double(key);
  }

  /// Array, or the string "auto" mapped to nullopt.
  std::optional<std::vector<double>> get_auto_array(const std::string& key) const {
    const ConfigValue& v = at(key);
    if (const auto* s = std::get_if<std::string>(&v)) {
      if (*s == "auto") return std::nullopt;
      throw ConfigError("config key '" + key + "' must be an array or \"auto\"");
    }
    return get_array(key);
  }

  std::string serialize() const {
    std::string out;
    for (const std::string& key : order_) {
      out += key;
      out += " = ";
      out += value_to_string(values_.at(key));
      out += '\n';
    }
    return out;
  }

 private:
  const ConfigValue& at(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
  }

  static std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
  }

  static std::size_t find_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_string = !in_string;
      if (line[i] == '#' && !in_string) return i;
    }
    return std::string::npos;
  }

  static ConfigValue parse_scalar(const std::string& raw, int line_no) {
    if (raw == "true") return true;
    if (raw == "false") return false;
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"')
      return raw.substr(1, raw.size() - 2);
    const bool looks_float = raw.find_first_of(".eE") != std::string::npos &&
                             raw.find_first_not_of("+-0123456789.eE") == std::string::npos;
    try {
      std::size_t used = 0;
      if (!looks_float) {
        const long long i = std::stoll(raw, &used);
        if (used == raw.size()) return static_cast<std::int64_t>(i);
      }
      const double d = std::stod(raw, &used);
      if (used == raw.size()) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError("config line " + std::to_string(line_no) + ": cannot parse value '" +
                      raw + "'");
  }

  static ConfigValue parse_value(const std::string& raw, int line_no) {
    if (raw.front() == '[') {
      if (raw.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": unterminated array");
      std::vector<double> items;
      std::string body = raw.substr(1, raw.size() - 2);
      std::size_t pos = 0;
      while (pos < body.size()) {
        std::size_t comma = body.find(',', pos);
        if (comma == std::string::npos) comma = body.size();
        const std::string piece = trim(body.substr(pos, comma - pos));
        if (!piece.empty()) {
          const ConfigValue v = parse_scalar(piece, line_no);
          if (const auto* d = std::get_if<double>(&v)) {
            items.push_back(*d);
          } else if (const auto* i = std::get_if<std::int64_t>(&v)) {
            items.push_back(static_cast<double>(*i));
          } else {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": arrays may only hold numbers");
          }
        }
        pos = comma + 1;
      }
      return items;
    }
    return parse_scalar(raw, line_no);
  }

  static std::string value_to_string(const ConfigValue& value) {
    if (const auto* i = std::get_if<std::int64_t>(&value))
      return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&value)) return format_double(*d);
    if (const auto* b = std::get_if<bool>(&value)) return *b ? "true" : "false";
    if (const auto* s = std::get_if<std::string>(&value)) return '"' + *s + '"';
    const auto& array = std::get<std::vector<double>>(value);
    std::string out = "[";
    for (std::size_t k = 0; k < array.size(); ++k) {
      if (k > 0) out += ", ";
      out += format_double(array[k]);
    }
    out += "]";
    return out;
  }

  std::map<std::string, ConfigValue> values_;
  std::vector<std::string> order_;
};

enum class PolicyKind { lints, blts, drts };

inline std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::lints: return "lints";
    case PolicyKind::blts: return "blts";
    case PolicyKind::drts: return "drts";
  }
  throw std::logic_error("unknown policy kind");
}

inline PolicyKind policy_from_string(const std::string& name) {
  if (name == "lints") return PolicyKind::lints;
  if (name == "blts") return PolicyKind::blts;
  if (name == "drts") return PolicyKind::drts;
  throw ConfigError("unknown policy '" + name + "' (expected lints, blts, or drts)");
}

/// Full experiment description. Optional fields hold nullopt when the config
/// said "auto"; resolution happens in the harness.
struct RunConfig {
  PolicyKind policy = PolicyKind::drts;
  int horizon = 2000;
  int reps = 10;
  int arms = 20;
  int dim = 30;
  double rho = 0.5;
  double sigma = 1.0;
  std::optional<std::vector<double>> mu;    // nullopt: default_mu(N)
  std::optional<std::vector<double>> beta;  // nullopt: drawn per replication
  std::optional<double> v;                  // nullopt: exploration_v(N, gamma)
  std::optional<double> gamma;              // nullopt: 1/(N+1)
  LambdaMode lambda_mode = LambdaMode::algorithmic;
  double lambda_base = 1.0;
  double delta = 0.1;
  int qmc_points = 200;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  int workers = 0;  // 0: hardware concurrency
  std::vector<double> v_grid = {0.001, 0.01, 0.1, 1.0};
  std::vector<double> gamma_grid = {0.01, 0.05, 0.1};

  static RunConfig from_table(const ConfigTable& table) {
    RunConfig config;
    static const std::vector<std::string> known = {
        "policy",      "T",         "reps",   "N",        "d",          "rho",
        "sigma",       "mu",        "beta",   "v",        "gamma",      "lambda_mode",
        "lambda_base", "delta",     "qmc_points", "seed", "output_dir", "workers",
        "v_grid",      "gamma_grid"};
    for (const std::string& key : table.keys()) {
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw ConfigError("unknown config key '" + key + "'");
    }
    if (table.has("policy")) config.policy = policy_from_string(table.get_string("policy"));
    if (table.has("T")) config.horizon = static_cast<int>(table.get_int("T"));
    if (table.has("reps")) config.reps = static_cast<int>(table.get_int("reps"));
    if (table.has("N")) config.arms = static_cast<int>(table.get_int("N"));
    if (table.has("d")) config.dim = static_cast<int>(table.get_int("d"));
    if (table.has("rho")) config.rho = table.get_double("rho");
    if (table.has("sigma")) config.sigma = table.get_double("sigma");
    if (table.has("mu")) config.mu = table.get_auto_array("mu");
    if (table.has("beta")) config.beta = table.get_auto_array("beta");
    if (table.has("v")) config.v = table.get_auto_double("v");
    if (table.has("gamma")) config.gamma = table.get_auto_double("gamma");
    if (table.has("lambda_mode")) {
      const std::string mode = table.get_string("lambda_mode");
      if (mode == "algorithmic") {
        config.lambda_mode = LambdaMode::algorithmic;
      } else if (mode == "theoretical") {
        config.lambda_mode = LambdaMode::theoretical;
      } else {
        throw ConfigError("lambda_mode must be \"algorithmic\" or \"theoretical\"");
      }
    }
    if (table.has("lambda_base")) config.lambda_base = table.get_double("lambda_base");
    if (table.has("delta")) config.delta = table.get_double("delta");
    if (table.has("qmc_points")) config.qmc_points = static_cast<int>(table.get_int("qmc_points"));
    if (table.has("seed")) config.seed = static_cast<std::uint64_t>(table.get_int("seed"));
    if (table.has("output_dir")) config.output_dir = table.get_string("output_dir");
    if (table.has("workers")) config.workers = static_cast<int>(table.get_int("workers"));
    if (table.has("v_grid")) config.v_grid = table.get_array("v_grid");
    if (table.has("gamma_grid")) config.gamma_grid = table.get_array("gamma_grid");
    config.validate();
    return config;
  }

  ConfigTable to_table() const {
    ConfigTable table;
    table.set("policy", to_string(policy));
    table.set("T", static_cast<std::int64_t>(horizon));
    table.set("reps", static_cast<std::int64_t>(reps));
    table.set("N", static_cast<std::int64_t>(arms));
    table.set("d", static_cast<std::int64_t>(dim));
    table.set("rho", rho);
    table.set("sigma", sigma);
    table.set("mu", mu ? ConfigValue(*mu) : ConfigValue(std::string("auto")));
    table.set("beta", beta ? ConfigValue(*beta) : ConfigValue(std::string("auto")));
    table.set("v", v ? ConfigValue(*v) : ConfigValue(std::string("auto")));
    table.set("gamma", gamma ? ConfigValue(*gamma) : ConfigValue(std::string("auto")));
    table.set("lambda_mode", std::string(lambda_mode == LambdaMode::algorithmic
                                             ? "algorithmic"
                                             : "theoretical"));
    table.set("lambda_base", lambda_base);
    table.set("delta", delta);
    table.set("qmc_points", static_cast<std::int64_t>(qmc_points));
    table.set("seed", static_cast<std::int64_t>(seed));
    table.set("output_dir", output_dir);
    table.set("workers", static_cast<std::int64_t>(workers));
    table.set("v_grid", v_grid);
    table.set("gamma_grid", gamma_grid);
    return table;
  }

  void validate() const {
    if (horizon < 1) throw ConfigError("T must be >= 1");
    if (reps < 1) throw ConfigError("reps must be >= 1");
    if (arms < 2 || arms > 64) throw ConfigError("N must be in [2,64]");
    if (dim < 1 || dim > 64) throw ConfigError("d must be in [1,64]");
    if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rho must be in [0,1)");
    if (sigma < 0.0) throw ConfigError("sigma must be >= 0");
    if (mu && static_cast<int>(mu->size()) != arms)
      throw ConfigError("mu must have one entry per arm");
    if (beta && static_cast<int>(beta->size()) != dim)
      throw ConfigError("beta must have d entries");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0,1)");
    if (qmc_points < 16) throw ConfigError("qmc_points must be >= 16");
    if (!(lambda_base > 0.0)) throw ConfigError("lambda_base must be positive");
    if (workers < 0) throw ConfigError("workers must be >= 0");
    if (v && *v < 0.0) throw ConfigError("v must be >= 0");
    if (gamma && !(*gamma > 0.0 && *gamma < 1.0))
      throw ConfigError("gamma must be in (0,1)");
    if (v_grid.empty()) throw ConfigError("v_grid must not be empty");
    if (gamma_grid.empty()) throw ConfigError("gamma_grid must not be empty");
  }
};

inline RunConfig load_run_config(const std::string& path) {
  return RunConfig::from_table(ConfigTable::parse(read_text_file(path)));
}

}  // namespace drbandit
