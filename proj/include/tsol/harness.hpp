#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace tsol::harness {

inline constexpr const char* kOutDirEnv = "TSOL_OUT_DIR";
inline constexpr const char* kDefaultOutDir = "tsol-out";

enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitConfigError = 2, kExitRuntimeError = 3 };

enum class ParamType { Number, Integer, Boolean, String, NumberList, Point, PointList };

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::Number;
  nlohmann::json default_value;
  std::string doc;
  /// Bounds for numbers, integers and every entry of a list.
  std::optional<double> gt, ge, lt, le;
  std::vector<std::string> choices;  ///< allowed strings; empty means any
};

struct ExperimentInfo {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> params;
  /// Pairs (lo, hi) of parameters that must satisfy lo < hi.
  std::vector<std::pair<std::string, std::string>> ranges;
  bool named = false;  ///< part of the lemma chain rather than a single operation
};

/// Every experiment the runner knows, named ones first, in a fixed order.
const std::vector<ExperimentInfo>& experiments();
const ExperimentInfo* find_experiment(std::string_view name);

struct Violation {
  std::string path;  ///< e.g. "params.tol"; empty for syntax errors
  std::string message;
  std::string text() const { return path.empty() ? message : path + " " + message; }
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

struct ExperimentConfig {
  std::string experiment;
  nlohmann::json params = nlohmann::json::object();  ///< complete, defaults filled
  std::optional<std::string> out_dir;
  std::string format = "json";
  unsigned threads = 1;
  std::uint64_t seed = 2024;

  /// The full normalized config; feeding it back to validate_config
  /// reproduces this object.
  nlohmann::json echo() const;
  /// FNV-1a of the canonical dump of experiment, params and seed.
  std::uint64_t hash() const;
};

/// JSON parse only; throws ConfigError with line and column on bad syntax.
nlohmann::json parse_config_text(std::string_view text);

/// Parses and range-checks a config. Throws ConfigError listing every
/// violation found; syntax errors carry line and column.
ExperimentConfig validate_config(std::string_view text);
ExperimentConfig validate_parsed_config(const nlohmann::json& raw);

/// Levenshtein distance, used for unknown-key suggestions.
std::size_t edit_distance(std::string_view a, std::string_view b);

struct CheckOutcome {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string relation;  ///< "<=", ">=", "<", ">", "==" or "holds"
  std::string detail;
};

struct Artifact {
  std::string name;
  std::string content;
};

struct ExperimentReport {
  std::string experiment;
  nlohmann::json config;
  std::string config_hash;
  std::vector<CheckOutcome> checks;
  nlohmann::json results = nlohmann::json::object();
  std::vector<Artifact> artifacts;
  std::optional<std::string> error;
  /// Set when the run stopped early; the manifest lists only what was produced.
  bool partial = false;

  bool all_pass() const;
  int exit_code() const;
  nlohmann::json to_json() const;
};

/// Runs one experiment in memory. Library errors are caught and recorded
/// with the experiment name; nothing is written to disk.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Output directory precedence: explicit flag, then the environment
/// variable, then the config, then the default.
std::filesystem::path resolve_out_dir(const std::optional<std::string>& flag, const ExperimentConfig& config);

/// Writes every artifact and report.json into `dir`.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace tsol::harness
