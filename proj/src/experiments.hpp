#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tsol/harness.hpp"
#include "tsol/io.hpp"

namespace tsol::harness {

/// What an experiment sees while it runs: typed access to its validated
/// parameters and sinks for checks, results and artifacts.
class Run {
 public:
  Run(const ExperimentConfig& config, ExperimentReport& report) : config_(config), report_(report) {}

  double num(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::string str(const std::string& key) const;
  std::vector<double> list(const std::string& key) const;
  Vec3 point(const std::string& key) const;
  std::vector<Vec3> points(const std::string& key) const;

  unsigned threads() const { return config_.threads; }
  std::uint64_t seed() const { return config_.seed; }

  void check(const std::string& name, bool pass, double measured, double threshold, const std::string& relation,
             const std::string& detail = {});
  void check_le(const std::string& name, double measured, double threshold, const std::string& detail = {});
  void check_lt(const std::string& name, double measured, double threshold, const std::string& detail = {});
  void check_ge(const std::string& name, double measured, double threshold, const std::string& detail = {});
  void check_gt(const std::string& name, double measured, double threshold, const std::string& detail = {});
  void check_eq(const std::string& name, double measured, double expected, const std::string& detail = {});
  void check_holds(const std::string& name, bool pass, double measured, const std::string& detail = {});

  nlohmann::json& results() { return report_.results; }

  /// CSV or JSON by the configured format.
  void table(const std::string& stem, const io::Table& table);
  /// Field CSV plus its JSON descriptor, whatever the format.
  void field(const std::string& stem, const symmetry::ChartField& field);

 private:
  const ExperimentConfig& config_;
  ExperimentReport& report_;
};

using RunFn = std::function<void(Run&)>;
using ExtraValidation = std::function<void(const nlohmann::json& params, std::vector<Violation>&)>;

struct Registered {
  ExperimentInfo info;
  RunFn run;
  ExtraValidation extra;
};

const std::vector<Registered>& registry();

}  // namespace tsol::harness
