#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tsol/error.hpp"
#include "tsol/harness.hpp"
#include "tsol/io.hpp"

namespace {

using nlohmann::json;
namespace h = tsol::harness;

struct CommonFlags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "config file (JSON)");
  cmd->add_option("--out", f.out, "output directory (overrides $" + std::string(h::kOutDirEnv) + " and the config)");
  cmd->add_option("--format", f.format, "table format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", f.threads, "worker threads for internal sweeps")->check(CLI::Range(1u, 1024u));
  cmd->add_option("--seed", f.seed, "seed for randomized sweeps");
  cmd->add_option("--set", f.sets, "parameter override KEY=VALUE (VALUE parsed as JSON, else a string)");
}

void print_violations(const h::ConfigError& e) {
  std::cerr << "configuration error:\n";
  for (const auto& v : e.violations()) std::cerr << "  " << v.text() << "\n";
}

json raw_config(const CommonFlags& f, const std::optional<std::string>& experiment) {
  json raw = f.config.empty() ? json::object() : h::parse_config_text(tsol::io::read_file(f.config));
  if (!raw.is_object()) throw h::ConfigError(std::vector<h::Violation>{{"", "config must be a JSON object"}});
  if (experiment) {
    if (raw.contains("experiment") && raw["experiment"] != *experiment)
      throw h::ConfigError(std::vector<h::Violation>{{"experiment", "is " + raw["experiment"].dump() + " but the command runs \"" + *experiment + "\""}});
    raw["experiment"] = *experiment;
  }
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw h::ConfigError(std::vector<h::Violation>{{"--set", "expects KEY=VALUE, got \"" + s + "\""}});
    const std::string key = s.substr(0, eq), value = s.substr(eq + 1);
    json v = json::parse(value, nullptr, false);
    if (v.is_discarded()) v = value;
    raw["params"][key] = v;
  }
  if (f.format) raw["output"]["format"] = *f.format;
  if (f.threads) raw["threads"] = *f.threads;
  if (f.seed) raw["seed"] = *f.seed;
  return raw;
}

std::string describe(double v) { return tsol::io::format_number(v); }

int execute(const CommonFlags& f, const std::optional<std::string>& experiment) {
  h::ExperimentConfig cfg;
  try {
    cfg = h::validate_parsed_config(raw_config(f, experiment));
  } catch (const h::ConfigError& e) {
    print_violations(e);
    return h::kExitConfigError;
  } catch (const tsol::Error& e) {
    std::cerr << "configuration error:\n  " << e.what() << "\n";
    return h::kExitConfigError;
  }
  const auto report = h::run_experiment(cfg);
  const auto dir = h::resolve_out_dir(f.out, cfg);
  try {
    h::write_report(report, dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return h::kExitRuntimeError;
  }
  const auto j = report.to_json();
  std::cout << report.experiment << ": " << j["status"].get<std::string>() << " (config " << report.config_hash << ")\n";
  for (const auto& c : report.checks) {
    std::cout << "  " << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << describe(c.measured);
    if (c.relation != "holds") std::cout << " " << c.relation << " " << describe(c.threshold);
    std::cout << "\n";
  }
  if (report.error) std::cerr << "error: " << *report.error << "\n";
  std::cout << "report: " << (dir / "report.json").string() << "\n";
  return report.exit_code();
}

void list_experiments() {
  const char* type_names[] = {"number", "integer", "boolean", "string", "number list", "point", "point list"};
  for (const auto& e : h::experiments()) {
    std::cout << e.name << (e.named ? " [named]" : "") << "\n  " << e.summary << "\n";
    for (const auto& p : e.params)
      std::cout << "    " << p.name << " (" << type_names[static_cast<int>(p.type)] << ", default " << p.default_value.dump()
                << "): " << p.doc << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Translating-soliton diagnostics: operations and named experiments"};
  app.require_subcommand(1);

  const std::vector<std::string> ops{"bowl-profile", "ode-asymptotics", "residual", "fourier-split", "decay-fit",
                                     "axis-fit",     "symmetry-check",  "cylindricality-check",      "rescale",
                                     "density",      "entropy",         "decay-schedule"};
  std::vector<CommonFlags> op_flags(ops.size());
  std::vector<CLI::App*> op_cmds;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const auto* info = h::find_experiment(ops[k]);
    auto* cmd = app.add_subcommand(ops[k], info ? info->summary : "");
    add_common(cmd, op_flags[k]);
    op_cmds.push_back(cmd);
  }

  CommonFlags run_flags;
  std::string run_name;
  bool list = false;
  auto* run = app.add_subcommand("run", "run a named experiment (or any experiment) from a config");
  add_common(run, run_flags);
  run->add_option("experiment", run_name, "experiment name; defaults to the config's");
  run->add_flag("--list", list, "list experiments with their parameters and defaults");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a config and print it with defaults filled");
  validate->add_option("--config,config", validate_path, "config file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : h::kExitConfigError;
  }

  try {
    for (std::size_t k = 0; k < ops.size(); ++k)
      if (op_cmds[k]->parsed()) return execute(op_flags[k], ops[k]);
    if (run->parsed()) {
      if (list) {
        list_experiments();
        return 0;
      }
      return execute(run_flags, run_name.empty() ? std::nullopt : std::optional<std::string>(run_name));
    }
    if (validate->parsed()) {
      try {
        const auto cfg = h::validate_config(tsol::io::read_file(validate_path));
        std::cout << cfg.echo().dump(2) << "\n";
        return 0;
      } catch (const h::ConfigError& e) {
        print_violations(e);
        return h::kExitConfigError;
      } catch (const tsol::Error& e) {
        std::cerr << "configuration error:\n  " << e.what() << "\n";
        return h::kExitConfigError;
      }
    }
  } catch (const tsol::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return h::kExitRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return h::kExitRuntimeError;
  }
  return h::kExitRuntimeError;
}
