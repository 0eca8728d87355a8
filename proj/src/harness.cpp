#include "tsol/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "experiments.hpp"
#include "tsol/error.hpp"

namespace tsol::harness {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Run

double Run::num(const std::string& key) const { return config_.params.at(key).get<double>(); }
std::int64_t Run::integer(const std::string& key) const { return config_.params.at(key).get<std::int64_t>(); }
std::size_t Run::count(const std::string& key) const { return static_cast<std::size_t>(integer(key)); }
bool Run::flag(const std::string& key) const { return config_.params.at(key).get<bool>(); }
std::string Run::str(const std::string& key) const { return config_.params.at(key).get<std::string>(); }
std::vector<double> Run::list(const std::string& key) const { return config_.params.at(key).get<std::vector<double>>(); }

Vec3 Run::point(const std::string& key) const {
  const auto v = config_.params.at(key).get<std::vector<double>>();
  return Vec3(v[0], v[1], v[2]);
}

std::vector<Vec3> Run::points(const std::string& key) const {
  std::vector<Vec3> out;
  for (const auto& p : config_.params.at(key)) {
    const auto v = p.get<std::vector<double>>();
    out.emplace_back(v[0], v[1], v[2]);
  }
  return out;
}

void Run::check(const std::string& name, bool pass, double measured, double threshold, const std::string& relation,
                const std::string& detail) {
  report_.checks.push_back({name, pass, measured, threshold, relation, detail});
}

void Run::check_le(const std::string& name, double measured, double threshold, const std::string& detail) {
  check(name, measured <= threshold, measured, threshold, "<=", detail);
}
void Run::check_lt(const std::string& name, double measured, double threshold, const std::string& detail) {
  check(name, measured < threshold, measured, threshold, "<", detail);
}
void Run::check_ge(const std::string& name, double measured, double threshold, const std::string& detail) {
  check(name, measured >= threshold, measured, threshold, ">=", detail);
}
void Run::check_gt(const std::string& name, double measured, double threshold, const std::string& detail) {
  check(name, measured > threshold, measured, threshold, ">", detail);
}
void Run::check_eq(const std::string& name, double measured, double expected, const std::string& detail) {
  check(name, measured == expected, measured, expected, "==", detail);
}
void Run::check_holds(const std::string& name, bool pass, double measured, const std::string& detail) {
  check(name, pass, measured, NAN, "holds", detail);
}

void Run::table(const std::string& stem, const io::Table& table) {
  if (config_.format == "csv") report_.artifacts.push_back({stem + ".csv", io::to_csv(table)});
  else report_.artifacts.push_back({stem + ".json", io::to_json(table).dump(1) + "\n"});
}

void Run::field(const std::string& stem, const symmetry::ChartField& field) {
  auto desc = io::field_descriptor(field);
  desc["data"] = stem + ".csv";
  report_.artifacts.push_back({stem + ".csv", io::field_to_csv(field)});
  report_.artifacts.push_back({stem + ".field.json", desc.dump(1) + "\n"});
}

// ---------------------------------------------------------------------------
// Registry views

const std::vector<ExperimentInfo>& experiments() {
  static const std::vector<ExperimentInfo> list = [] {
    std::vector<ExperimentInfo> out;
    for (const auto& r : registry()) out.push_back(r.info);
    return out;
  }();
  return list;
}

const ExperimentInfo* find_experiment(std::string_view name) {
  for (const auto& e : experiments())
    if (e.name == name) return &e;
  return nullptr;
}

namespace {

const Registered* find_registered(std::string_view name) {
  for (const auto& r : registry())
    if (r.info.name == name) return &r;
  return nullptr;
}

}  // namespace

// ---------------------------------------------------------------------------
// Validation

ConfigError::ConfigError(std::vector<Violation> violations)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& v : violations) msg += "\n  " + v.text();
        return msg;
      }()),
      violations_(std::move(violations)) {}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

namespace {

std::string unknown_key_message(const std::string& key, const std::vector<std::string>& known) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& k : known) {
    const std::size_t d = edit_distance(key, k);
    if (d < best_d) best_d = d, best = k;
  }
  std::string msg = "is not a recognised key";
  if (!best.empty() && best_d <= std::max<std::size_t>(2, key.size() / 3)) msg += " (did you mean \"" + best + "\"?)";
  return msg;
}

std::string format_bound(double v) { return io::format_number(v); }

void check_bounds(const ParamSpec& p, double v, const std::string& path, std::vector<Violation>& out) {
  if (!std::isfinite(v)) {
    out.push_back({path, "must be finite"});
    return;
  }
  // Only the first failed bound is reported.
  if (p.gt && !(v > *p.gt)) out.push_back({path, "must be > " + format_bound(*p.gt)});
  else if (p.ge && !(v >= *p.ge)) out.push_back({path, "must be >= " + format_bound(*p.ge)});
  else if (p.lt && !(v < *p.lt)) out.push_back({path, "must be < " + format_bound(*p.lt)});
  else if (p.le && !(v <= *p.le)) out.push_back({path, "must be <= " + format_bound(*p.le)});
}

// Returns the normalized value, or null after recording violations.
json check_param(const ParamSpec& p, const json& v, const std::string& path, std::vector<Violation>& out) {
  const std::size_t before = out.size();
  switch (p.type) {
    case ParamType::Number:
      if (!v.is_number()) {
        out.push_back({path, "must be a number"});
        return nullptr;
      }
      check_bounds(p, v.get<double>(), path, out);
      return out.size() == before ? json(v.get<double>()) : json(nullptr);
    case ParamType::Integer:
      if (!v.is_number_integer()) {
        out.push_back({path, "must be an integer"});
        return nullptr;
      }
      check_bounds(p, static_cast<double>(v.get<std::int64_t>()), path, out);
      return out.size() == before ? json(v.get<std::int64_t>()) : json(nullptr);
    case ParamType::Boolean:
      if (!v.is_boolean()) {
        out.push_back({path, "must be true or false"});
        return nullptr;
      }
      return v;
    case ParamType::String:
      if (!v.is_string()) {
        out.push_back({path, "must be a string"});
        return nullptr;
      }
      if (!p.choices.empty() &&
          std::find(p.choices.begin(), p.choices.end(), v.get<std::string>()) == p.choices.end()) {
        std::string list;
        for (const auto& c : p.choices) list += (list.empty() ? "" : ", ") + c;
        out.push_back({path, "must be one of: " + list});
        return nullptr;
      }
      return v;
    case ParamType::NumberList: {
      if (!v.is_array()) {
        out.push_back({path, "must be an array of numbers"});
        return nullptr;
      }
      json norm = json::array();
      for (std::size_t k = 0; k < v.size(); ++k) {
        const std::string ep = path + "[" + std::to_string(k) + "]";
        if (!v[k].is_number()) out.push_back({ep, "must be a number"});
        else check_bounds(p, v[k].get<double>(), ep, out), norm.push_back(v[k].get<double>());
      }
      return out.size() == before ? norm : json(nullptr);
    }
    case ParamType::Point: {
      if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
        out.push_back({path, "must be an array of three numbers"});
        return nullptr;
      }
      json norm = json::array();
      for (std::size_t k = 0; k < 3; ++k) {
        check_bounds(p, v[k].get<double>(), path + "[" + std::to_string(k) + "]", out);
        norm.push_back(v[k].get<double>());
      }
      return out.size() == before ? norm : json(nullptr);
    }
    case ParamType::PointList: {
      if (!v.is_array()) {
        out.push_back({path, "must be an array of points"});
        return nullptr;
      }
      json norm = json::array();
      ParamSpec elem = p;
      elem.type = ParamType::Point;
      for (std::size_t k = 0; k < v.size(); ++k) norm.push_back(check_param(elem, v[k], path + "[" + std::to_string(k) + "]", out));
      return out.size() == before ? norm : json(nullptr);
    }
  }
  return nullptr;
}

}  // namespace

json parse_config_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t pos = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k < pos; ++k) {
      if (text[k] == '\n') ++line, col = 1;
      else ++col;
    }
    std::string what = e.what();
    if (const auto c = what.rfind(": "); c != std::string::npos) what = what.substr(c + 2);
    throw ConfigError(std::vector<Violation>{{"", "syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what}});
  }
}

ExperimentConfig validate_config(std::string_view text) { return validate_parsed_config(parse_config_text(text)); }

ExperimentConfig validate_parsed_config(const json& raw) {
  std::vector<Violation> out;
  ExperimentConfig cfg;
  if (!raw.is_object()) throw ConfigError(std::vector<Violation>{{"", "config must be a JSON object"}});

  static const std::vector<std::string> top_keys{"experiment", "params", "output", "threads", "seed"};
  for (const auto& [k, v] : raw.items())
    if (std::find(top_keys.begin(), top_keys.end(), k) == top_keys.end()) out.push_back({k, unknown_key_message(k, top_keys)});

  const Registered* reg = nullptr;
  if (!raw.contains("experiment")) {
    out.push_back({"experiment", "is required"});
  } else if (!raw["experiment"].is_string()) {
    out.push_back({"experiment", "must be a string"});
  } else {
    cfg.experiment = raw["experiment"].get<std::string>();
    reg = find_registered(cfg.experiment);
    if (!reg) {
      std::vector<std::string> names;
      for (const auto& r : registry()) names.push_back(r.info.name);
      out.push_back({"experiment", "\"" + cfg.experiment + "\" " + unknown_key_message(cfg.experiment, names)});
    }
  }

  if (raw.contains("threads")) {
    const auto& t = raw["threads"];
    if (!t.is_number_integer() || t.get<std::int64_t>() < 1 || t.get<std::int64_t>() > 1024)
      out.push_back({"threads", "must be an integer in [1, 1024]"});
    else cfg.threads = static_cast<unsigned>(t.get<std::int64_t>());
  }
  if (raw.contains("seed")) {
    const auto& s = raw["seed"];
    if (!s.is_number_unsigned()) out.push_back({"seed", "must be a non-negative integer"});
    else cfg.seed = s.get<std::uint64_t>();
  }
  if (raw.contains("output")) {
    const auto& o = raw["output"];
    if (!o.is_object()) {
      out.push_back({"output", "must be an object"});
    } else {
      static const std::vector<std::string> out_keys{"dir", "format"};
      for (const auto& [k, v] : o.items()) {
        if (std::find(out_keys.begin(), out_keys.end(), k) == out_keys.end())
          out.push_back({"output." + k, unknown_key_message(k, out_keys)});
      }
      if (o.contains("dir")) {
        if (!o["dir"].is_string() || o["dir"].get<std::string>().empty()) out.push_back({"output.dir", "must be a non-empty string"});
        else cfg.out_dir = o["dir"].get<std::string>();
      }
      if (o.contains("format")) {
        if (!o["format"].is_string() || (o["format"] != "csv" && o["format"] != "json"))
          out.push_back({"output.format", "must be one of: csv, json"});
        else cfg.format = o["format"].get<std::string>();
      }
    }
  }

  json given = json::object();
  if (raw.contains("params")) {
    if (!raw["params"].is_object()) out.push_back({"params", "must be an object"});
    else given = raw["params"];
  }
  if (reg) {
    std::vector<std::string> names;
    for (const auto& p : reg->info.params) names.push_back(p.name);
    for (const auto& [k, v] : given.items())
      if (std::find(names.begin(), names.end(), k) == names.end())
        out.push_back({"params." + k, unknown_key_message(k, names)});
    bool complete = true;
    for (const auto& p : reg->info.params) {
      const json v = given.contains(p.name) ? check_param(p, given[p.name], "params." + p.name, out) : p.default_value;
      if (v.is_null()) complete = false;
      cfg.params[p.name] = v;
    }
    if (complete) {
      for (const auto& [lo, hi] : reg->info.ranges)
        if (!(cfg.params[lo].get<double>() < cfg.params[hi].get<double>()))
          out.push_back({"params." + hi, "must be > params." + lo});
      if (reg->extra) reg->extra(cfg.params, out);
    }
  }
  if (!out.empty()) throw ConfigError(std::move(out));
  return cfg;
}

json ExperimentConfig::echo() const {
  json o{{"format", format}};
  if (out_dir) o["dir"] = *out_dir;
  return {{"experiment", experiment}, {"params", params}, {"output", o}, {"threads", threads}, {"seed", seed}};
}

std::uint64_t ExperimentConfig::hash() const {
  const json core{{"experiment", experiment}, {"params", params}, {"seed", seed}};
  return io::fnv1a(core.dump());
}

// ---------------------------------------------------------------------------
// Reports

bool ExperimentReport::all_pass() const {
  return !error && std::all_of(checks.begin(), checks.end(), [](const CheckOutcome& c) { return c.pass; });
}

int ExperimentReport::exit_code() const {
  if (error) return kExitRuntimeError;
  return all_pass() ? kExitPass : kExitCheckFailed;
}

json ExperimentReport::to_json() const {
  json cs = json::array();
  for (const auto& c : checks) {
    json j{{"name", c.name}, {"pass", c.pass}, {"measured", c.measured}, {"relation", c.relation}};
    j["threshold"] = c.relation == "holds" ? json(nullptr) : json(c.threshold);
    if (!c.detail.empty()) j["detail"] = c.detail;
    cs.push_back(std::move(j));
  }
  json manifest = json::array();
  for (const auto& a : artifacts)
    manifest.push_back({{"file", a.name}, {"bytes", a.content.size()}, {"fnv1a64", io::hex64(io::fnv1a(a.content))}});
  const char* status = error ? "error" : (all_pass() ? "pass" : "fail");
  return {{"experiment", experiment},
          {"config", config},
          {"config_hash", config_hash},
          {"convention_version", io::kConventionVersion},
          {"status", status},
          {"exit_code", exit_code()},
          {"checks", std::move(cs)},
          {"results", results},
          {"manifest", std::move(manifest)},
          {"partial", partial},
          {"error", error ? json(*error) : json(nullptr)}};
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  ExperimentReport rep;
  rep.experiment = config.experiment;
  rep.config = config.echo();
  rep.config_hash = io::hex64(config.hash());
  const Registered* reg = find_registered(config.experiment);
  if (!reg) {
    rep.error = "unknown experiment \"" + config.experiment + "\"";
    rep.partial = true;
    return rep;
  }
  Run run(config, rep);
  try {
    reg->run(run);
  } catch (const Error& e) {
    rep.error = "experiment " + config.experiment + ": " + std::string(to_string(e.kind())) + ": " + e.what();
    rep.partial = true;
  } catch (const std::exception& e) {
    rep.error = "experiment " + config.experiment + ": " + e.what();
    rep.partial = true;
  }
  return rep;
}

std::filesystem::path resolve_out_dir(const std::optional<std::string>& flag, const ExperimentConfig& config) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  if (config.out_dir) return *config.out_dir;
  return kDefaultOutDir;
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorKind::InvalidArgument, "cannot create output directory " + dir.string() + ": " + ec.message());
  for (const auto& a : report.artifacts) io::write_file(dir / a.name, a.content);
  io::write_file(dir / "report.json", report.to_json().dump(2) + "\n");
}

}  // namespace tsol::harness
