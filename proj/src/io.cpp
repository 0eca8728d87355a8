#include "tsol/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include "tsol/error.hpp"

namespace tsol::io {

using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  require(res.ec == std::errc() && res.ptr == text.data() + text.size(), ErrorKind::InvalidArgument,
          "not a number: '" + std::string(text) + "'");
  return v;
}

void Table::add_row(std::vector<double> row) {
  require(row.size() == columns.size(), ErrorKind::InvalidArgument, "table row width does not match its header");
  rows.push_back(std::move(row));
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_number(row[c]);
    }
    out += '\n';
  }
  return out;
}

json to_json(const Table& table) {
  json rows = json::array();
  for (const auto& r : table.rows) rows.push_back(r);
  return {{"columns", table.columns}, {"rows", std::move(rows)}};
}

namespace {

const PolarGrid& grid_of(const symmetry::ChartField& f) {
  return std::visit([](const auto& x) -> const PolarGrid& { return x.grid(); }, f);
}

const char* chart_name(const symmetry::ChartField& f) {
  return std::holds_alternative<CylindricalGraphField>(f) ? "cylindrical" : "vertical";
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto p = s.find(sep, start);
    out.push_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

}  // namespace

std::string field_to_csv(const symmetry::ChartField& field) {
  const PolarGrid& g = grid_of(field);
  std::string out = "# tsol-field chart=";
  out += chart_name(field);
  out += " lo=" + format_number(g.lo) + " hi=" + format_number(g.hi) + " n_axial=" + std::to_string(g.n_axial) +
         " n_theta=" + std::to_string(g.n_theta) + " convention=" + std::to_string(kConventionVersion) + "\n";
  out += std::holds_alternative<CylindricalGraphField>(field) ? "z" : "rho";
  for (std::size_t j = 0; j < g.n_theta; ++j) out += ",theta_" + std::to_string(j);
  out += '\n';
  std::visit(
      [&](const auto& f) {
        for (std::size_t i = 0; i < g.n_axial; ++i) {
          out += format_number(g.axial(i));
          for (std::size_t j = 0; j < g.n_theta; ++j) out += "," + format_number(f(i, j));
          out += '\n';
        }
      },
      field);
  return out;
}

symmetry::ChartField field_from_csv(std::string_view text) {
  auto lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  require(lines.size() >= 2 && lines[0].starts_with("# tsol-field "), ErrorKind::InvalidArgument,
          "field CSV must start with a '# tsol-field' metadata line");
  std::string chart;
  PolarGrid g;
  bool have_lo = false, have_hi = false;
  int convention = -1;
  for (auto tok : split(lines[0].substr(13), ' ')) {
    if (tok.empty() || tok == "\r") continue;
    const auto eq = tok.find('=');
    require(eq != std::string_view::npos, ErrorKind::InvalidArgument, "malformed field metadata token");
    const auto key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "chart") chart = std::string(val);
    else if (key == "lo") g.lo = parse_number(val), have_lo = true;
    else if (key == "hi") g.hi = parse_number(val), have_hi = true;
    else if (key == "n_axial") g.n_axial = static_cast<std::size_t>(parse_number(val));
    else if (key == "n_theta") g.n_theta = static_cast<std::size_t>(parse_number(val));
    else if (key == "convention") convention = static_cast<int>(parse_number(val));
  }
  require(chart == "cylindrical" || chart == "vertical", ErrorKind::InvalidArgument, "unknown field chart");
  require(have_lo && have_hi && g.n_axial > 0 && g.n_theta > 0, ErrorKind::InvalidArgument,
          "field metadata is missing grid entries");
  require(convention == kConventionVersion, ErrorKind::InvalidArgument, "unsupported field convention version");
  g.validate();
  require(lines.size() == g.n_axial + 2, ErrorKind::InvalidArgument, "field CSV row count does not match n_axial");
  std::vector<double> values;
  values.reserve(g.size());
  for (std::size_t i = 0; i < g.n_axial; ++i) {
    const auto cells = split(lines[i + 2], ',');
    require(cells.size() == g.n_theta + 1, ErrorKind::InvalidArgument,
            "field CSV row " + std::to_string(i) + " has the wrong width");
    const double a = parse_number(cells[0]);
    require(std::abs(a - g.axial(i)) <= 1e-9 * std::max(1.0, std::abs(a)), ErrorKind::InvalidArgument,
            "field CSV axial coordinate does not match the grid");
    for (std::size_t j = 0; j < g.n_theta; ++j) values.push_back(parse_number(cells[j + 1]));
  }
  GridFunction data(g, std::move(values));
  if (chart == "cylindrical") return CylindricalGraphField(std::move(data));
  return VerticalGraphField(std::move(data));
}

json field_descriptor(const symmetry::ChartField& field) {
  const PolarGrid& g = grid_of(field);
  const bool cyl = std::holds_alternative<CylindricalGraphField>(field);
  return {{"grid",
           {{"chart", chart_name(field)}, {"lo", g.lo}, {"hi", g.hi}, {"n_axial", g.n_axial}, {"n_theta", g.n_theta}}},
          {"units",
           {{"axial", cyl ? "z (length)" : "rho (length)"},
            {"theta", "radian"},
            {"value", cyl ? "radius r(z, theta)" : "height h(rho, theta)"}}},
          {"convention_version", kConventionVersion}};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::InvalidArgument, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::InvalidArgument, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  require(static_cast<bool>(out), ErrorKind::InvalidArgument, "short write to " + path.string());
}

symmetry::ChartField load_field(const std::filesystem::path& path) { return field_from_csv(read_file(path)); }

Table trajectory_table(const soliton::PhiTrajectory& traj) {
  Table t{{"s", "phi", "psi", "lambda", "mu"}, {}};
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double s = traj.s[k], psi = traj.phi[k] - s;
    t.add_row({s, traj.phi[k], psi, s * psi, s * s * (s * psi + 1)});
  }
  return t;
}

Table asymptotic_table(const soliton::AsymptoticReport& rep) {
  Table t{{"s", "psi", "lambda", "mu"}, {}};
  for (std::size_t k = 0; k < rep.s.size(); ++k) t.add_row({rep.s[k], rep.psi[k], rep.lambda[k], rep.mu[k]});
  return t;
}

Table profile_table(const ProfileCurve& profile) {
  Table t{{"param", "z", "r", "dz", "dr"}, {}};
  for (const auto& s : profile.samples()) t.add_row({s.param, s.z, s.r, s.dz, s.dr});
  return t;
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json to_json(const AxisOffset& a) { return json::array({a.x0, a.y0}); }

json asymptotic_summary(const soliton::PhiTrajectory& traj, const soliton::AsymptoticReport& rep) {
  return {{"s_end", traj.s.back()},
          {"phi_end", traj.phi.back()},
          {"lambda_end", rep.lambda_end},
          {"mu_end", rep.mu_end},
          {"tail_lambda", rep.tail_lambda},
          {"tail_mu", rep.tail_mu},
          {"tail_psi_scaled", rep.tail_psi_scaled},
          {"remainder_exponent", rep.remainder_exponent},
          {"band", json::array({rep.band_lo, rep.band_hi})},
          {"degenerate", rep.degenerate},
          {"blowup", traj.outcome == soliton::PhiOutcome::BlowUp},
          {"blowup_s", traj.blowup_s}};
}

json to_json(const soliton::ComparisonReport& rep) {
  json lower = json::array();
  for (const auto& v : rep.lower_onset) lower.push_back(v ? json(*v) : json(nullptr));
  return {{"upper_onset", rep.upper_onset ? json(*rep.upper_onset) : json(nullptr)},
          {"upper_propagates", rep.upper_propagates},
          {"epsilons", rep.epsilons},
          {"lower_onset", std::move(lower)},
          {"final_band_psi_ratio", rep.final_band_psi_ratio}};
}

json residual_summary(const residual::ResidualField& res) {
  std::size_t active = 0;
  for (auto m : res.mask) active += m != 0;
  return {{"max_abs", res.max_abs()},
          {"max_abs_defect", res.max_abs_defect()},
          {"active_nodes", active},
          {"grid", {{"lo", res.grid.lo}, {"hi", res.grid.hi}, {"n_axial", res.grid.n_axial}, {"n_theta", res.grid.n_theta}}}};
}

json to_json(const fit::PowerFit& fit) {
  json bands = json::array();
  for (const auto& b : fit.bands) bands.push_back({{"lo", b.lo}, {"hi", b.hi}, {"sup", b.sup}, {"at", b.at}, {"count", b.count}});
  return {{"C", fit.C}, {"p", fit.p}, {"all_zero", fit.all_zero}, {"bands", std::move(bands)}};
}

json to_json(const residual::DecayReport& rep) {
  return {{"order", rep.order}, {"C", rep.C()}, {"p", rep.p()}, {"identically_zero", rep.identically_zero()},
          {"fit", to_json(rep.fit)}};
}

json to_json(const residual::AsymptoticsFit& fit) {
  return {{"c", fit.c},
          {"d", fit.d},
          {"log_coefficient", fit.log_coefficient},
          {"remainder_bound", fit.remainder_bound},
          {"divergent", fit.divergent},
          {"s_min", fit.s_min},
          {"s_max", fit.s_max}};
}

json to_json(const symmetry::AxisEstimate& est) {
  return {{"offset", to_json(est.offset)},
          {"sup_u", est.sup_u},
          {"sup_u_origin", est.sup_u_origin},
          {"band", json::array({est.band.lo, est.band.hi})}};
}

json to_json(const symmetry::CheckResult& res) {
  auto cand = [](const symmetry::Candidate& c) {
    return json{{"axis", to_json(c.axis)}, {"lambda", c.lambda}, {"shift", to_json(c.shift)}};
  };
  return {{"pass", res.pass},
          {"epsilon", res.epsilon},
          {"measured", res.measured},
          {"order", res.order},
          {"h_positive", res.h_positive},
          {"points", res.points},
          {"closest", cand(res.closest)},
          {"witness", res.witness ? cand(*res.witness) : json(nullptr)}};
}

json to_json(const symmetry::DecaySchedule& sched) {
  json rows = json::array();
  for (const auto& r : sched.rows) rows.push_back({{"j", r.j}, {"height", r.height}, {"bound", r.bound}});
  return {{"L", sched.L},
          {"epsilon1", sched.epsilon1},
          {"Lambda", sched.Lambda},
          {"q", sched.q},
          {"contraction", sched.contraction},
          {"contraction_holds", sched.contraction_holds},
          {"growth_threshold", sched.growth_threshold},
          {"rows_contract", sched.rows_contract},
          {"decay_exponent", sched.decay_exponent},
          {"rows", std::move(rows)}};
}

json to_json(const symmetry::DriftReport& rep) {
  return {{"summable", rep.summable},
          {"limit", to_json(rep.limit)},
          {"total_drift", rep.total_drift},
          {"tail_bound", rep.tail_bound},
          {"integral_bound", rep.integral_bound},
          {"z_bar", rep.z_bar},
          {"rate_fit", to_json(rep.rate_fit)}};
}

json to_json(const symmetry::DecayFit& fit) {
  return {{"C", fit.C}, {"p", fit.p}, {"exact_symmetry", fit.exact_symmetry}, {"fit", to_json(fit.fit)}};
}

json to_json(const density::DensityValue& v) {
  return {{"value", v.value}, {"truncation_bound", v.truncation_bound}, {"truncated", v.truncated}};
}

json to_json(const density::EntropyEstimate& est) {
  return {{"sup", est.sup},
          {"argmax_center", to_json(est.argmax_center)},
          {"argmax_scale", est.argmax_scale},
          {"any_truncated", est.any_truncated},
          {"entries", est.table.size()}};
}

Table entropy_table(const density::EntropyEstimate& est, std::span<const Vec3> centers) {
  Table t{{"center_x", "center_y", "center_z", "scale", "value", "truncation_bound", "truncated"}, {}};
  for (const auto& e : est.table) {
    const Vec3& c = centers[e.center];
    t.add_row({c.x(), c.y(), c.z(), e.scale, e.density.value, e.density.truncation_bound, e.density.truncated ? 1.0 : 0.0});
  }
  return t;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int k = 15; k >= 0; --k, h >>= 4) s[static_cast<std::size_t>(k)] = digits[h & 0xf];
  return s;
}

}  // namespace tsol::io
