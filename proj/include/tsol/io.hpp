#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "tsol/density.hpp"
#include "tsol/residual.hpp"
#include "tsol/soliton.hpp"
#include "tsol/symmetry.hpp"

namespace tsol::io {

/// Bumped whenever a sign or orientation convention of the written data changes.
inline constexpr int kConventionVersion = 1;

/// Shortest round-trip decimal form, '.' separator, independent of locale.
/// Non-finite values become "nan", "inf" and "-inf".
std::string format_number(double v);

/// Inverse of format_number; throws InvalidArgument on trailing garbage.
double parse_number(std::string_view text);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
};

std::string to_csv(const Table& table);
nlohmann::json to_json(const Table& table);

/// Field CSV: a "# tsol-field" metadata line, a header row, then one row per
/// axial node holding the axial coordinate followed by the n_theta samples.
std::string field_to_csv(const symmetry::ChartField& field);
symmetry::ChartField field_from_csv(std::string_view text);

/// Grid, units and convention version of a field, for the JSON sidecar.
nlohmann::json field_descriptor(const symmetry::ChartField& field);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
symmetry::ChartField load_field(const std::filesystem::path& path);

Table trajectory_table(const soliton::PhiTrajectory& traj);
Table asymptotic_table(const soliton::AsymptoticReport& rep);
Table profile_table(const ProfileCurve& profile);

nlohmann::json to_json(const Vec3& v);
nlohmann::json to_json(const AxisOffset& a);
nlohmann::json asymptotic_summary(const soliton::PhiTrajectory& traj, const soliton::AsymptoticReport& rep);
nlohmann::json to_json(const soliton::ComparisonReport& rep);
nlohmann::json residual_summary(const residual::ResidualField& res);
nlohmann::json to_json(const fit::PowerFit& fit);
nlohmann::json to_json(const residual::DecayReport& rep);
nlohmann::json to_json(const residual::AsymptoticsFit& fit);
nlohmann::json to_json(const symmetry::AxisEstimate& est);
nlohmann::json to_json(const symmetry::CheckResult& res);
nlohmann::json to_json(const symmetry::DecaySchedule& sched);
nlohmann::json to_json(const symmetry::DriftReport& rep);
nlohmann::json to_json(const symmetry::DecayFit& fit);
nlohmann::json to_json(const density::DensityValue& v);
nlohmann::json to_json(const density::EntropyEstimate& est);
Table entropy_table(const density::EntropyEstimate& est, std::span<const Vec3> centers);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t h);

}  // namespace tsol::io
