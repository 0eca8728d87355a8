#include "tsol/grid.hpp"

#include <algorithm>
#include <string>

namespace tsol {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::BoundaryProximity: return "boundary-proximity";
    case ErrorKind::NotGraphical: return "not-graphical";
    case ErrorKind::InsufficientExtent: return "insufficient-extent";
    case ErrorKind::WindowTooSmall: return "window-too-small";
    case ErrorKind::NonPositiveCurvature: return "non-positive-curvature";
    case ErrorKind::Numerical: return "numerical";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

void PolarGrid::validate() const {
  require(n_theta >= 8 && n_theta % 2 == 0, ErrorKind::InvalidArgument, "n_theta must be even and >= 8");
  require(n_axial >= 2, ErrorKind::InvalidArgument, "axial grid needs at least 2 nodes");
  require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, ErrorKind::InvalidArgument,
          "axial range must be finite and increasing");
}

GridFunction::GridFunction(PolarGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  grid_.validate();
  require(values_.size() == grid_.size(), ErrorKind::InvalidArgument, "value count does not match grid");
  for (double v : values_)
    if (!std::isfinite(v)) fail(ErrorKind::NonFinite, "non-finite grid value");
}

CylindricalGraphField::CylindricalGraphField(double z_min, double z_max, std::size_t n_z, std::size_t n_theta,
                                             std::vector<double> radii)
    : CylindricalGraphField(GridFunction(PolarGrid{z_min, z_max, n_z, n_theta}, std::move(radii))) {}

CylindricalGraphField::CylindricalGraphField(GridFunction radii) : data_(std::move(radii)) {
  for (double r : data_.values())
    if (!(r > 0.0)) fail(ErrorKind::InvalidArgument, "cylindrical graph radius must be positive");
}

VerticalGraphField::VerticalGraphField(double r_in, double r_out, std::size_t n_rho, std::size_t n_theta,
                                       std::vector<double> heights)
    : VerticalGraphField(GridFunction(PolarGrid{r_in, r_out, n_rho, n_theta}, std::move(heights))) {}

VerticalGraphField::VerticalGraphField(GridFunction heights) : data_(std::move(heights)) {
  require(grid().lo > 0.0, ErrorKind::InvalidArgument, "annulus inner radius must be positive");
}

ProfileCurve::ProfileCurve(Parametrization mode, std::vector<ProfileSample> samples, std::optional<std::size_t> neck)
    : mode_(mode), samples_(std::move(samples)), neck_(neck) {
  require(samples_.size() >= 2, ErrorKind::InvalidArgument, "profile needs at least two samples");
  for (const auto& s : samples_) {
    if (!std::isfinite(s.z) || !std::isfinite(s.r) || !std::isfinite(s.dz) || !std::isfinite(s.dr))
      fail(ErrorKind::NonFinite, "non-finite profile sample");
    require(s.r > 0.0, ErrorKind::InvalidArgument, "profile radius must be positive");
  }
  for (std::size_t k = 1; k < samples_.size(); ++k)
    require(samples_[k].param > samples_[k - 1].param, ErrorKind::InvalidArgument,
            "profile parameter must be strictly increasing");
  if (mode_ == Parametrization::Arclength) {
    for (std::size_t k = 1; k < samples_.size(); ++k) {
      const auto& a = samples_[k - 1];
      const auto& b = samples_[k];
      const double turn = std::abs(std::atan2(a.dr * b.dz - a.dz * b.dr, a.dr * b.dr + a.dz * b.dz));
      require(turn <= kMaxTurningAngle, ErrorKind::InvalidArgument, "profile turns too sharply between samples");
    }
  }
  if (neck_) require(*neck_ < samples_.size(), ErrorKind::InvalidArgument, "neck index out of range");
}

ProfileCurve ProfileCurve::graph(std::span<const double> z, std::span<const double> r, std::span<const double> dr_dz) {
  require(z.size() == r.size() && z.size() == dr_dz.size(), ErrorKind::InvalidArgument,
          "profile arrays differ in length");
  std::vector<ProfileSample> s(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) s[k] = ProfileSample{z[k], z[k], r[k], 1.0, dr_dz[k]};
  return ProfileCurve(Parametrization::GraphInZ, std::move(s), std::nullopt);
}

ProfileCurve ProfileCurve::arclength(std::vector<ProfileSample> samples, std::optional<std::size_t> neck) {
  return ProfileCurve(Parametrization::Arclength, std::move(samples), neck);
}

std::size_t ProfileCurve::locate(double z) const {
  require(mode_ == Parametrization::GraphInZ, ErrorKind::NotGraphical, "profile is not a graph over z");
  require(z >= z_front() && z <= z_back(), ErrorKind::InvalidArgument, "z outside profile range");
  auto it = std::upper_bound(samples_.begin(), samples_.end(), z,
                             [](double v, const ProfileSample& s) { return v < s.z; });
  std::size_t k = static_cast<std::size_t>(it - samples_.begin());
  return std::clamp<std::size_t>(k, 1, samples_.size() - 1) - 1;
}

double ProfileCurve::radius_at(double z) const {
  const std::size_t k = locate(z);
  const auto& a = samples_[k];
  const auto& b = samples_[k + 1];
  const double h = b.z - a.z;
  const double t = (z - a.z) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * a.r + (t3 - 2 * t2 + t) * h * a.dr + (-2 * t3 + 3 * t2) * b.r +
         (t3 - t2) * h * b.dr;
}

double ProfileCurve::slope_at(double z) const {
  const std::size_t k = locate(z);
  const auto& a = samples_[k];
  const auto& b = samples_[k + 1];
  const double h = b.z - a.z;
  const double t = (z - a.z) / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * a.r + (-6 * t2 + 6 * t) * b.r) / h + (3 * t2 - 4 * t + 1) * a.dr +
         (3 * t2 - 2 * t) * b.dr;
}

}  // namespace tsol
