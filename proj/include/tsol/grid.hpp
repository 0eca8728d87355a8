#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "tsol/error.hpp"

namespace tsol {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Node-centred uniform grid: an axial coordinate (z for cylindrical charts,
/// the polar radius for vertical charts) times a periodic angle. The angular
/// direction has no duplicated seam column: theta_j = 2*pi*j/n_theta.
struct PolarGrid {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n_axial = 0;
  std::size_t n_theta = 0;

  double step() const { return (hi - lo) / static_cast<double>(n_axial - 1); }
  double dtheta() const { return kTwoPi / static_cast<double>(n_theta); }
  double axial(std::size_t i) const { return lo + step() * static_cast<double>(i); }
  double theta(std::size_t j) const { return dtheta() * static_cast<double>(j); }
  std::size_t size() const { return n_axial * n_theta; }
  std::size_t index(std::size_t i, std::size_t j) const { return i * n_theta + j; }
  std::size_t wrap(std::ptrdiff_t j) const {
    const auto n = static_cast<std::ptrdiff_t>(n_theta);
    return static_cast<std::size_t>(((j % n) + n) % n);
  }
  bool operator==(const PolarGrid&) const = default;

  /// Throws unless n_theta is even and >= 8, n_axial >= 2 and lo < hi.
  void validate() const;
};

/// Scalar samples on a PolarGrid. No sign constraint; values must be finite.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(PolarGrid grid, std::vector<double> values);

  template <class F>
  static GridFunction sample(const PolarGrid& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.n_axial; ++i)
      for (std::size_t j = 0; j < grid.n_theta; ++j) v[grid.index(i, j)] = f(grid.axial(i), grid.theta(j));
    return GridFunction(grid, std::move(v));
  }

  const PolarGrid& grid() const { return grid_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[grid_.index(i, j)]; }
  double wrapped(std::size_t i, std::ptrdiff_t j) const { return values_[grid_.index(i, grid_.wrap(j))]; }
  std::span<const double> values() const { return values_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * grid_.n_theta, grid_.n_theta);
  }

 private:
  PolarGrid grid_;
  std::vector<double> values_;
};

/// r(z, theta) > 0 on a periodic-in-theta grid: the cylindrical end of a
/// surface written as {(r cos theta, r sin theta, z)}.
class CylindricalGraphField {
 public:
  CylindricalGraphField(double z_min, double z_max, std::size_t n_z, std::size_t n_theta,
                        std::vector<double> radii);
  explicit CylindricalGraphField(GridFunction radii);

  template <class F>
  static CylindricalGraphField sample(double z_min, double z_max, std::size_t n_z, std::size_t n_theta, F&& r) {
    return CylindricalGraphField(GridFunction::sample(PolarGrid{z_min, z_max, n_z, n_theta}, r));
  }

  const PolarGrid& grid() const { return data_.grid(); }
  const GridFunction& data() const { return data_; }
  double z_min() const { return grid().lo; }
  double z_max() const { return grid().hi; }
  std::size_t n_z() const { return grid().n_axial; }
  std::size_t n_theta() const { return grid().n_theta; }
  double dz() const { return grid().step(); }
  double dtheta() const { return grid().dtheta(); }
  double z(std::size_t i) const { return grid().axial(i); }
  double theta(std::size_t j) const { return grid().theta(j); }
  double operator()(std::size_t i, std::size_t j) const { return data_(i, j); }
  double wrapped(std::size_t i, std::ptrdiff_t j) const { return data_.wrapped(i, j); }

 private:
  GridFunction data_;
};

/// h(rho, theta) on an annulus R_in <= rho <= R_out: a graph over the
/// horizontal plane minus a disc.
class VerticalGraphField {
 public:
  VerticalGraphField(double r_in, double r_out, std::size_t n_rho, std::size_t n_theta,
                     std::vector<double> heights);
  explicit VerticalGraphField(GridFunction heights);

  template <class F>
  static VerticalGraphField sample(double r_in, double r_out, std::size_t n_rho, std::size_t n_theta, F&& h) {
    return VerticalGraphField(GridFunction::sample(PolarGrid{r_in, r_out, n_rho, n_theta}, h));
  }

  const PolarGrid& grid() const { return data_.grid(); }
  const GridFunction& data() const { return data_; }
  double r_in() const { return grid().lo; }
  double r_out() const { return grid().hi; }
  std::size_t n_rho() const { return grid().n_axial; }
  std::size_t n_theta() const { return grid().n_theta; }
  double drho() const { return grid().step(); }
  double dtheta() const { return grid().dtheta(); }
  double rho(std::size_t i) const { return grid().axial(i); }
  double theta(std::size_t j) const { return grid().theta(j); }
  double operator()(std::size_t i, std::size_t j) const { return data_(i, j); }
  double wrapped(std::size_t i, std::ptrdiff_t j) const { return data_.wrapped(i, j); }

 private:
  GridFunction data_;
};

enum class Parametrization { GraphInZ, Arclength };

/// One sample of a meridian curve in the (r, z) half-plane. `param` is z in
/// graph mode and arclength otherwise; (dz, dr) is d/dparam of (z, r), so in
/// graph mode dz == 1 and dr == f'(z).
struct ProfileSample {
  double param = 0.0;
  double z = 0.0;
  double r = 0.0;
  double dz = 0.0;
  double dr = 0.0;
};

class ProfileCurve {
 public:
  static constexpr double kMaxTurningAngle = 0.7853981633974483;  // pi/4

  static ProfileCurve graph(std::span<const double> z, std::span<const double> r, std::span<const double> dr_dz);
  static ProfileCurve arclength(std::vector<ProfileSample> samples, std::optional<std::size_t> neck = std::nullopt);

  Parametrization parametrization() const { return mode_; }
  std::span<const ProfileSample> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  std::optional<std::size_t> neck() const { return neck_; }

  /// Graph mode only: cubic Hermite interpolation of f and f' at z.
  double radius_at(double z) const;
  double slope_at(double z) const;
  double z_front() const { return samples_.front().z; }
  double z_back() const { return samples_.back().z; }

 private:
  ProfileCurve(Parametrization mode, std::vector<ProfileSample> samples, std::optional<std::size_t> neck);
  std::size_t locate(double z) const;

  Parametrization mode_ = Parametrization::GraphInZ;
  std::vector<ProfileSample> samples_;
  std::optional<std::size_t> neck_;
};

}  // namespace tsol
