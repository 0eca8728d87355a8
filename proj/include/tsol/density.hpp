#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "tsol/geometry.hpp"
#include "tsol/grid.hpp"

namespace tsol::density {

struct Plane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
};

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

/// Infinite round cylinder about the line through `axis_point` along `direction`.
struct Cylinder {
  Vec3 axis_point = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
  double radius = 1.0;
};

using AnalyticSurface = std::variant<Plane, Sphere, Cylinder>;
using Surface = std::variant<Plane, Sphere, Cylinder, CylindricalGraphField, VerticalGraphField>;

/// Multiple of rho beyond which the Gaussian weight is dropped.
inline constexpr double kTruncationRadius = 8.0;

struct DensityValue {
  double value = 0.0;
  /// Bound on the dropped tail, 17 K e^-16, with K the area-ratio constant
  /// (area in B(r) <= K pi r^2).
  double truncation_bound = 0.0;
  /// The surface window does not cover B(x0, 8 rho): part of the kernel's
  /// support is missing and the bound is not rigorous.
  bool truncated = false;
};

struct QuadratureOptions {
  std::size_t panels = 8;     ///< composite Gauss-Legendre panels (30 nodes each)
  std::size_t n_angle = 64;   ///< periodic trapezoid nodes
};

/// (4 pi rho^2)^-1 times the integral of exp(-|x - x0|^2 / (4 rho^2)) dA.
DensityValue gaussian_density(const Surface& surface, const Vec3& x0, double rho, const QuadratureOptions& options = {});

struct EntropyEntry {
  std::size_t center = 0;  ///< index into the center grid
  double scale = 0.0;
  DensityValue density;
};

struct EntropyEstimate {
  double sup = 0.0;  ///< grid maximum: a lower bound for the entropy
  Vec3 argmax_center = Vec3::Zero();
  double argmax_scale = 0.0;
  bool any_truncated = false;
  std::vector<EntropyEntry> table;  ///< center-major, scale-minor
};

EntropyEstimate entropy_estimate(const Surface& surface, std::span<const Vec3> centers, std::span<const double> scales,
                                 unsigned threads = 1, const QuadratureOptions& options = {});

}  // namespace tsol::density
