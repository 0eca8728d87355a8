#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "tsol/grid.hpp"

namespace tsol {

using Vec3 = Eigen::Vector3d;

/// Pointwise surface data. Curvatures are measured against the inner normal
/// n_in = orientation * normal (axis-ward on cylindrical ends, upward on
/// vertical graphs), so H = kappa_max + kappa_min = 1/R on a cylinder and
/// translators satisfy H = <tau, n_in>.
struct SurfacePointData {
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double mean_curvature = 0.0;
  double norm_A2 = 0.0;
  double kappa_max = 0.0;
  double kappa_min = 0.0;
  double orientation = 1.0;

  Vec3 inner_normal() const { return orientation * normal; }
};

struct AxisOffset {
  double x0 = 0.0;
  double y0 = 0.0;
  bool operator==(const AxisOffset&) const = default;
};

/// Central-difference partial derivatives of a chart function at one node.
/// For cylindrical charts (a, b) = (theta, z); for vertical charts (a, b) =
/// (rho, theta). Names follow the cylindrical case.
struct CylindricalDerivatives {
  double r, r_t, r_z, r_tt, r_tz, r_zz;
};
struct VerticalDerivatives {
  double h, h_r, h_t, h_rr, h_rt, h_tt;
};

namespace geometry {

inline constexpr std::size_t kBoundaryBand = 2;

bool is_interior(const PolarGrid& grid, std::size_t i);

CylindricalDerivatives derivatives(const CylindricalGraphField& field, std::size_t i, std::size_t j);
VerticalDerivatives derivatives(const VerticalGraphField& field, std::size_t i, std::size_t j);

/// Outward unit normal (positive radial component), H and |A|^2 at node
/// (i, j). Throws BoundaryProximity within two cells of a z-boundary.
SurfacePointData normal_and_curvature_cylindrical(const CylindricalGraphField& field, std::size_t i, std::size_t j);

/// Upward unit normal (<nu, tau> > 0), same curvature conventions.
SurfacePointData normal_and_curvature_vertical(const VerticalGraphField& field, std::size_t i, std::size_t j);

/// Surface data from a parametrization X(a, b) and its derivatives. The
/// normal is X_a x X_b normalised; `inner_sign` chooses n_in = +/- normal.
SurfacePointData surface_point(const Vec3& X, const Vec3& Xa, const Vec3& Xb, const Vec3& Xaa, const Vec3& Xab,
                               const Vec3& Xbb, double inner_sign);

/// u = <J_{(x0,y0)}(X), nu> with J = (x - x0) d/dy - (y - y0) d/dx.
double rotation_function(const SurfacePointData& p, const AxisOffset& axis);

/// All nodes at least two cells from the axial boundaries, row-major.
std::vector<SurfacePointData> interior_points(const CylindricalGraphField& field);
std::vector<SurfacePointData> interior_points(const VerticalGraphField& field);

/// Revolves a graph-in-z profile: r(z, theta) = f(z) on a uniform grid of
/// n_z nodes over the profile's z-range (n_z = sample count if omitted).
CylindricalGraphField revolve_profile(const ProfileCurve& profile, std::size_t n_theta,
                                      std::optional<std::size_t> n_z = std::nullopt);

}  // namespace geometry
}  // namespace tsol
