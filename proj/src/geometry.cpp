#include "tsol/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace tsol::geometry {

bool is_interior(const PolarGrid& grid, std::size_t i) {
  return i >= kBoundaryBand && i + kBoundaryBand < grid.n_axial;
}

namespace {

void require_interior(const PolarGrid& grid, std::size_t i, std::size_t j) {
  require(j < grid.n_theta, ErrorKind::InvalidArgument, "theta index out of range");
  require(is_interior(grid, i), ErrorKind::BoundaryProximity, "node is within two cells of an axial boundary");
}

}  // namespace

CylindricalDerivatives derivatives(const CylindricalGraphField& f, std::size_t i, std::size_t j) {
  const double hz = f.dz();
  const double ht = f.dtheta();
  const auto jj = static_cast<std::ptrdiff_t>(j);
  const double c = f(i, j);
  const double zp = f(i + 1, j), zm = f(i - 1, j);
  const double tp = f.wrapped(i, jj + 1), tm = f.wrapped(i, jj - 1);
  const double pp = f.wrapped(i + 1, jj + 1), pm = f.wrapped(i + 1, jj - 1);
  const double mp = f.wrapped(i - 1, jj + 1), mm = f.wrapped(i - 1, jj - 1);
  return CylindricalDerivatives{
      c,
      (tp - tm) / (2 * ht),
      (zp - zm) / (2 * hz),
      (tp - 2 * c + tm) / (ht * ht),
      (pp - pm - mp + mm) / (4 * ht * hz),
      (zp - 2 * c + zm) / (hz * hz),
  };
}

VerticalDerivatives derivatives(const VerticalGraphField& f, std::size_t i, std::size_t j) {
  const double hr = f.drho();
  const double ht = f.dtheta();
  const auto jj = static_cast<std::ptrdiff_t>(j);
  const double c = f(i, j);
  const double rp = f(i + 1, j), rm = f(i - 1, j);
  const double tp = f.wrapped(i, jj + 1), tm = f.wrapped(i, jj - 1);
  const double pp = f.wrapped(i + 1, jj + 1), pm = f.wrapped(i + 1, jj - 1);
  const double mp = f.wrapped(i - 1, jj + 1), mm = f.wrapped(i - 1, jj - 1);
  return VerticalDerivatives{
      c,
      (rp - rm) / (2 * hr),
      (tp - tm) / (2 * ht),
      (rp - 2 * c + rm) / (hr * hr),
      (pp - pm - mp + mm) / (4 * hr * ht),
      (tp - 2 * c + tm) / (ht * ht),
  };
}

SurfacePointData surface_point(const Vec3& X, const Vec3& Xa, const Vec3& Xb, const Vec3& Xaa, const Vec3& Xab,
                               const Vec3& Xbb, double inner_sign) {
  const Vec3 cross = Xa.cross(Xb);
  const Vec3 nu = cross / cross.norm();
  const Vec3 n_in = inner_sign * nu;

  Eigen::Matrix2d g;
  g << Xa.dot(Xa), Xa.dot(Xb), Xa.dot(Xb), Xb.dot(Xb);
  Eigen::Matrix2d b;
  b << Xaa.dot(n_in), Xab.dot(n_in), Xab.dot(n_in), Xbb.dot(n_in);
  const Eigen::Matrix2d shape = g.inverse() * b;

  SurfacePointData p;
  p.position = X;
  p.normal = nu;
  p.orientation = inner_sign;
  p.mean_curvature = shape.trace();
  const double gauss = shape.determinant();
  const double half = 0.5 * p.mean_curvature;
  const double disc = std::sqrt(std::max(0.0, half * half - gauss));
  p.kappa_max = half + disc;
  p.kappa_min = half - disc;
  p.norm_A2 = p.kappa_max * p.kappa_max + p.kappa_min * p.kappa_min;
  return p;
}

SurfacePointData normal_and_curvature_cylindrical(const CylindricalGraphField& field, std::size_t i, std::size_t j) {
  require_interior(field.grid(), i, j);
  const auto d = derivatives(field, i, j);
  const double th = field.theta(j);
  const Vec3 er(std::cos(th), std::sin(th), 0.0);
  const Vec3 et(-std::sin(th), std::cos(th), 0.0);
  const Vec3 ez = Vec3::UnitZ();

  const Vec3 X = d.r * er + field.z(i) * ez;
  const Vec3 Xt = d.r_t * er + d.r * et;
  const Vec3 Xz = d.r_z * er + ez;
  const Vec3 Xtt = (d.r_tt - d.r) * er + 2.0 * d.r_t * et;
  const Vec3 Xtz = d.r_tz * er + d.r_z * et;
  const Vec3 Xzz = d.r_zz * er;
  // X_theta x X_z points away from the axis.
  return surface_point(X, Xt, Xz, Xtt, Xtz, Xzz, -1.0);
}

SurfacePointData normal_and_curvature_vertical(const VerticalGraphField& field, std::size_t i, std::size_t j) {
  require_interior(field.grid(), i, j);
  const auto d = derivatives(field, i, j);
  const double th = field.theta(j);
  const double rho = field.rho(i);
  const Vec3 er(std::cos(th), std::sin(th), 0.0);
  const Vec3 et(-std::sin(th), std::cos(th), 0.0);
  const Vec3 ez = Vec3::UnitZ();

  const Vec3 X = rho * er + d.h * ez;
  const Vec3 Xr = er + d.h_r * ez;
  const Vec3 Xt = rho * et + d.h_t * ez;
  const Vec3 Xrr = d.h_rr * ez;
  const Vec3 Xrt = et + d.h_rt * ez;
  const Vec3 Xtt = -rho * er + d.h_tt * ez;
  // X_rho x X_theta points up.
  return surface_point(X, Xr, Xt, Xrr, Xrt, Xtt, 1.0);
}

double rotation_function(const SurfacePointData& p, const AxisOffset& axis) {
  const double jx = -(p.position.y() - axis.y0);
  const double jy = p.position.x() - axis.x0;
  return jx * p.normal.x() + jy * p.normal.y();
}

std::vector<SurfacePointData> interior_points(const CylindricalGraphField& field) {
  std::vector<SurfacePointData> out;
  for (std::size_t i = kBoundaryBand; i + kBoundaryBand < field.n_z(); ++i)
    for (std::size_t j = 0; j < field.n_theta(); ++j) out.push_back(normal_and_curvature_cylindrical(field, i, j));
  return out;
}

std::vector<SurfacePointData> interior_points(const VerticalGraphField& field) {
  std::vector<SurfacePointData> out;
  for (std::size_t i = kBoundaryBand; i + kBoundaryBand < field.n_rho(); ++i)
    for (std::size_t j = 0; j < field.n_theta(); ++j) out.push_back(normal_and_curvature_vertical(field, i, j));
  return out;
}

CylindricalGraphField revolve_profile(const ProfileCurve& profile, std::size_t n_theta, std::optional<std::size_t> n_z) {
  require(profile.parametrization() == Parametrization::GraphInZ, ErrorKind::NotGraphical,
          "profile is not a graph over z (necks must be handled in arclength form)");
  const std::size_t nz = n_z.value_or(profile.size());
  const PolarGrid grid{profile.z_front(), profile.z_back(), nz, n_theta};
  grid.validate();
  std::vector<double> radii(grid.size());
  for (std::size_t i = 0; i < nz; ++i) {
    const double z = std::min(grid.axial(i), profile.z_back());
    const double r = profile.radius_at(z);
    std::fill_n(radii.begin() + static_cast<std::ptrdiff_t>(i * n_theta), n_theta, r);
  }
  return CylindricalGraphField(GridFunction(grid, std::move(radii)));
}

}  // namespace tsol::geometry
