#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Geometry>

#include "doctest.h"
#include "oracles.hpp"
#include "tsol/density.hpp"
#include "tsol/error.hpp"

using namespace tsol;
using namespace tsol::density;

namespace {

const double kCylinderEntropy = std::sqrt(2 * std::numbers::pi / std::numbers::e);

}  // namespace

TEST_CASE("plane density is one") {
  for (double rho : {0.1, 1.0, 7.0}) {
    CHECK(std::abs(gaussian_density(Plane{}, Vec3::Zero(), rho).value - 1.0) <= 1e-6);
    const Plane tilted{Vec3(1, 2, 3), Vec3(1, -1, 2)};
    CHECK(std::abs(gaussian_density(tilted, Vec3(1, 2, 3), rho).value - 1.0) <= 1e-6);
  }
  // Off the plane the value is exp(-d^2 / 4 rho^2), up to the dropped tail.
  CHECK(gaussian_density(Plane{}, Vec3(0, 0, 1), 1.0).value ==
        doctest::Approx(std::exp(-0.25) - std::exp(-16.0)).epsilon(1e-12));
  CHECK(gaussian_density(Plane{}, Vec3(0, 0, 9), 1.0).value == 0.0);
}

TEST_CASE("sphere density matches the one-dimensional oracle") {
  const Sphere S{Vec3::Zero(), 2.0};
  const auto at_centre = gaussian_density(S, Vec3::Zero(), 1.0);
  CHECK(std::abs(at_centre.value - 4 / std::numbers::e) <= 1e-3);
  CHECK(at_centre.value == doctest::Approx(oracle::sphere_density_at_centre(2.0, 1.0)).epsilon(1e-12));
  CHECK_FALSE(at_centre.truncated);
  for (double d : {0.5, 1.9, 3.0}) {
    const auto v = gaussian_density(S, Vec3(0, d, 0), 1.0);
    CHECK(v.value == doctest::Approx(oracle::sphere_density(2.0, d, 1.0)).epsilon(1e-8));
  }
  // Sphere far outside the kernel support.
  CHECK(gaussian_density(S, Vec3(20, 0, 0), 1.0).value == 0.0);
}

TEST_CASE("cylinder density matches the oracle") {
  const Cylinder C{Vec3::Zero(), Vec3::UnitZ(), std::numbers::sqrt2};
  CHECK(std::abs(gaussian_density(C, Vec3::Zero(), 1.0).value - kCylinderEntropy) <= 1e-3);
  CHECK(gaussian_density(C, Vec3::Zero(), 1.0).value ==
        doctest::Approx(oracle::cylinder_density(std::numbers::sqrt2, 0.0, 1.0)).epsilon(1e-6));
  for (double d : {0.7, 2.0}) {
    CHECK(gaussian_density(C, Vec3(d, 0, 5), 1.3).value ==
          doctest::Approx(oracle::cylinder_density(std::numbers::sqrt2, d, 1.3)).epsilon(1e-6));
  }
}

TEST_CASE("density is invariant under scaling and rigid motions") {
  const Sphere S{Vec3(0.3, -0.2, 1.0), 2.0};
  const Vec3 x0(0.9, 0.1, 0.4);
  const double base = gaussian_density(S, x0, 0.8).value;
  for (double lam : {0.25, 3.0}) {
    const Sphere Sl{lam * S.center, lam * S.radius};
    CHECK(std::abs(gaussian_density(Sl, lam * x0, lam * 0.8).value - base) <= 1e-6);
  }
  const Cylinder C{Vec3(1, 0, 0), Vec3::UnitZ(), 1.2};
  const Vec3 y0(0.2, 0.5, -3.0);
  const double cbase = gaussian_density(C, y0, 0.9).value;
  const Eigen::Matrix3d Q = Eigen::AngleAxisd(0.7, Vec3(1, 2, -1).normalized()).toRotationMatrix();
  const Vec3 shift(5, -4, 2);
  const Cylinder Cm{Q * C.axis_point + shift, Q * C.direction, C.radius};
  CHECK(std::abs(gaussian_density(Cm, Q * y0 + shift, 0.9).value - cbase) <= 1e-6);
  const Sphere Sm{Q * S.center + shift, S.radius};
  CHECK(std::abs(gaussian_density(Sm, Q * x0 + shift, 0.8).value - base) <= 1e-6);
  const Plane P{Vec3(0, 0, 1), Vec3(0, 1, 1)};
  const Plane Pm{Q * P.point + shift, Q * P.normal};
  CHECK(std::abs(gaussian_density(Pm, Q * Vec3(1, 1, 1) + shift, 2.0).value -
                 gaussian_density(P, Vec3(1, 1, 1), 2.0).value) <= 1e-6);
}

TEST_CASE("shrinking cylinders have scale-free density") {
  for (double t : {-0.25, -1.0, -9.0}) {
    const Cylinder C{Vec3::Zero(), Vec3::UnitZ(), std::sqrt(-2 * t)};
    CHECK(std::abs(gaussian_density(C, Vec3::Zero(), std::sqrt(-t)).value - kCylinderEntropy) <= 1e-3);
  }
}

TEST_CASE("graph fields reproduce the analytic densities") {
  const auto cyl = CylindricalGraphField::sample(-10.0, 10.0, 201, 64, [](double, double) { return std::numbers::sqrt2; });
  const auto v = gaussian_density(cyl, Vec3::Zero(), 1.0);
  CHECK_FALSE(v.truncated);
  CHECK(std::abs(v.value - gaussian_density(Cylinder{Vec3::Zero(), Vec3::UnitZ(), std::numbers::sqrt2}, Vec3::Zero(), 1.0).value) <= 1e-6);
  CHECK(v.truncation_bound < 1e-5);

  // Scaling the chart by 3 together with x0 and rho.
  const auto big = CylindricalGraphField::sample(-30.0, 30.0, 201, 64, [](double, double) { return 3 * std::numbers::sqrt2; });
  CHECK(std::abs(gaussian_density(big, Vec3(0, 0, 1.5), 3.0).value - gaussian_density(cyl, Vec3(0, 0, 0.5), 1.0).value) <= 1e-6);

  const auto plane = VerticalGraphField::sample(1.0, 50.0, 491, 512, [](double, double) { return 0.0; });
  const auto p = gaussian_density(plane, Vec3(30, 0, 0), 1.0);
  CHECK_FALSE(p.truncated);
  CHECK(std::abs(p.value - 1.0) <= 1e-6);

  const auto short_cyl = CylindricalGraphField::sample(-5.0, 5.0, 51, 32, [](double, double) { return 1.0; });
  CHECK(gaussian_density(short_cyl, Vec3::Zero(), 1.0).truncated);
  CHECK(gaussian_density(plane, Vec3(3, 0, 0), 1.0).truncated);
}

TEST_CASE("entropy estimates and the sphere-cylinder gap") {
  std::vector<Vec3> centers;
  for (double x : {0.0, 0.5, 1.0}) centers.push_back(Vec3(x, 0, 0));
  const std::vector<double> scales{0.5, 0.75, 1.0, 1.5, 2.0};

  const auto ec = entropy_estimate(Cylinder{Vec3::Zero(), Vec3::UnitZ(), std::numbers::sqrt2}, centers, scales);
  CHECK(std::abs(ec.sup - kCylinderEntropy) <= 1e-3);
  CHECK(ec.argmax_center == Vec3::Zero());
  CHECK(ec.argmax_scale == 1.0);
  CHECK(ec.table.size() == centers.size() * scales.size());

  const auto es = entropy_estimate(Sphere{Vec3::Zero(), 2.0}, centers, scales);
  CHECK(std::abs(es.sup - 4 / std::numbers::e) <= 1e-3);
  CHECK(es.argmax_center == Vec3::Zero());
  CHECK(es.argmax_scale == 1.0);

  const auto ep = entropy_estimate(Plane{}, centers, scales);
  for (const auto& e : ep.table) CHECK(std::abs(e.density.value - 1.0) <= 1e-6);
  CHECK(ep.sup < es.sup);
  CHECK(es.sup < ec.sup);

  const auto threaded = entropy_estimate(Cylinder{Vec3::Zero(), Vec3::UnitZ(), std::numbers::sqrt2}, centers, scales, 4);
  for (std::size_t k = 0; k < ec.table.size(); ++k) CHECK(threaded.table[k].density.value == ec.table[k].density.value);
}

TEST_CASE("density preconditions") {
  CHECK_THROWS_AS(gaussian_density(Plane{}, Vec3::Zero(), 0.0), Error);
  CHECK_THROWS_AS(gaussian_density(Sphere{Vec3::Zero(), -1.0}, Vec3::Zero(), 1.0), Error);
  CHECK_THROWS_AS(gaussian_density(Plane{Vec3::Zero(), Vec3::Zero()}, Vec3::Zero(), 1.0), Error);
  const std::vector<Vec3> none;
  const std::vector<double> scales{1.0};
  CHECK_THROWS_AS(entropy_estimate(Plane{}, none, scales), Error);
}
