#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "oracles.hpp"
#include "tsol/error.hpp"
#include "tsol/soliton.hpp"
#include "tsol/symmetry.hpp"

using namespace tsol;
using namespace tsol::symmetry;

namespace {

CylindricalGraphField offset_cylinder(double R, double x0, double y0, double z_lo, double z_hi, std::size_t n_z,
                                      std::size_t n_theta) {
  return CylindricalGraphField::sample(
      z_lo, z_hi, n_z, n_theta, [&](double, double th) { return oracle::offset_circle_radius(R, x0, y0, th); });
}

// Polar radius about the origin of the curve c + rs(phi) e(phi), found by
// bracketing the parameter whose point lies on the ray at angle theta.
template <class Shape>
double shifted_polar_radius(Shape rs, double cx, double cy, double theta) {
  auto point = [&](double phi) {
    const double r = rs(phi);
    return std::pair{cx + r * std::cos(phi), cy + r * std::sin(phi)};
  };
  auto cross = [&](double phi) {
    const auto [px, py] = point(phi);
    return py * std::cos(theta) - px * std::sin(theta);
  };
  boost::math::tools::eps_tolerance<double> tol(52);
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(cross, theta - 1.0, theta + 1.0, tol, iters);
  const auto [px, py] = point(0.5 * (a + b));
  return std::hypot(px, py);
}

// sup over the curve of |u kappa| for the polar curve r = 1 + a cos 2 phi
// about its own centre, by dense sampling of the closed forms.
double mode2_sup_uH(double a) {
  double m = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double p = kTwoPi * k / n;
    const double r = 1 + a * std::cos(2 * p), rp = -2 * a * std::sin(2 * p), rpp = -4 * a * std::cos(2 * p);
    const double q = r * r + rp * rp;
    const double u = -r * rp / std::sqrt(q);
    const double kappa = (r * r + 2 * rp * rp - r * rpp) / std::pow(q, 1.5);
    m = std::max(m, std::abs(u * kappa));
  }
  return m;
}

CylindricalGraphField bowl_field(double z_lo, double z_hi, std::size_t n_z, std::size_t n_theta) {
  soliton::PhiOptions o;
  o.h_max = 0.05;
  const auto traj = soliton::bowl_trajectory(std::sqrt(2 * z_hi) + 5, 1e-10, o);
  const auto prof = soliton::profile_from_phi(traj, 0.0);
  return CylindricalGraphField::sample(z_lo, z_hi, n_z, n_theta, [&](double z, double) { return prof.radius_at(z); });
}

}  // namespace

TEST_CASE("fit_axis recovers the axis of an offset cylinder") {
  for (auto [x0, y0] : {std::pair{0.1, 0.0}, std::pair{-0.05, 0.07}}) {
    const auto f = offset_cylinder(std::numbers::sqrt2, x0, y0, 0.0, 10.0, 11, 512);
    const auto est = fit_axis(f, {2.0, 8.0});
    CHECK(std::abs(est.offset.x0 - x0) <= 1e-6);
    CHECK(std::abs(est.offset.y0 - y0) <= 1e-6);
    CHECK(est.sup_u <= 1e-8);
    CHECK(est.sup_u <= est.sup_u_origin);
    CHECK(est.sup_u_origin == doctest::Approx(std::hypot(x0, y0)).epsilon(1e-3));
  }
}

TEST_CASE("fit_axis on axisymmetric and mode-2 fields") {
  const auto axi = CylindricalGraphField::sample(1.0, 20.0, 39, 64, [](double z, double) { return std::sqrt(2 * z); });
  const auto e0 = fit_axis(axi, {3.0, 18.0});
  CHECK(std::hypot(e0.offset.x0, e0.offset.y0) <= 1e-14);
  CHECK(e0.sup_u <= 1e-14);

  const auto m2 = CylindricalGraphField::sample(
      8.0, 22.0, 29, 128, [](double z, double th) { return std::sqrt(2 * z) + 0.01 * std::cos(2 * th); });
  const auto e2 = fit_axis(m2, {10.0, 20.0});
  CHECK(std::hypot(e2.offset.x0, e2.offset.y0) <= 1e-10);
  CHECK(e2.sup_u == doctest::Approx(e2.sup_u_origin).epsilon(1e-8));
  // Brute-force sweep: no small offset lowers sup |u| at first order.
  const auto pts = geometry::interior_points(m2);
  auto sup_at = [&](double x, double y) {
    double m = 0.0;
    for (const auto& p : pts) m = std::max(m, std::abs(geometry::rotation_function(p, {x, y})));
    return m;
  };
  const double base = sup_at(0.0, 0.0);
  for (int k = 0; k < 8; ++k) {
    const double a = kTwoPi * k / 8;
    CHECK(sup_at(1e-3 * std::cos(a), 1e-3 * std::sin(a)) >= base);
  }
}

TEST_CASE("fit_axis accepts band edges between nodes") {
  const auto f = offset_cylinder(std::numbers::sqrt2, 0.08, -0.03, 0.0, 10.0, 11, 256);
  const auto est = fit_axis(f, {2.3, 7.6});
  CHECK(std::abs(est.offset.x0 - 0.08) <= 1e-6);
  CHECK(std::abs(est.offset.y0 + 0.03) <= 1e-6);
  const auto snapped = fit_axis(f, {3.0, 7.0});
  CHECK(est.offset.x0 == snapped.offset.x0);
  CHECK(est.offset.y0 == snapped.offset.y0);
}

TEST_CASE("fit_axis is idempotent under recentering") {
  auto shape = [](double p) { return 2.0 + 0.01 * std::cos(2 * p) + 0.004 * std::sin(3 * p); };
  const auto f = CylindricalGraphField::sample(
      0.0, 6.0, 7, 1024, [&](double, double th) { return shifted_polar_radius(shape, 0.15, -0.1, th); });
  const auto est = fit_axis(f, {2.0, 4.0});
  CHECK(std::hypot(est.offset.x0 - 0.15, est.offset.y0 + 0.1) <= 2e-3);
  const auto again = fit_axis(recenter(f, est.offset), {2.0, 4.0});
  CHECK(std::hypot(again.offset.x0, again.offset.y0) <= 1e-9);
}

TEST_CASE("fit_axis preconditions") {
  const auto f = offset_cylinder(1.0, 0.0, 0.0, 0.0, 10.0, 11, 32);
  CHECK_THROWS_AS(fit_axis(f, {0.0, 5.0}), Error);
  try {
    fit_axis(f, {1.0, 9.0});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BoundaryProximity);
  }
  const auto saddle =
      CylindricalGraphField::sample(0.0, 10.0, 11, 64, [](double, double th) { return 1 + 0.3 * std::cos(4 * th); });
  try {
    fit_axis(saddle, {3.0, 7.0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonPositiveCurvature);
  }
}

TEST_CASE("recenter maps an offset circle to a centred one") {
  const auto f = offset_cylinder(1.5, 0.2, -0.3, 0.0, 4.0, 5, 2048);
  const auto g = recenter(f, {0.2, -0.3});
  double err = 0.0;
  for (double r : g.data().values()) err = std::max(err, std::abs(r - 1.5));
  CHECK(err <= 1e-10);
}

TEST_CASE("vertical symmetry check on cylinders") {
  // Radius 1: the capsule spans heights [zbar - 10, zbar + 110].
  const TranslatingFlow centred(offset_cylinder(1.0, 0.0, 0.0, -25.0, 145.0, 35, 256));
  const auto r0 = vertical_symmetry_check(centred, {0.0, 5, 0}, 1e-12);
  CHECK(r0.pass);
  REQUIRE(r0.witness.has_value());
  CHECK(std::hypot(r0.witness->axis.x0, r0.witness->axis.y0) <= 1e-12);
  CHECK(r0.h_positive);
  CHECK(r0.points > 0);

  const TranslatingFlow offset(offset_cylinder(1.0, 0.2, -0.1, -25.0, 145.0, 35, 2048));
  const auto r1 = vertical_symmetry_check(offset, {0.0, 5, 5}, 1e-6);
  CHECK(r1.pass);
  REQUIRE(r1.witness.has_value());
  CHECK(std::abs(r1.witness->axis.x0 - 0.2) <= 1e-6);
  CHECK(std::abs(r1.witness->axis.y0 + 0.1) <= 1e-6);

  const TranslatingFlow shortwin(offset_cylinder(1.0, 0.0, 0.0, -15.0, 50.0, 14, 64));
  try {
    vertical_symmetry_check(shortwin, {0.0, 3, 0}, 0.1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::WindowTooSmall);
  }
}

TEST_CASE("vertical symmetry check measures a planted mode-2 defect") {
  // Amplitude a with sup |u H| = 0.01 about the shape's centre.
  boost::math::tools::eps_tolerance<double> tol(50);
  std::uintmax_t iters = 200;
  const auto [lo, hi] =
      boost::math::tools::toms748_solve([](double a) { return mode2_sup_uH(a) - 0.01; }, 1e-4, 0.05, tol, iters);
  const double a = 0.5 * (lo + hi);
  auto shape = [a](double p) { return 1 + a * std::cos(2 * p); };
  const TranslatingFlow flow(CylindricalGraphField::sample(
      -25.0, 145.0, 35, 1024, [&](double, double th) { return shifted_polar_radius(shape, 0.3, 0.1, th); }));

  const auto fail = vertical_symmetry_check(flow, {0.0, 5, 0}, 0.005);
  CHECK_FALSE(fail.pass);
  CHECK_FALSE(fail.witness.has_value());
  CHECK(fail.h_positive);
  CHECK(fail.measured == doctest::Approx(0.01).epsilon(0.02));
  CHECK(std::abs(fail.closest.axis.x0 - 0.3) <= 1e-3);
  CHECK(std::abs(fail.closest.axis.y0 - 0.1) <= 1e-3);

  // Pass at eps implies pass at every larger eps.
  bool passed = false;
  for (double eps : {0.002, 0.005, 0.0099, 0.0105, 0.02, 0.1, 1.0}) {
    const auto r = vertical_symmetry_check(flow, {0.0, 5, 0}, eps);
    if (passed) CHECK(r.pass);
    passed = passed || r.pass;
    CHECK(r.measured == doctest::Approx(fail.measured));
  }
  CHECK(passed);
}

TEST_CASE("vertical symmetry check flags non-positive mean curvature") {
  const TranslatingFlow flow(
      CylindricalGraphField::sample(-10.0, 20.0, 31, 256, [](double, double th) { return 1 + 0.3 * std::cos(4 * th); }));
  const auto r = vertical_symmetry_check(flow, {0.0, 8, 0}, 10.0);
  CHECK_FALSE(r.pass);
  CHECK_FALSE(r.h_positive);
  CHECK(r.measured >= 0.0);

  // Base point on a dent, where H itself is negative.
  const auto r2 = vertical_symmetry_check(flow, {0.0, 8, 32}, 10.0);
  CHECK_FALSE(r2.pass);
  CHECK_FALSE(r2.h_positive);
}

TEST_CASE("vertical symmetry check on a sampled flow") {
  auto slices = [](double half) {
    return SampledFlow(
        [half](double t) -> ChartField {
          return offset_cylinder(std::sqrt(2 * (1 - t)), 0.05, 0.02, -half, half, 41, 2048);
        },
        9);
  };
  // H = 1/sqrt 2 at t = 0, so the ball has radius 10 sqrt 2.
  const auto r = vertical_symmetry_check(slices(20.0), {0.0, 20, 0}, 1e-6);
  CHECK(r.pass);
  REQUIRE(r.witness.has_value());
  CHECK(std::abs(r.witness->axis.x0 - 0.05) <= 1e-6);
  CHECK(std::abs(r.witness->axis.y0 - 0.02) <= 1e-6);
  CHECK_THROWS_AS(vertical_symmetry_check(slices(10.0), {0.0, 20, 0}, 1e-6), Error);
}

TEST_CASE("cylindricality of exact shrinking cylinders") {
  const SampledFlow flow(
      [](double t) -> ChartField { return offset_cylinder(std::sqrt(2 * (1 - t)), 0.0, 0.0, -15.0, 15.0, 31, 32); },
      2);
  const auto r = vertical_cylindricality_check(flow, {0.0, 15, 0}, 1e-10);
  CHECK(r.pass);
  REQUIRE(r.witness.has_value());
  CHECK(r.witness->lambda == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.witness->shift.x() == doctest::Approx(std::numbers::sqrt2));
  CHECK(std::abs(r.witness->shift.y()) <= 1e-12);
  CHECK(r.order == 2);
  CHECK(r.measured <= 1e-10);
}

TEST_CASE("a plane is never vertically cylindrical") {
  const TranslatingFlow plane(VerticalGraphField::sample(1.0, 80.0, 159, 64, [](double, double) { return 0.0; }));
  for (double eps : {0.01, 0.1, 0.5}) {
    const auto r = vertical_cylindricality_check(plane, {0.0, 38, 0}, eps);
    CHECK_FALSE(r.pass);
    CHECK(r.measured > 1.0);
  }
}

TEST_CASE("bowl ends become cylindrical with height") {
  // The radius opens like sqrt(2 z), which on a window of rescaled height 10
  // leaves a relative deviation of order 10 / sqrt(zbar).
  std::vector<double> measured;
  const std::vector<double> heights{200.0, 800.0, 3200.0, 12800.0};
  for (double zbar : heights) {
    const double z_lo = zbar - 12 * std::sqrt(zbar), z_hi = 50 * zbar + 20 * std::sqrt(zbar) + 100;
    const double dz = 0.1 * std::sqrt(zbar);
    const auto f = bowl_field(z_lo, z_hi, static_cast<std::size_t>((z_hi - z_lo) / dz) + 1, 16);
    const TranslatingFlow flow(f);
    const auto i = static_cast<std::size_t>(std::round((zbar - z_lo) / f.dz()));
    const auto r = vertical_cylindricality_check(flow, {0.0, i, 0}, 0.1);
    measured.push_back(r.measured);
    CHECK(r.closest.lambda == doctest::Approx(std::numbers::sqrt2 * flow.point(0, i, 0).mean_curvature).epsilon(0.1));
  }
  for (std::size_t k = 1; k < measured.size(); ++k) CHECK(measured[k] < measured[k - 1]);
  CHECK(measured.front() > 0.1);
  CHECK(measured.back() <= 0.1);
  // First passing height for eps = 0.3 lies below the one for eps = 0.1.
  auto threshold = [&](double eps) {
    for (std::size_t k = 0; k < measured.size(); ++k)
      if (measured[k] <= eps) return heights[k];
    return std::numeric_limits<double>::infinity();
  };
  CHECK(threshold(0.3) < threshold(0.1));
}

TEST_CASE("cylindricality window errors") {
  const TranslatingFlow small(offset_cylinder(1.0, 0.0, 0.0, -3.0, 3.0, 7, 16));
  CHECK_THROWS_AS(vertical_cylindricality_check(small, {0.0, 3, 0}, 0.1), Error);
  CylindricalityOptions bad;
  bad.order = 3;
  const TranslatingFlow flow(offset_cylinder(1.0, 0.0, 0.0, -30.0, 30.0, 61, 16));
  CHECK_THROWS_AS(cylindricality_distance(flow, {0.0, 30, 0}, 1.0, Vec3(std::numbers::sqrt2, 0, 0), bad), Error);
}

TEST_CASE("neck decay schedule") {
  const auto s400 = neck_decay_schedule(2.0, 0.01, 100.0, 400, 20);
  CHECK(s400.contraction == doctest::Approx(0.99913432).epsilon(1e-8));
  CHECK(std::abs(s400.contraction - 0.99913) <= 1e-5);
  CHECK(s400.contraction_holds);
  CHECK(s400.rows_contract);
  CHECK(s400.rows.front().height == 100.0);
  CHECK(s400.rows.front().bound == 0.01);
  CHECK(s400.decay_exponent == 399.5);
  CHECK(s400.growth_threshold == doctest::Approx(4.0 / (1 - std::exp2(-1.0 / 400))));
  for (std::size_t j = 1; j < s400.rows.size(); ++j) {
    CHECK(s400.rows[j].height > s400.rows[j - 1].height);
    CHECK(s400.rows[j].bound < s400.rows[j - 1].bound);
  }
  CHECK(s400.u_bound(100.0) == doctest::Approx(2 * 0.01 * std::sqrt(200.0)));

  const auto s2 = neck_decay_schedule(1.0, 0.1, 10.0, 2, 4);
  CHECK(s2.contraction == doctest::Approx(0.85355339).epsilon(1e-8));
  for (int q = 2; q <= 400; ++q) {
    const auto s = neck_decay_schedule(1.0, 0.1, 10.0, q, 3);
    CHECK(s.contraction < 1.0);
    CHECK(s.rows_contract);
  }
  CHECK_THROWS_AS(neck_decay_schedule(1.0, 0.1, 10.0, 1.5, 3), Error);
  CHECK_THROWS_AS(neck_decay_schedule(0.0, 0.1, 10.0, 4, 3), Error);
  CHECK_THROWS_AS(neck_decay_schedule(1.0, -0.1, 10.0, 4, 3), Error);
  CHECK_THROWS_AS(neck_decay_schedule(1.0, 0.1, 0.0, 4, 3), Error);
}

TEST_CASE("axis drift summation") {
  const double z0 = 10.0, dz = 0.5;
  std::vector<AxisOffset> axes;
  for (int k = 0; z0 + dz * k <= 320.0; ++k) axes.push_back({std::pow(z0 + dz * k, -4.0), 0.0});
  const auto rep = axis_drift_sum(axes, z0, dz);
  CHECK(rep.summable);
  CHECK(std::hypot(rep.limit.x0, rep.limit.y0) <= 1e-9);
  CHECK(rep.tail_bound == doctest::Approx(1e-4).epsilon(0.5));
  CHECK(rep.tail_bound <= 2 * rep.integral_bound);
  CHECK(rep.integral_bound <= 2 * rep.tail_bound);
  CHECK(rep.rate_fit.p == doctest::Approx(5.0).epsilon(0.02));

  const std::vector<AxisOffset> still(50, AxisOffset{0.3, -0.2});
  const auto c = axis_drift_sum(still, 2.0, 1.0);
  CHECK(c.summable);
  CHECK(c.total_drift == 0.0);
  CHECK(c.limit == AxisOffset{0.3, -0.2});

  std::vector<AxisOffset> wander;
  for (int k = 0; k < 400; ++k) wander.push_back({2 * std::sqrt(1.0 + k), 0.0});
  CHECK_FALSE(axis_drift_sum(wander, 1.0, 1.0).summable);
  CHECK_THROWS_AS(axis_drift_sum(std::vector<AxisOffset>{{0, 0}}, 1.0, 1.0), Error);
}

TEST_CASE("parabolic rescaling") {
  const auto f = CylindricalGraphField::sample(1.0, 11.0, 41, 32,
                                               [](double z, double th) { return std::sqrt(2 * z) + 0.1 * std::cos(th); });
  const auto id = parabolic_rescale(f, {});
  REQUIRE(id.n_z() == f.n_z() - 2);
  double change = 0.0;
  for (std::size_t i = 0; i < id.n_z(); ++i)
    for (std::size_t j = 0; j < id.n_theta(); ++j) change = std::max(change, std::abs(id(i, j) - f(i + 1, j)));
  CHECK(change <= 1e-10);
  CHECK(id.z_min() == doctest::Approx(f.z(1)));

  const double R = 3.0;
  const auto cyl = offset_cylinder(R, 0.0, 0.0, -5.0, 5.0, 11, 16);
  RescaleSpec spec;
  spec.lambda = std::numbers::sqrt2 / R;
  const auto small = parabolic_rescale(cyl, spec);
  for (double r : small.data().values()) CHECK(r == doctest::Approx(std::numbers::sqrt2).epsilon(1e-14));

  // Moving the centre off the axis resamples about the new axis.
  const auto shifted = offset_cylinder(R, 0.4, -0.2, -5.0, 5.0, 11, 1024);
  RescaleSpec move;
  move.center = Vec3(0.4, -0.2, 0.0);
  const auto back = parabolic_rescale(shifted, move);
  for (double r : back.data().values()) CHECK(std::abs(r - R) <= 1e-9);

  spec.lambda = 1.0;
  spec.t = -100.0;
  CHECK_THROWS_AS(parabolic_rescale(cyl, spec, PolarGrid{-1.0, 1.0, 5, 16}), Error);
}

TEST_CASE("bowl blow-downs approach the shrinking cylinder") {
  const auto f = bowl_field(2.0, 1100.0, 21961, 8);
  double previous = std::numeric_limits<double>::infinity();
  for (double T : {10.0, 100.0, 1000.0}) {
    RescaleSpec spec;
    spec.lambda = 1.0 / std::sqrt(T);
    spec.t = -1.0;
    const auto g = parabolic_rescale(f, spec, PolarGrid{-1.0, 1.0, 21, 8});
    double dist = 0.0;
    for (double r : g.data().values()) dist = std::max(dist, std::abs(r - std::numbers::sqrt2));
    CHECK(dist < previous);
    previous = dist;
  }
  CHECK(previous < 0.05);
}

TEST_CASE("decay exponent fit") {
  std::vector<double> z, u, w;
  for (double x = 4.0; x <= 256.0; x *= 1.05) {
    z.push_back(x);
    u.push_back(3 * std::pow(x, -7.0));
    w.push_back(std::pow(x, -7.0) * (1 + 0.1 * std::sin(std::log(x))));
  }
  const auto a = decay_exponent_fit(z, u);
  CHECK(a.C == doctest::Approx(3.0).epsilon(0.02));
  CHECK(a.p == doctest::Approx(7.0).epsilon(0.02));
  CHECK_FALSE(a.exact_symmetry);
  const auto b = decay_exponent_fit(z, w);
  CHECK(b.p >= 6.7);
  CHECK(b.p <= 7.3);
  const std::vector<double> zeros(z.size(), 0.0);
  const auto c = decay_exponent_fit(z, zeros);
  CHECK(c.exact_symmetry);
  std::vector<double> neg = u;
  neg[3] = -1e-9;
  CHECK_THROWS_AS(decay_exponent_fit(z, neg), Error);
  neg[3] = 0.0;
  CHECK_THROWS_AS(decay_exponent_fit(z, neg), Error);
  CHECK_THROWS_AS(decay_exponent_fit(std::vector<double>{4.0, 5.0}, std::vector<double>{1.0, 0.5}), Error);
}
