#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tsol/soliton.hpp"

using namespace tsol;
using namespace tsol::soliton;
namespace frozen = oracle::frozen;

namespace {

double value_at(const PhiTrajectory& t, double s) {
  for (std::size_t k = 0; k < t.size(); ++k)
    if (t.s[k] == s) return t.phi[k];
  FAIL("sample not found");
  return NAN;
}

PhiOptions at(std::vector<double> pts) {
  PhiOptions o;
  o.output_points = std::move(pts);
  return o;
}

}  // namespace

TEST_CASE("unperturbed trajectory against the frozen oracle") {
  const auto t = integrate_phi(PhiEnvelope{}, 10.0, 9.9, 200.0, 1e-12, at({50, 100, 150}));
  REQUIRE(t.outcome == PhiOutcome::Completed);
  CHECK(t.s.back() == 200.0);
  CHECK(value_at(t, 50) == doctest::Approx(frozen::phi_50).epsilon(1e-11));
  CHECK(value_at(t, 100) == doctest::Approx(frozen::phi_100).epsilon(1e-11));
  CHECK(value_at(t, 150) == doctest::Approx(frozen::phi_150).epsilon(1e-11));
  CHECK(t.phi.back() == doctest::Approx(frozen::phi_200).epsilon(1e-11));
  CHECK(std::abs(value_at(t, 100) - (100 - 0.01)) <= 1e-2);
}

TEST_CASE("adaptive solution agrees with RK4 Richardson extrapolation") {
  const double ref = oracle::phi_rk4_richardson(10.0, 9.9, 100.0, 20000);
  CHECK(ref == doctest::Approx(frozen::phi_100).epsilon(1e-11));
  const auto t = integrate_phi(PhiEnvelope{}, 10.0, 9.9, 100.0, 1e-12);
  CHECK(std::abs(t.phi.back() - ref) <= 1e-9);
}

TEST_CASE("trajectories launched above the asymptote are re-attracted") {
  const auto t = integrate_phi(PhiEnvelope{}, 10.0, 20.0, 50.0, 1e-12);
  REQUIRE(t.outcome == PhiOutcome::Completed);
  CHECK(std::abs(t.phi.back() - (50 - 1.0 / 50)) <= 0.05);
  CHECK(t.phi.back() == doctest::Approx(frozen::phi_50_from_20).epsilon(1e-11));
}

TEST_CASE("lower comparison field blows up in finite s") {
  const double eps = 0.1, s0 = 10.0, phi0 = 0.5 * s0;
  const auto t = integrate_phi(PhiEquation::lower_comparison(eps), s0, phi0, 100.0, 1e-10);
  CHECK(t.outcome == PhiOutcome::BlowUp);
  // phi = tan(eps (s - s0)/2 + atan phi0)
  const double s_star = s0 + 2.0 / eps * (std::numbers::pi / 2 - std::atan(phi0));
  CHECK(t.blowup_s == doctest::Approx(s_star).epsilon(1e-6));
  CHECK(t.blowup_s < 100.0);
}

TEST_CASE("integrate_phi validates its arguments") {
  CHECK_THROWS_AS(integrate_phi(PhiEnvelope{}, 0.0, 1.0, 2.0, 1e-8), Error);
  CHECK_THROWS_AS(integrate_phi(PhiEnvelope{}, 2.0, 1.0, 2.0, 1e-8), Error);
  CHECK_THROWS_AS(integrate_phi(PhiEnvelope{}, 1.0, 1.0, 2.0, 1e-15), Error);
  CHECK_THROWS_AS(integrate_phi(PhiEnvelope{}, 1.0, 1.0, 2.0, 1e-2), Error);
  PhiEnvelope bad;
  bad.gamma.amplitude = -1.0;
  CHECK_THROWS_AS(integrate_phi(bad, 1.0, 1.0, 2.0, 1e-8), Error);
}

TEST_CASE("halving the tolerance moves phi(s_end) by at most 10 tol") {
  for (double tol : {1e-8, 1e-10, 1e-12}) {
    const double a = integrate_phi(PhiEnvelope{}, 10.0, 9.9, 200.0, tol).phi.back();
    const double b = integrate_phi(PhiEnvelope{}, 10.0, 9.9, 200.0, tol / 2).phi.back();
    CHECK(std::abs(a - b) <= 10 * tol);
  }
}

TEST_CASE("asymptotic diagnostics on the unperturbed trajectory") {
  const auto t = integrate_phi(PhiEnvelope{}, 10.0, 9.9, 200.0, 1e-12);
  const auto rep = asymptotic_diagnostics(t);
  CHECK(rep.band_lo == 100.0);
  CHECK(std::abs(rep.lambda_end + 1) <= 1e-2);
  CHECK(std::abs(rep.mu_end + 2) <= 2e-1);
  CHECK(rep.lambda_end + 1 == doctest::Approx(frozen::lambda_plus_1_200).epsilon(1e-3));
  CHECK(rep.mu_end == doctest::Approx(frozen::mu_200).epsilon(1e-5));
  CHECK(rep.tail_mu == doctest::Approx(-2 - frozen::mu_100).epsilon(1e-3));
  CHECK(rep.remainder_exponent <= -2.7);
  CHECK(rep.remainder_exponent == doctest::Approx(frozen::remainder_exponent_100_200).epsilon(1e-3));
  CHECK_FALSE(rep.degenerate);
  for (std::size_t k = 0; k < rep.s.size(); ++k) {
    CHECK(rep.psi[k] == t.phi[k] - t.s[k]);
    CHECK(rep.lambda[k] == t.s[k] * rep.psi[k]);
  }
}

TEST_CASE("exact asymptote is flagged degenerate") {
  PhiTrajectory t;
  for (int k = 0; k <= 400; ++k) {
    const double s = 10.0 + 0.5 * k;
    t.s.push_back(s);
    t.phi.push_back(s - 1.0 / s);
    t.dphi.push_back(1 + 1 / (s * s));
  }
  const auto rep = asymptotic_diagnostics(t);
  CHECK(rep.degenerate);
  CHECK(std::isnan(rep.remainder_exponent));
  // Only rounding of phi survives: |lambda + 1| ~ eps s^2 and |mu| ~ eps s^3.
  CHECK(std::abs(rep.lambda_end + 1) <= 64 * 2.3e-16 * 200 * 200);
  CHECK(std::abs(rep.mu_end) <= 64 * 2.3e-16 * 200 * 200 * 200);
}

TEST_CASE("asymptotic diagnostics preconditions") {
  const auto blow = integrate_phi(PhiEquation::lower_comparison(0.1), 10.0, 5.0, 100.0, 1e-10);
  CHECK_THROWS_AS(asymptotic_diagnostics(blow), Error);
  const auto shortrun = integrate_phi(PhiEnvelope{}, 10.0, 9.9, 30.0, 1e-10);
  try {
    asymptotic_diagnostics(shortrun);
    FAIL("expected insufficient extent");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientExtent);
  }
}

TEST_CASE("s^-9 envelopes keep the tail tolerances") {
  PhiEnvelope env;
  env.gamma = {1.0, 9.0, 0.0, 0.0};
  env.delta = {1.0, 9.0, 1.3, 0.4};
  const auto rep = asymptotic_diagnostics(integrate_phi(env, 10.0, 9.9, 200.0, 1e-12));
  CHECK(std::abs(rep.lambda_end + 1) <= 1e-2);
  CHECK(std::abs(rep.mu_end + 2) <= 2e-1);
  CHECK(rep.tail_lambda <= 1e-2);
  CHECK(rep.tail_mu <= 2e-1);
}

TEST_CASE("s^-3 envelopes shift lambda by the quasi-static amount") {
  // Balancing the bracket gives phi ~ s (1 + gamma)(1 - s delta), so
  // lambda + 1 ~ s^2 gamma - s^3 delta: the delta term does not decay.
  PhiEnvelope delta_only;
  delta_only.delta = {0.1, 3.0, 0.0, 0.0};
  auto rep = asymptotic_diagnostics(integrate_phi(delta_only, 10.0, 9.9, 200.0, 1e-12));
  CHECK(rep.lambda_end + 1 == doctest::Approx(-0.1).epsilon(5e-3));
  PhiEnvelope gamma_only;
  gamma_only.gamma = {0.1, 3.0, 0.0, 0.0};
  rep = asymptotic_diagnostics(integrate_phi(gamma_only, 10.0, 9.9, 200.0, 1e-12));
  CHECK(rep.lambda_end + 1 == doctest::Approx(0.1 / 200 + oracle::frozen::lambda_plus_1_200).epsilon(5e-2));
  CHECK(std::abs(rep.lambda_end + 1) <= 1e-2);
  CHECK(rep.mu_end + 2 == doctest::Approx(0.1 * 200).epsilon(5e-2));
}

TEST_CASE("comparison bounds on randomized launches") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> s0d(5.0, 20.0), off(-0.5, 3.0);
  const std::vector<double> eps{0.1, 0.05};
  for (int trial = 0; trial < 20; ++trial) {
    const double s0 = s0d(rng);
    const auto t = integrate_phi(PhiEnvelope{}, s0, s0 + off(rng), 200.0, 1e-10);
    const auto rep = comparison_bounds(t, s0, eps);
    REQUIRE(rep.upper_onset.has_value());
    CHECK(rep.upper_propagates);
    for (const auto& s_eps : rep.lower_onset) REQUIRE(s_eps.has_value());
    CHECK(*rep.lower_onset[0] <= *rep.lower_onset[1]);
    CHECK(rep.final_band_psi_ratio <= 1.0);
  }
}

TEST_CASE("profile from phi satisfies the graph equation") {
  const auto t = integrate_phi(PhiEnvelope{}, 10.0, 9.9, 60.0, 1e-12, {.h_max = 0.02});
  const auto profile = profile_from_phi(t, 0.0);
  const auto res = est1_residual(profile);
  CHECK(res.max_abs() <= 1e-6);
  CHECK(monotone_from(profile) == profile.z_front());
  auto samples = profile.samples();
  for (std::size_t k = 1; k < samples.size(); ++k) CHECK(samples[k].r > samples[k - 1].r);
}

TEST_CASE("constant phi gives a linear profile") {
  PhiTrajectory t;
  for (int k = 0; k <= 10; ++k) {
    t.s.push_back(1.0 + 0.3 * k);
    t.phi.push_back(1.0);
    t.dphi.push_back(0.0);
  }
  const auto p = profile_from_phi(t, 2.0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    CHECK(p.samples()[k].z == doctest::Approx(2.0 + (t.s[k] - 1.0)).epsilon(1e-14));
    CHECK(p.samples()[k].dr == 1.0);
  }
  t.phi[4] = -0.1;
  try {
    profile_from_phi(t, 0.0);
    FAIL("expected not-graphical");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotGraphical);
  }
}

TEST_CASE("bowl branch from the tip against the frozen oracle") {
  const auto t = bowl_trajectory(100.0, 1e-12, at({20, 50}));
  const auto p = profile_from_phi(t, bowl_tip_height(t.s.front()));
  const auto s = p.samples();
  REQUIRE(s.size() == 4);
  CHECK(1.0 / s[1].dr == doctest::Approx(frozen::bowl_phi_20).epsilon(1e-10));
  CHECK(1.0 / s[2].dr == doctest::Approx(frozen::bowl_phi_50).epsilon(1e-10));
  CHECK(1.0 / s[3].dr == doctest::Approx(frozen::bowl_phi_100).epsilon(1e-10));
  // Only three output intervals: the Hermite quadrature needs dense samples.
  const auto dense = bowl_trajectory(100.0, 1e-12, {.h_max = 0.05});
  const auto pd = profile_from_phi(dense, bowl_tip_height(dense.s.front()));
  CHECK(pd.z_back() == doctest::Approx(frozen::bowl_z_100).epsilon(1e-9));
  CHECK(pd.z_back() - 5000.0 + std::log(100.0) == doctest::Approx(frozen::bowl_F_100).epsilon(1e-6));
  CHECK(pd.radius_at(frozen::bowl_z_50) == doctest::Approx(50.0).epsilon(1e-8));
  CHECK(monotone_from(pd) == pd.z_front());
}

TEST_CASE("arclength shooting near the axis reproduces the bowl") {
  const double s_tip = 1e-2;
  const double z0 = bowl_tip_height(s_tip);
  const double phi_tip = s_tip / 2 + std::pow(s_tip, 3) / 32;
  const auto arc = integrate_profile_arclength(z0, s_tip, phi_tip, 1.0, 60.0, 1e-11);
  CHECK(arc.front_end == ProfileEnd::Completed);
  CHECK(arc.back_end == ProfileEnd::AxisCrossing);
  CHECK(arc.necks.empty());
  const auto& all = arc.curve.samples();
  std::size_t start = 0;
  while (all[start].param < 0.0) ++start;
  const auto graph = graph_section(arc.curve, start);
  CHECK(count_level_crossings(arc.curve, 40.0) == 1);

  const auto bowl = profile_from_phi(bowl_trajectory(12.0, 1e-12, {.h_max = 0.01}), z0);
  double worst = 0.0;
  for (double z = 1.0; z < std::min(graph.z_back(), bowl.z_back()); z += 0.5)
    worst = std::max(worst, std::abs(graph.radius_at(z) - bowl.radius_at(z)));
  CHECK(worst <= 1e-6);
}

TEST_CASE("translating catenoid: two sheets over a high plane") {
  const auto arc = integrate_profile_arclength(0.0, 1.0, 1.0, 0.0, 80.0, 1e-10);
  CHECK(arc.front_end == ProfileEnd::Completed);
  CHECK(arc.back_end == ProfileEnd::Completed);
  REQUIRE(arc.curve.neck().has_value());
  CHECK(arc.curve.samples()[*arc.curve.neck()].param == 0.0);
  CHECK(arc.necks.size() == 1);
  CHECK(count_level_crossings(arc.curve, 50.0) == 2);
  const auto& s = arc.curve.samples();
  CHECK(s.front().z > 50.0);
  CHECK(s.back().z > 50.0);
  CHECK(s.front().dr < 0.0);
  CHECK(s.back().dr > 0.0);
}

TEST_CASE("vertical cylinder start departs from the cylinder") {
  const double r = 5.0;
  ArclengthOptions o;
  o.both_directions = false;
  o.h_max = 1e-4;
  const auto arc = integrate_profile_arclength(0.0, r, 1.0, 0.0, 1e-3, 1e-12, o);
  const auto& s = arc.curve.samples();
  const double dtheta = std::atan2(s[1].dz, s[1].dr) - std::atan2(s[0].dz, s[0].dr);
  const double curvature = dtheta / (s[1].param - s[0].param);
  // The cylinder has zero meridian curvature; the translator equation asks for -1/r.
  CHECK(curvature == doctest::Approx(-1.0 / r).epsilon(1e-3));
}

TEST_CASE("monotone_from") {
  std::vector<double> z, r, dr;
  for (int k = 0; k <= 100; ++k) {
    z.push_back(1.0 + 0.05 * k);
    r.push_back(std::sqrt(2 * z.back()));
    dr.push_back(1.0 / r.back());
  }
  CHECK(monotone_from(ProfileCurve::graph(z, r, dr)) == 1.0);
  for (std::size_t k = 0; k < z.size(); ++k)
    if (z[k] >= 2.0 && z[k] < 3.0) dr[k] = -0.1;
  const double zs = monotone_from(ProfileCurve::graph(z, r, dr));
  CHECK(std::abs(zs - 3.0) <= 0.05 + 1e-12);
  std::fill(dr.begin(), dr.end(), -1.0);
  CHECK(std::isinf(monotone_from(ProfileCurve::graph(z, r, dr))));
}
