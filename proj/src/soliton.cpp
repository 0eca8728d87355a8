#include "tsol/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tsol/fit.hpp"
#include "tsol/rk.hpp"

namespace tsol::soliton {

double EnvelopeTerm::operator()(double s) const {
  if (amplitude == 0.0) return 0.0;
  const double osc = (frequency == 0.0 && phase == 0.0) ? 1.0 : std::cos(frequency * s + phase);
  return amplitude * std::pow(s, -exponent) * osc;
}

void EnvelopeTerm::validate(double min_exponent) const {
  require(std::isfinite(amplitude) && amplitude >= 0.0, ErrorKind::InvalidArgument,
          "envelope amplitude must be finite and >= 0");
  require(std::isfinite(exponent) && exponent > min_exponent, ErrorKind::InvalidArgument,
          "envelope exponent must exceed " + std::to_string(min_exponent));
  require(std::isfinite(frequency) && std::isfinite(phase), ErrorKind::InvalidArgument,
          "envelope oscillation parameters must be finite");
}

double PhiEquation::operator()(double s, double phi) const {
  const double q = 1.0 + phi * phi;
  if (kind == Kind::LowerComparison) return 0.5 * epsilon * q;
  return q * (1.0 + envelope.gamma(s) - (1.0 / s + envelope.delta(s)) * phi);
}

PhiTrajectory integrate_phi(const PhiEquation& equation, double s0, double phi0, double s_end, double tol,
                            const PhiOptions& options) {
  require(std::isfinite(s0) && s0 > 0.0, ErrorKind::InvalidArgument, "s0 must be > 0");
  require(std::isfinite(s_end) && s_end > s0, ErrorKind::InvalidArgument, "s_end must exceed s0");
  require(tol > 1e-14 && tol < 1e-3, ErrorKind::InvalidArgument, "tol must lie in (1e-14, 1e-3)");
  require(std::isfinite(phi0), ErrorKind::NonFinite, "phi0 must be finite");
  equation.envelope.gamma.validate();
  equation.envelope.delta.validate();
  if (equation.kind == PhiEquation::Kind::LowerComparison)
    require(equation.epsilon > 0.0 && equation.epsilon < 1.0, ErrorKind::InvalidArgument,
            "comparison epsilon must lie in (0, 1)");

  std::vector<double> outputs;
  for (double p : options.output_points)
    if (p > s0 && p < s_end) outputs.push_back(p);
  std::sort(outputs.begin(), outputs.end());
  outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());
  const bool dense = options.output_points.empty();

  PhiTrajectory traj;
  traj.tol = tol;
  traj.equation = equation;
  const auto record = [&](double s, double phi, double dphi) {
    traj.s.push_back(s);
    traj.phi.push_back(phi);
    traj.dphi.push_back(dphi);
  };
  record(s0, phi0, equation(s0, phi0));

  rk::Options opt;
  opt.tol = tol;
  opt.h_max = options.h_max;
  opt.landing_points = outputs;
  std::size_t next_out = 0;
  double last_s = s0, last_phi = phi0;
  const auto rhs = [&](double s, const rk::State<1>& y) { return rk::State<1>{equation(s, y[0])}; };
  const auto observer = [&](double s, const rk::State<1>& y, const rk::State<1>& dy) {
    last_s = s;
    last_phi = y[0];
    bool keep = dense || s == s_end;
    while (next_out < outputs.size() && outputs[next_out] <= s) {
      if (outputs[next_out] == s) keep = true;
      ++next_out;
    }
    if (std::abs(y[0]) > options.blowup_threshold) return false;
    if (keep) record(s, y[0], dy[0]);
    return true;
  };
  const rk::Status status = rk::integrate<1>(rhs, s0, rk::State<1>{phi0}, s_end, opt, observer);

  switch (status) {
    case rk::Status::Completed:
      break;
    case rk::Status::Stopped:
      traj.outcome = PhiOutcome::BlowUp;
      traj.blowup_s = last_s;
      break;
    case rk::Status::StepUnderflow:
    case rk::Status::MaxSteps:
      // A solution racing to infinity exhausts the step-size control before
      // reaching the threshold; anything else is a genuine failure.
      if (std::abs(last_phi) > 1e6) {
        traj.outcome = PhiOutcome::BlowUp;
        traj.blowup_s = last_s;
      } else {
        fail(ErrorKind::Numerical, "phi integration stalled at s = " + std::to_string(last_s));
      }
      break;
  }
  return traj;
}

double bowl_tip_height(double s) {
  const double s2 = s * s;
  return s2 / 4.0 + s2 * s2 / 128.0 + s2 * s2 * s2 / 4608.0;
}

PhiTrajectory bowl_trajectory(double s_end, double tol, const PhiOptions& options, double s_tip) {
  require(s_tip > 0.0 && s_tip <= 0.1, ErrorKind::InvalidArgument, "tip launch point must lie in (0, 0.1]");
  const double s3 = s_tip * s_tip * s_tip;
  const double phi_tip = s_tip / 2.0 + s3 / 32.0 + s3 * s_tip * s_tip / 768.0;
  return integrate_phi(PhiEquation::translator(), s_tip, phi_tip, s_end, tol, options);
}

AsymptoticReport asymptotic_diagnostics(const PhiTrajectory& traj) {
  require(traj.outcome == PhiOutcome::Completed, ErrorKind::InvalidArgument,
          "trajectory blew up; asymptotics undefined");
  require(traj.size() >= 2 && traj.s.back() >= 4.0 * traj.s.front(), ErrorKind::InsufficientExtent,
          "trajectory must reach at least 4 * s0");

  AsymptoticReport rep;
  const std::size_t n = traj.size();
  rep.s = traj.s;
  rep.psi.resize(n);
  rep.lambda.resize(n);
  rep.mu.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = traj.s[k];
    rep.psi[k] = traj.phi[k] - s;
    rep.lambda[k] = s * rep.psi[k];
    rep.mu[k] = s * s * (rep.lambda[k] + 1.0);
  }
  rep.lambda_end = rep.lambda.back();
  rep.mu_end = rep.mu.back();
  rep.band_hi = traj.s.back();
  rep.band_lo = 0.5 * rep.band_hi;

  std::vector<double> xs, ys;
  double remainder_max = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = traj.s[k];
    if (s < rep.band_lo) continue;
    rep.tail_lambda = std::max(rep.tail_lambda, std::abs(rep.lambda[k] + 1.0));
    rep.tail_mu = std::max(rep.tail_mu, std::abs(rep.mu[k] + 2.0));
    rep.tail_psi_scaled = std::max(rep.tail_psi_scaled, s * std::abs(rep.psi[k]));
    const double remainder = std::abs(rep.psi[k] + 1.0 / s);
    remainder_max = std::max(remainder_max, remainder);
    if (remainder > 0.0) {
      xs.push_back(std::log(s));
      ys.push_back(std::log(remainder));
    }
  }
  // Rounding floor of phi - s + 1/s near s: anything below it is an exact asymptote.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * rep.band_hi;
  rep.degenerate = remainder_max <= floor;
  if (!rep.degenerate && xs.size() >= 3) rep.remainder_exponent = fit::least_squares_line(xs, ys).slope;
  return rep;
}

ComparisonReport comparison_bounds(const PhiTrajectory& traj, double s_calibrated, std::span<const double> epsilons) {
  require(traj.size() >= 2, ErrorKind::InvalidArgument, "trajectory too short");
  ComparisonReport rep;
  const std::size_t n = traj.size();
  const auto upper = [&](std::size_t k) { return traj.s[k] + std::pow(traj.s[k], -9.0); };

  std::size_t onset = n;
  for (std::size_t k = 0; k < n; ++k)
    if (traj.s[k] >= s_calibrated && traj.phi[k] <= upper(k)) {
      onset = k;
      break;
    }
  if (onset < n) {
    rep.upper_onset = traj.s[onset];
    rep.upper_propagates = true;
    for (std::size_t k = onset; k < n; ++k)
      if (traj.phi[k] > upper(k)) rep.upper_propagates = false;
  }

  for (double eps : epsilons) {
    require(eps > 0.0 && eps < 1.0, ErrorKind::InvalidArgument, "epsilon must lie in (0, 1)");
    rep.epsilons.push_back(eps);
    std::optional<double> s_eps;
    for (std::size_t k = n; k-- > 0;) {
      if (traj.phi[k] < (1.0 - eps) * traj.s[k]) break;
      s_eps = traj.s[k];
    }
    rep.lower_onset.push_back(s_eps);
  }

  const double band_lo = 0.5 * traj.s.back();
  for (std::size_t k = 0; k < n; ++k)
    if (traj.s[k] >= band_lo)
      rep.final_band_psi_ratio =
          std::max(rep.final_band_psi_ratio, std::abs(traj.phi[k] - traj.s[k]) * traj.s[k] / 2.0);
  return rep;
}

std::vector<double> heights(const PhiTrajectory& traj, double z_at_s0) {
  require(traj.size() >= 2, ErrorKind::InvalidArgument, "trajectory too short");
  const std::size_t n = traj.size();
  std::vector<double> z(n);
  z[0] = z_at_s0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double h = traj.s[k + 1] - traj.s[k];
    z[k + 1] = z[k] + 0.5 * h * (traj.phi[k] + traj.phi[k + 1]) + h * h * (traj.dphi[k] - traj.dphi[k + 1]) / 12.0;
  }
  return z;
}

ProfileCurve profile_from_phi(const PhiTrajectory& traj, double z_at_s0) {
  require(traj.size() >= 2, ErrorKind::InvalidArgument, "trajectory too short");
  for (double p : traj.phi)
    require(p > 0.0, ErrorKind::NotGraphical, "phi <= 0: profile is not a graph over z");
  const std::vector<double> z = heights(traj, z_at_s0);
  std::vector<double> dr(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) dr[k] = 1.0 / traj.phi[k];
  return ProfileCurve::graph(z, traj.s, dr);
}

VerticalGraphField vertical_graph_from_phi(const PhiTrajectory& traj, double z_at_s0, double r_in, double r_out,
                                           std::size_t n_rho, std::size_t n_theta) {
  require(r_in >= traj.s.front() && r_out <= traj.s.back(), ErrorKind::InsufficientExtent,
          "trajectory does not cover the annulus");
  const std::vector<double> z = heights(traj, z_at_s0);
  const auto hermite = [&](double s) {
    auto it = std::upper_bound(traj.s.begin(), traj.s.end(), s);
    std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - traj.s.begin()), 1, traj.size() - 1) - 1;
    const double h = traj.s[k + 1] - traj.s[k];
    const double t = (s - traj.s[k]) / h, t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * z[k] + (t3 - 2 * t2 + t) * h * traj.phi[k] + (-2 * t3 + 3 * t2) * z[k + 1] +
           (t3 - t2) * h * traj.phi[k + 1];
  };
  return VerticalGraphField::sample(r_in, r_out, n_rho, n_theta, [&](double rho, double) { return hermite(rho); });
}

double GraphResidual::max_abs() const {
  double m = 0.0;
  for (double v : residual) m = std::max(m, std::abs(v));
  return m;
}

GraphResidual est1_residual(const ProfileCurve& profile, const GraphEnvelope& env) {
  require(profile.parametrization() == Parametrization::GraphInZ, ErrorKind::NotGraphical,
          "profile is not a graph over z");
  require(profile.size() >= 3, ErrorKind::InsufficientExtent, "need at least three samples");
  env.a.validate(1.0);
  env.b.validate(1.0);
  const auto s = profile.samples();
  GraphResidual out;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const double hm = s[k].z - s[k - 1].z;
    const double hp = s[k + 1].z - s[k].z;
    const double fzz =
        (hm * hm * s[k + 1].dr - hp * hp * s[k - 1].dr + (hp * hp - hm * hm) * s[k].dr) / (hm * hp * (hm + hp));
    const double fz = s[k].dr;
    const double z = s[k].z;
    const double rhs = (1.0 + env.a(z)) * fzz / (1.0 + fz * fz) - 1.0 / s[k].r + env.b(z);
    out.z.push_back(z);
    out.residual.push_back(rhs + fz);
  }
  return out;
}

GraphResidual est1_residual_uniform(double z0, double h, std::span<const double> f, const GraphEnvelope& env) {
  require(h > 0.0 && std::isfinite(z0), ErrorKind::InvalidArgument, "grid spacing must be > 0");
  require(f.size() >= 3, ErrorKind::InsufficientExtent, "need at least three samples");
  env.a.validate(1.0);
  env.b.validate(1.0);
  GraphResidual out;
  for (std::size_t k = 1; k + 1 < f.size(); ++k) {
    const double z = z0 + h * static_cast<double>(k);
    const double fz = (f[k + 1] - f[k - 1]) / (2 * h);
    const double fzz = (f[k + 1] - 2 * f[k] + f[k - 1]) / (h * h);
    out.z.push_back(z);
    out.residual.push_back((1.0 + env.a(z)) * fzz / (1.0 + fz * fz) - 1.0 / f[k] + env.b(z) + fz);
  }
  return out;
}

namespace {

struct Branch {
  std::vector<ProfileSample> samples;  // excluding the start point
  ProfileEnd end = ProfileEnd::Completed;
};

Branch shoot(double z0, double r0, double theta0, double length, double tol, double direction,
             const ArclengthOptions& options) {
  Branch b;
  rk::Options opt;
  opt.tol = tol;
  opt.h_max = options.h_max;
  const auto rhs = [direction](double, const rk::State<3>& y) {
    const double r = y[0], th = y[2];
    if (!(r > 0.0)) return rk::State<3>{NAN, NAN, NAN};
    const double c = std::cos(th), sn = std::sin(th);
    return rk::State<3>{direction * c, direction * sn, direction * (c - sn / r)};
  };
  double last_r = r0;
  bool hit_axis = false;
  const auto observer = [&](double t, const rk::State<3>& y, const rk::State<3>&) {
    last_r = y[0];
    if (y[0] < options.axis_tolerance) {
      hit_axis = true;
      return false;
    }
    b.samples.push_back(ProfileSample{direction * t, y[1], y[0], std::sin(y[2]), std::cos(y[2])});
    return true;
  };
  const rk::Status status = rk::integrate<3>(rhs, 0.0, rk::State<3>{r0, z0, theta0}, length, opt, observer);
  if (status == rk::Status::Completed) {
    b.end = ProfileEnd::Completed;
  } else if (hit_axis || last_r < 1e-2) {
    // The profile equation is singular at r = 0, so closing onto the axis
    // shows up as a step-size collapse just before it.
    b.end = ProfileEnd::AxisCrossing;
  } else {
    b.end = ProfileEnd::StepFailure;
  }
  return b;
}

}  // namespace

ArclengthProfile integrate_profile_arclength(double z0, double r0, double dz0, double dr0, double length, double tol,
                                             const ArclengthOptions& options) {
  require(std::isfinite(z0) && std::isfinite(r0) && r0 > 0.0, ErrorKind::InvalidArgument,
          "start point needs finite z and r > 0");
  const double tnorm = std::hypot(dz0, dr0);
  require(std::isfinite(tnorm) && tnorm > 0.0, ErrorKind::InvalidArgument, "initial tangent must be nonzero");
  require(length > 0.0 && std::isfinite(length), ErrorKind::InvalidArgument, "length must be > 0");
  require(tol > 1e-14 && tol < 1e-3, ErrorKind::InvalidArgument, "tol must lie in (1e-14, 1e-3)");
  require(options.h_max > 0.0, ErrorKind::InvalidArgument, "h_max must be > 0");
  const double theta0 = std::atan2(dz0, dr0);

  const Branch fwd = shoot(z0, r0, theta0, length, tol, 1.0, options);
  Branch bwd;
  if (options.both_directions) bwd = shoot(z0, r0, theta0, length, tol, -1.0, options);

  std::vector<ProfileSample> all;
  all.reserve(fwd.samples.size() + bwd.samples.size() + 1);
  for (auto it = bwd.samples.rbegin(); it != bwd.samples.rend(); ++it) all.push_back(*it);
  all.push_back(ProfileSample{0.0, z0, r0, std::sin(theta0), std::cos(theta0)});
  all.insert(all.end(), fwd.samples.begin(), fwd.samples.end());

  std::vector<std::size_t> necks;
  for (std::size_t k = 0; k < all.size(); ++k) {
    const bool before_neg = k > 0 && all[k - 1].dr < 0.0;
    const bool after_pos = k + 1 < all.size() && all[k + 1].dr > 0.0;
    if (all[k].dr == 0.0 && before_neg && after_pos) {
      necks.push_back(k);
    } else if (k + 1 < all.size() && all[k].dr < 0.0 && all[k + 1].dr > 0.0) {
      necks.push_back(-all[k].dr <= all[k + 1].dr ? k : k + 1);
    }
  }
  necks.erase(std::unique(necks.begin(), necks.end()), necks.end());

  std::optional<std::size_t> neck;
  if (!necks.empty()) neck = necks.front();
  return ArclengthProfile{ProfileCurve::arclength(std::move(all), neck), fwd.end,
                          options.both_directions ? bwd.end : ProfileEnd::Completed, std::move(necks)};
}

std::size_t count_level_crossings(const ProfileCurve& profile, double level) {
  const auto s = profile.samples();
  std::size_t count = 0;
  for (std::size_t k = 0; k + 1 < s.size(); ++k)
    if ((s[k].z >= level) != (s[k + 1].z >= level)) ++count;
  return count;
}

ProfileCurve graph_section(const ProfileCurve& profile, std::size_t from) {
  const auto s = profile.samples();
  require(from < s.size(), ErrorKind::InvalidArgument, "section start out of range");
  std::vector<double> z, r, dr;
  for (std::size_t k = from; k < s.size(); ++k) {
    if (!(s[k].dz > 0.0)) break;
    if (!z.empty() && !(s[k].z > z.back())) break;
    z.push_back(s[k].z);
    r.push_back(s[k].r);
    dr.push_back(s[k].dr / s[k].dz);
  }
  require(z.size() >= 2, ErrorKind::NotGraphical, "no graphical section starts here");
  return ProfileCurve::graph(z, r, dr);
}

double monotone_from(const ProfileCurve& profile) {
  require(profile.parametrization() == Parametrization::GraphInZ, ErrorKind::NotGraphical,
          "monotonicity is defined for graph profiles");
  const auto s = profile.samples();
  std::size_t k = s.size();
  while (k > 0 && s[k - 1].dr > 0.0) --k;
  if (k == s.size()) return std::numeric_limits<double>::infinity();
  return s[k].z;
}

}  // namespace tsol::soliton
