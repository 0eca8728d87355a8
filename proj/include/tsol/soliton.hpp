#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "tsol/grid.hpp"

namespace tsol::soliton {

/// C * s^{-k} * cos(omega * s + phase); omega = phase = 0 gives a plain power.
struct EnvelopeTerm {
  double amplitude = 0.0;
  double exponent = 9.0;
  double frequency = 0.0;
  double phase = 0.0;

  double operator()(double s) const;
  bool is_zero() const { return amplitude == 0.0; }
  void validate(double min_exponent = 0.0) const;
};

/// gamma, delta in  phi' = (1 + phi^2)(1 + gamma - (1/s + delta) phi).
struct PhiEnvelope {
  EnvelopeTerm gamma;
  EnvelopeTerm delta;
  bool is_zero() const { return gamma.is_zero() && delta.is_zero(); }
};

/// a, b in  -f_z = (1 + a) f_zz / (1 + f_z^2) - 1/f + b.  Integrability of the
/// graph-form arguments needs exponent > 1.
struct GraphEnvelope {
  EnvelopeTerm a;
  EnvelopeTerm b;
};

/// Right-hand side for phi(s) = z_s(s): either the (perturbed) translator
/// equation or the lower comparison field phi' = eps (1 + phi^2) / 2 used in
/// the blow-up argument for phi >= (1 - eps) s.
struct PhiEquation {
  enum class Kind { Translator, LowerComparison };
  Kind kind = Kind::Translator;
  PhiEnvelope envelope;
  double epsilon = 0.0;

  static PhiEquation translator(PhiEnvelope env = {}) { return {Kind::Translator, env, 0.0}; }
  static PhiEquation lower_comparison(double eps) { return {Kind::LowerComparison, {}, eps}; }
  double operator()(double s, double phi) const;
};

enum class PhiOutcome { Completed, BlowUp };

struct PhiTrajectory {
  std::vector<double> s;
  std::vector<double> phi;
  std::vector<double> dphi;
  double tol = 0.0;
  PhiEquation equation;
  PhiOutcome outcome = PhiOutcome::Completed;
  double blowup_s = std::numeric_limits<double>::quiet_NaN();

  std::size_t size() const { return s.size(); }
};

struct PhiOptions {
  double blowup_threshold = 1e10;
  /// Sample only at s0, these points and s_end; empty records every step.
  std::vector<double> output_points;
  double h_max = std::numeric_limits<double>::infinity();
};

PhiTrajectory integrate_phi(const PhiEquation& equation, double s0, double phi0, double s_end, double tol,
                            const PhiOptions& options = {});
inline PhiTrajectory integrate_phi(const PhiEnvelope& env, double s0, double phi0, double s_end, double tol,
                                   const PhiOptions& options = {}) {
  return integrate_phi(PhiEquation::translator(env), s0, phi0, s_end, tol, options);
}

/// Regular bowl branch shot from the tip with phi = s/2 + s^3/32 + s^5/768.
PhiTrajectory bowl_trajectory(double s_end, double tol, const PhiOptions& options = {}, double s_tip = 1e-2);
double bowl_tip_height(double s_tip);

struct AsymptoticReport {
  std::vector<double> s, psi, lambda, mu;
  double band_lo = 0.0;
  double band_hi = 0.0;
  double lambda_end = 0.0;
  double mu_end = 0.0;
  double tail_lambda = 0.0;  ///< sup |lambda + 1| on the last dyadic band
  double tail_mu = 0.0;      ///< sup |mu + 2| on the last dyadic band
  double tail_psi_scaled = 0.0;  ///< sup s |psi| on the last dyadic band
  double remainder_exponent = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;  ///< remainder phi - (s - 1/s) vanishes identically
};

AsymptoticReport asymptotic_diagnostics(const PhiTrajectory& traj);

/// Forward-propagation and lower-bound checks on phi.
struct ComparisonReport {
  std::optional<double> upper_onset;  ///< first s >= s_calib with phi <= s + s^-9
  bool upper_propagates = false;
  std::vector<double> epsilons;
  std::vector<std::optional<double>> lower_onset;  ///< s0(eps); nullopt if the bound fails at the end
  double final_band_psi_ratio = 0.0;  ///< sup |psi| / (2/s) on the last dyadic band
};

ComparisonReport comparison_bounds(const PhiTrajectory& traj, double s_calibrated, std::span<const double> epsilons);

/// Inverts z(s) = z0 + int phi ds (cubic Hermite quadrature) into f(z) = s.
ProfileCurve profile_from_phi(const PhiTrajectory& traj, double z_at_s0);

/// Height z(s) = z0 + int phi ds at every trajectory sample.
std::vector<double> heights(const PhiTrajectory& traj, double z_at_s0);

/// The same surface as a graph over an annulus, h(rho) = z(s = rho), by cubic
/// Hermite interpolation in s. The trajectory must cover [r_in, r_out].
VerticalGraphField vertical_graph_from_phi(const PhiTrajectory& traj, double z_at_s0, double r_in, double r_out,
                                           std::size_t n_rho, std::size_t n_theta);

/// Residual of -f_z = (1+a) f_zz/(1+f_z^2) - 1/f + b at interior samples, as
/// RHS - LHS; f_zz from second-order differences of the sampled slope.
struct GraphResidual {
  std::vector<double> z;
  std::vector<double> residual;
  double max_abs() const;
};
GraphResidual est1_residual(const ProfileCurve& profile, const GraphEnvelope& env = {});
/// Same residual for f sampled on the uniform grid z_k = z0 + k h, with
/// second-order central differences for f_z and f_zz.
GraphResidual est1_residual_uniform(double z0, double h, std::span<const double> f, const GraphEnvelope& env = {});

enum class ProfileEnd { Completed, AxisCrossing, StepFailure };

struct ArclengthProfile {
  ProfileCurve curve;
  ProfileEnd front_end;  ///< end at the largest arclength
  ProfileEnd back_end;   ///< end at the smallest arclength (Completed if not integrated)
  std::vector<std::size_t> necks;
};

struct ArclengthOptions {
  bool both_directions = true;
  double h_max = 0.1;
  double axis_tolerance = 1e-9;
};

/// Meridian (r(sigma), z(sigma)) of a rotationally symmetric translator by
/// arclength: r' = cos t, z' = sin t, t' = cos t - sin t / r.
ArclengthProfile integrate_profile_arclength(double z0, double r0, double dz0, double dr0, double length, double tol,
                                             const ArclengthOptions& options = {});

/// Number of circles in which the plane {z = level} meets the surface.
std::size_t count_level_crossings(const ProfileCurve& profile, double level);

/// Graph-in-z reparametrization of the part of an arclength profile with
/// dz/dsigma > 0 starting at sample `from` (to the end).
ProfileCurve graph_section(const ProfileCurve& profile, std::size_t from);

/// Smallest sampled z beyond which f' > 0 at every sample; +inf if none.
double monotone_from(const ProfileCurve& profile);

}  // namespace tsol::soliton
