#pragma once

// Independent reference values for the unit and acceptance tests. Closed
// forms are evaluated directly; integrals use Boost's adaptive
// Gauss-Kronrod rules, which share no code with the library's quadrature.
// Frozen trajectory values were produced once by an implicit Radau IIA
// integration (rtol = atol = 1e-13) and are kept here verbatim.

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

/// Polar graph of the circle of radius R centred at (x0, y0), seen from the origin.
inline double offset_circle_radius(double R, double x0, double y0, double theta) {
  const double ce = x0 * std::cos(theta) + y0 * std::sin(theta);
  return ce + std::sqrt(R * R - x0 * x0 - y0 * y0 + ce * ce);
}

namespace frozen {
// phi' = (1 + phi^2)(1 - phi/s), s0 = 10, phi0 = 9.9
inline constexpr double phi_50 = 49.9799839646815;
inline constexpr double phi_100 = 99.9899979988926;
inline constexpr double phi_150 = 149.993332740625;
inline constexpr double phi_200 = 199.994999749966;
inline constexpr double lambda_plus_1_200 = -5.001e-05;
inline constexpr double mu_200 = -2.000276;
inline constexpr double mu_100 = -2.001107;
inline constexpr double mu_50 = -2.004415;
inline constexpr double remainder_exponent_100_200 = -3.0005;
// same equation, phi0 = 20
inline constexpr double phi_50_from_20 = 49.9799839646842;
// bowl branch from the tip; F = z - s^2/2 + log s with the vertex at z = 0
inline constexpr double bowl_phi_20 = 19.9497464903;
inline constexpr double bowl_z_20 = 196.354468658;
inline constexpr double bowl_phi_50 = 49.9799839647;
inline constexpr double bowl_z_50 = 1245.43606094;
inline constexpr double bowl_phi_100 = 99.9899979989;
inline constexpr double bowl_z_100 = 4994.74261335;
inline constexpr double bowl_F_100 = -0.652216467753;
}  // namespace frozen

/// Classical RK4 with fixed step h for phi' = (1 + phi^2)(1 - phi/s), then
/// one Richardson extrapolation against step h/2.
inline double phi_rk4_richardson(double s0, double phi0, double s1, std::size_t steps) {
  auto f = [](double s, double p) { return (1 + p * p) * (1 - p / s); };
  auto run = [&](std::size_t n) {
    const double h = (s1 - s0) / static_cast<double>(n);
    double p = phi0;
    for (std::size_t k = 0; k < n; ++k) {
      const double s = s0 + h * static_cast<double>(k);
      const double k1 = f(s, p), k2 = f(s + h / 2, p + h / 2 * k1), k3 = f(s + h / 2, p + h / 2 * k2),
                   k4 = f(s + h, p + h * k3);
      p += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return p;
  };
  const double coarse = run(steps), fine = run(2 * steps);
  return fine + (fine - coarse) / 15.0;
}

/// Gaussian density of the sphere of radius a about its centre at scale rho:
/// the integrand is constant on the sphere, so the value is closed form.
inline double sphere_density_at_centre(double a, double rho) {
  return a * a / (rho * rho) * std::exp(-a * a / (4 * rho * rho));
}

/// Sphere of radius a centred at distance d from x0, by 1-D Gauss-Kronrod in
/// the polar angle about the line through x0 and the centre.
inline double sphere_density(double a, double d, double rho) {
  auto f = [&](double t) {
    const double dist2 = a * a + d * d - 2 * a * d * std::cos(t);
    return 2 * std::numbers::pi * a * a * std::sin(t) * std::exp(-dist2 / (4 * rho * rho));
  };
  const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, std::numbers::pi, 15, 1e-14);
  return I / (4 * std::numbers::pi * rho * rho);
}

/// Cylinder S^1(R) x R with x0 at distance d from the axis.
inline double cylinder_density(double R, double d, double rho) {
  // The axial integral is Gaussian: int exp(-z^2/4rho^2) dz = 2 rho sqrt(pi).
  auto f = [&](double t) {
    const double dist2 = R * R + d * d - 2 * R * d * std::cos(t);
    return R * std::exp(-dist2 / (4 * rho * rho));
  };
  const double I =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 2 * std::numbers::pi, 15, 1e-14);
  return I * 2 * rho * std::sqrt(std::numbers::pi) / (4 * std::numbers::pi * rho * rho);
}

}  // namespace oracle
