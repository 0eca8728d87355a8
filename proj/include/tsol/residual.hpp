#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "tsol/fit.hpp"
#include "tsol/grid.hpp"

namespace tsol::residual {

/// Translator residual on the nodes of a chart grid. `values` and `defect`
/// are meaningful only where mask != 0 (two cells away from the axial
/// boundaries) and hold 0 elsewhere.
///
/// Cylindrical charts: values = RHS - LHS of the graph equation for r, which
/// equals r_z - H W. Vertical charts: values = H W - 1. In both, `defect` is
/// the chart-free H - <tau, n_in>.
struct ResidualField {
  PolarGrid grid;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;
  std::vector<double> defect;

  double max_abs() const;
  double max_abs_defect() const;
  double at(std::size_t i, std::size_t j) const { return values[grid.index(i, j)]; }
  double defect_at(std::size_t i, std::size_t j) const { return defect[grid.index(i, j)]; }
};

ResidualField cylindrical_translator_residual(const CylindricalGraphField& field, unsigned threads = 1);
ResidualField vertical_translator_residual(const VerticalGraphField& field, unsigned threads = 1);

/// r(z, theta) = f(z) + g(z, theta) with f the theta-mean.
struct FourierSplit {
  ProfileCurve f;
  GridFunction g;
  /// modes[i][m]: amplitude of cos/sin(m theta) in g on row i, m = 0..n_theta/2.
  /// Mode 0 is zero by construction.
  std::vector<std::vector<double>> modes;
};

FourierSplit fourier_split(const CylindricalGraphField& field);

/// Amplitudes of the discrete Fourier modes 0..n/2 of one periodic row, so
/// that A cos(m theta + c) reports A for 0 < m < n/2.
std::vector<double> mode_amplitudes(std::span<const double> row);

struct DecayReport {
  std::size_t order = 0;
  std::vector<double> z;    ///< evaluated rows
  std::vector<double> sup;  ///< discrete C^order surrogate per row
  fit::PowerFit fit;        ///< sup ~ C z^{-p}

  double C() const { return fit.C; }
  double p() const { return fit.p; }
  bool identically_zero() const { return fit.all_zero; }
};

/// Max over theta of every mixed central difference d_z^a d_theta^b g with
/// a + b <= order (order <= 4), per z-row, then a dyadic-band power fit.
DecayReport derivative_decay_report(const GridFunction& g, std::size_t order);

struct GrowthReport {
  std::size_t order = 0;
  std::vector<double> z;
  std::vector<double> sup;  ///< sup over theta of |d^order r / dz^order|
  fit::PowerFit fit;
  double exponent = std::numeric_limits<double>::quiet_NaN();  ///< sup ~ C z^{exponent}
  double literal_exponent = 0.0;   ///< order + 1/2
  double cylinder_exponent = 0.0;  ///< 1/2 - order, from r = sqrt(2z)
  bool within_literal = false;
  bool within_cylinder_model = false;  ///< exponent within 0.1 of the cylinder model
};

GrowthReport z_derivative_growth_check(const CylindricalGraphField& field, std::size_t order);
GrowthReport z_derivative_growth_check(const ProfileCurve& profile, std::size_t order);

/// Radial samples (s, f(s)) of a graph end.
struct RadialSection {
  std::vector<double> s;
  std::vector<double> f;
};

/// theta-mean of h at every rho node.
RadialSection radial_section(const VerticalGraphField& field);
/// (r, z) pairs of a graph profile: the height as a function of the radius.
RadialSection radial_section(const ProfileCurve& profile);

struct AsymptoticsFit {
  double c = std::numeric_limits<double>::quiet_NaN();
  double d = std::numeric_limits<double>::quiet_NaN();  ///< coefficient of 1/s
  double log_coefficient = 0.0;  ///< e in F = c + d/s + e log s
  double remainder_bound = std::numeric_limits<double>::quiet_NaN();  ///< sup s |F - c| on [s_max/2, s_max]
  bool divergent = false;
  double s_min = 0.0;
  double s_max = 0.0;
};

/// F(s) = f(s) - s^2/2 + log s fitted as c + d/s over [s_lo, s_hi].
/// Divergent when a free log s term exceeds `divergence_threshold`.
AsymptoticsFit bowl_asymptotics_fit(const RadialSection& section, double s_lo = 0.0,
                                    double s_hi = std::numeric_limits<double>::infinity(),
                                    double divergence_threshold = 0.02);

}  // namespace tsol::residual
