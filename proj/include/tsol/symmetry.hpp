#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "tsol/fit.hpp"
#include "tsol/geometry.hpp"
#include "tsol/grid.hpp"

namespace tsol::symmetry {

struct ZBand {
  double lo = 0.0;
  double hi = 0.0;
};

struct AxisEstimate {
  AxisOffset offset;
  double sup_u = 0.0;         ///< sup |u| over the band about `offset`
  double sup_u_origin = 0.0;  ///< sup |u| over the band about (0, 0)
  ZBand band;
};

/// Rotation axis minimising u over the rows of `band`. Seeds from the
/// theta-mode-1 coefficients of u about the origin, then takes exact
/// least-squares steps (u is affine in the offset), the later ones in the
/// chart recentred on the current estimate. sup |u| about an axis is measured
/// in the chart centred on it. Never returns an axis worse than the origin.
AxisEstimate fit_axis(const CylindricalGraphField& field, ZBand band);

/// The same surface expressed in cylindrical coordinates about the vertical
/// line through `axis`. Rows keep their heights; radii are found by a secant
/// solve against a periodic cubic interpolant of each row.
CylindricalGraphField recenter(const CylindricalGraphField& field, const AxisOffset& axis);

using ChartField = std::variant<CylindricalGraphField, VerticalGraphField>;

/// A mean curvature flow known on a window of spacetime.
class FlowWindow {
 public:
  virtual ~FlowWindow() = default;

  /// Surface data of the time-t slice at a node of its chart.
  virtual SurfacePointData point(double t, std::size_t i, std::size_t j) const = 0;

  /// Interior nodes of M_t inside the closed ball B(center, radius); throws
  /// WindowTooSmall unless the slice's chart covers the whole ball.
  virtual std::vector<SurfacePointData> ball(double t, const Vec3& center, double radius) const = 0;

  /// Nodes met by the parabolic ball B(center, radius) x [t - radius^2, t],
  /// each reported at one slice time in which it lies in the ball.
  virtual std::vector<SurfacePointData> parabolic_ball(double t, const Vec3& center, double radius) const = 0;
};

/// M_t = M + t tau for a translator M given on one chart. Parabolic balls
/// reduce exactly to capsules around the segment [x, x + r^2 tau] on M.
class TranslatingFlow final : public FlowWindow {
 public:
  explicit TranslatingFlow(ChartField chart);

  SurfacePointData point(double t, std::size_t i, std::size_t j) const override;
  std::vector<SurfacePointData> ball(double t, const Vec3& center, double radius) const override;
  std::vector<SurfacePointData> parabolic_ball(double t, const Vec3& center, double radius) const override;

  const ChartField& chart() const { return chart_; }

 private:
  /// Points of M within `radius` of the segment from a to b (a.z <= b.z).
  std::vector<SurfacePointData> near_segment(const Vec3& a, const Vec3& b, double radius) const;

  ChartField chart_;
  std::vector<SurfacePointData> points_;  ///< interior nodes, row-major
  std::size_t row_width_ = 0;
  std::size_t first_row_ = 0;  ///< chart index of the first interior row
};

/// A general flow given slice by slice. Parabolic balls are materialised on
/// `n_time` equally spaced slices.
class SampledFlow final : public FlowWindow {
 public:
  using Slicer = std::function<ChartField(double t)>;
  SampledFlow(Slicer slicer, std::size_t n_time = 17);

  SurfacePointData point(double t, std::size_t i, std::size_t j) const override;
  std::vector<SurfacePointData> ball(double t, const Vec3& center, double radius) const override;
  std::vector<SurfacePointData> parabolic_ball(double t, const Vec3& center, double radius) const override;

 private:
  Slicer slicer_;
  std::size_t n_time_;
};

/// Base point (x, t) of a check: a chart node of the time-t slice.
struct BasePoint {
  double t = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
};

struct Candidate {
  AxisOffset axis;     ///< symmetry checks
  double lambda = 0.0;  ///< cylindricality checks
  Vec3 shift = Vec3::Zero();
};

struct CheckResult {
  bool pass = false;
  double epsilon = 0.0;
  /// sup |u H| (symmetry) or the surrogate distance (cylindricality).
  double measured = 0.0;
  /// Derivative order of the distance surrogate; 0 for symmetry checks.
  std::size_t order = 0;
  bool h_positive = true;
  std::size_t points = 0;  ///< nodes that entered the measurement
  Candidate closest;       ///< best candidate found, pass or not
  std::optional<Candidate> witness;  ///< present iff pass
};

/// epsilon-vertical symmetry at a base point: some vertical axis has
/// sup |u H| <= epsilon and H > 0 on the parabolic ball of radius 10/H.
CheckResult vertical_symmetry_check(const FlowWindow& flow, const BasePoint& base, double epsilon);

struct CylindricalityOptions {
  std::size_t order = 2;          ///< surrogate order 0, 1 or 2
  double window_radius = 10.0;    ///< radius of P((0, 0), r) after rescaling
  std::size_t n_time = 15;        ///< slices sampled in rescaled time
  int lambda_steps = 8;           ///< grid lambda0 * 2^(k/4), |k| <= lambda_steps
  std::size_t n_angles = 16;      ///< directions of v besides +-nu
  std::size_t golden_iterations = 40;
  std::optional<double> lambda0;  ///< default sqrt(2) H(x), or 1 when H <= 0
};

/// epsilon-vertical cylindricality at a base point: some lambda > 0 and v in
/// S^1(sqrt 2) x {0} bring lambda (M_{lambda^-2 t + tbar} - x) + v within
/// epsilon of the cylinders of radius sqrt(2(1 - t)) on the window.
CheckResult vertical_cylindricality_check(const FlowWindow& flow, const BasePoint& base, double epsilon,
                                          const CylindricalityOptions& options = {});

/// Surrogate distance of one candidate; +inf when the window does not cover
/// it or some slice of the rescaled surface misses the window.
double cylindricality_distance(const FlowWindow& flow, const BasePoint& base, double lambda, const Vec3& shift,
                               const CylindricalityOptions& options = {});

struct ScheduleRow {
  std::size_t j = 0;
  double height = 0.0;  ///< 2^(j/q) Lambda
  double bound = 0.0;   ///< 2^-j epsilon_1
};

struct DecaySchedule {
  double L = 0.0;
  double epsilon1 = 0.0;
  double Lambda = 0.0;
  double q = 0.0;
  double contraction = 0.0;  ///< (1 - 2^(-1/q))/2 + 2^(-1/q)
  bool contraction_holds = false;
  /// H (z - t) must exceed this for the induction step: 2L / (1 - 2^(-1/q)).
  double growth_threshold = 0.0;
  /// Each row's step L/H + 2^((j-1)/q) Lambda <= contraction * height, at
  /// the smallest admissible H.
  bool rows_contract = false;
  std::vector<ScheduleRow> rows;
  double decay_exponent = 0.0;  ///< q - 1/2 for |u|

  /// |u| <= 2 epsilon_1 Lambda^q z^-q sqrt(2z), using H = (2z)^(-1/2).
  double u_bound(double z) const;
};

DecaySchedule neck_decay_schedule(double L, double epsilon1, double Lambda, double q, std::size_t j_max);

struct DriftReport {
  bool summable = false;
  AxisOffset limit;          ///< NaN when not summable
  double total_drift = 0.0;  ///< sum of |axis(z_k+1) - axis(z_k)| over the samples
  double tail_bound = 0.0;   ///< drift beyond z_bar: samples plus extrapolated tail
  double integral_bound = 0.0;  ///< C z_bar^(1-p) / (p - 1)
  double z_bar = 0.0;
  fit::PowerFit rate_fit;    ///< |d axis / dz| ~ C z^-p
};

/// Axes sampled at z_k = z0 + k dz.
DriftReport axis_drift_sum(std::span<const AxisOffset> axes, double z0, double dz, std::optional<double> z_bar = {});

struct RescaleSpec {
  Vec3 center = Vec3::Zero();  ///< x in M_tbar
  double t_bar = 0.0;
  double lambda = 1.0;
  Vec3 shift = Vec3::Zero();   ///< v
  double t = 0.0;              ///< rescaled time
};

/// The slice lambda (M_{lambda^-2 t + tbar} - x) + v of the translating flow
/// of `field`, written about the z-axis on `out` (default: the image of the
/// source rows 1..n-2). When the map keeps the vertical axis the radii are
/// scaled exactly; otherwise the source is resampled bicubically.
CylindricalGraphField parabolic_rescale(const CylindricalGraphField& field, const RescaleSpec& spec,
                                        std::optional<PolarGrid> out = {});

struct DecayFit {
  double C = 0.0;
  double p = 0.0;
  bool exact_symmetry = false;
  fit::PowerFit fit;
};

/// sup |u| ~ C z^-p by a dyadic-band log-log fit.
DecayFit decay_exponent_fit(std::span<const double> z, std::span<const double> sup_u);

}  // namespace tsol::symmetry
