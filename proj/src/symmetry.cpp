#include "tsol/symmetry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <type_traits>

#include <Eigen/Dense>

#include "tsol/error.hpp"

namespace tsol::symmetry {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Cubic Lagrange weights for nodes at -1, 0, 1, 2 evaluated at f in [0, 1).
std::array<double, 4> cubic_weights(double f) {
  return {-f * (f - 1) * (f - 2) / 6.0, (f + 1) * (f - 1) * (f - 2) / 2.0, -(f + 1) * f * (f - 2) / 2.0,
          (f + 1) * f * (f - 1) / 6.0};
}

double periodic_cubic(std::span<const double> row, double theta) {
  const auto n = static_cast<std::ptrdiff_t>(row.size());
  const double x = theta / (kTwoPi / static_cast<double>(n));
  const double fl = std::floor(x);
  const auto j = static_cast<std::ptrdiff_t>(fl);
  const auto w = cubic_weights(x - fl);
  double out = 0.0;
  for (std::ptrdiff_t k = 0; k < 4; ++k) {
    const std::ptrdiff_t idx = (((j - 1 + k) % n) + n) % n;
    out += w[static_cast<std::size_t>(k)] * row[static_cast<std::size_t>(idx)];
  }
  return out;
}

// Row of radii at an arbitrary height: the grid row itself when z is a node,
// otherwise cubic Lagrange across four rows. Needs z in [z(1), z(n-2)].
std::vector<double> row_at(const CylindricalGraphField& field, double z) {
  const std::size_t n = field.n_z();
  const double x = (z - field.z_min()) / field.dz();
  const double nearest = std::round(x);
  std::vector<double> out(field.n_theta());
  if (std::abs(x - nearest) <= 1e-9 && nearest >= 0 && nearest <= static_cast<double>(n - 1)) {
    const auto i = static_cast<std::size_t>(nearest);
    const auto r = field.data().row(i);
    std::copy(r.begin(), r.end(), out.begin());
    return out;
  }
  require(x >= 1.0 - 1e-9 && x <= static_cast<double>(n) - 2.0 + 1e-9, ErrorKind::WindowTooSmall,
          "interpolation height outside the source window");
  auto i = static_cast<std::size_t>(std::floor(x));
  i = std::clamp<std::size_t>(i, 1, n - 3);
  const auto w = cubic_weights(x - static_cast<double>(i));
  for (std::size_t k = 0; k < 4; ++k) {
    const auto r = field.data().row(i - 1 + k);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += w[k] * r[j];
  }
  return out;
}

// Distance rho along the ray a + rho e(theta) to the polar curve `row`
// (about the origin). Secant iteration from the first-order guess.
double ray_radius(std::span<const double> row, double ax, double ay, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  auto g = [&](double rho) {
    const double px = ax + rho * c, py = ay + rho * s;
    double phi = std::atan2(py, px);
    if (phi < 0) phi += kTwoPi;
    return std::hypot(px, py) - periodic_cubic(row, phi);
  };
  double r0 = periodic_cubic(row, theta) - (ax * c + ay * s);
  double r1 = r0 * (1 + 1e-6) + 1e-12;
  double g0 = g(r0), g1 = g(r1);
  for (int it = 0; it < 60; ++it) {
    if (std::abs(g1) <= 1e-15 * (1 + std::abs(r1))) return r1;
    const double denom = g1 - g0;
    if (denom == 0.0) break;
    const double r2 = r1 - g1 * (r1 - r0) / denom;
    r0 = r1;
    g0 = g1;
    r1 = r2;
    g1 = g(r1);
  }
  require(std::abs(g1) <= 1e-10 * (1 + std::abs(r1)) && r1 > 0, ErrorKind::NotGraphical,
          "surface is not a radial graph about the new axis");
  return r1;
}

std::vector<double> shifted_row(std::span<const double> row, double ax, double ay, std::size_t n_theta,
                                double scale) {
  std::vector<double> out(n_theta);
  const double dt = kTwoPi / static_cast<double>(n_theta);
  for (std::size_t j = 0; j < n_theta; ++j) out[j] = scale * ray_radius(row, ax, ay, dt * static_cast<double>(j));
  return out;
}

struct LinearU {
  // e_k(x0, y0) = w_k * (u0_k - x0 nu_y + y0 nu_x)
  std::vector<double> b, ax, ay;

  double sup(double x0, double y0) const {
    double m = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) m = std::max(m, std::abs(b[k] + x0 * ax[k] + y0 * ay[k]));
    return m;
  }

  Eigen::Vector2d weighted_ls(const std::vector<double>* weights) const {
    Eigen::Matrix2d N = Eigen::Matrix2d::Zero();
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    for (std::size_t k = 0; k < b.size(); ++k) {
      const double w = weights ? (*weights)[k] : 1.0;
      N(0, 0) += w * ax[k] * ax[k];
      N(0, 1) += w * ax[k] * ay[k];
      N(1, 1) += w * ay[k] * ay[k];
      rhs(0) -= w * ax[k] * b[k];
      rhs(1) -= w * ay[k] * b[k];
    }
    N(1, 0) = N(0, 1);
    if (std::abs(N.determinant()) <= 1e-300) return Eigen::Vector2d::Zero();
    return N.ldlt().solve(rhs);
  }
};

LinearU linear_u(std::span<const SurfacePointData> pts, bool weight_by_h) {
  LinearU L;
  L.b.reserve(pts.size());
  L.ax.reserve(pts.size());
  L.ay.reserve(pts.size());
  for (const auto& p : pts) {
    const double w = weight_by_h ? p.mean_curvature : 1.0;
    L.b.push_back(w * geometry::rotation_function(p, {0.0, 0.0}));
    L.ax.push_back(-w * p.normal.y());
    L.ay.push_back(w * p.normal.x());
  }
  return L;
}

void check_window(bool covered, const char* what) { require(covered, ErrorKind::WindowTooSmall, what); }

struct BandData {
  std::vector<SurfacePointData> pts;
  std::size_t row_lo = 0, row_hi = 0;  // inclusive chart rows
  AxisOffset seed;
};

BandData band_data(const CylindricalGraphField& field, ZBand band) {
  const std::size_t n = field.n_z();
  const double tol = 1e-12 * field.dz();
  require(n > 2 * geometry::kBoundaryBand && band.lo >= field.z(geometry::kBoundaryBand) - tol &&
              band.hi <= field.z(n - 1 - geometry::kBoundaryBand) + tol,
          ErrorKind::BoundaryProximity, "z-band must lie inside the field interior");
  const std::size_t nt = field.n_theta();
  BandData out;
  std::size_t rows = 0;
  for (std::size_t i = geometry::kBoundaryBand; i + geometry::kBoundaryBand < n; ++i) {
    const double z = field.z(i);
    if (z < band.lo - tol || z > band.hi + tol) continue;
    if (rows == 0) out.row_lo = i;
    out.row_hi = i;
    double a = 0.0, b = 0.0, w = 0.0;
    for (std::size_t j = 0; j < nt; ++j) {
      const auto p = geometry::normal_and_curvature_cylindrical(field, i, j);
      require(p.mean_curvature > 0.0, ErrorKind::NonPositiveCurvature, "axis fit needs H > 0 throughout the band");
      const double th = field.theta(j), c = std::cos(th), s = std::sin(th);
      const double u = geometry::rotation_function(p, {0.0, 0.0});
      a += u * c;
      b += u * s;
      w += p.normal.x() * c + p.normal.y() * s;
      out.pts.push_back(p);
    }
    // About the origin u is w (x0 sin - y0 cos) to first order on a near-circle.
    a *= 2.0 / static_cast<double>(nt);
    b *= 2.0 / static_cast<double>(nt);
    w /= static_cast<double>(nt);
    out.seed.x0 += b / w;
    out.seed.y0 += -a / w;
    ++rows;
  }
  require(rows > 0, ErrorKind::InvalidArgument, "z-band contains no grid rows");
  out.seed.x0 /= static_cast<double>(rows);
  out.seed.y0 /= static_cast<double>(rows);
  return out;
}

}  // namespace

AxisEstimate fit_axis(const CylindricalGraphField& field, ZBand band) {
  require(band.lo <= band.hi, ErrorKind::InvalidArgument, "empty z-band");
  const BandData data = band_data(field, band);
  const LinearU L = linear_u(data.pts, false);

  // Rows of the band plus the stencil margin.
  const std::size_t lo = data.row_lo - geometry::kBoundaryBand, hi = data.row_hi + geometry::kBoundaryBand;
  const std::size_t nt = field.n_theta();
  const CylindricalGraphField part(
      field.z(lo), field.z(hi), hi - lo + 1, nt,
      std::vector<double>(field.data().values().begin() + static_cast<std::ptrdiff_t>(lo * nt),
                          field.data().values().begin() + static_cast<std::ptrdiff_t>((hi + 1) * nt)));
  // The same rows, with the band snapped to them so it fits inside `part`.
  const ZBand rows{field.z(data.row_lo), field.z(data.row_hi)};

  // sup |u| about an axis, measured in the chart centred on that axis where
  // the difference stencils see a nearly constant radius.
  auto sup_about = [&](const AxisOffset& c) {
    try {
      return linear_u(band_data(recenter(part, c), rows).pts, false).sup(0.0, 0.0);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NotGraphical || e.kind() == ErrorKind::NonPositiveCurvature) return kInf;
      throw;
    }
  };

  const Eigen::Vector2d ls = L.weighted_ls(nullptr);
  AxisOffset refined{ls(0), ls(1)};
  // Difference normals err in proportion to the offset, so each
  // least-squares step taken in the recentred chart shrinks that bias.
  for (int it = 0; it < 3; ++it) {
    Eigen::Vector2d step;
    try {
      step = linear_u(band_data(recenter(part, refined), rows).pts, false).weighted_ls(nullptr);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NotGraphical || e.kind() == ErrorKind::NonPositiveCurvature) break;
      throw;
    }
    refined.x0 += step(0);
    refined.y0 += step(1);
    if (step.norm() <= 1e-15 * (1.0 + std::hypot(refined.x0, refined.y0))) break;
  }

  AxisEstimate est;
  est.band = band;
  est.sup_u_origin = L.sup(0.0, 0.0);
  est.sup_u = est.sup_u_origin;
  if (est.sup_u_origin == 0.0) return est;
  const AxisOffset order[] = {refined, {ls(0), ls(1)}, data.seed};
  for (const auto& c : order) {
    const double s = sup_about(c);
    if (s <= est.sup_u) {
      est.sup_u = s;
      est.offset = c;
      break;
    }
  }
  return est;
}

CylindricalGraphField recenter(const CylindricalGraphField& field, const AxisOffset& axis) {
  const std::size_t nt = field.n_theta();
  std::vector<double> radii;
  radii.reserve(field.grid().size());
  for (std::size_t i = 0; i < field.n_z(); ++i) {
    // Point a + rho e(theta) about the new axis is (x0, y0) + rho e(theta) about the old one.
    const auto row = shifted_row(field.data().row(i), axis.x0, axis.y0, nt, 1.0);
    radii.insert(radii.end(), row.begin(), row.end());
  }
  return CylindricalGraphField(field.z_min(), field.z_max(), field.n_z(), nt, std::move(radii));
}

// ---------------------------------------------------------------------------

TranslatingFlow::TranslatingFlow(ChartField chart) : chart_(std::move(chart)) {
  std::visit(
      [&](const auto& f) {
        points_ = geometry::interior_points(f);
        row_width_ = f.n_theta();
      },
      chart_);
  first_row_ = geometry::kBoundaryBand;
}

SurfacePointData TranslatingFlow::point(double t, std::size_t i, std::size_t j) const {
  SurfacePointData p = std::visit(
      [&](const auto& f) {
        if constexpr (std::is_same_v<std::decay_t<decltype(f)>, CylindricalGraphField>)
          return geometry::normal_and_curvature_cylindrical(f, i, j);
        else
          return geometry::normal_and_curvature_vertical(f, i, j);
      },
      chart_);
  p.position.z() += t;
  return p;
}

std::vector<SurfacePointData> TranslatingFlow::near_segment(const Vec3& a, const Vec3& b, double radius) const {
  require(radius > 0.0 && std::isfinite(radius), ErrorKind::InvalidArgument, "ball radius must be positive");
  const Vec3 mid(a.x(), a.y(), 0.0);
  std::size_t row_lo = 0, row_hi = 0;  // chart rows, inclusive
  std::visit(
      [&](const auto& f) {
        const PolarGrid& g = f.grid();
        const double first = g.axial(first_row_), last = g.axial(g.n_axial - 1 - first_row_);
        const double tol = 1e-12 * std::max(1.0, std::abs(last));
        double lo, hi;
        if constexpr (std::is_same_v<std::decay_t<decltype(f)>, CylindricalGraphField>) {
          lo = a.z() - radius;
          hi = b.z() + radius;
        } else {
          const double d = std::hypot(a.x(), a.y());
          lo = d - radius;
          hi = d + radius;
        }
        check_window(lo >= first - tol && hi <= last + tol, "window does not cover the requested ball");
        row_lo = static_cast<std::size_t>(std::max(0.0, std::ceil((lo - g.lo) / g.step() - 1e-9)));
        row_hi = static_cast<std::size_t>(std::floor((hi - g.lo) / g.step() + 1e-9));
        row_lo = std::max(row_lo, first_row_);
        row_hi = std::min(row_hi, g.n_axial - 1 - first_row_);
      },
      chart_);
  std::vector<SurfacePointData> out;
  if (row_hi < row_lo) return out;
  const double r2 = radius * radius * (1 + 1e-12);
  for (std::size_t i = row_lo; i <= row_hi; ++i) {
    for (std::size_t j = 0; j < row_width_; ++j) {
      const auto& p = points_[(i - first_row_) * row_width_ + j];
      const double zc = std::clamp(p.position.z(), a.z(), b.z());
      const Vec3 d = p.position - Vec3(mid.x(), mid.y(), zc);
      if (d.squaredNorm() <= r2) out.push_back(p);
    }
  }
  return out;
}

std::vector<SurfacePointData> TranslatingFlow::ball(double t, const Vec3& center, double radius) const {
  const Vec3 c = center - Vec3(0, 0, t);
  auto out = near_segment(c, c, radius);
  for (auto& p : out) p.position.z() += t;
  return out;
}

std::vector<SurfacePointData> TranslatingFlow::parabolic_ball(double t, const Vec3& center, double radius) const {
  // p + t' tau in B(center, r) for some t' in [t - r^2, t] iff p lies within
  // r of the segment from center - t tau to center - (t - r^2) tau.
  const Vec3 a = center - Vec3(0, 0, t);
  const Vec3 b = a + Vec3(0, 0, radius * radius);
  auto out = near_segment(a, b, radius);
  for (auto& p : out) p.position.z() += t;
  return out;
}

SampledFlow::SampledFlow(Slicer slicer, std::size_t n_time) : slicer_(std::move(slicer)), n_time_(n_time) {
  require(static_cast<bool>(slicer_), ErrorKind::InvalidArgument, "sampled flow needs a slicer");
  require(n_time_ >= 2, ErrorKind::InvalidArgument, "sampled flow needs at least two slices per ball");
}

SurfacePointData SampledFlow::point(double t, std::size_t i, std::size_t j) const {
  return TranslatingFlow(slicer_(t)).point(0.0, i, j);
}

std::vector<SurfacePointData> SampledFlow::ball(double t, const Vec3& center, double radius) const {
  return TranslatingFlow(slicer_(t)).ball(0.0, center, radius);
}

std::vector<SurfacePointData> SampledFlow::parabolic_ball(double t, const Vec3& center, double radius) const {
  std::vector<SurfacePointData> out;
  for (std::size_t k = 0; k < n_time_; ++k) {
    const double tk = t - radius * radius * static_cast<double>(k) / static_cast<double>(n_time_ - 1);
    auto part = ball(tk, center, radius);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

// ---------------------------------------------------------------------------

CheckResult vertical_symmetry_check(const FlowWindow& flow, const BasePoint& base, double epsilon) {
  require(epsilon > 0.0 && std::isfinite(epsilon), ErrorKind::InvalidArgument, "epsilon must be positive");
  CheckResult res;
  res.epsilon = epsilon;
  const SurfacePointData x = flow.point(base.t, base.i, base.j);
  if (!(x.mean_curvature > 0.0)) {
    res.h_positive = false;
    res.measured = kInf;
    return res;
  }
  const double radius = 10.0 / x.mean_curvature;
  const auto pts = flow.parabolic_ball(base.t, x.position, radius);
  res.points = pts.size();
  require(!pts.empty(), ErrorKind::WindowTooSmall, "parabolic ball contains no nodes");

  double min_h = kInf;
  for (const auto& p : pts) min_h = std::min(min_h, p.mean_curvature);
  res.h_positive = min_h > 0.0;

  const LinearU L = linear_u(pts, true);
  const Eigen::Vector2d seed = L.weighted_ls(nullptr);
  double sup_u0 = 0.0;
  for (const auto& p : pts) sup_u0 = std::max(sup_u0, std::abs(geometry::rotation_function(p, {0.0, 0.0})));
  const double disk = res.h_positive ? 10.0 * sup_u0 / min_h : kInf;

  Candidate best;
  double best_sup = L.sup(0.0, 0.0);
  auto consider = [&](Eigen::Vector2d c) {
    const Eigen::Vector2d d = c - seed;
    if (d.norm() > disk) c = seed + d * (disk / d.norm());
    const double s = L.sup(c(0), c(1));
    if (s < best_sup) {
      best_sup = s;
      best.axis = {c(0), c(1)};
    }
  };
  consider(seed);

  // Lawson's iteration towards the minimax axis.
  std::vector<double> w(pts.size(), 1.0 / static_cast<double>(pts.size()));
  for (int it = 0; it < 200 && best_sup > 0.0; ++it) {
    const Eigen::Vector2d c = L.weighted_ls(&w);
    consider(c);
    double total = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      w[k] *= std::abs(L.b[k] + c(0) * L.ax[k] + c(1) * L.ay[k]);
      total += w[k];
    }
    if (!(total > 0.0)) break;
    for (double& wk : w) wk /= total;
  }

  res.measured = best_sup;
  res.closest = best;
  res.pass = res.h_positive && best_sup <= epsilon;
  if (res.pass) res.witness = best;
  return res;
}

// ---------------------------------------------------------------------------

namespace {

// nullopt when the window cannot hold the candidate's parabolic ball; +inf
// when some slice misses the ball or wraps only part of the circle.
std::optional<double> candidate_distance(const FlowWindow& flow, const BasePoint& base, double lambda,
                                         const Vec3& shift, const CylindricalityOptions& options) {
  require(lambda > 0.0 && std::isfinite(lambda), ErrorKind::InvalidArgument, "lambda must be positive");
  require(options.order <= 2, ErrorKind::InvalidArgument, "surrogate order must be 0, 1 or 2");
  require(options.n_time >= 2, ErrorKind::InvalidArgument, "need at least two time slices");
  const Vec3 xbar = flow.point(base.t, base.i, base.j).position;
  const double R = options.window_radius;
  // The reference cylinder leaves B(0, R) once 2(1 - t) > R^2.
  const double t_lo = 1.0 - R * R / 2.0;
  double dist = 0.0;
  std::vector<double> angles;
  for (std::size_t k = 0; k < options.n_time; ++k) {
    const double t = t_lo * (1.0 - static_cast<double>(k) / static_cast<double>(options.n_time - 1));
    const double s = t / (lambda * lambda) + base.t;
    std::vector<SurfacePointData> pts;
    try {
      pts = flow.ball(s, xbar - shift / lambda, R / lambda);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::WindowTooSmall) return std::nullopt;
      throw;
    }
    if (pts.empty()) return kInf;
    const double rho_c = std::sqrt(2.0 * (1.0 - t));
    angles.clear();
    for (const auto& p : pts) {
      const Vec3 Y = lambda * (p.position - xbar) + shift;
      const double rho = std::hypot(Y.x(), Y.y());
      if (rho == 0.0) return kInf;
      angles.push_back(std::atan2(Y.y(), Y.x()));
      double d = std::abs(rho - rho_c);
      if (options.order >= 1) {
        const Vec3 e_in(-Y.x() / rho, -Y.y() / rho, 0.0);
        d = std::max(d, (p.inner_normal() - e_in).norm());
      }
      if (options.order >= 2) {
        d = std::max(d, std::abs(p.kappa_max / lambda - 1.0 / rho_c));
        d = std::max(d, std::abs(p.kappa_min / lambda));
      }
      dist = std::max(dist, d);
    }
    // A sheet covering only part of the circle is not close to the cylinder.
    // Slices whose reference circle nearly touches the sphere meet it in a
    // thin band only, so coverage is tested where the band is wide.
    if (rho_c > R / 2) continue;
    std::sort(angles.begin(), angles.end());
    double gap = angles.front() + kTwoPi - angles.back();
    for (std::size_t m = 1; m < angles.size(); ++m) gap = std::max(gap, angles[m] - angles[m - 1]);
    if (gap > std::numbers::pi / 2) return kInf;
  }
  return dist;
}

}  // namespace

double cylindricality_distance(const FlowWindow& flow, const BasePoint& base, double lambda, const Vec3& shift,
                               const CylindricalityOptions& options) {
  return candidate_distance(flow, base, lambda, shift, options).value_or(kInf);
}

CheckResult vertical_cylindricality_check(const FlowWindow& flow, const BasePoint& base, double epsilon,
                                          const CylindricalityOptions& options) {
  require(epsilon > 0.0 && std::isfinite(epsilon), ErrorKind::InvalidArgument, "epsilon must be positive");
  CheckResult res;
  res.epsilon = epsilon;
  res.order = options.order;
  const SurfacePointData x = flow.point(base.t, base.i, base.j);
  const double lambda0 =
      options.lambda0.value_or(x.mean_curvature > 0.0 ? std::numbers::sqrt2 * x.mean_curvature : 1.0);
  require(lambda0 > 0.0 && std::isfinite(lambda0), ErrorKind::InvalidArgument, "lambda0 must be positive");

  std::vector<double> dirs;
  for (std::size_t m = 0; m < options.n_angles; ++m)
    dirs.push_back(kTwoPi * static_cast<double>(m) / static_cast<double>(options.n_angles));
  const double nu_angle = std::atan2(x.normal.y(), x.normal.x());
  if (std::hypot(x.normal.x(), x.normal.y()) > 0.0) {
    dirs.push_back(nu_angle);
    dirs.push_back(nu_angle + std::numbers::pi);
  }
  auto shift_of = [](double a) { return Vec3(std::numbers::sqrt2 * std::cos(a), std::numbers::sqrt2 * std::sin(a), 0.0); };

  double best = kInf, best_lambda = lambda0, best_dir = 0.0;
  bool feasible = false;
  for (int k = -options.lambda_steps; k <= options.lambda_steps; ++k) {
    const double lam = lambda0 * std::exp2(static_cast<double>(k) / 4.0);
    for (double a : dirs) {
      const auto cand = candidate_distance(flow, base, lam, shift_of(a), options);
      if (!cand) continue;
      feasible = true;
      const double d = *cand;
      if (d < best) {
        best = d;
        best_lambda = lam;
        best_dir = a;
      }
    }
  }
  require(feasible, ErrorKind::WindowTooSmall, "window too small for every candidate scale");
  if (!std::isfinite(best)) {
    res.measured = kInf;
    res.closest.lambda = lambda0;
    res.closest.shift = shift_of(best_dir);
    return res;
  }

  // Golden-section search in log lambda within one grid step.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::log(best_lambda) - std::log(2.0) / 4.0, hi = std::log(best_lambda) + std::log(2.0) / 4.0;
  auto eval = [&](double ll) {
    const double d = cylindricality_distance(flow, base, std::exp(ll), shift_of(best_dir), options);
    if (d < best) {
      best = d;
      best_lambda = std::exp(ll);
    }
    return d;
  };
  double c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
  double fc = eval(c), fd = eval(d);
  for (std::size_t it = 0; it < options.golden_iterations; ++it) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - phi * (hi - lo);
      fc = eval(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + phi * (hi - lo);
      fd = eval(d);
    }
  }

  res.measured = best;
  res.closest.lambda = best_lambda;
  res.closest.shift = shift_of(best_dir);
  res.pass = best <= epsilon;
  if (res.pass) res.witness = res.closest;
  return res;
}

// ---------------------------------------------------------------------------

double DecaySchedule::u_bound(double z) const {
  require(z > 0.0, ErrorKind::InvalidArgument, "height must be positive");
  return 2.0 * epsilon1 * std::exp(q * (std::log(Lambda) - std::log(z))) * std::sqrt(2.0 * z);
}

DecaySchedule neck_decay_schedule(double L, double epsilon1, double Lambda, double q, std::size_t j_max) {
  require(L > 0.0 && std::isfinite(L), ErrorKind::InvalidArgument, "L must be positive");
  require(epsilon1 > 0.0 && std::isfinite(epsilon1), ErrorKind::InvalidArgument, "epsilon_1 must be positive");
  require(Lambda > 0.0 && std::isfinite(Lambda), ErrorKind::InvalidArgument, "Lambda must be positive");
  require(q >= 2.0 && std::isfinite(q), ErrorKind::InvalidArgument, "q must be at least 2");
  DecaySchedule s;
  s.L = L;
  s.epsilon1 = epsilon1;
  s.Lambda = Lambda;
  s.q = q;
  const double b = std::exp2(-1.0 / q);
  s.contraction = (1.0 - b) / 2.0 + b;
  s.contraction_holds = s.contraction < 1.0;
  s.growth_threshold = 2.0 * L / (1.0 - b);
  s.decay_exponent = q - 0.5;
  s.rows_contract = true;
  for (std::size_t j = 0; j <= j_max; ++j) {
    const double jd = static_cast<double>(j);
    ScheduleRow row{j, Lambda * std::exp2(jd / q), std::ldexp(epsilon1, -static_cast<int>(j))};
    if (j > 0) {
      const double h_min = s.growth_threshold / row.height;
      const double step = L / h_min + Lambda * std::exp2((jd - 1.0) / q);
      if (step > s.contraction * row.height * (1.0 + 1e-12)) s.rows_contract = false;
    }
    s.rows.push_back(row);
  }
  return s;
}

// ---------------------------------------------------------------------------

DriftReport axis_drift_sum(std::span<const AxisOffset> axes, double z0, double dz, std::optional<double> z_bar) {
  require(axes.size() >= 2, ErrorKind::InvalidArgument, "drift needs at least two axes");
  require(z0 > 0.0 && dz > 0.0, ErrorKind::InvalidArgument, "heights must be positive and increasing");
  DriftReport rep;
  rep.z_bar = z_bar.value_or(z0);
  std::vector<double> zm, rate, inc;
  for (std::size_t k = 0; k + 1 < axes.size(); ++k) {
    const double d = std::hypot(axes[k + 1].x0 - axes[k].x0, axes[k + 1].y0 - axes[k].y0);
    require(std::isfinite(d), ErrorKind::NonFinite, "non-finite axis");
    zm.push_back(z0 + dz * (static_cast<double>(k) + 0.5));
    inc.push_back(d);
    rate.push_back(d / dz);
    rep.total_drift += d;
  }
  rep.rate_fit = fit::dyadic_power_fit(zm, rate);
  const AxisOffset last = axes.back();
  if (rep.rate_fit.all_zero) {
    rep.summable = true;
    rep.limit = last;
    return rep;
  }
  const double p = rep.rate_fit.p, C = rep.rate_fit.C;
  rep.summable = p > 1.0;
  if (!rep.summable) {
    rep.limit = {kNaN, kNaN};
    rep.tail_bound = kInf;
    rep.integral_bound = kInf;
    return rep;
  }
  const double z_end = z0 + dz * static_cast<double>(axes.size() - 1);
  const double beyond = C * std::pow(z_end, 1.0 - p) / (p - 1.0);
  for (std::size_t k = 0; k < inc.size(); ++k)
    if (zm[k] >= rep.z_bar) rep.tail_bound += inc[k];
  rep.tail_bound += beyond;
  rep.integral_bound = C * std::pow(rep.z_bar, 1.0 - p) / (p - 1.0);
  // Continue along the last increment's direction for the unsampled tail.
  const AxisOffset prev = axes[axes.size() - 2];
  const double dx = last.x0 - prev.x0, dy = last.y0 - prev.y0, n = std::hypot(dx, dy);
  rep.limit = last;
  if (n > 0.0) {
    rep.limit.x0 += beyond * dx / n;
    rep.limit.y0 += beyond * dy / n;
  }
  return rep;
}

// ---------------------------------------------------------------------------

CylindricalGraphField parabolic_rescale(const CylindricalGraphField& field, const RescaleSpec& spec,
                                        std::optional<PolarGrid> out) {
  const double lam = spec.lambda;
  require(lam > 0.0 && std::isfinite(lam), ErrorKind::InvalidArgument, "lambda must be positive");
  require(spec.center.allFinite() && spec.shift.allFinite() && std::isfinite(spec.t) && std::isfinite(spec.t_bar),
          ErrorKind::NonFinite, "non-finite rescale parameters");
  require(field.n_z() >= 4, ErrorKind::InsufficientExtent, "rescaling needs at least four rows");
  const double s = spec.t / (lam * lam) + spec.t_bar;
  // Y = lam (X + s tau - x) + v, so X = x - s tau + (Y - v) / lam.
  const double ax = spec.center.x() - spec.shift.x() / lam;
  const double ay = spec.center.y() - spec.shift.y() / lam;
  auto to_source = [&](double yz) { return spec.center.z() - s + (yz - spec.shift.z()) / lam; };
  auto to_target = [&](double xz) { return lam * (xz + s - spec.center.z()) + spec.shift.z(); };

  PolarGrid grid;
  if (out) {
    grid = *out;
  } else {
    grid = PolarGrid{to_target(field.z(1)), to_target(field.z(field.n_z() - 2)), field.n_z() - 2, field.n_theta()};
  }
  grid.validate();
  const bool same_axis = ax == 0.0 && ay == 0.0;
  const double zl = field.z(1), zh = field.z(field.n_z() - 2), tol = 1e-9 * field.dz();

  std::vector<double> radii;
  radii.reserve(grid.size());
  for (std::size_t i = 0; i < grid.n_axial; ++i) {
    const double xz = to_source(grid.axial(i));
    check_window(xz >= zl - tol && xz <= zh + tol, "rescaled window escapes the source field");
    const auto row = row_at(field, std::clamp(xz, zl, zh));
    if (same_axis) {
      for (std::size_t j = 0; j < grid.n_theta; ++j)
        radii.push_back(lam * (grid.n_theta == field.n_theta() ? row[j] : periodic_cubic(row, grid.theta(j))));
    } else {
      const auto shifted = shifted_row(row, ax, ay, grid.n_theta, lam);
      radii.insert(radii.end(), shifted.begin(), shifted.end());
    }
  }
  return CylindricalGraphField(GridFunction(grid, std::move(radii)));
}

// ---------------------------------------------------------------------------

DecayFit decay_exponent_fit(std::span<const double> z, std::span<const double> sup_u) {
  require(z.size() == sup_u.size() && !z.empty(), ErrorKind::InvalidArgument, "mismatched decay samples");
  const bool all_zero = std::all_of(sup_u.begin(), sup_u.end(), [](double v) { return v == 0.0; });
  if (!all_zero)
    for (double v : sup_u)
      require(v > 0.0 && std::isfinite(v), ErrorKind::InvalidArgument, "decay samples must be positive");
  DecayFit out;
  out.fit = fit::dyadic_power_fit(z, sup_u);
  out.exact_symmetry = out.fit.all_zero;
  out.C = out.fit.C;
  out.p = out.fit.p;
  return out;
}

}  // namespace tsol::symmetry
