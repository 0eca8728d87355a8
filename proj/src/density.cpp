#include "tsol/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <type_traits>
#include <utility>

#include <boost/math/quadrature/gauss.hpp>

#include "tsol/error.hpp"
#include "tsol/parallel.hpp"

namespace tsol::density {

namespace {

constexpr double kPi = std::numbers::pi;

// Tail of a surface whose area in B(r) is at most K pi r^2, outside 8 rho.
double tail_bound(double K) { return 17.0 * K * std::exp(-kTruncationRadius * kTruncationRadius / 4.0); }

const std::vector<std::pair<double, double>>& gl_rule() {
  static const std::vector<std::pair<double, double>> rule = [] {
    using G = boost::math::quadrature::gauss<double, 30>;
    std::vector<std::pair<double, double>> r;
    const auto x = G::abscissa();
    const auto w = G::weights();
    for (std::size_t k = 0; k < x.size(); ++k) {
      r.emplace_back(x[k], w[k]);
      if (x[k] != 0.0) r.emplace_back(-x[k], w[k]);
    }
    return r;
  }();
  return rule;
}

template <class F>
double composite_gl(F&& f, double a, double b, std::size_t panels) {
  if (!(b > a)) return 0.0;
  const double h = (b - a) / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + h * static_cast<double>(p), mid = lo + h / 2;
    double part = 0.0;
    for (const auto& [x, w] : gl_rule()) part += w * f(mid + h / 2 * x);
    total += part * h / 2;
  }
  return total;
}

Vec3 unit(const Vec3& v, const char* what) {
  const double n = v.norm();
  require(n > 0.0 && std::isfinite(n), ErrorKind::InvalidArgument, what);
  return v / n;
}

DensityValue plane_density(const Plane& P, const Vec3& x0, double rho, const QuadratureOptions& o) {
  const Vec3 n = unit(P.normal, "plane normal must be nonzero");
  const double d = (x0 - P.point).dot(n);
  const double R = kTruncationRadius * rho;
  DensityValue out{0.0, tail_bound(1.0), false};
  if (std::abs(d) >= R) return out;
  const double a = std::sqrt(R * R - d * d), fr = 4 * rho * rho;
  // In-plane polar coordinates about the foot of x0; the angular trapezoid
  // sees a constant integrand.
  const double radial = composite_gl([&](double s) { return s * std::exp(-(d * d + s * s) / fr); }, 0.0, a, o.panels);
  double total = 0.0;
  for (std::size_t k = 0; k < o.n_angle; ++k) total += radial;
  out.value = total * (2 * kPi / static_cast<double>(o.n_angle)) / (kPi * fr);
  return out;
}

DensityValue sphere_density(const Sphere& S, const Vec3& x0, double rho, const QuadratureOptions& o) {
  require(S.radius > 0.0, ErrorKind::InvalidArgument, "sphere radius must be positive");
  const double a = S.radius, d = (x0 - S.center).norm(), R = kTruncationRadius * rho, fr = 4 * rho * rho;
  // Polar angle measured from the direction of x0 as seen from the centre.
  double theta_max = kPi;
  if (d > 0.0) {
    const double c = (a * a + d * d - R * R) / (2 * a * d);
    if (c >= 1.0) theta_max = 0.0;
    else if (c > -1.0) theta_max = std::acos(c);
  } else if (a > R) {
    theta_max = 0.0;
  }
  DensityValue out{0.0, tail_bound(4.0), false};
  const double polar = composite_gl(
      [&](double t) { return a * a * std::sin(t) * std::exp(-(a * a + d * d - 2 * a * d * std::cos(t)) / fr); }, 0.0,
      theta_max, o.panels);
  double total = 0.0;
  for (std::size_t k = 0; k < o.n_angle; ++k) total += polar;
  out.value = total * (2 * kPi / static_cast<double>(o.n_angle)) / (kPi * fr);
  return out;
}

DensityValue cylinder_density(const Cylinder& C, const Vec3& x0, double rho, const QuadratureOptions& o) {
  require(C.radius > 0.0, ErrorKind::InvalidArgument, "cylinder radius must be positive");
  const Vec3 e = unit(C.direction, "cylinder direction must be nonzero");
  const Vec3 w = x0 - C.axis_point;
  const double d = (w - w.dot(e) * e).norm();
  const double Rc = C.radius, R = kTruncationRadius * rho, fr = 4 * rho * rho;
  DensityValue out{0.0, tail_bound(4.0), false};
  double total = 0.0;
  for (std::size_t k = 0; k < o.n_angle; ++k) {
    const double phi = 2 * kPi * static_cast<double>(k) / static_cast<double>(o.n_angle);
    const double planar = Rc * Rc + d * d - 2 * Rc * d * std::cos(phi);
    const double m = R * R - planar;
    if (m <= 0.0) continue;
    const double zmax = std::sqrt(m);
    total += Rc * composite_gl([&](double z) { return std::exp(-(z * z + planar) / fr); }, -zmax, zmax, o.panels);
  }
  out.value = total * (2 * kPi / static_cast<double>(o.n_angle)) / (kPi * fr);
  return out;
}

// Node quadrature on a graph chart: trapezoid in both directions (periodic in
// theta), area element from centred differences, one-sided at the ends.
template <class Field>
DensityValue field_density(const Field& f, const Vec3& x0, double rho) {
  constexpr bool cyl = std::is_same_v<Field, CylindricalGraphField>;
  const PolarGrid& g = f.grid();
  const std::size_t n = g.n_axial, nt = g.n_theta;
  require(n >= 3, ErrorKind::InsufficientExtent, "density quadrature needs at least three axial nodes");
  const double R = kTruncationRadius * rho, fr = 4 * rho * rho, ha = g.step(), ht = g.dtheta();
  DensityValue out;
  if constexpr (cyl) {
    out.truncated = x0.z() - R < g.lo || x0.z() + R > g.hi;
  } else {
    const double dxy = std::hypot(x0.x(), x0.y());
    out.truncated = dxy - R < g.lo || dxy + R > g.hi;
  }
  double total = 0.0, area = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wa = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    const double a = g.axial(i);
    for (std::size_t j = 0; j < nt; ++j) {
      const auto jj = static_cast<std::ptrdiff_t>(j);
      const double v = f(i, j);
      double da;
      if (i == 0) da = (-3 * v + 4 * f(1, j) - f(2, j)) / (2 * ha);
      else if (i == n - 1) da = (3 * v - 4 * f(n - 2, j) + f(n - 3, j)) / (2 * ha);
      else da = (f(i + 1, j) - f(i - 1, j)) / (2 * ha);
      const double dt = (f.wrapped(i, jj + 1) - f.wrapped(i, jj - 1)) / (2 * ht);
      const double th = g.theta(j);
      Vec3 X;
      double dA;
      if constexpr (cyl) {
        X = Vec3(v * std::cos(th), v * std::sin(th), a);
        dA = std::sqrt(v * v * (1 + da * da) + dt * dt);
      } else {
        X = Vec3(a * std::cos(th), a * std::sin(th), v);
        dA = std::sqrt(a * a * (1 + da * da) + dt * dt);
      }
      const double r2 = (X - x0).squaredNorm();
      if (r2 > R * R) continue;
      const double wgt = wa * dA * ha * ht;
      area += wgt;
      total += wgt * std::exp(-r2 / fr);
    }
  }
  out.value = total / (kPi * fr);
  // Area ratio of the covered ball stands in for the growth constant.
  out.truncation_bound = tail_bound(std::max(1.0, area / (kPi * R * R)));
  return out;
}

}  // namespace

DensityValue gaussian_density(const Surface& surface, const Vec3& x0, double rho, const QuadratureOptions& options) {
  require(rho > 0.0 && std::isfinite(rho), ErrorKind::InvalidArgument, "scale rho must be positive");
  require(x0.allFinite(), ErrorKind::NonFinite, "non-finite density centre");
  require(options.panels >= 1 && options.n_angle >= 8, ErrorKind::InvalidArgument, "quadrature too coarse");
  return std::visit(
      [&](const auto& s) -> DensityValue {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Plane>) return plane_density(s, x0, rho, options);
        else if constexpr (std::is_same_v<T, Sphere>) return sphere_density(s, x0, rho, options);
        else if constexpr (std::is_same_v<T, Cylinder>) return cylinder_density(s, x0, rho, options);
        else return field_density(s, x0, rho);
      },
      surface);
}

EntropyEstimate entropy_estimate(const Surface& surface, std::span<const Vec3> centers, std::span<const double> scales,
                                 unsigned threads, const QuadratureOptions& options) {
  require(!centers.empty() && !scales.empty(), ErrorKind::InvalidArgument, "entropy grids must be nonempty");
  EntropyEstimate est;
  est.table.resize(centers.size() * scales.size());
  parallel_for(est.table.size(), threads, [&](std::size_t k) {
    const std::size_t c = k / scales.size(), s = k % scales.size();
    est.table[k] = EntropyEntry{c, scales[s], gaussian_density(surface, centers[c], scales[s], options)};
  });
  est.sup = -1.0;
  for (const auto& e : est.table) {
    est.any_truncated = est.any_truncated || e.density.truncated;
    if (e.density.value > est.sup) {
      est.sup = e.density.value;
      est.argmax_center = centers[e.center];
      est.argmax_scale = e.scale;
    }
  }
  return est;
}

}  // namespace tsol::density
