#include "tsol/residual.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "tsol/geometry.hpp"
#include "tsol/parallel.hpp"

namespace tsol::residual {

double ResidualField::max_abs() const {
  double m = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k)
    if (mask[k]) m = std::max(m, std::abs(values[k]));
  return m;
}

double ResidualField::max_abs_defect() const {
  double m = 0.0;
  for (std::size_t k = 0; k < defect.size(); ++k)
    if (mask[k]) m = std::max(m, std::abs(defect[k]));
  return m;
}

namespace {

ResidualField empty_like(const PolarGrid& grid) {
  ResidualField out;
  out.grid = grid;
  out.values.assign(grid.size(), 0.0);
  out.mask.assign(grid.size(), 0);
  out.defect.assign(grid.size(), 0.0);
  return out;
}

template <class PerNode>
void fill_interior(ResidualField& out, unsigned threads, PerNode&& node) {
  const PolarGrid& g = out.grid;
  const std::size_t first = geometry::kBoundaryBand;
  if (g.n_axial < 2 * first + 1) fail(ErrorKind::BoundaryProximity, "grid has no interior rows");
  const std::size_t rows = g.n_axial - 2 * first;
  parallel_for(rows, threads, [&](std::size_t r) {
    const std::size_t i = first + r;
    for (std::size_t j = 0; j < g.n_theta; ++j) {
      const auto [res, def] = node(i, j);
      const std::size_t k = g.index(i, j);
      out.values[k] = res;
      out.defect[k] = def;
      out.mask[k] = 1;
    }
  });
}

}  // namespace

ResidualField cylindrical_translator_residual(const CylindricalGraphField& field, unsigned threads) {
  ResidualField out = empty_like(field.grid());
  fill_interior(out, threads, [&](std::size_t i, std::size_t j) {
    const auto d = geometry::derivatives(field, i, j);
    const double r = d.r, r2 = r * r;
    const double W2 = 1.0 + d.r_z * d.r_z + d.r_t * d.r_t / r2;
    const double bracket = (1.0 + d.r_t * d.r_t / r2) * d.r_zz + (1.0 + d.r_z * d.r_z) * d.r_tt / r2 -
                           2.0 * d.r_z * d.r_t * d.r_tz / r2 - d.r_t * d.r_t / (r2 * r);
    const double res = d.r_z + bracket / W2 - 1.0 / r;
    return std::array<double, 2>{res, -res / std::sqrt(W2)};
  });
  return out;
}

ResidualField vertical_translator_residual(const VerticalGraphField& field, unsigned threads) {
  ResidualField out = empty_like(field.grid());
  fill_interior(out, threads, [&](std::size_t i, std::size_t j) {
    const auto d = geometry::derivatives(field, i, j);
    const double rho = field.rho(i);
    // Gradient and Hessian in the orthonormal polar frame (e_rho, e_theta).
    const double gr = d.h_r, gt = d.h_t / rho;
    const double hrr = d.h_rr;
    const double hrt = d.h_rt / rho - d.h_t / (rho * rho);
    const double htt = d.h_tt / (rho * rho) + d.h_r / rho;
    const double W2 = 1.0 + gr * gr + gt * gt;
    const double W = std::sqrt(W2);
    const double lap = hrr + htt;
    const double hess_grad = hrr * gr * gr + 2.0 * hrt * gr * gt + htt * gt * gt;
    const double HW = (lap * W2 - hess_grad) / W2;
    const double res = HW - 1.0;
    return std::array<double, 2>{res, res / W};
  });
  return out;
}

std::vector<double> mode_amplitudes(std::span<const double> row) {
  const std::size_t n = row.size();
  std::vector<double> in(row.begin(), row.end());
  std::vector<std::complex<double>> spec;
  Eigen::FFT<double> fft;
  fft.fwd(spec, in);
  std::vector<double> amp(n / 2 + 1);
  const double nn = static_cast<double>(n);
  for (std::size_t m = 0; m <= n / 2; ++m) {
    const double scale = (m == 0 || 2 * m == n) ? 1.0 / nn : 2.0 / nn;
    amp[m] = scale * std::abs(spec[m]);
  }
  return amp;
}

FourierSplit fourier_split(const CylindricalGraphField& field) {
  const PolarGrid& grid = field.grid();
  const std::size_t nz = grid.n_axial, nt = grid.n_theta;
  require(nz >= 3, ErrorKind::InsufficientExtent, "fourier_split needs at least three z-rows");
  std::vector<double> mean(nz);
  for (std::size_t i = 0; i < nz; ++i) {
    // Mean about the first sample, so constant rows reproduce their value exactly.
    const auto row = field.data().row(i);
    double acc = 0.0;
    for (double v : row) acc += v - row[0];
    mean[i] = row[0] + acc / static_cast<double>(nt);
  }
  const double h = grid.step();
  std::vector<double> slope(nz), z(nz);
  for (std::size_t i = 0; i < nz; ++i) z[i] = grid.axial(i);
  slope[0] = (-3.0 * mean[0] + 4.0 * mean[1] - mean[2]) / (2.0 * h);
  slope[nz - 1] = (3.0 * mean[nz - 1] - 4.0 * mean[nz - 2] + mean[nz - 3]) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < nz; ++i) slope[i] = (mean[i + 1] - mean[i - 1]) / (2.0 * h);

  std::vector<double> g(grid.size());
  for (std::size_t i = 0; i < nz; ++i)
    for (std::size_t j = 0; j < nt; ++j) g[grid.index(i, j)] = field(i, j) - mean[i];
  GridFunction gf(grid, std::move(g));

  std::vector<std::vector<double>> modes(nz);
  for (std::size_t i = 0; i < nz; ++i) {
    modes[i] = mode_amplitudes(gf.row(i));
    modes[i][0] = 0.0;
  }
  return FourierSplit{ProfileCurve::graph(z, mean, slope), std::move(gf), std::move(modes)};
}

namespace {

// Central difference weights of order 0..4 on offsets -2..2 (second-order accurate).
constexpr std::array<std::array<double, 5>, 5> kCentral{{
    {0.0, 0.0, 1.0, 0.0, 0.0},
    {0.0, -0.5, 0.0, 0.5, 0.0},
    {0.0, 1.0, -2.0, 1.0, 0.0},
    {-0.5, 1.0, 0.0, -1.0, 0.5},
    {1.0, -4.0, 6.0, -4.0, 1.0},
}};

}  // namespace

DecayReport derivative_decay_report(const GridFunction& g, std::size_t order) {
  require(order <= 4, ErrorKind::InvalidArgument, "derivative order must be <= 4");
  const PolarGrid& grid = g.grid();
  const std::size_t nz = grid.n_axial, nt = grid.n_theta;
  require(grid.lo > 0.0, ErrorKind::InvalidArgument, "decay fits need z > 0");
  require(nz >= 5, ErrorKind::InsufficientExtent, "need at least five z-rows");
  const double hz = grid.step(), ht = grid.dtheta();

  DecayReport rep;
  rep.order = order;
  std::vector<double> dtheta(5);
  for (std::size_t i = 2; i + 2 < nz; ++i) {
    double sup = 0.0;
    for (std::size_t j = 0; j < nt; ++j) {
      for (std::size_t b = 0; b <= order; ++b) {
        const double sb = std::pow(ht, -static_cast<double>(b));
        for (std::size_t di = 0; di < 5; ++di) {
          double acc = 0.0;
          for (std::size_t dj = 0; dj < 5; ++dj)
            if (kCentral[b][dj] != 0.0)
              acc += kCentral[b][dj] * g.wrapped(i + di - 2, static_cast<std::ptrdiff_t>(j + dj) - 2);
          dtheta[di] = acc * sb;
        }
        for (std::size_t a = 0; a + b <= order; ++a) {
          double acc = 0.0;
          for (std::size_t di = 0; di < 5; ++di) acc += kCentral[a][di] * dtheta[di];
          sup = std::max(sup, std::abs(acc * std::pow(hz, -static_cast<double>(a))));
        }
      }
    }
    rep.z.push_back(grid.axial(i));
    rep.sup.push_back(sup);
  }
  rep.fit = fit::dyadic_power_fit(rep.z, rep.sup);
  return rep;
}

namespace {

GrowthReport finish_growth(GrowthReport rep) {
  rep.fit = fit::dyadic_power_fit(rep.z, rep.sup);
  rep.literal_exponent = static_cast<double>(rep.order) + 0.5;
  rep.cylinder_exponent = 0.5 - static_cast<double>(rep.order);
  if (!rep.fit.all_zero) {
    rep.exponent = -rep.fit.p;
    rep.within_literal = rep.exponent <= rep.literal_exponent;
    rep.within_cylinder_model = std::abs(rep.exponent - rep.cylinder_exponent) <= 0.1;
  }
  return rep;
}

}  // namespace

GrowthReport z_derivative_growth_check(const CylindricalGraphField& field, std::size_t order) {
  require(order <= 3, ErrorKind::InvalidArgument, "growth order must be <= 3");
  require(field.z_min() > 0.0, ErrorKind::InvalidArgument, "growth fits need z > 0");
  const std::size_t nz = field.n_z();
  const double h = field.dz();
  GrowthReport rep;
  rep.order = order;
  for (std::size_t i = 2; i + 2 < nz; ++i) {
    double sup = 0.0;
    for (std::size_t j = 0; j < field.n_theta(); ++j) {
      double acc = 0.0;
      for (std::size_t di = 0; di < 5; ++di) acc += kCentral[order][di] * field(i + di - 2, j);
      sup = std::max(sup, std::abs(acc * std::pow(h, -static_cast<double>(order))));
    }
    rep.z.push_back(field.z(i));
    rep.sup.push_back(sup);
  }
  return finish_growth(std::move(rep));
}

GrowthReport z_derivative_growth_check(const ProfileCurve& profile, std::size_t order) {
  require(order <= 3, ErrorKind::InvalidArgument, "growth order must be <= 3");
  require(profile.parametrization() == Parametrization::GraphInZ, ErrorKind::NotGraphical,
          "growth check needs a graph profile");
  const auto s = profile.samples();
  require(s.size() >= 3, ErrorKind::InsufficientExtent, "profile too short");
  require(s.front().z > 0.0, ErrorKind::InvalidArgument, "growth fits need z > 0");
  GrowthReport rep;
  rep.order = order;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const double hm = s[k].z - s[k - 1].z, hp = s[k + 1].z - s[k].z;
    double v = 0.0;
    switch (order) {
      case 0: v = s[k].r; break;
      case 1: v = s[k].dr; break;
      case 2:
        v = (hm * hm * s[k + 1].dr - hp * hp * s[k - 1].dr + (hp * hp - hm * hm) * s[k].dr) / (hm * hp * (hm + hp));
        break;
      default:
        v = 2.0 * ((s[k + 1].dr - s[k].dr) / hp - (s[k].dr - s[k - 1].dr) / hm) / (hp + hm);
        break;
    }
    rep.z.push_back(s[k].z);
    rep.sup.push_back(std::abs(v));
  }
  return finish_growth(std::move(rep));
}

RadialSection radial_section(const VerticalGraphField& field) {
  RadialSection out;
  for (std::size_t i = 0; i < field.n_rho(); ++i) {
    double acc = 0.0;
    for (double v : field.data().row(i)) acc += v;
    out.s.push_back(field.rho(i));
    out.f.push_back(acc / static_cast<double>(field.n_theta()));
  }
  return out;
}

RadialSection radial_section(const ProfileCurve& profile) {
  RadialSection out;
  for (const auto& p : profile.samples()) {
    out.s.push_back(p.r);
    out.f.push_back(p.z);
  }
  return out;
}

AsymptoticsFit bowl_asymptotics_fit(const RadialSection& section, double s_lo, double s_hi,
                                    double divergence_threshold) {
  require(section.s.size() == section.f.size(), ErrorKind::InvalidArgument, "section arrays differ in length");
  std::vector<double> s, F;
  for (std::size_t k = 0; k < section.s.size(); ++k) {
    const double x = section.s[k];
    if (x < s_lo || x > s_hi) continue;
    require(x > 0.0 && std::isfinite(section.f[k]), ErrorKind::InvalidArgument, "section needs s > 0 and finite f");
    s.push_back(x);
    F.push_back(section.f[k] - 0.5 * x * x + std::log(x));
  }
  require(s.size() >= 4, ErrorKind::InsufficientExtent, "too few samples in the fit range");
  AsymptoticsFit out;
  out.s_min = *std::min_element(s.begin(), s.end());
  out.s_max = *std::max_element(s.begin(), s.end());
  require(out.s_max >= 4.0 * out.s_min, ErrorKind::InsufficientExtent, "fit range needs s_max >= 4 s_min");

  const auto n = static_cast<Eigen::Index>(s.size());
  Eigen::VectorXd y(n);
  Eigen::MatrixXd A3(n, 3), A2(n, 2);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double x = s[static_cast<std::size_t>(k)];
    y(k) = F[static_cast<std::size_t>(k)];
    A3(k, 0) = A2(k, 0) = 1.0;
    A3(k, 1) = A2(k, 1) = 1.0 / x;
    A3(k, 2) = std::log(x);
  }
  const Eigen::Vector3d free_log = A3.colPivHouseholderQr().solve(y);
  out.log_coefficient = free_log(2);
  out.divergent = std::abs(out.log_coefficient) > divergence_threshold;

  const Eigen::Vector2d cd = A2.colPivHouseholderQr().solve(y);
  out.c = cd(0);
  out.d = cd(1);
  double bound = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k)
    if (s[k] >= 0.5 * out.s_max) bound = std::max(bound, s[k] * std::abs(F[k] - out.c));
  out.remainder_bound = bound;
  return out;
}

}  // namespace tsol::residual
