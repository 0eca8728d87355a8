#include "tsol/fit.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tsol/error.hpp"

namespace tsol::fit {

Line least_squares_line(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::InvalidArgument, "line fit needs >= 2 paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  require(sxx > 0.0, ErrorKind::InvalidArgument, "line fit needs two distinct abscissae");
  const double slope = sxy / sxx;
  return Line{slope, my - slope * mx};
}

std::vector<DyadicBand> dyadic_bands(std::span<const double> x, std::span<const double> values) {
  require(x.size() == values.size(), ErrorKind::InvalidArgument, "band data arrays differ in length");
  std::map<int, DyadicBand> bands;
  for (std::size_t k = 0; k < x.size(); ++k) {
    require(x[k] > 0.0 && std::isfinite(x[k]), ErrorKind::InvalidArgument, "band abscissae must be positive");
    require(std::isfinite(values[k]), ErrorKind::NonFinite, "non-finite band value");
    // floor(log2 x) via frexp is exact at powers of two.
    int e = 0;
    std::frexp(x[k], &e);
    const int m = e - 1;
    auto [it, fresh] = bands.try_emplace(m);
    DyadicBand& b = it->second;
    if (fresh) {
      b.lo = std::ldexp(1.0, m);
      b.hi = std::ldexp(1.0, m + 1);
      b.at = x[k];
    }
    ++b.count;
    const double v = std::abs(values[k]);
    if (v > b.sup) {
      b.sup = v;
      b.at = x[k];
    }
  }
  std::vector<DyadicBand> out;
  for (auto& [m, b] : bands) out.push_back(b);
  return out;
}

PowerFit dyadic_power_fit(std::span<const double> x, std::span<const double> values, std::size_t min_bands) {
  PowerFit fit;
  fit.bands = dyadic_bands(x, values);
  require(fit.bands.size() >= min_bands, ErrorKind::InsufficientExtent,
          "need samples in at least " + std::to_string(min_bands) + " dyadic bands");
  fit.all_zero = std::all_of(fit.bands.begin(), fit.bands.end(), [](const DyadicBand& b) { return b.sup == 0.0; });
  if (fit.all_zero) return fit;
  std::vector<double> lx, ly;
  for (const auto& b : fit.bands) {
    if (b.sup <= 0.0) continue;
    lx.push_back(std::log(b.at));
    ly.push_back(std::log(b.sup));
  }
  if (lx.size() < 2) return fit;
  const Line line = least_squares_line(lx, ly);
  fit.p = -line.slope;
  fit.C = std::exp(line.intercept);
  return fit;
}

}  // namespace tsol::fit
