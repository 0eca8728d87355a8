#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace tsol::fit {

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y = slope * x + intercept. Needs two distinct x.
Line least_squares_line(std::span<const double> x, std::span<const double> y);

/// Sup of |value| over one dyadic band [lo, hi) = [2^m, 2^{m+1}), with the
/// abscissa at which it is attained.
struct DyadicBand {
  double lo = 0.0;
  double hi = 0.0;
  double sup = 0.0;
  double at = 0.0;
  std::size_t count = 0;
};

/// Groups positive abscissae into dyadic bands (empty bands dropped).
std::vector<DyadicBand> dyadic_bands(std::span<const double> x, std::span<const double> values);

/// sup_band |value| ~ C x^{-p}, fitted on log sup against log of the sup
/// location. `all_zero` marks identically-zero data (no fit performed).
struct PowerFit {
  std::vector<DyadicBand> bands;
  double C = std::numeric_limits<double>::quiet_NaN();
  double p = std::numeric_limits<double>::quiet_NaN();
  bool all_zero = false;
};

/// Throws InsufficientExtent with fewer than `min_bands` bands and
/// InvalidArgument on non-positive abscissae.
PowerFit dyadic_power_fit(std::span<const double> x, std::span<const double> values, std::size_t min_bands = 3);

}  // namespace tsol::fit
