#pragma once

// Dormand-Prince 5(4) embedded pair with PI step-size control (Hairer,
// Norsett & Wanner, "Solving ODEs I", II.4). Internal to the soliton module;
// no attempt is made at a general ODE library surface.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <utility>

namespace tsol::rk {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
  double tol = 1e-10;  ///< absolute local error per step
  double h_init = 0.0; ///< 0: chosen from the initial slope
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 50'000'000;
  /// Parameter values the integrator must land on exactly (ascending).
  std::span<const double> landing_points{};
};

enum class Status { Completed, Stopped, StepUnderflow, MaxSteps };

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

/// Integrates y' = f(t, y) from t0 to t1 > t0. After every accepted step
/// observer(t, y, dydt) is called; returning false stops with Status::Stopped.
template <std::size_t N, class Rhs, class Observer>
Status integrate(Rhs&& f, double t0, State<N> y, double t1, const Options& opt, Observer&& observer,
                 Stats* stats = nullptr) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                   a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double safety = 0.9, fac_min = 0.2, fac_max = 10.0, beta = 0.04;
  constexpr double expo = 0.2 - beta * 0.75;

  Stats local;
  Stats& st = stats ? *stats : local;
  auto eval = [&](double t, const State<N>& x) {
    ++st.evaluations;
    return f(t, x);
  };
  auto axpy = [](const State<N>& base, double h, std::initializer_list<std::pair<double, const State<N>*>> terms) {
    State<N> out = base;
    for (std::size_t i = 0; i < N; ++i) {
      double acc = 0.0;
      for (const auto& [c, k] : terms) acc += c * (*k)[i];
      out[i] += h * acc;
    }
    return out;
  };

  double t = t0;
  State<N> k1 = eval(t, y);
  double h = opt.h_init;
  if (!(h > 0.0)) {
    double slope = 0.0;
    for (double v : k1) slope = std::max(slope, std::abs(v));
    h = std::min({1e-2 * (t1 - t0), std::pow(opt.tol, 0.2) / std::max(slope, 1e-12), opt.h_max});
  }
  std::size_t next_landing = 0;
  while (next_landing < opt.landing_points.size() && opt.landing_points[next_landing] <= t) ++next_landing;
  double err_old = 1e-4;

  while (t < t1) {
    if (st.accepted + st.rejected >= opt.max_steps) return Status::MaxSteps;
    h = std::min(h, opt.h_max);
    const double h_free = h;
    double target = t1;
    if (next_landing < opt.landing_points.size()) target = std::min(target, opt.landing_points[next_landing]);
    bool lands = false;
    if (t + h >= target) {
      h = target - t;
      lands = true;
    }
    if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
      return Status::StepUnderflow;

    const State<N> k2 = eval(t + c2 * h, axpy(y, h, {{a21, &k1}}));
    const State<N> k3 = eval(t + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    const State<N> k4 = eval(t + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State<N> k5 = eval(t + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State<N> k6 = eval(t + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State<N> y_new = axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
    const double t_new = lands ? target : t + h;
    const State<N> k7 = eval(t_new, y_new);

    double err = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      if (!std::isfinite(e) || !std::isfinite(y_new[i])) finite = false;
      err = std::max(err, std::abs(e) / opt.tol);
    }
    if (!finite) {
      ++st.rejected;
      h *= 0.25;
      continue;
    }
    if (err <= 1.0) {
      ++st.accepted;
      t = t_new;
      y = y_new;
      k1 = k7;
      if (lands && next_landing < opt.landing_points.size() && target == opt.landing_points[next_landing])
        ++next_landing;
      if (!observer(t, static_cast<const State<N>&>(y), static_cast<const State<N>&>(k1))) return Status::Stopped;
      const double fac = std::clamp(std::pow(err, expo) * std::pow(err_old, -beta) / safety, 1.0 / fac_max,
                                    1.0 / fac_min);
      err_old = std::max(err, 1e-4);
      h = lands ? std::max(h / fac, h_free) : h / fac;
    } else {
      ++st.rejected;
      h /= std::min(1.0 / fac_min, std::pow(err, expo) / safety);
    }
  }
  return Status::Completed;
}

}  // namespace tsol::rk
