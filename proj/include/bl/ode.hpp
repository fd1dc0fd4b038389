#pragma once

// Dormand-Prince 5(4) embedded Runge-Kutta with an optional caller-supplied
// step ceiling (used to keep steps small near poles of the Loewner field)
// and a halting predicate (swallow events).

#include "bl/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

namespace bl {

struct OdeOptions {
  double rtol = 1e-12;
  double atol = 1e-12;
  double h_init = 1e-3;
  double h_min = 1e-15;
  long max_steps = 2'000'000;
};

template <class V>
struct OdeResult {
  V y;
  double t = 0.0;
  bool halted = false;
  long steps = 0;
};

namespace detail {

template <class S>
double magnitude(const S& s) {
  return std::abs(s);
}

template <class V>
V axpy(const V& y, double h, std::initializer_list<std::pair<double, const V*>> terms) {
  V out = y;
  for (const auto& [c, k] : terms) {
    if (c == 0.0) continue;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += (h * c) * (*k)[i];
  }
  return out;
}

}  // namespace detail

struct NoStepLimit {
  template <class V>
  double operator()(double, const V&) const {
    return std::numeric_limits<double>::infinity();
  }
};

struct NeverHalt {
  template <class V>
  bool operator()(double, const V&) const {
    return false;
  }
};

// Integrates y' = f(t, y) from t0 to t1 (either direction). `max_step(t, y)`
// bounds |h|; `halt(t, y)` stops the run early with result.halted = true.
template <class V, class Rhs, class MaxStep = NoStepLimit, class Halt = NeverHalt>
OdeResult<V> integrate_dp45(Rhs&& f, V y, double t0, double t1, const OdeOptions& opt = {},
                            MaxStep&& max_step = {}, Halt&& halt = {}) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  OdeResult<V> res;
  res.t = t0;
  if (t1 == t0) {
    res.y = std::move(y);
    return res;
  }
  const double dir = t1 > t0 ? 1.0 : -1.0;
  double t = t0;
  double h = std::min(opt.h_init, std::abs(t1 - t0));
  if (halt(t, y)) {
    res.y = std::move(y);
    res.halted = true;
    return res;
  }
  V k1 = f(t, y);
  while (dir * (t1 - t) > 0.0) {
    if (++res.steps > opt.max_steps) throw IntegrationError("integrate_dp45: step budget exhausted at t=" + std::to_string(t));
    h = std::min({h, std::abs(t1 - t), max_step(t, y)});
    if (h < opt.h_min * std::max(1.0, std::abs(t)))
      throw IntegrationError("integrate_dp45: step size underflow at t=" + std::to_string(t));
    const double hs = dir * h;
    const V k2 = f(t + c2 * hs, detail::axpy(y, hs, {{a21, &k1}}));
    const V k3 = f(t + c3 * hs, detail::axpy(y, hs, {{a31, &k1}, {a32, &k2}}));
    const V k4 = f(t + c4 * hs, detail::axpy(y, hs, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const V k5 = f(t + c5 * hs, detail::axpy(y, hs, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const V k6 = f(t + hs, detail::axpy(y, hs, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    V ynew = detail::axpy(y, hs, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const V k7 = f(t + hs, ynew);

    double err = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const auto e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opt.atol + opt.rtol * std::max(detail::magnitude(y[i]), detail::magnitude(ynew[i]));
      err = std::max(err, detail::magnitude(e) / sc);
    }
    if (!std::isfinite(err)) {
      h *= 0.25;
      continue;
    }
    if (err <= 1.0) {
      t = (std::abs(t1 - (t + hs)) <= 1e-14 * std::max(1.0, std::abs(t1))) ? t1 : t + hs;
      y = std::move(ynew);
      k1 = k7;
      if (halt(t, y)) {
        res.halted = true;
        break;
      }
      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.25));
    }
  }
  res.y = std::move(y);
  res.t = t;
  return res;
}

}  // namespace bl
