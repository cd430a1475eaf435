#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfl/numerics/linalg.hpp"

namespace cfl {

/// One accepted sample of an ODE trajectory. `step` is the size of the step
/// that produced it (the initial step estimate for the first sample).
struct OdeState {
  double s = 0.0;
  Vector y;
  double step = 0.0;
};

using OdeRhs = std::function<Vector(double, const Vector&)>;

struct OdeOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-8;
  /// Cap on |step| as a fraction of |s1 - s0|.
  double max_step_fraction = 1.0 / 16.0;
  std::size_t max_steps = 1'000'000;
};

/// Integration stopped before reaching s1. Carries the trajectory so far.
class OdeIntegrationError : public std::runtime_error {
 public:
  OdeIntegrationError(const std::string& what, double last_s, std::vector<OdeState> partial)
      : std::runtime_error(what), last_s_(last_s), partial_(std::move(partial)) {}

  double last_s() const noexcept { return last_s_; }
  const std::vector<OdeState>& partial() const noexcept { return partial_; }

 private:
  double last_s_;
  std::vector<OdeState> partial_;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DormandPrince {
  static constexpr std::array<double, 7> c{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  // Fifth-order weights (also row 7, FSAL).
  static constexpr std::array<double, 7> b{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192,
                                           -2187.0 / 6784, 11.0 / 84, 0.0};
  // b - b*, difference between the fifth- and fourth-order solutions.
  static constexpr std::array<double, 7> e{71.0 / 57600,  0.0,          -71.0 / 16695,
                                           71.0 / 1920,   -17253.0 / 339200, 22.0 / 525,
                                           -1.0 / 40};
};

inline Vector combo(const Vector& y, double h, std::initializer_list<std::pair<double, const Vector*>> terms) {
  Vector r = y;
  for (auto [coef, k] : terms)
    if (coef != 0.0) axpy(h * coef, *k, r);
  return r;
}

inline bool all_finite(const Vector& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace detail

/// Adaptive embedded Runge-Kutta 4(5) (Dormand-Prince) with PI step control.
/// Integrates from s0 to s1 (either direction); the returned trajectory holds
/// every accepted step including both endpoints.
///
/// A std::domain_error or non-finite value from `rhs` rejects the trial step;
/// if the step then shrinks below 1e-13 |s1 - s0| the integration stops with
/// OdeIntegrationError. Other exceptions from `rhs` propagate.
inline std::vector<OdeState> rk45_integrate(const OdeRhs& rhs, Vector y0, double s0, double s1,
                                            const OdeOptions& opt = {}) {
  if (!(opt.rel_tol >= 1e-13 && opt.rel_tol <= 1e-2 && opt.abs_tol >= 1e-13 && opt.abs_tol <= 1e-2))
    throw std::invalid_argument("rk45_integrate: tolerances must lie in [1e-13, 1e-2]");
  if (!detail::all_finite(y0)) throw std::invalid_argument("rk45_integrate: non-finite initial state");

  using T = detail::DormandPrince;
  const double span = std::abs(s1 - s0);
  const double dir = s1 >= s0 ? 1.0 : -1.0;
  const double h_max = span * opt.max_step_fraction;
  const double h_min = 1e-13 * span;
  const std::size_t dim = y0.size();

  std::vector<OdeState> traj;
  auto fail = [&](const std::string& why, double s) -> OdeIntegrationError {
    return OdeIntegrationError("rk45_integrate: " + why + " at s = " + std::to_string(s), s, traj);
  };
  struct StageFailure {
    std::string why;
  };
  auto eval = [&](double s, const Vector& y) {
    Vector k;
    try {
      k = rhs(s, y);
    } catch (const std::domain_error& e) {
      throw StageFailure{std::string("singular right-hand side (") + e.what() + ")"};
    }
    if (k.size() != dim) throw std::invalid_argument("rk45_integrate: rhs returned wrong size");
    if (!detail::all_finite(k)) throw StageFailure{"non-finite derivative"};
    return k;
  };

  double s = s0;
  Vector y = std::move(y0);
  if (span == 0.0) {
    traj.push_back({s, y, 0.0});
    return traj;
  }

  Vector k1;
  try {
    k1 = eval(s, y);
  } catch (const StageFailure& f) {
    throw fail(f.why, s);
  }
  // Initial step: Hairer-Norsett-Wanner heuristic, clipped to h_max.
  double h;
  {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double sc = opt.abs_tol + opt.rel_tol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / std::max<std::size_t>(dim, 1));
    d1 = std::sqrt(d1 / std::max<std::size_t>(dim, 1));
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    h = std::clamp(h, 10.0 * h_min, h_max);
  }
  traj.push_back({s, y, h});

  constexpr double safety = 0.9, alpha = 0.7 / 5.0, beta = 0.4 / 5.0;
  double err_prev = 1e-4;
  bool last_rejected = false;

  for (std::size_t steps = 0; steps < opt.max_steps; ++steps) {
    const double remaining = std::abs(s1 - s);
    if (remaining <= 0.0) return traj;
    bool final_step = false;
    if (h >= remaining) {
      h = remaining;
      final_step = true;
    }
    const double hs = dir * h;

    Vector y_new, k3, k4, k5, k6, k7;
    double s_new = 0.0;
    std::string stage_error;
    try {
      const Vector k2 = eval(s + T::c[1] * hs, detail::combo(y, hs, {{T::a21, &k1}}));
      k3 = eval(s + T::c[2] * hs, detail::combo(y, hs, {{T::a31, &k1}, {T::a32, &k2}}));
      k4 = eval(s + T::c[3] * hs,
                detail::combo(y, hs, {{T::a41, &k1}, {T::a42, &k2}, {T::a43, &k3}}));
      k5 = eval(s + T::c[4] * hs, detail::combo(y, hs, {{T::a51, &k1}, {T::a52, &k2},
                                                        {T::a53, &k3}, {T::a54, &k4}}));
      k6 = eval(s + hs, detail::combo(y, hs, {{T::a61, &k1}, {T::a62, &k2}, {T::a63, &k3},
                                              {T::a64, &k4}, {T::a65, &k5}}));
      s_new = final_step ? s1 : s + hs;
      y_new = detail::combo(y, hs, {{T::b[0], &k1}, {T::b[2], &k3}, {T::b[3], &k4},
                                    {T::b[4], &k5}, {T::b[5], &k6}});
      k7 = eval(s_new, y_new);
    } catch (const StageFailure& f) {
      stage_error = f.why;
    }
    if (!stage_error.empty()) {
      h *= 0.25;
      last_rejected = true;
      if (h < h_min) throw fail(stage_error + ", step size underflow", s);
      continue;
    }

    double err = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double ei = hs * (T::e[0] * k1[i] + T::e[2] * k3[i] + T::e[3] * k4[i] + T::e[4] * k5[i] +
                              T::e[5] * k6[i] + T::e[6] * k7[i]);
      const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err = std::max(err, std::abs(ei) / sc);
    }
    if (!std::isfinite(err)) throw fail("non-finite error estimate", s);

    if (err <= 1.0) {
      double factor = err == 0.0 ? 5.0
                                 : safety * std::pow(err, -alpha) * std::pow(err_prev, beta);
      factor = std::clamp(factor, 0.2, last_rejected ? 1.0 : 5.0);
      const double h_used = h;
      s = s_new;
      y = std::move(y_new);
      k1 = k7;
      traj.push_back({s, y, h_used});
      if (final_step) return traj;
      err_prev = std::max(err, 1e-4);
      h = std::min(h * factor, h_max);
      last_rejected = false;
    } else {
      const double factor = std::max(0.2, safety * std::pow(err, -alpha));
      h *= factor;
      last_rejected = true;
    }
    if (h < h_min) throw fail("step size underflow", s);
  }
  throw fail("too many steps", s);
}

}  // namespace cfl
