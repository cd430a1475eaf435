#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfl/geometry/immersion.hpp"
#include "cfl/numerics/jet.hpp"

namespace cfl {

// ---------------------------------------------------------------------------
// Planar spiral  γ(s) = (2/c²)(cos w + w sin w, sin w − w cos w),  w = c√s.
// Unit speed with ⟨H, γ⟩ = −1; curvature κ = c / (2√s).
// ---------------------------------------------------------------------------

inline constexpr double kDefaultSpiralSMin = 1e-2;

inline void require_nonzero(double c, const char* who) {
  if (!(std::isfinite(c) && c != 0.0)) throw std::invalid_argument(std::string(who) + ": c must be nonzero");
}

inline std::vector<Jet2> spiral_point(double c, const Jet2& s) {
  const Jet2 w = c * sqrt(s);
  const Jet2 cw = cos(w), sw = sin(w);
  const double k = 2.0 / (c * c);
  return {k * (cw + w * sw), k * (sw - w * cw)};
}

/// Plain-double evaluation of the spiral, used for spot values.
inline std::array<double, 2> spiral_position(double c, double s) {
  require_nonzero(c, "spiral_position");
  if (!(s >= 0.0)) throw std::domain_error("spiral_position: s must be non-negative");
  const double w = c * std::sqrt(s);
  const double k = 2.0 / (c * c);
  return {k * (std::cos(w) + w * std::sin(w)), k * (std::sin(w) - w * std::cos(w))};
}

inline Immersion spiral_curve(double c, double s_min = kDefaultSpiralSMin,
                              double s_max = 60.0 * std::numbers::pi) {
  require_nonzero(c, "spiral_curve");
  if (!(s_min > 0.0)) throw std::invalid_argument("spiral_curve: s_min must be positive (κ is singular at s = 0)");
  if (!(s_max > s_min)) throw std::invalid_argument("spiral_curve: s_max must exceed s_min");
  return Immersion("spiral", 1, 2, {ChartAxis{s_min, s_max}},
                   [c](std::span<const Jet2> u) { return spiral_point(c, u[0]); });
}

inline void require_positive_s(double s, const char* who) {
  if (!(s > 0.0)) throw std::domain_error(std::string(who) + ": s must be positive");
}

inline double spiral_curvature(double c, double s) {
  require_nonzero(c, "spiral_curvature");
  require_positive_s(s, "spiral_curvature");
  return c / (2.0 * std::sqrt(s));
}

/// κ of the spiral as a one-variable jet in s.
inline Jet2 spiral_curvature_jet(double c, double s) {
  require_nonzero(c, "spiral_curvature_jet");
  require_positive_s(s, "spiral_curvature_jet");
  return c / (2.0 * sqrt(Jet2::variable(1, 0, s)));
}

/// κ'/κ³ + 2/b with b = c²; vanishes for the spiral curvature.
inline double curvature_ode_residual_planar(double c, double s) {
  const Jet2 k = spiral_curvature_jet(c, s);
  const double kv = k.value();
  return k.grad(0) / (kv * kv * kv) + 2.0 / (c * c);
}

// ---------------------------------------------------------------------------
// Circle of radius r centered at the origin, unit-speed parametrized.
// ---------------------------------------------------------------------------

inline Immersion circle_curve(double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("circle_curve: radius must be positive");
  return Immersion("circle", 1, 2, {ChartAxis{0.0, 2.0 * std::numbers::pi * radius, true}},
                   [radius](std::span<const Jet2> u) {
                     const Jet2 phi = u[0] / radius;
                     return std::vector<Jet2>{radius * cos(phi), radius * sin(phi)};
                   });
}

// ---------------------------------------------------------------------------
// Hypercylinder over the planar profile
//   γ(s) = ((1−n)s cos K + √(n(n−1)) q sin K, (1−n)s sin K − √(n(n−1)) q cos K),
//   q = √(c² − s²),  K(s) = √(n/(n−1)) arctan(s/q),  |s| < |c|.
// ---------------------------------------------------------------------------

inline void check_hypercylinder(int n, double c, const char* who) {
  if (n < 2) throw std::invalid_argument(std::string(who) + ": n must be at least 2");
  if (n + 1 > static_cast<int>(kMaxAmbientDim))
    throw std::invalid_argument(std::string(who) + ": n + 1 exceeds the ambient dimension limit");
  require_nonzero(c, who);
}

inline void check_hypercylinder_s(double c, double s, const char* who) {
  if (!(std::abs(s) < std::abs(c)))
    throw std::domain_error(std::string(who) + ": |s| must be below |c| (curvature is singular at |s| = |c|)");
}

inline std::vector<Jet2> hypercylinder_profile_point(int n, double c, const Jet2& s) {
  const double nn = n;
  const Jet2 q = sqrt(c * c - s * s);
  const Jet2 k = std::sqrt(nn / (nn - 1.0)) * atan2(s, q);
  const Jet2 ck = cos(k), sk = sin(k);
  const double a = 1.0 - nn, b = std::sqrt(nn * (nn - 1.0));
  return {a * s * ck + b * q * sk, a * s * sk - b * q * ck};
}

inline Immersion hypercylinder(int n, double c, double eps = -1.0, double t_min = 0.0,
                               double t_max = 1.0) {
  check_hypercylinder(n, c, "hypercylinder");
  const double ac = std::abs(c);
  if (eps < 0.0) eps = 1e-3 * ac;
  if (eps < 1e-3 * ac || eps >= ac)
    throw std::invalid_argument("hypercylinder: margin eps must lie in [1e-3 |c|, |c|)");
  if (!(t_min < t_max)) throw std::invalid_argument("hypercylinder: empty t range");
  std::vector<ChartAxis> axes{ChartAxis{-ac + eps, ac - eps}};
  for (int i = 1; i < n; ++i) axes.push_back(ChartAxis{t_min, t_max});
  return Immersion("hypercylinder", static_cast<std::size_t>(n), static_cast<std::size_t>(n + 1),
                   std::move(axes), [n, c](std::span<const Jet2> u) {
                     std::vector<Jet2> x = hypercylinder_profile_point(n, c, u[0]);
                     for (int i = 1; i < n; ++i) x.push_back(u[static_cast<std::size_t>(i)]);
                     return x;
                   });
}

/// The hypercylinder's planar profile on its own, as a curve immersion.
inline Immersion hypercylinder_profile(int n, double c, double eps = -1.0) {
  check_hypercylinder(n, c, "hypercylinder_profile");
  const double ac = std::abs(c);
  if (eps < 0.0) eps = 1e-3 * ac;
  return Immersion("hypercylinder-profile", 1, 2, {ChartAxis{-ac + eps, ac - eps}},
                   [n, c](std::span<const Jet2> u) { return hypercylinder_profile_point(n, c, u[0]); });
}

inline double hypercylinder_curvature(int n, double c, double s) {
  check_hypercylinder(n, c, "hypercylinder_curvature");
  check_hypercylinder_s(c, s, "hypercylinder_curvature");
  const double nn = n;
  return std::sqrt(nn) / (std::sqrt(nn - 1.0) * std::sqrt(c * c - s * s));
}

inline Jet2 hypercylinder_curvature_jet(int n, double c, double s) {
  check_hypercylinder(n, c, "hypercylinder_curvature_jet");
  check_hypercylinder_s(c, s, "hypercylinder_curvature_jet");
  const double nn = n;
  const Jet2 sv = Jet2::variable(1, 0, s);
  return (std::sqrt(nn) / std::sqrt(nn - 1.0)) / sqrt(c * c - sv * sv);
}

/// n(κκ'' − 3κ'²) − (n−1)κ⁴ for an arbitrary curvature jet in s.
inline double cylinder_ode_residual(int n, const Jet2& kappa) {
  const double k = kappa.value(), k1 = kappa.grad(0), k2 = kappa.hess(0, 0);
  return n * (k * k2 - 3.0 * k1 * k1) - (n - 1.0) * k * k * k * k;
}

inline double curvature_ode_residual_cylinder(int n, double c, double s) {
  return cylinder_ode_residual(n, hypercylinder_curvature_jet(n, c, s));
}

// ---------------------------------------------------------------------------
// Planar curve helpers
// ---------------------------------------------------------------------------

inline void require_planar_curve(const Immersion& curve, const char* who) {
  if (curve.intrinsic_dim() != 1 || curve.ambient_dim() != 2)
    throw std::invalid_argument(std::string(who) + ": expected a planar curve (n = 1, m = 2)");
}

/// Signed curvature (x'y'' − y'x'')/|γ'|³ from the exact jets of the chart.
inline double planar_curvature(const Immersion& curve, double s) {
  require_planar_curve(curve, "planar_curvature");
  const std::vector<Jet2> x = curve.jets(std::span<const double>(&s, 1));
  const double dx = x[0].grad(0), dy = x[1].grad(0);
  const double ddx = x[0].hess(0, 0), ddy = x[1].hess(0, 0);
  const double speed = std::hypot(dx, dy);
  return (dx * ddy - dy * ddx) / (speed * speed * speed);
}

inline double curve_speed(const Immersion& curve, double s) {
  const std::vector<Jet2> x = curve.jets(std::span<const double>(&s, 1));
  double v = 0.0;
  for (const Jet2& c : x) v += c.grad(0) * c.grad(0);
  return std::sqrt(v);
}

/// Values of γ, γ' and γ'' at s.
struct CurveJet {
  Vector position;
  Vector velocity;
  Vector acceleration;
};

inline CurveJet curve_jet(const Immersion& curve, double s) {
  const std::vector<Jet2> x = curve.jets(std::span<const double>(&s, 1));
  CurveJet j;
  for (const Jet2& c : x) {
    j.position.push_back(c.value());
    j.velocity.push_back(c.grad(0));
    j.acceleration.push_back(c.hess(0, 0));
  }
  return j;
}

}  // namespace cfl
