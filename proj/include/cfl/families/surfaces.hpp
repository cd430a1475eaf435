#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cfl/families/curves.hpp"
#include "cfl/geometry/immersion.hpp"
#include "cfl/numerics/jet.hpp"

namespace cfl {

/// Round hypersphere S^n(r) centered at the origin of E^{n+1} in spherical
/// coordinates u = (φ_1, …, φ_{n−1}, θ):
///   x_1 = r cos φ_1, x_2 = r sin φ_1 cos φ_2, …, x_{n+1} = r sin φ_1 ⋯ sin φ_{n−1} sin θ.
/// The polar axes collapse at 0 and π; θ is periodic.
inline Immersion hypersphere(int n, double radius) {
  if (n < 1 || n > 7) throw std::invalid_argument("hypersphere: n must lie in [1, 7]");
  if (!(radius > 0.0)) throw std::invalid_argument("hypersphere: radius must be positive");
  std::vector<ChartAxis> axes;
  for (int i = 0; i + 1 < n; ++i) axes.push_back(ChartAxis{0.0, std::numbers::pi, false, true});
  axes.push_back(ChartAxis{0.0, 2.0 * std::numbers::pi, true});
  return Immersion("hypersphere", static_cast<std::size_t>(n), static_cast<std::size_t>(n + 1),
                   std::move(axes), [n, radius](std::span<const Jet2> u) {
                     const std::size_t dim = u[0].dim();
                     std::vector<Jet2> x;
                     Jet2 prefix = Jet2::constant(dim, radius);
                     for (int i = 0; i + 1 < n; ++i) {
                       x.push_back(prefix * cos(u[static_cast<std::size_t>(i)]));
                       prefix = prefix * sin(u[static_cast<std::size_t>(i)]);
                     }
                     const Jet2& theta = u[static_cast<std::size_t>(n - 1)];
                     x.push_back(prefix * cos(theta));
                     x.push_back(prefix * sin(theta));
                     return x;
                   });
}

/// Cone with vertex at the origin over the latitude circle of radius ρ on
/// the unit sphere: (θ, t) ↦ t (ρ cos θ, ρ sin θ, √(1 − ρ²)).
inline Immersion cone_over_circle(double rho, double t_min = 0.5, double t_max = 2.0) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("cone_over_circle: rho must lie in (0, 1)");
  if (!(t_min > 0.0 && t_max > t_min)) throw std::invalid_argument("cone_over_circle: need 0 < t_min < t_max");
  const double height = std::sqrt(1.0 - rho * rho);
  return Immersion("cone_over_circle", 2, 3,
                   {ChartAxis{0.0, 2.0 * std::numbers::pi, true}, ChartAxis{t_min, t_max}},
                   [rho, height](std::span<const Jet2> u) {
                     const Jet2& theta = u[0];
                     const Jet2& t = u[1];
                     return std::vector<Jet2>{rho * t * cos(theta), rho * t * sin(theta), height * t};
                   });
}

/// (u, v) ↦ (u, v, 0) on [−w, w]².
inline Immersion plane(double half_width = 3.0) {
  if (!(half_width > 0.0)) throw std::invalid_argument("plane: half width must be positive");
  return Immersion("plane", 2, 3, {ChartAxis{-half_width, half_width}, ChartAxis{-half_width, half_width}},
                   [](std::span<const Jet2> u) {
                     return std::vector<Jet2>{u[0], u[1], Jet2::constant(u[0].dim(), 0.0)};
                   });
}

/// Graph of z = a u² + b uv + c v² + d u + e v + f over [−w, w]².
struct QuadraticCoefficients {
  double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0;
};

inline Immersion graph_surface(QuadraticCoefficients q, double half_width = 1.5) {
  if (!(half_width > 0.0)) throw std::invalid_argument("graph_surface: half width must be positive");
  return Immersion("graph_surface", 2, 3,
                   {ChartAxis{-half_width, half_width}, ChartAxis{-half_width, half_width}},
                   [q](std::span<const Jet2> u) {
                     const Jet2& x = u[0];
                     const Jet2& y = u[1];
                     Jet2 z = q.a * x * x + q.b * x * y + q.c * y * y + q.d * x + q.e * y;
                     z += q.f;
                     return std::vector<Jet2>{x, y, z};
                   });
}

/// Torus of revolution ((R + r cos v) cos u, (R + r cos v) sin u, r sin v).
inline Immersion torus(double major = 2.0, double minor = 1.0) {
  if (!(minor > 0.0 && major > minor)) throw std::invalid_argument("torus: need 0 < minor < major");
  const double tau = 2.0 * std::numbers::pi;
  return Immersion("torus", 2, 3, {ChartAxis{0.0, tau, true}, ChartAxis{0.0, tau, true}},
                   [major, minor](std::span<const Jet2> u) {
                     const Jet2 ring = major + minor * cos(u[1]);
                     return std::vector<Jet2>{ring * cos(u[0]), ring * sin(u[0]), minor * sin(u[1])};
                   });
}

/// Right circular cylinder (ρ cos u, ρ sin u, v).
inline Immersion circular_cylinder(double radius = 1.0, double v_min = -3.0, double v_max = 3.0) {
  if (!(radius > 0.0)) throw std::invalid_argument("circular_cylinder: radius must be positive");
  if (!(v_min < v_max)) throw std::invalid_argument("circular_cylinder: empty v range");
  return Immersion("cylinder", 2, 3,
                   {ChartAxis{0.0, 2.0 * std::numbers::pi, true}, ChartAxis{v_min, v_max}},
                   [radius](std::span<const Jet2> u) {
                     return std::vector<Jet2>{radius * cos(u[0]), radius * sin(u[0]), u[1]};
                   });
}

// ---------------------------------------------------------------------------
// Product surfaces (β(s), γ(t)) ⊂ E⁴ of two planar curves.
// ---------------------------------------------------------------------------

inline Immersion product_surface(const Immersion& beta, const Immersion& gamma) {
  require_planar_curve(beta, "product_surface");
  require_planar_curve(gamma, "product_surface");
  return Immersion("product_surface", 2, 4, {beta.axis(0), gamma.axis(0)},
                   [beta, gamma](std::span<const Jet2> u) {
                     std::vector<Jet2> x = beta.apply(u.subspan(0, 1));
                     const std::vector<Jet2> y = gamma.apply(u.subspan(1, 1));
                     x.insert(x.end(), y.begin(), y.end());
                     return x;
                   });
}

/// Product of two origin-centered circles of the given radii.
inline Immersion product_surface(double radius_a, double radius_b) {
  return product_surface(circle_curve(radius_a), circle_curve(radius_b));
}

/// (⟨β, β''⟩ + a, ⟨γ, γ''⟩ + (2 − a)); both vanish iff the product splits the
/// incompressibility condition with the constant a.
inline std::pair<double, double> product_condition_residuals(const Immersion& beta, const Immersion& gamma,
                                                             double a, double s, double t) {
  require_planar_curve(beta, "product_condition_residuals");
  require_planar_curve(gamma, "product_condition_residuals");
  const CurveJet b = curve_jet(beta, s);
  const CurveJet g = curve_jet(gamma, t);
  if (std::abs(norm(b.velocity) - 1.0) > 1e-8 || std::abs(norm(g.velocity) - 1.0) > 1e-8)
    throw std::invalid_argument("product_condition_residuals: curves must be unit speed");
  return {dot(b.position, b.acceleration) + a, dot(g.position, g.acceleration) + (2.0 - a)};
}

}  // namespace cfl
