#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfl/geometry/immersion.hpp"
#include "cfl/numerics/jet.hpp"
#include "cfl/numerics/linalg.hpp"

namespace cfl {

inline std::string format_point(std::span<const double> u) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < u.size(); ++i) os << (i ? ", " : "") << u[i];
  os << ')';
  return os.str();
}

/// The chart loses rank (or its metric degenerates) at the parameter point u.
class DegeneratePointError : public std::runtime_error {
 public:
  DegeneratePointError(std::vector<double> u, const std::string& why)
      : std::runtime_error("degenerate chart at u = " + format_point(u) + ": " + why),
        u_(std::move(u)) {}
  const std::vector<double>& u() const noexcept { return u_; }

 private:
  std::vector<double> u_;
};

/// Symmetric n x n array of ambient vectors, indexed (i, j).
class SymmetricVectorArray {
 public:
  SymmetricVectorArray() = default;
  SymmetricVectorArray(std::size_t n, std::size_t m) : n_(n), data_(n * n, Vector(m, 0.0)) {}

  std::size_t size() const noexcept { return n_; }
  const Vector& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, Vector v) {
    data_[j * n_ + i] = v;
    data_[i * n_ + j] = std::move(v);
  }

 private:
  std::size_t n_ = 0;
  std::vector<Vector> data_;
};

/// Pointwise extrinsic geometry at one chart point.
struct GeometryFrame {
  std::vector<double> u;
  std::size_t n = 0;
  std::size_t m = 0;

  Vector x;
  std::vector<Vector> tangents;  ///< ∂x/∂u^i
  Matrix metric;                 ///< g_ij
  Matrix metric_inverse;         ///< g^ij
  std::vector<Vector> onb;       ///< Gram-Schmidt of the tangents in index order
  Matrix onb_coefficients;       ///< onb[i] = Σ_k onb_coefficients(i, k) tangents[k]
  SymmetricVectorArray second_partials;  ///< ∂²x/∂u^i∂u^j
  SymmetricVectorArray sff;              ///< h(e_i, e_j), normal-valued
  Vector mean_curvature;                 ///< H = (1/n) Σ h(e_i, e_i)
  Vector x_tangent;                      ///< x^T
  Vector x_normal;                       ///< x^N
  double potential = 0.0;                ///< f = ½⟨x, x⟩
  double residual = 0.0;                 ///< ⟨H, x⟩ + 1
};

namespace detail {

inline Vector tangential_projection(std::span<const Vector> onb, std::span<const double> v) {
  Vector t(v.size(), 0.0);
  for (const Vector& e : onb) axpy(dot(v, e), e, t);
  return t;
}

inline Matrix metric_from(std::span<const Vector> tangents) {
  const std::size_t n = tangents.size();
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) g(i, j) = g(j, i) = dot(tangents[i], tangents[j]);
  return g;
}

}  // namespace detail

/// Evaluates position, tangents, metric, orthonormal frame, second
/// fundamental form, mean curvature and the canonical split at u.
inline GeometryFrame evaluate_frame(const Immersion& im, std::span<const double> u) {
  const std::size_t n = im.intrinsic_dim(), m = im.ambient_dim();
  const std::vector<Jet2> xj = im.jets(u);

  GeometryFrame fr;
  fr.u.assign(u.begin(), u.end());
  fr.n = n;
  fr.m = m;
  fr.x.resize(m);
  fr.tangents.assign(n, Vector(m, 0.0));
  fr.second_partials = SymmetricVectorArray(n, m);
  for (std::size_t a = 0; a < m; ++a) {
    if (!xj[a].is_finite())
      throw DegeneratePointError(fr.u, "non-finite coordinate jet in component " + std::to_string(a));
    fr.x[a] = xj[a].value();
    for (std::size_t i = 0; i < n; ++i) fr.tangents[i][a] = xj[a].grad(i);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      Vector d(m);
      for (std::size_t a = 0; a < m; ++a) d[a] = xj[a].hess(i, j);
      fr.second_partials.set(i, j, std::move(d));
    }

  try {
    fr.onb = gram_schmidt(fr.tangents, n);
    fr.metric = detail::metric_from(fr.tangents);
    fr.metric_inverse = spd_inverse(fr.metric);
  } catch (const DegenerateChartError& e) {
    throw DegeneratePointError(fr.u, e.what());
  } catch (const DegenerateMetricError& e) {
    throw DegeneratePointError(fr.u, e.what());
  }

  // Coefficients of e_i in the coordinate basis: solve g c = (⟨e_i, ∂_k x⟩)_k.
  fr.onb_coefficients = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector rhs(n);
    for (std::size_t k = 0; k < n; ++k) rhs[k] = dot(fr.onb[i], fr.tangents[k]);
    const Vector c = fr.metric_inverse * rhs;
    for (std::size_t k = 0; k < n; ++k) fr.onb_coefficients(i, k) = c[k];
  }

  // h(e_i, e_j): contract the second partials with the frame coefficients,
  // then drop the tangential (Christoffel) part.
  fr.sff = SymmetricVectorArray(n, m);
  fr.mean_curvature.assign(m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      Vector ambient(m, 0.0);
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l)
          axpy(fr.onb_coefficients(i, k) * fr.onb_coefficients(j, l), fr.second_partials(k, l),
               ambient);
      Vector normal = ambient - detail::tangential_projection(fr.onb, ambient);
      if (i == j) axpy(1.0 / static_cast<double>(n), normal, fr.mean_curvature);
      fr.sff.set(i, j, std::move(normal));
    }

  fr.x_tangent = detail::tangential_projection(fr.onb, fr.x);
  fr.x_normal = fr.x - fr.x_tangent;
  fr.potential = 0.5 * dot(fr.x, fr.x);
  fr.residual = dot(fr.mean_curvature, fr.x) + 1.0;
  return fr;
}

struct CanonicalSplit {
  Vector tangential;
  Vector normal;
};

/// x = x^T + x^N.
inline CanonicalSplit canonical_split(const GeometryFrame& fr) { return {fr.x_tangent, fr.x_normal}; }

/// ∇f for f = ½⟨x, x⟩, computed from the jet of f in chart coordinates,
/// raised with the inverse metric and pushed forward to E^m. Equals x^T.
inline Vector intrinsic_gradient_potential(const Immersion& im, std::span<const double> u) {
  const std::size_t n = im.intrinsic_dim(), m = im.ambient_dim();
  const std::vector<Jet2> xj = im.jets(u);
  Jet2 f(n, 0.0);
  for (const Jet2& c : xj) f += c * c;
  f *= 0.5;

  std::vector<Vector> tangents(n, Vector(m, 0.0));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t i = 0; i < n; ++i) tangents[i][a] = xj[a].grad(i);

  Vector components;
  try {
    components = spd_solve(detail::metric_from(tangents), f.gradient());
  } catch (const DegenerateMetricError& e) {
    throw DegeneratePointError({u.begin(), u.end()}, e.what());
  }
  Vector grad(m, 0.0);
  for (std::size_t k = 0; k < n; ++k) axpy(components[k], tangents[k], grad);
  return grad;
}

/// div x^T = n (1 + ⟨H, x⟩).
inline double divergence_closed_form(const GeometryFrame& fr) {
  return static_cast<double>(fr.n) * (1.0 + dot(fr.mean_curvature, fr.x));
}

/// div x^T = Σ_i ⟨∂̃_{e_i} x^T, e_i⟩ from the ambient derivative of the field
/// u ↦ x^T(u) = Σ_k X^k ∂_k x, X^k = g^{kj} ⟨x, ∂_j x⟩.
inline double divergence_direct(const Immersion& im, std::span<const double> u) {
  const GeometryFrame fr = evaluate_frame(im, u);
  const std::size_t n = fr.n, m = fr.m;
  const Matrix& ginv = fr.metric_inverse;

  // ∂_j f = ⟨x, ∂_j x⟩ and ∂_l ∂_j f = g_lj + ⟨x, ∂_l ∂_j x⟩.
  Vector df(n);
  Matrix ddf(n, n);
  for (std::size_t j = 0; j < n; ++j) df[j] = dot(fr.x, fr.tangents[j]);
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t j = 0; j < n; ++j) ddf(l, j) = fr.metric(l, j) + dot(fr.x, fr.second_partials(l, j));

  const Vector comp = ginv * df;  // X^k

  // Ambient derivative ∂_l x^T = Σ_k (∂_l X^k) ∂_k x + X^k ∂_l ∂_k x.
  std::vector<Vector> d_field(n, Vector(m, 0.0));
  for (std::size_t l = 0; l < n; ++l) {
    // ∂_l g_ij = ⟨∂_l∂_i x, ∂_j x⟩ + ⟨∂_i x, ∂_l∂_j x⟩
    Matrix dg(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        dg(i, j) = dot(fr.second_partials(l, i), fr.tangents[j]) +
                   dot(fr.tangents[i], fr.second_partials(l, j));
    // ∂_l g^{-1} = -g^{-1} (∂_l g) g^{-1}
    const Matrix dginv = ginv * dg * ginv;
    Vector ddf_l(n);
    for (std::size_t j = 0; j < n; ++j) ddf_l[j] = ddf(l, j);
    const Vector a = ginv * ddf_l;
    const Vector b = dginv * df;
    for (std::size_t k = 0; k < n; ++k) {
      axpy(a[k] - b[k], fr.tangents[k], d_field[l]);
      axpy(comp[k], fr.second_partials(l, k), d_field[l]);
    }
  }

  double div = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Vector along(m, 0.0);
    for (std::size_t l = 0; l < n; ++l) axpy(fr.onb_coefficients(i, l), d_field[l], along);
    div += dot(along, fr.onb[i]);
  }
  return div;
}

/// ⟨H, x⟩ + 1; zero exactly where x^T is divergence free.
inline double incompressibility_residual(const GeometryFrame& fr) { return fr.residual; }

/// Shape operator A_ξ in the orthonormal frame: (A_ξ)_ij = ⟨h(e_i, e_j), ξ⟩.
inline Matrix shape_operator(const GeometryFrame& fr, std::span<const double> xi) {
  if (xi.size() != fr.m) throw std::invalid_argument("shape_operator: xi has wrong dimension");
  const double scale = std::max(1.0, norm(xi));
  for (std::size_t i = 0; i < fr.n; ++i)
    if (std::abs(dot(xi, fr.onb[i])) > 1e-8 * scale)
      throw std::invalid_argument("shape_operator: xi is not normal to the tangent space");
  Matrix a(fr.n, fr.n);
  for (std::size_t i = 0; i < fr.n; ++i)
    for (std::size_t j = i; j < fr.n; ++j) a(i, j) = a(j, i) = dot(fr.sff(i, j), xi);
  return a;
}

/// Parameter point too close to a non-periodic chart boundary for the
/// finite-difference stencil.
class BoundaryError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

inline constexpr double kDefaultLaplaceStep = 1e-4;

/// Laplace-Beltrami of the position vector, Δx^a = -(1/√g) ∂_i(√g g^{ij} ∂_j x^a),
/// with the geometer's sign (Δx = -nH). The inner flux is exact from jets;
/// the outer derivative is a central difference with spacing fd_step.
inline Vector laplace_position(const Immersion& im, std::span<const double> u,
                               double fd_step = kDefaultLaplaceStep) {
  const std::size_t n = im.intrinsic_dim(), m = im.ambient_dim();
  if (!(fd_step >= 1e-6 && fd_step <= 1e-2))
    throw std::invalid_argument("laplace_position: fd_step must lie in [1e-6, 1e-2]");
  if (u.size() != n) throw std::invalid_argument("laplace_position: parameter point has wrong size");
  for (std::size_t i = 0; i < n; ++i) {
    const ChartAxis& ax = im.axis(i);
    if (!ax.periodic && (u[i] - 2.0 * fd_step < ax.lo || u[i] + 2.0 * fd_step > ax.hi))
      throw BoundaryError("laplace_position: u = " + format_point(u) +
                          " is within 2*fd_step of the boundary on axis " + std::to_string(i));
  }

  // Flux row i: √g Σ_j g^{ij} ∂_j x (an m-vector), evaluated at a point.
  auto flux = [&](std::span<const double> p, double& sqrt_det) {
    const std::vector<Jet2> xj = im.jets(p);
    std::vector<Vector> t(n, Vector(m, 0.0));
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t i = 0; i < n; ++i) t[i][a] = xj[a].grad(i);
    Matrix g = detail::metric_from(t), ginv;
    try {
      ginv = spd_inverse(g);
      sqrt_det = std::sqrt(spd_determinant(g));
    } catch (const DegenerateMetricError& e) {
      throw DegeneratePointError({p.begin(), p.end()}, e.what());
    }
    std::vector<Vector> rows(n, Vector(m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) axpy(sqrt_det * ginv(i, j), t[j], rows[i]);
    return rows;
  };

  double sqrt_det0 = 0.0;
  (void)flux(u, sqrt_det0);

  Vector lap(m, 0.0);
  std::vector<double> p(u.begin(), u.end());
  double dummy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = u[i] + fd_step;
    const Vector plus = flux(p, dummy)[i];
    p[i] = u[i] - fd_step;
    const Vector minus = flux(p, dummy)[i];
    p[i] = u[i];
    axpy(1.0 / (2.0 * fd_step), plus, lap);
    axpy(-1.0 / (2.0 * fd_step), minus, lap);
  }
  return (-1.0 / sqrt_det0) * lap;
}

/// Quantities behind the Beltrami pairing check at one point.
struct BeltramiPairing {
  double pairing = 0.0;              ///< ⟨x, Δx⟩
  double mean_curvature_defect = 0.0;  ///< ⟨x, Δx⟩ + n⟨H, x⟩, zero by Beltrami's formula
  double incompressible_defect = 0.0;  ///< ⟨x, Δx⟩ - n, zero iff x^T is divergence free here
};

inline BeltramiPairing verify_beltrami_pairing(const Immersion& im, std::span<const double> u,
                                               double fd_step = kDefaultLaplaceStep) {
  const Vector lap = laplace_position(im, u, fd_step);
  const GeometryFrame fr = evaluate_frame(im, u);
  BeltramiPairing out;
  out.pairing = dot(fr.x, lap);
  const double n = static_cast<double>(fr.n);
  out.mean_curvature_defect = out.pairing - n * (-dot(fr.mean_curvature, fr.x));
  out.incompressible_defect = out.pairing - n;
  return out;
}

}  // namespace cfl
