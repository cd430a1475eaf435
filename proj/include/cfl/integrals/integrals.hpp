#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cfl/geometry/frame.hpp"
#include "cfl/geometry/immersion.hpp"
#include "cfl/numerics/quadrature.hpp"

namespace cfl {

enum class Integrand { volume, minkowski_hsiung };

inline const char* to_string(Integrand i) {
  return i == Integrand::volume ? "volume" : "minkowski_hsiung";
}

inline Integrand parse_integrand(const std::string& s) {
  if (s == "volume") return Integrand::volume;
  if (s == "minkowski_hsiung") return Integrand::minkowski_hsiung;
  throw std::invalid_argument("unknown integrand '" + s + "' (expected volume or minkowski_hsiung)");
}

inline constexpr int kDefaultQuadratureOrder = 32;
inline constexpr double kDefaultPoleMargin = 1e-6;

/// Tensor-product Gauss-Legendre integration over the whole chart box.
/// Collapsing axes are shrunk by `pole_margin` at both ends; the caller
/// asserts the chart covers a closed manifold (see Immersion::closed).
struct IntegrationJob {
  Immersion im;
  std::vector<int> orders;  ///< one per chart axis; empty means the default everywhere
  Integrand integrand = Integrand::volume;
  double pole_margin = kDefaultPoleMargin;
  /// Worker threads for node evaluation. Node values land in fixed slots and
  /// are summed pairwise in lexicographic node order, so the result does not
  /// depend on this.
  unsigned threads = 1;
};

namespace detail {

struct TensorGrid {
  std::vector<std::vector<double>> points;   // per axis, mapped to the chart interval
  std::vector<std::vector<double>> weights;  // per axis, including the Jacobian of the map
  std::size_t total = 1;
};

inline TensorGrid tensor_grid(const IntegrationJob& job) {
  const std::size_t n = job.im.intrinsic_dim();
  std::vector<int> orders = job.orders;
  if (orders.empty()) orders.assign(n, kDefaultQuadratureOrder);
  if (orders.size() != n) throw std::invalid_argument("integrate: one quadrature order per axis");
  TensorGrid g;
  for (std::size_t i = 0; i < n; ++i) {
    if (orders[i] < 2) throw std::invalid_argument("integrate: quadrature orders must be >= 2");
    const QuadratureRule rule = gauss_legendre(orders[i]);
    const ChartAxis& ax = job.im.axis(i);
    const double lo = ax.collapsing ? ax.lo + job.pole_margin : ax.lo;
    const double hi = ax.collapsing ? ax.hi - job.pole_margin : ax.hi;
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    std::vector<double> p(rule.size()), w(rule.size());
    for (std::size_t k = 0; k < rule.size(); ++k) {
      p[k] = mid + half * rule.nodes[k];
      w[k] = half * rule.weights[k];
    }
    g.points.push_back(std::move(p));
    g.weights.push_back(std::move(w));
    g.total *= rule.size();
  }
  return g;
}

}  // namespace detail

/// ∫ integrand dV with dV = √det g du over the chart box. For
/// minkowski_hsiung the integrand is 1 + ⟨H, x⟩.
inline double integrate(const IntegrationJob& job) {
  const detail::TensorGrid grid = detail::tensor_grid(job);
  const std::size_t n = job.im.intrinsic_dim();
  std::vector<double> terms(grid.total, 0.0);

  auto node = [&](std::size_t flat) {
    std::vector<double> u(n);
    double w = 1.0;
    // Last axis varies fastest.
    for (std::size_t i = n; i-- > 0;) {
      const std::size_t k = flat % grid.points[i].size();
      flat /= grid.points[i].size();
      u[i] = grid.points[i][k];
      w *= grid.weights[i][k];
    }
    return std::pair{u, w};
  };

  auto evaluate_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      auto [u, w] = node(idx);
      GeometryFrame fr;
      double det = 0.0;
      try {
        fr = evaluate_frame(job.im, u);
        det = spd_determinant(fr.metric);
      } catch (const std::exception& e) {
        throw DegeneratePointError(u, std::string("quadrature node ") + std::to_string(idx) + ": " + e.what());
      }
      const double f = job.integrand == Integrand::volume ? 1.0 : fr.residual;
      terms[idx] = w * f * std::sqrt(det);
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(job.threads, static_cast<unsigned>(grid.total)));
  if (workers == 1) {
    evaluate_range(0, grid.total);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (grid.total + workers - 1) / workers;
      for (unsigned t = 0; t < workers; ++t) {
        const std::size_t b = t * chunk, e = std::min(grid.total, b + chunk);
        pool.emplace_back([&, t, b, e] {
          try {
            evaluate_range(b, e);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (const auto& err : errors)
      if (err) std::rethrow_exception(err);
  }
  return pairwise_sum(terms);
}

/// ∫(1 + ⟨H, x⟩) dV / vol: the mean of the pointwise incompressibility residual.
inline double mean_residual(IntegrationJob job) {
  job.integrand = Integrand::volume;
  const double vol = integrate(job);
  if (!(std::abs(vol) > 0.0)) throw std::domain_error("mean_residual: zero volume");
  job.integrand = Integrand::minkowski_hsiung;
  return integrate(job) / vol;
}

}  // namespace cfl
