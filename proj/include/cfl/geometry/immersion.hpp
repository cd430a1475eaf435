#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cfl/numerics/jet.hpp"
#include "cfl/numerics/linalg.hpp"

namespace cfl {

inline constexpr std::size_t kMaxAmbientDim = 8;

/// One chart axis: a closed interval, optionally periodic. `collapsing`
/// marks an axis whose endpoints are coordinate singularities that close the
/// manifold up (the polar angles of a spherical chart).
struct ChartAxis {
  double lo = 0.0;
  double hi = 1.0;
  bool periodic = false;
  bool collapsing = false;

  double length() const noexcept { return hi - lo; }
};

/// Maps chart-variable jets to ambient coordinate jets.
using ChartMap = std::function<std::vector<Jet2>(std::span<const Jet2>)>;

/// A parametric immersion x: U ⊂ R^n -> E^m. Immutable after construction;
/// copies share the chart map.
class Immersion {
 public:
  Immersion(std::string name, std::size_t intrinsic_dim, std::size_t ambient_dim,
            std::vector<ChartAxis> axes, ChartMap map)
      : name_(std::move(name)),
        n_(intrinsic_dim),
        m_(ambient_dim),
        axes_(std::move(axes)),
        map_(std::make_shared<const ChartMap>(std::move(map))) {
    if (n_ < 1 || n_ >= m_ || m_ > kMaxAmbientDim)
      throw std::invalid_argument(name_ + ": need 1 <= n < m <= 8 (n = " + std::to_string(n_) +
                                  ", m = " + std::to_string(m_) + ")");
    if (axes_.size() != n_) throw std::invalid_argument(name_ + ": one chart axis per parameter");
    for (const ChartAxis& a : axes_)
      if (!(a.lo < a.hi)) throw std::invalid_argument(name_ + ": empty chart axis");
  }

  const std::string& name() const noexcept { return name_; }
  std::size_t intrinsic_dim() const noexcept { return n_; }
  std::size_t ambient_dim() const noexcept { return m_; }
  const std::vector<ChartAxis>& axes() const noexcept { return axes_; }
  const ChartAxis& axis(std::size_t i) const { return axes_.at(i); }

  /// Every axis is periodic or collapsing, i.e. the chart covers a closed
  /// manifold up to a null set. Asserted by the constructor of the family,
  /// never inferred from the map.
  bool closed() const noexcept {
    for (const ChartAxis& a : axes_)
      if (!a.periodic && !a.collapsing) return false;
    return true;
  }

  bool contains(std::span<const double> u) const {
    if (u.size() != n_) return false;
    for (std::size_t i = 0; i < n_; ++i)
      if (!axes_[i].periodic && (u[i] < axes_[i].lo || u[i] > axes_[i].hi)) return false;
    return true;
  }

  /// Applies the chart map to caller-seeded jets. The jets may carry more
  /// derivative directions than n, which is how charts are composed.
  std::vector<Jet2> apply(std::span<const Jet2> vars) const {
    if (vars.size() != n_) throw std::invalid_argument(name_ + ": wrong number of chart jets");
    return (*map_)(vars);
  }

  /// Coordinate jets at u.
  std::vector<Jet2> jets(std::span<const double> u) const {
    if (u.size() != n_) throw std::invalid_argument(name_ + ": parameter point has wrong size");
    const std::vector<Jet2> vars = Jet2::variables(u);
    std::vector<Jet2> x = (*map_)(vars);
    if (x.size() != m_) throw std::logic_error(name_ + ": chart map returned wrong dimension");
    return x;
  }

  /// Composes the chart map with an ambient transform acting on jets.
  Immersion compose(std::string name, std::size_t ambient_dim,
                    std::function<std::vector<Jet2>(std::vector<Jet2>)> ambient) const {
    auto inner = map_;
    return Immersion(std::move(name), n_, ambient_dim, axes_,
                     [inner, ambient = std::move(ambient)](std::span<const Jet2> u) {
                       return ambient((*inner)(u));
                     });
  }

  Immersion with_axes(std::vector<ChartAxis> axes) const {
    auto inner = map_;
    return Immersion(name_, n_, m_, std::move(axes),
                     [inner](std::span<const Jet2> u) { return (*inner)(u); });
  }

 private:
  std::string name_;
  std::size_t n_;
  std::size_t m_;
  std::vector<ChartAxis> axes_;
  std::shared_ptr<const ChartMap> map_;
};

/// x + offset.
inline Immersion translated(const Immersion& im, Vector offset) {
  if (offset.size() != im.ambient_dim()) throw std::invalid_argument("translated: offset size");
  return im.compose(im.name() + "+shift", im.ambient_dim(), [offset](std::vector<Jet2> x) {
    for (std::size_t a = 0; a < x.size(); ++a) x[a] += offset[a];
    return x;
  });
}

/// Q x for a square matrix Q (a rotation for the covariance checks).
inline Immersion transformed(const Immersion& im, const Matrix& q) {
  const std::size_t m = im.ambient_dim();
  if (q.rows() != m || q.cols() != m) throw std::invalid_argument("transformed: matrix size");
  return im.compose(im.name() + "*Q", m, [q, m](std::vector<Jet2> x) {
    std::vector<Jet2> y(m, Jet2(x.front().dim()));
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) y[a] += q(a, b) * x[b];
    return y;
  });
}

}  // namespace cfl
