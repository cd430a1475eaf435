#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "cfl/geometry/immersion.hpp"
#include "cfl/numerics/jet.hpp"

namespace cfl::testing {

/// Uniform chart point, kept `margin`·length away from non-periodic ends.
inline std::vector<double> random_point(const Immersion& im, std::mt19937_64& rng, double margin = 0.01) {
  std::vector<double> u;
  for (const ChartAxis& ax : im.axes()) {
    const double m = ax.periodic ? 0.0 : margin * ax.length();
    u.push_back(std::uniform_real_distribution<double>(ax.lo + m, ax.hi - m)(rng));
  }
  return u;
}

using JetFn = std::function<Jet2(std::span<const Jet2>)>;

/// Random expression tree over the inputs, built only from operations that
/// stay inside their domains for bounded arguments.
inline JetFn random_composite(std::mt19937_64& rng, int depth, std::size_t nvars) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 11);
  std::uniform_real_distribution<double> coef(-1.5, 1.5);
  const int kind = pick(rng);
  if (kind == 0) {
    const std::size_t i = std::uniform_int_distribution<std::size_t>(0, nvars - 1)(rng);
    return [i](std::span<const Jet2> x) { return x[i]; };
  }
  if (kind == 1) {
    const double a = coef(rng);
    const std::size_t i = std::uniform_int_distribution<std::size_t>(0, nvars - 1)(rng);
    return [a, i](std::span<const Jet2> x) { return a * x[i] + 0.25; };
  }
  JetFn f = random_composite(rng, depth - 1, nvars);
  JetFn g = random_composite(rng, depth - 1, nvars);
  const double p = coef(rng);
  switch (kind) {
    case 2: return [f, g](std::span<const Jet2> x) { return f(x) + g(x); };
    case 3: return [f, g](std::span<const Jet2> x) { return f(x) - g(x); };
    case 4: return [f, g](std::span<const Jet2> x) { return f(x) * g(x); };
    case 5: return [f, g](std::span<const Jet2> x) { return f(x) / (2.5 + sin(g(x))); };
    case 6: return [f](std::span<const Jet2> x) { return sin(f(x)); };
    case 7: return [f](std::span<const Jet2> x) { return cos(f(x)); };
    case 8: return [f](std::span<const Jet2> x) { return exp(0.3 * sin(f(x))); };
    case 9: return [f](std::span<const Jet2> x) { Jet2 a = f(x); return log(1.0 + a * a); };
    case 10: return [f, p](std::span<const Jet2> x) { Jet2 a = sin(f(x)); return pow(1.5 + a, p); };
    default: return [f, g](std::span<const Jet2> x) {
      Jet2 a = sin(f(x)); return atan2(a, 2.0 + cos(g(x))) + sqrt(1.0 + a * a);
    };
  }
}

/// Worst normalized gap between the jet derivatives of `f` at u and central
/// differences with step h (Hessian rows from differenced gradients).
inline double jet_fd_gap(const JetFn& f, const std::vector<double>& u, double h) {
  auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
  };
  const Jet2 at = f(Jet2::variables(u));
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto up = u, dn = u;
    up[i] += h;
    dn[i] -= h;
    const Jet2 fp = f(Jet2::variables(up)), fm = f(Jet2::variables(dn));
    worst = std::max(worst, rel(at.grad(i), (fp.value() - fm.value()) / (2 * h)));
    for (std::size_t j = 0; j < u.size(); ++j)
      worst = std::max(worst, rel(at.hess(i, j), (fp.grad(j) - fm.grad(j)) / (2 * h)));
  }
  return worst;
}

}  // namespace cfl::testing
