#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <iterator>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfl/geometry/immersion.hpp"
#include "cfl/numerics/jet.hpp"
#include "cfl/numerics/linalg.hpp"
#include "cfl/numerics/ode.hpp"

namespace cfl {

// Surfaces of revolution x(s, t) = (r(s) cos t, r(s) sin t, s). The canonical
// field is incompressible iff
//   (1 + r'²)(r + s r' + 2 r r'²) + r (r − s r') r'' = 0.

/// The profile ODE hit its singular set r (r − s r') = 0.
class SingularOdeError : public std::domain_error {
 public:
  SingularOdeError(double s, const std::string& what) : std::domain_error(what), s_(s) {}
  double s() const noexcept { return s_; }

 private:
  double s_;
};

inline double revolution_ode_residual(double s, double r, double rp, double rpp) {
  return (1.0 + rp * rp) * (r + s * rp + 2.0 * r * rp * rp) + r * (r - s * rp) * rpp;
}

/// r'' solved from the incompressibility ODE.
inline double revolution_rhs(double s, double r, double rp) {
  const double denom = r * (r - s * rp);
  if (!(std::abs(denom) > 1e-12) || !std::isfinite(denom))
    throw SingularOdeError(s, "revolution_rhs: singular denominator r(r - s r') = " +
                                  std::to_string(denom) + " at s = " + std::to_string(s));
  return -(1.0 + rp * rp) * (r + s * rp + 2.0 * r * rp * rp) / denom;
}

/// H = (1 + r'² − r r'') / (2 r (1 + r'²)²) · (−cos t, −sin t, r').
inline Vector revolution_mean_curvature(double r, double rp, double rpp, double t) {
  if (!(r > 0.0)) throw std::domain_error("revolution_mean_curvature: r must be positive");
  const double w = 1.0 + rp * rp;
  const double k = (w - r * rpp) / (2.0 * r * w * w);
  return {-k * std::cos(t), -k * std::sin(t), k * rp};
}

struct ProfileSample {
  double s = 0.0;
  double r = 0.0;
  double rp = 0.0;
};

/// A numerically integrated profile r(s): samples strictly increasing in s
/// with r > 0. Evaluation between samples re-integrates from the nearest
/// sample, so r'' is always the ODE value.
class ProfileCurve {
 public:
  static constexpr double kEvalTolerance = 1e-12;

  ProfileCurve() = default;
  explicit ProfileCurve(std::vector<ProfileSample> samples) : samples_(std::move(samples)) {
    if (samples_.size() < 2) throw std::invalid_argument("ProfileCurve: need at least two samples");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (!(samples_[i].r > 0.0)) throw std::invalid_argument("ProfileCurve: r must stay positive");
      if (i > 0 && !(samples_[i].s > samples_[i - 1].s))
        throw std::invalid_argument("ProfileCurve: samples must be strictly increasing in s");
    }
  }

  const std::vector<ProfileSample>& samples() const noexcept { return samples_; }
  double s_min() const { return samples_.front().s; }
  double s_max() const { return samples_.back().s; }

  /// (r, r', r'') at s in [s_min, s_max].
  std::array<double, 3> evaluate(double s) const {
    if (s < s_min() || s > s_max())
      throw std::out_of_range("ProfileCurve::evaluate: s outside the profile range");
    auto it = std::lower_bound(samples_.begin(), samples_.end(), s,
                               [](const ProfileSample& p, double v) { return p.s < v; });
    if (it == samples_.end()) --it;
    if (it != samples_.begin() && std::abs(std::prev(it)->s - s) < std::abs(it->s - s)) --it;
    double r = it->r, rp = it->rp;
    if (it->s != s) {
      OdeOptions opt;
      opt.rel_tol = opt.abs_tol = kEvalTolerance;
      const auto traj = rk45_integrate(
          [](double x, const Vector& y) { return Vector{y[1], revolution_rhs(x, y[0], y[1])}; },
          {r, rp}, it->s, s, opt);
      r = traj.back().y[0];
      rp = traj.back().y[1];
    }
    return {r, rp, revolution_rhs(s, r, rp)};
  }

 private:
  std::vector<ProfileSample> samples_;
};

/// Integrates the profile ODE from (s_start, r0, r0') to s_end (either
/// direction). The returned samples are sorted by increasing s.
inline ProfileCurve solve_revolution_profile(double r0, double r0p, double s_start, double s_end,
                                             double tol) {
  if (!(r0 > 0.0)) throw std::invalid_argument("solve_revolution_profile: r0 must be positive");
  if (s_start == s_end) throw std::invalid_argument("solve_revolution_profile: empty s range");
  (void)revolution_rhs(s_start, r0, r0p);  // rejects a singular initial point
  OdeOptions opt;
  opt.rel_tol = opt.abs_tol = tol;
  auto rhs = [](double s, const Vector& y) {
    if (!(y[0] > 0.0)) throw SingularOdeError(s, "solve_revolution_profile: r reached zero");
    return Vector{y[1], revolution_rhs(s, y[0], y[1])};
  };
  std::vector<ProfileSample> samples;
  for (const OdeState& st : rk45_integrate(rhs, {r0, r0p}, s_start, s_end, opt))
    samples.push_back({st.s, st.y[0], st.y[1]});
  if (s_end < s_start) std::reverse(samples.begin(), samples.end());
  return ProfileCurve(std::move(samples));
}

/// Integrates both ways from s = 0 and joins the branches into one profile
/// over [s_lo, s_hi] (s_lo < 0 < s_hi, either may be 0).
inline ProfileCurve solve_revolution_profile_two_sided(double r0, double r0p, double s_lo, double s_hi,
                                                       double tol) {
  if (!(s_lo <= 0.0 && s_hi >= 0.0 && s_lo < s_hi))
    throw std::invalid_argument("solve_revolution_profile_two_sided: need s_lo <= 0 <= s_hi");
  std::vector<ProfileSample> samples;
  if (s_lo < 0.0) samples = solve_revolution_profile(r0, r0p, 0.0, s_lo, tol).samples();
  if (s_hi > 0.0) {
    const auto fwd = solve_revolution_profile(r0, r0p, 0.0, s_hi, tol).samples();
    samples.insert(samples.end(), fwd.begin() + (samples.empty() ? 0 : 1), fwd.end());
  }
  return ProfileCurve(std::move(samples));
}

/// Per-sample integration defect: the max-norm gap between sample k and a
/// re-integration of the ODE from sample k−1 at a much tighter tolerance
/// (zero for the first sample). It measures how far the sampled trajectory
/// departs from the exact flow, so it tracks the solver tolerance.
inline std::vector<double> profile_defects(std::span<const ProfileSample> smp) {
  std::vector<double> out(smp.size(), 0.0);
  OdeOptions opt;
  opt.rel_tol = opt.abs_tol = 1e-13;
  auto rhs = [](double s, const Vector& y) { return Vector{y[1], revolution_rhs(s, y[0], y[1])}; };
  for (std::size_t k = 1; k < smp.size(); ++k) {
    const auto traj = rk45_integrate(rhs, {smp[k - 1].r, smp[k - 1].rp}, smp[k - 1].s, smp[k].s, opt);
    out[k] = std::max(std::abs(traj.back().y[0] - smp[k].r), std::abs(traj.back().y[1] - smp[k].rp));
  }
  return out;
}

inline std::vector<double> profile_defects(const ProfileCurve& profile) {
  return profile_defects(std::span<const ProfileSample>(profile.samples()));
}

/// r(s) as a jet: maps the s-jet to the r-jet.
using ProfileFunction = std::function<Jet2(const Jet2&)>;

inline Immersion revolution_surface(ProfileFunction profile, double s_min, double s_max,
                                    std::string name = "revolution_surface") {
  if (!(s_min < s_max)) throw std::invalid_argument("revolution_surface: empty s range");
  return Immersion(std::move(name), 2, 3,
                   {ChartAxis{s_min, s_max}, ChartAxis{0.0, 2.0 * std::numbers::pi, true}},
                   [profile = std::move(profile)](std::span<const Jet2> u) {
                     const Jet2& s = u[0];
                     const Jet2& t = u[1];
                     const Jet2 r = profile(s);
                     if (!(r.value() > 0.0))
                       throw std::domain_error("revolution_surface: r must be positive");
                     return std::vector<Jet2>{r * cos(t), r * sin(t), s};
                   });
}

/// Closed-form profile r(s) = √(a0 + a1 s + a2 s²): a sphere for (1, 0, −1),
/// a cylinder for (1, 0, 0), the cone r = s for (0, 0, 1).
inline Immersion revolution_surface_quadratic(double a0, double a1, double a2, double s_min, double s_max) {
  for (double s : {s_min, s_max, 0.5 * (s_min + s_max)})
    if (!(a0 + a1 * s + a2 * s * s > 0.0))
      throw std::invalid_argument("revolution_surface: r must be positive on the s range");
  return revolution_surface(
      [a0, a1, a2](const Jet2& s) {
        Jet2 q = a2 * s * s + a1 * s;
        q += a0;
        return sqrt(q);
      },
      s_min, s_max);
}

inline Immersion revolution_surface(const ProfileCurve& profile) {
  return revolution_surface(
      [profile](const Jet2& s) {
        const auto [r, rp, rpp] = profile.evaluate(s.value());
        return chain(s, r, rp, rpp);
      },
      profile.s_min(), profile.s_max(), "revolution_profile");
}

}  // namespace cfl
