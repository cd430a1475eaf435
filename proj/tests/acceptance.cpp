// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "cfl/cli/scene.hpp"
#include "cfl/families/curves.hpp"
#include "cfl/families/revolution.hpp"
#include "cfl/families/surfaces.hpp"
#include "cfl/geometry/frame.hpp"
#include "cfl/integrals/integrals.hpp"
#include "cfl/numerics/ode.hpp"
#include "cfl/numerics/quadrature.hpp"
#include "support.hpp"

using namespace cfl;
using cfl::testing::random_point;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

/// Tracks the worst normalized gap seen against a tolerance.
struct Worst {
  explicit Worst(double tolerance) : tol(tolerance) {}

  double value = 0.0;
  double tol;
  std::string where;

  void see(double gap, const std::string& at) {
    if (!(gap <= value)) {
      value = gap;
      where = at;
    }
  }
  bool ok() const { return value <= tol; }
  std::string report(const std::string& label) const {
    return label + " " + sci(value) + " (tol " + sci(tol) + (where.empty() ? "" : ", at " + where) + ")";
  }
};

struct Named {
  std::string label;
  Immersion im;
};

std::vector<Named> corpus() {
  return {{"plane", plane()},
          {"graph", graph_surface({0.3, -0.2, 0.5, 0.1, -0.4, 0.2})},
          {"torus", torus(2.0, 1.0)},
          {"spiral", spiral_curve(1.0)},
          {"hypercylinder", hypercylinder(2, 1.0)},
          {"product", product_surface(1.0, 1.0)}};
}

Verdict conservativeness() {
  std::mt19937_64 rng(1001);
  Worst w{1e-9};
  for (const auto& [label, im] : corpus())
    for (int k = 0; k < 50; ++k) {
      const auto u = random_point(im, rng);
      const GeometryFrame fr = evaluate_frame(im, u);
      w.see(max_abs_diff(intrinsic_gradient_potential(im, u), fr.x_tangent) / (1 + norm(fr.x)), label);
    }
  return {w.ok(), w.report("max |grad f - xT|/(1+|x|)") + " over 6 x 50 points"};
}

Verdict divergence_identity() {
  std::mt19937_64 rng(1001);
  Worst w{1e-7};
  for (const auto& [label, im] : corpus())
    for (int k = 0; k < 50; ++k) {
      const auto u = random_point(im, rng);
      const GeometryFrame fr = evaluate_frame(im, u);
      w.see(std::abs(divergence_direct(im, u) - divergence_closed_form(fr)) / (1 + norm(fr.x)), label);
    }
  return {w.ok(), w.report("max |div_direct - n(1+<H,x>)|/(1+|x|)") + " over 6 x 50 points"};
}

Verdict beltrami() {
  std::mt19937_64 rng(1003);
  Worst lap{1e-4}, pair{1e-3};
  auto interior = [&](const Immersion& im) { return random_point(im, rng, 0.05); };
  for (const auto& [label, im] : corpus())
    for (int k = 0; k < 20; ++k) {
      const auto u = interior(im);
      const GeometryFrame fr = evaluate_frame(im, u);
      const double n = static_cast<double>(fr.n);
      Vector gap = laplace_position(im, u);
      axpy(n, fr.mean_curvature, gap);
      lap.see(norm(gap) / (n * (1 + norm(fr.mean_curvature))), label);
    }
  const std::vector<Named> incompressible{{"sphere", hypersphere(2, 1.0)},
                                          {"spiral", spiral_curve(1.0)},
                                          {"hypercylinder", hypercylinder(2, 1.0)},
                                          {"product", product_surface(1.0, 1.0)}};
  for (const auto& [label, im] : incompressible)
    for (int k = 0; k < 20; ++k) pair.see(std::abs(verify_beltrami_pairing(im, interior(im)).incompressible_defect), label);
  return {lap.ok() && pair.ok(),
          lap.report("max |Lx + nH|/(n(1+|H|))") + "; " + pair.report("max |<x,Lx> - n|") + " on incompressible families"};
}

Verdict positives() {
  std::mt19937_64 rng(1004);
  Worst w{1e-8};
  for (double c : {0.5, 1.0, 2.0}) {
    const Immersion im = spiral_curve(c);
    for (int k = 0; k < 200; ++k) w.see(std::abs(evaluate_frame(im, random_point(im, rng)).residual), "spiral c=" + sci(c));
  }
  for (int n : {2, 3, 5})
    for (double c : {1.0, 2.0}) {
      const Immersion im = hypercylinder(n, c);
      for (int k = 0; k < 200; ++k)
        w.see(std::abs(evaluate_frame(im, random_point(im, rng)).residual),
              "hypercylinder n=" + std::to_string(n) + " c=" + sci(c));
    }
  return {w.ok(), w.report("max |<H,x> + 1|") + " over 9 configurations x 200 points"};
}

Verdict negatives() {
  std::mt19937_64 rng(1005);
  Worst cone{1e-9};
  const Immersion c = cone_over_circle(0.6);
  std::vector<std::vector<double>> cone_pts;
  for (int k = 0; k < 200; ++k) {
    cone_pts.push_back(random_point(c, rng));
    cone.see(std::abs(evaluate_frame(c, cone_pts.back()).residual - 1.0), "cone");
  }
  const Immersion off = translated(hypersphere(2, 1.0), {0.0, 0.0, 3.0});
  const auto off_pts = cli::grid_points(off, {24, 24}, cli::NodePlacement::interior);
  double off_max = 0.0;
  for (const auto& u : off_pts) off_max = std::max(off_max, std::abs(evaluate_frame(off, u).residual));
  // The predicate itself: the incompressibility check must fail on both.
  auto rejects = [](const Immersion& im, const std::vector<std::vector<double>>& pts) {
    for (const auto& u : pts)
      if (std::abs(evaluate_frame(im, u).residual) > 1e-8) return true;
    return false;
  };
  const bool rejected = rejects(c, cone_pts) && rejects(off, off_pts);
  return {cone.ok() && off_max >= 2.0 && rejected,
          cone.report("max |residual - 1| on cone rho=0.6") + "; off-origin sphere max |residual| " + sci(off_max) +
              " (need >= 2); both rejected: " + (rejected ? "yes" : "no")};
}

Verdict curvature_odes() {
  Worst planar{1e-10}, cyl{1e-8}, kappa{1e-7};
  for (double c : {0.5, 1.0, 2.0}) {
    const Immersion sp = spiral_curve(c);
    for (int k = 0; k < 100; ++k) {
      const double s = sp.axis(0).lo + (sp.axis(0).length()) * (k + 0.5) / 100.0;
      planar.see(std::abs(curvature_ode_residual_planar(c, s)), "spiral c=" + sci(c));
      kappa.see(std::abs(planar_curvature(sp, s) - spiral_curvature(c, s)), "spiral c=" + sci(c));
    }
  }
  for (int n : {2, 3, 5})
    for (double c : {1.0, 2.0}) {
      const Immersion prof = hypercylinder_profile(n, c);
      for (int k = 0; k < 100; ++k) {
        const double s = prof.axis(0).lo + prof.axis(0).length() * (k + 0.5) / 100.0;
        const double kv = hypercylinder_curvature(n, c, s);
        const std::string at = "n=" + std::to_string(n) + " c=" + sci(c);
        cyl.see(std::abs(curvature_ode_residual_cylinder(n, c, s)) / std::pow(kv, 4), at);
        kappa.see(std::abs(planar_curvature(prof, s) - kv), at);
      }
    }
  return {planar.ok() && cyl.ok() && kappa.ok(), planar.report("spiral ODE residual") + "; " +
                                                     cyl.report("cylinder ODE residual/kappa^4") + "; " +
                                                     kappa.report("numeric vs closed-form curvature")};
}

Verdict revolution() {
  const ProfileCurve pc = solve_revolution_profile_two_sided(1.0, 0.0, -0.7, 0.7, 1e-10);
  Worst prof{1e-7}, res{1e-6}, h{1e-8};
  for (const ProfileSample& p : pc.samples()) prof.see(std::abs(p.r - std::sqrt(1 - p.s * p.s)), "sample");
  for (int k = 0; k <= 140; ++k) {
    const double s = -0.7 + 1.4 * k / 140.0;
    prof.see(std::abs(pc.evaluate(s)[0] - std::sqrt(1 - s * s)), "s=" + sci(s));
  }
  const Immersion surf = revolution_surface(pc);
  for (const auto& u : cli::grid_points(surf, {15, 8}, cli::NodePlacement::interior)) {
    const GeometryFrame fr = evaluate_frame(surf, u);
    res.see(std::abs(fr.residual), "s=" + sci(u[0]));
    const auto [r, rp, rpp] = pc.evaluate(u[0]);
    h.see(max_abs_diff(revolution_mean_curvature(r, rp, rpp, u[1]), fr.mean_curvature), "s=" + sci(u[0]));
  }
  return {prof.ok() && res.ok() && h.ok(), prof.report("max |r - sqrt(1-s^2)|") + "; " +
                                               res.report("surface residual") + "; " +
                                               h.report("closed-form H gap")};
}

Verdict minkowski_hsiung() {
  const std::vector<Named> closed{{"torus", torus(2.0, 1.0)},
                                  {"S1", hypersphere(1, 1.0)},
                                  {"S2", hypersphere(2, 1.0)},
                                  {"product", product_surface(1.0, 1.0)}};
  Worst w{1e-5};
  double torus_vol = 0.0;
  for (const auto& [label, im] : closed) {
    IntegrationJob job{im, std::vector<int>(im.intrinsic_dim(), 32), Integrand::volume};
    const double vol = integrate(job);
    if (label == "torus") torus_vol = vol;
    job.integrand = Integrand::minkowski_hsiung;
    w.see(std::abs(integrate(job)) / vol, label);
  }
  const double vol_gap = std::abs(torus_vol / (8 * kPi * kPi) - 1.0);
  return {w.ok() && vol_gap <= 1e-6,
          w.report("max |MH integral|/vol") + "; torus volume rel. error " + sci(vol_gap) + " (tol 1.000e-06)"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> csv_rows(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

Verdict figures() {
  const auto dir = std::filesystem::temp_directory_path();
  std::string detail;
  bool pass = true;
  for (const char* fig : {"figure1", "figure2"}) {
    const auto out = dir / (std::string("cfl_acceptance_") + fig + ".csv");
    const std::string cmd = std::string(CFL_TOOL) + " " + fig + " --out " + out.string();
    const int status = std::system(cmd.c_str());
    const std::string fresh = slurp(out), golden = slurp(std::filesystem::path(CFL_GOLDEN_DIR) / (std::string(fig) + ".csv"));
    std::filesystem::remove(out);
    const bool same = WIFEXITED(status) && WEXITSTATUS(status) == 0 && !golden.empty() && fresh == golden;
    pass = pass && same;
    detail += std::string(fig) + (same ? " byte-identical" : " DIFFERS from golden") + "; ";

    double spot = 1e300;
    for (const auto& row : csv_rows(golden)) {
      if (std::string(fig) == "figure1" && std::abs(row[0] - kPi * kPi) <= 1e-12)
        spot = std::min(spot, std::max(std::abs(row[1] + 2.0), std::abs(row[2] - 2 * kPi)));
      if (std::string(fig) == "figure2" && row[0] == 0.0)
        spot = std::min(spot, std::max(std::abs(row[2]), std::abs(row[3] + std::sqrt(2.0))));
    }
    pass = pass && spot <= 1e-12;
    detail += std::string(fig == std::string("figure1") ? "gamma(pi^2) gap " : "gamma(0) gap ") + sci(spot) + "; ";
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

Verdict numerics() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  Worst jets{1e-5}, quad{1e-13};
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = cfl::testing::random_composite(rng, 4, 3);
    std::vector<double> u(3);
    for (double& x : u) x = coord(rng);
    jets.see(cfl::testing::jet_fd_gap(f, u, 1e-5), "trial " + std::to_string(trial));
  }
  for (int k = 1; k <= 32; ++k) {
    const QuadratureRule r = gauss_legendre(k);
    for (int d = 0; d <= 2 * k - 1; ++d) {
      double s = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], d);
      quad.see(std::abs(s - (d % 2 ? 0.0 : 2.0 / (d + 1))), "k=" + std::to_string(k) + " d=" + std::to_string(d));
    }
  }
  OdeOptions opt;
  opt.rel_tol = opt.abs_tol = 1e-10;
  const double end = 2 * kPi;
  const auto traj = rk45_integrate([](double, const Vector& y) { return Vector{-y[1], y[0]}; }, {1.0, 0.0}, 0.0, end, opt);
  const double rot = std::hypot(traj.back().y[0] - std::cos(end), traj.back().y[1] - std::sin(end));
  return {jets.ok() && quad.ok() && rot <= 1e-8, jets.report("jet vs FD rel. gap") + "; " +
                                                     quad.report("quadrature exactness gap") +
                                                     "; RK45 rotation endpoint error " + sci(rot) + " (tol 1.000e-08)"};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"conservativeness", conservativeness},
      {"divergence identity", divergence_identity},
      {"beltrami", beltrami},
      {"classification positives", positives},
      {"classification negatives", negatives},
      {"curvature odes", curvature_odes},
      {"revolution ode", revolution},
      {"minkowski-hsiung", minkowski_hsiung},
      {"figure reproduction", figures},
      {"numerics substrate", numerics},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::printf("%s  %2zu %-26s %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
