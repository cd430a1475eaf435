#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "cfl/cli/scene.hpp"
#include "cfl/families/family_spec.hpp"
#include "cfl/families/revolution.hpp"
#include "cfl/geometry/frame.hpp"
#include "cfl/integrals/integrals.hpp"

namespace cfl::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

/// Per-check thresholds; the scaled checks divide by the factor in parentheses.
struct Tolerances {
  double residual = 1e-8;   ///< |⟨H,x⟩ + 1|
  double divergence = 1e-7; ///< |div_direct − n(1 + ⟨H,x⟩)|   (1 + |x|)
  double beltrami = 1e-4;   ///< |Δx + nH|                      (n (1 + |H|))
  double gradient = 1e-9;   ///< |∇f − x^T|                     (1 + |x|)
};

struct CheckResult {
  std::string name;
  double max = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerificationReport {
  std::string family;
  std::size_t points = 0;
  double max_residual = 0.0;
  double max_divergence_gap = 0.0;
  double max_gradient_gap = 0.0;
  double max_beltrami_gap = 0.0;
  std::vector<CheckResult> checks;
  bool pass = false;
};

inline void to_json(nlohmann::json& j, const CheckResult& c) {
  j = {{"name", c.name}, {"max", c.max}, {"tolerance", c.tolerance}, {"pass", c.pass}};
}

inline void to_json(nlohmann::json& j, const VerificationReport& r) {
  j = {{"family", r.family},
       {"points", r.points},
       {"max_residual", r.max_residual},
       {"max_divergence_gap", r.max_divergence_gap},
       {"max_gradient_gap", r.max_gradient_gap},
       {"max_beltrami_gap", r.max_beltrami_gap},
       {"checks", r.checks},
       {"pass", r.pass}};
}

struct VerifyOptions {
  SceneConfig scene;
  std::vector<int> grid;             ///< overrides scene.grid when non-empty
  std::optional<std::uint64_t> seed; ///< random sampling instead of the grid
  Tolerances tol;
  double fd_step = kDefaultLaplaceStep;
  std::string out;                   ///< JSON report path, overrides scene output
};

/// Runs every pointwise check over the sample set.
inline VerificationReport verify_immersion(const Immersion& im, const std::vector<std::vector<double>>& points,
                                           const Tolerances& tol, double fd_step) {
  VerificationReport rep;
  rep.family = im.name();
  rep.points = points.size();
  const double n = static_cast<double>(im.intrinsic_dim());
  for (const auto& u : points) {
    const GeometryFrame fr = evaluate_frame(im, u);
    const double scale = 1.0 + norm(fr.x);
    rep.max_residual = std::max(rep.max_residual, std::abs(incompressibility_residual(fr)));
    rep.max_divergence_gap = std::max(
        rep.max_divergence_gap, std::abs(divergence_direct(im, u) - divergence_closed_form(fr)) / scale);
    rep.max_gradient_gap =
        std::max(rep.max_gradient_gap, max_abs_diff(intrinsic_gradient_potential(im, u), fr.x_tangent) / scale);
    Vector gap = laplace_position(im, u, fd_step);
    axpy(n, fr.mean_curvature, gap);
    rep.max_beltrami_gap = std::max(rep.max_beltrami_gap, norm(gap) / (n * (1.0 + norm(fr.mean_curvature))));
  }
  rep.checks = {
      {"incompressibility", rep.max_residual, tol.residual, rep.max_residual <= tol.residual},
      {"divergence_identity", rep.max_divergence_gap, tol.divergence, rep.max_divergence_gap <= tol.divergence},
      {"conservativeness", rep.max_gradient_gap, tol.gradient, rep.max_gradient_gap <= tol.gradient},
      {"beltrami", rep.max_beltrami_gap, tol.beltrami, rep.max_beltrami_gap <= tol.beltrami},
  };
  rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const CheckResult& c) { return c.pass; });
  return rep;
}

inline void print_report(const VerificationReport& rep, std::ostream& out) {
  std::ostringstream os;
  os << "family: " << rep.family << "   points: " << rep.points << '\n';
  os << std::left << std::setw(22) << "check" << std::right << std::setw(14) << "max" << std::setw(14)
     << "tolerance" << std::setw(8) << "result" << '\n';
  os << std::scientific << std::setprecision(3);
  for (const CheckResult& c : rep.checks)
    os << std::left << std::setw(22) << c.name << std::right << std::setw(14) << c.max << std::setw(14)
       << c.tolerance << std::setw(8) << (c.pass ? "pass" : "FAIL") << '\n';
  os << "overall: " << (rep.pass ? "PASS" : "FAIL") << '\n';
  out << os.str();
}

/// Opens `path` for writing, or returns nullptr for stdout.
inline std::unique_ptr<std::ofstream> open_output(const std::string& path) {
  if (path.empty()) return nullptr;
  auto f = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*f) throw SpecError("cannot write '" + path + "'");
  return f;
}

inline int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const Immersion im = make_immersion(opt.scene.family);
    const auto grid = resolve_grid(im, opt.grid.empty() ? opt.scene.grid : opt.grid, 8);
    std::vector<std::vector<double>> points;
    if (opt.seed) {
      std::size_t count = 1;
      for (int g : grid) count *= static_cast<std::size_t>(g);
      points = random_points(im, count, *opt.seed, 2.5 * opt.fd_step);
    } else {
      points = grid_points(im, grid, NodePlacement::interior);
    }
    spdlog::info("verify: {} at {} points", im.name(), points.size());
    const VerificationReport rep = verify_immersion(im, points, opt.tol, opt.fd_step);
    print_report(rep, out);
    const std::string path = opt.out.empty() ? opt.scene.output_path : opt.out;
    if (auto f = open_output(path)) *f << nlohmann::json(rep).dump(2) << '\n';
    return rep.pass ? kExitPass : kExitFail;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

struct GenerateOptions {
  SceneConfig scene;
  std::vector<int> grid;  ///< overrides scene.grid when non-empty
  std::string out;        ///< overrides scene output path
  std::optional<OutputFormat> format;
  /// Extra parameter values merged (sorted, deduplicated) into each axis.
  std::vector<std::vector<double>> marks;
  int default_count = 16;
};

/// Rows "u1..un, x1..xm, divT, residual" over the lexicographic grid.
inline void write_samples(const Immersion& im, const std::vector<std::vector<double>>& points,
                          OutputFormat format, const FamilySpec& family, std::ostream& os) {
  const std::size_t n = im.intrinsic_dim(), m = im.ambient_dim();
  std::vector<std::string> columns;
  for (std::size_t i = 0; i < n; ++i) columns.push_back("u" + std::to_string(i + 1));
  for (std::size_t a = 0; a < m; ++a) columns.push_back("x" + std::to_string(a + 1));
  columns.push_back("divT");
  columns.push_back("residual");

  nlohmann::json rows = nlohmann::json::array();
  std::string csv;
  if (format == OutputFormat::csv) {
    for (std::size_t c = 0; c < columns.size(); ++c) csv += (c ? "," : "") + columns[c];
    csv += '\n';
  }
  for (const auto& u : points) {
    const GeometryFrame fr = evaluate_frame(im, u);
    std::vector<double> row(u.begin(), u.end());
    row.insert(row.end(), fr.x.begin(), fr.x.end());
    row.push_back(divergence_direct(im, u));
    row.push_back(incompressibility_residual(fr));
    if (format == OutputFormat::csv) {
      for (std::size_t c = 0; c < row.size(); ++c) csv += (c ? "," : "") + format_number(row[c]);
      csv += '\n';
    } else {
      rows.push_back(row);
    }
  }
  if (format == OutputFormat::csv) {
    os << csv;
  } else {
    os << nlohmann::json{{"family", family}, {"columns", columns}, {"rows", rows}}.dump() << '\n';
  }
}

inline int cmd_generate(const GenerateOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const Immersion im = make_immersion(opt.scene.family);
    const auto grid = resolve_grid(im, opt.grid.empty() ? opt.scene.grid : opt.grid, opt.default_count);
    std::vector<std::vector<double>> axes;
    for (std::size_t i = 0; i < im.intrinsic_dim(); ++i) {
      auto nodes = axis_nodes(im.axis(i), grid[i], NodePlacement::endpoints);
      if (i < opt.marks.size()) {
        for (double v : opt.marks[i]) {
          if (!im.axis(i).periodic && (v < im.axis(i).lo || v > im.axis(i).hi))
            throw SpecError("mark " + format_number(v) + " lies outside axis " + std::to_string(i + 1));
          nodes.push_back(v);
        }
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
      }
      axes.push_back(std::move(nodes));
    }
    const auto points = grid_points(axes);
    spdlog::info("generate: {} rows for {}", points.size(), im.name());
    const OutputFormat format = opt.format.value_or(opt.scene.format);
    const std::string path = opt.out.empty() ? opt.scene.output_path : opt.out;
    std::ostringstream buf;
    write_samples(im, points, format, opt.scene.family, buf);
    if (auto f = open_output(path)) {
      *f << buf.str();
      if (!*f) throw SpecError("write to '" + path + "' failed");
    } else {
      out << buf.str();
    }
    return kExitPass;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

struct FigureOptions {
  double c = 1.0;
  int n = 2;               ///< figure2 only
  std::vector<int> grid;   ///< overrides the figure default
  std::string out;
  std::optional<OutputFormat> format;
};

/// Spiral with c = 1 over s in [0.01, 60π], 100 samples plus the spot
/// parameter s = (π/c)², where γ = (2/c²)(−1, π).
inline int cmd_figure1(const FigureOptions& opt, std::ostream& out, std::ostream& err) {
  GenerateOptions g;
  g.scene.family = FamilySpec{FamilyKind::spiral, {{"c", opt.c}, {"s_min", 0.01}, {"s_max", 60.0 * std::numbers::pi}}};
  g.grid = opt.grid.empty() ? std::vector<int>{100} : opt.grid;
  const double spot = std::numbers::pi / opt.c;
  g.marks = {{spot * spot}};
  g.out = opt.out;
  g.format = opt.format;
  return cmd_generate(g, out, err);
}

/// Hypercylinder with c = 1, n = 2 over |s| <= 0.7, t in [0, 1]. The odd s
/// count puts a row exactly at s = 0, where γ = (0, −√(n(n−1))).
inline int cmd_figure2(const FigureOptions& opt, std::ostream& out, std::ostream& err) {
  GenerateOptions g;
  g.scene.family = FamilySpec{FamilyKind::hypercylinder,
                              {{"n", static_cast<double>(opt.n)}, {"c", opt.c}, {"s_min", -0.7 * std::abs(opt.c)},
                               {"s_max", 0.7 * std::abs(opt.c)}, {"t_min", 0.0}, {"t_max", 1.0}}};
  g.grid = opt.grid.empty() ? std::vector<int>{29, 11} : opt.grid;
  g.out = opt.out;
  g.format = opt.format;
  return cmd_generate(g, out, err);
}

struct SolveRevolutionOptions {
  double r0 = 1.0;
  double r0p = 0.0;
  double s_max = 0.7;
  double tol = 1e-10;
  std::string out;
};

/// CSV "s,r,rp,ode_residual"; ode_residual is the per-step integration
/// defect of the sampled trajectory (see profile_defects).
inline void write_profile(std::span<const ProfileSample> samples, std::ostream& os) {
  const std::vector<double> defects = profile_defects(samples);
  std::string csv = "s,r,rp,ode_residual\n";
  for (std::size_t k = 0; k < samples.size(); ++k) {
    csv += format_number(samples[k].s) + "," + format_number(samples[k].r) + "," +
           format_number(samples[k].rp) + "," + format_number(defects[k]) + "\n";
  }
  os << csv;
}

inline int cmd_solve_revolution(const SolveRevolutionOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<ProfileSample> samples;
  int code = kExitPass;
  std::unique_ptr<std::ofstream> file;
  try {
    file = open_output(opt.out);
    if (!(opt.r0 > 0.0)) throw SpecError("solve-revolution: r0 must be positive");
    if (opt.s_max == 0.0) throw SpecError("solve-revolution: s_max must be nonzero");
    if (!(opt.tol >= 1e-13 && opt.tol <= 1e-2)) throw SpecError("solve-revolution: tol must lie in [1e-13, 1e-2]");
    (void)revolution_rhs(0.0, opt.r0, opt.r0p);
    samples = solve_revolution_profile(opt.r0, opt.r0p, 0.0, opt.s_max, opt.tol).samples();
    if (opt.s_max < 0.0) std::reverse(samples.begin(), samples.end());  // keep integration order
  } catch (const OdeIntegrationError& e) {
    for (const OdeState& st : e.partial()) samples.push_back({st.s, st.y[0], st.y[1]});
    err << "error: profile ODE became singular; last s = " << format_number(e.last_s()) << " (" << e.what() << ")\n";
    code = kExitFail;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  std::ostringstream buf;
  write_profile(samples, buf);
  if (file) {
    *file << buf.str();
  } else {
    out << buf.str();
  }
  spdlog::info("solve-revolution: {} samples, exit {}", samples.size(), code);
  return code;
}

struct IntegrateOptions {
  SceneConfig scene;
  Integrand integrand = Integrand::minkowski_hsiung;
  int order = kDefaultQuadratureOrder;
  std::string out;
  std::optional<OutputFormat> format;
  unsigned threads = 1;
};

struct IntegrationRecord {
  std::string family;
  Integrand integrand = Integrand::volume;
  int order = 0;
  double value = 0.0;
  int coarse_order = 0;
  double coarse_value = 0.0;
  double convergence_delta = 0.0;
  double volume = 0.0;
};

inline nlohmann::json to_json_record(const IntegrationRecord& r) {
  return {{"family", r.family},         {"integrand", to_string(r.integrand)},
          {"order", r.order},           {"value", r.value},
          {"coarse_order", r.coarse_order}, {"coarse_value", r.coarse_value},
          {"convergence_delta", r.convergence_delta}, {"volume", r.volume}};
}

inline IntegrationRecord run_integration(const Immersion& im, Integrand integrand, int order, unsigned threads) {
  IntegrationRecord rec;
  rec.family = im.name();
  rec.integrand = integrand;
  rec.order = order;
  rec.coarse_order = std::max(2, order / 2);
  const std::size_t n = im.intrinsic_dim();
  IntegrationJob job{im, std::vector<int>(n, order), integrand, kDefaultPoleMargin, threads};
  rec.value = integrate(job);
  job.orders.assign(n, rec.coarse_order);
  rec.coarse_value = integrate(job);
  rec.convergence_delta = std::abs(rec.value - rec.coarse_value);
  job.orders.assign(n, order);
  job.integrand = Integrand::volume;
  rec.volume = integrand == Integrand::volume ? rec.value : integrate(job);
  return rec;
}

inline int cmd_integrate(const IntegrateOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const Immersion im = make_immersion(opt.scene.family);
    if (!im.closed())
      throw SpecError("integrate: '" + im.name() + "' is not closed (every chart axis must be periodic or collapsing)");
    if (opt.order < 2 || opt.order > kMaxQuadratureOrder)
      throw SpecError("integrate: order must lie in [2, " + std::to_string(kMaxQuadratureOrder) + "]");
    const IntegrationRecord rec = run_integration(im, opt.integrand, opt.order, opt.threads);
    const nlohmann::json j = to_json_record(rec);
    const OutputFormat format = opt.format.value_or(OutputFormat::csv);
    if (format == OutputFormat::json) {
      out << j.dump(2) << '\n';
    } else {
      out << to_string(rec.integrand) << " = " << format_number(rec.value) << "\n"
          << "order " << rec.order << " vs " << rec.coarse_order << ": |delta| = " << format_number(rec.convergence_delta)
          << "\n"
          << "volume = " << format_number(rec.volume) << "\n";
    }
    const std::string path = opt.out.empty() ? opt.scene.output_path : opt.out;
    if (auto f = open_output(path)) *f << j.dump(2) << '\n';
    return kExitPass;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace cfl::cli
