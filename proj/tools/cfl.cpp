#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cfl/cli/commands.hpp"

namespace {

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("cfl");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("CFL_LOG")) {
    const std::string level = env;
    if (level == "error") spdlog::set_level(spdlog::level::err);
    else if (level == "info") spdlog::set_level(spdlog::level::info);
    else if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::warn("CFL_LOG: unknown level '{}' (expected error, info or debug)", level);
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace cfl::cli;
  configure_logging();

  CLI::App app{"Canonical vector fields of parametric submanifolds"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out, format_name, grid_text;
  std::optional<std::uint64_t> seed;
  Tolerances tol;
  app.add_option("--out", out, "Output path (default stdout)");
  app.add_option("--format", format_name, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--grid", grid_text, "Samples per axis, N[,N...]");
  app.add_option("--seed", seed, "Sample verify points uniformly at random with this seed");
  app.add_option("--tol-residual", tol.residual, "Incompressibility residual tolerance");
  app.add_option("--tol-div", tol.divergence, "Divergence cross-check tolerance, relative to 1+|x|");
  app.add_option("--tol-beltrami", tol.beltrami, "Beltrami tolerance, relative to n(1+|H|)");
  app.add_option("--tol-gradient", tol.gradient, "Gradient tolerance, relative to 1+|x|");

  std::string scene_arg;
  double fd_step = cfl::kDefaultLaplaceStep;
  auto* verify = app.add_subcommand("verify", "Check the canonical field identities over a sample grid");
  verify->add_option("scene", scene_arg, "Scene JSON (inline or file path)")->required();
  verify->add_option("--fd-step", fd_step, "Finite-difference step for the Laplacian");

  auto* generate = app.add_subcommand("generate", "Export sampled points, divergence and residual");
  generate->add_option("scene", scene_arg, "Scene JSON (inline or file path)")->required();

  SolveRevolutionOptions sr;
  auto* solve = app.add_subcommand("solve-revolution", "Integrate the revolution profile ODE from s = 0");
  solve->add_option("--r0", sr.r0, "r(0)");
  solve->add_option("--r0p", sr.r0p, "r'(0)");
  solve->add_option("--s-max", sr.s_max, "End of the integration interval");
  solve->add_option("--tol", sr.tol, "Solver tolerance");

  std::string integrand = "minkowski_hsiung";
  int order = cfl::kDefaultQuadratureOrder;
  unsigned threads = 1;
  auto* integ = app.add_subcommand("integrate", "Integrate over a closed scene");
  integ->add_option("scene", scene_arg, "Scene JSON (inline or file path)")->required();
  integ->add_option("--integrand", integrand, "volume or minkowski_hsiung")
      ->check(CLI::IsMember({"volume", "minkowski_hsiung"}));
  integ->add_option("--order", order, "Gauss-Legendre order per axis");
  integ->add_option("--threads", threads, "Worker threads");

  FigureOptions fig;
  auto* fig1 = app.add_subcommand("figure1", "Spiral point cloud");
  fig1->add_option("--c", fig.c, "Spiral constant");
  auto* fig2 = app.add_subcommand("figure2", "Hypercylinder point cloud");
  fig2->add_option("--c", fig.c, "Profile constant");
  fig2->add_option("--n", fig.n, "Hypersurface dimension");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  std::optional<OutputFormat> format;
  std::vector<int> grid;
  SceneConfig scene;
  try {
    if (!format_name.empty()) format = parse_format(format_name);
    if (!grid_text.empty()) grid = parse_grid(grid_text);
    if (!scene_arg.empty()) scene = load_scene(scene_arg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (*verify) {
    VerifyOptions opt{scene, grid, seed, tol, fd_step, out};
    return cmd_verify(opt, std::cout, std::cerr);
  }
  if (*generate) {
    GenerateOptions opt;
    opt.scene = scene;
    opt.grid = grid;
    opt.out = out;
    opt.format = format;
    return cmd_generate(opt, std::cout, std::cerr);
  }
  if (*solve) {
    sr.out = out;
    return cmd_solve_revolution(sr, std::cout, std::cerr);
  }
  if (*integ) {
    IntegrateOptions opt;
    opt.scene = scene;
    opt.integrand = cfl::parse_integrand(integrand);
    opt.order = order;
    opt.out = out;
    opt.format = format;
    opt.threads = threads;
    return cmd_integrate(opt, std::cout, std::cerr);
  }
  fig.grid = grid;
  fig.out = out;
  fig.format = format;
  if (*fig1) return cmd_figure1(fig, std::cout, std::cerr);
  return cmd_figure2(fig, std::cout, std::cerr);
}
