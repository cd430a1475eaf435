#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cfl/cli/commands.hpp"

using namespace cfl;
using namespace cfl::cli;

namespace {

constexpr double kPi = std::numbers::pi;
const bool kQuiet = (spdlog::set_level(spdlog::level::warn), true);
const std::string kSphere = R"({"kind":"hypersphere","params":{"n":2,"r":1}})";
const std::string kCone = R"({"kind":"cone_over_circle","params":{"rho":0.6}})";

struct Outcome {
  int code = 0;
  std::string out, err;
};

Outcome verify(const std::string& scene, std::optional<std::uint64_t> seed = {}) {
  VerifyOptions opt;
  opt.scene = load_scene(scene);
  opt.seed = seed;
  std::ostringstream out, err;
  const int code = cmd_verify(opt, out, err);
  return {code, out.str(), err.str()};
}

Outcome generate(const std::string& scene, std::vector<int> grid = {}, std::string path = {},
             std::optional<OutputFormat> format = {}) {
  GenerateOptions opt;
  opt.scene = load_scene(scene);
  opt.grid = std::move(grid);
  opt.out = std::move(path);
  opt.format = format;
  std::ostringstream out, err;
  const int code = cmd_generate(opt, out, err);
  return {code, out.str(), err.str()};
}

Outcome solve(double s_max, double tol = 1e-10, double r0 = 1.0) {
  SolveRevolutionOptions opt;
  opt.r0 = r0;
  opt.s_max = s_max;
  opt.tol = tol;
  std::ostringstream out, err;
  const int code = cmd_solve_revolution(opt, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<double>> parse_csv(const std::string& text, std::string* header = nullptr) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
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

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cfl_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int tool(const std::string& args) {
  const std::string cmd = std::string(CFL_TOOL) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Verify, SpherePasses) {
  const Outcome r = verify(kSphere);
  EXPECT_EQ(r.code, kExitPass) << r.err;
  const Immersion im = make_immersion(load_scene(kSphere).family);
  const auto rep = verify_immersion(im, grid_points(im, {8, 8}, NodePlacement::interior), {}, kDefaultLaplaceStep);
  EXPECT_LE(rep.max_residual, 1e-9);
  EXPECT_NE(r.out.find("overall: PASS"), std::string::npos);
}

TEST(Verify, ConeFailsWithUnitResidual) {
  const Outcome r = verify(kCone);
  EXPECT_EQ(r.code, kExitFail);
  const Immersion im = make_immersion(load_scene(kCone).family);
  const auto rep = verify_immersion(im, grid_points(im, {8, 8}, NodePlacement::interior), {}, kDefaultLaplaceStep);
  EXPECT_NEAR(rep.max_residual, 1.0, 1e-9);
  EXPECT_FALSE(rep.checks[0].pass);
  EXPECT_TRUE(rep.checks[1].pass);
}

TEST(Verify, SpiralPasses) { EXPECT_EQ(verify(R"({"kind":"spiral","params":{"c":1}})").code, kExitPass); }

TEST(Verify, UsageErrors) {
  EXPECT_THROW((void)load_scene("{bad"), SpecError);
  EXPECT_EQ(verify(R"({"kind":"hypersphere","params":{"n":9}})").code, kExitUsage);
  VerifyOptions opt;
  opt.scene = load_scene(kSphere);
  opt.grid = {1};
  std::ostringstream out, err;
  EXPECT_EQ(cmd_verify(opt, out, err), kExitUsage);
  EXPECT_NE(err.str().find("at least 2"), std::string::npos);
}

TEST(Verify, SeededSamplingIsReproducible) {
  const Outcome a = verify(kSphere, 42), b = verify(kSphere, 42), c = verify(kSphere, 43);
  EXPECT_EQ(a.code, kExitPass);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
}

TEST(Verify, WritesJsonReport) {
  const auto path = temp_path("report.json");
  VerifyOptions opt;
  opt.scene = load_scene(kCone);
  opt.out = path.string();
  std::ostringstream out, err;
  EXPECT_EQ(cmd_verify(opt, out, err), kExitFail);
  const auto j = nlohmann::json::parse(slurp(path));
  EXPECT_EQ(j.at("family"), "cone_over_circle");
  EXPECT_EQ(j.at("points"), 64);
  EXPECT_FALSE(j.at("pass").get<bool>());
  EXPECT_NEAR(j.at("max_residual").get<double>(), 1.0, 1e-9);
  EXPECT_EQ(j.at("checks").size(), 4u);
  std::filesystem::remove(path);
}

TEST(Generate, CircleFourPoints) {
  std::string header;
  const Outcome r = generate(R"({"kind":"hypersphere","params":{"n":1}})", {4});
  ASSERT_EQ(r.code, kExitPass) << r.err;
  const auto rows = parse_csv(r.out, &header);
  EXPECT_EQ(header, "u1,x1,x2,divT,residual");
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& row : rows) EXPECT_EQ(row[4], 0.0);
}

TEST(Generate, HeaderForSurfaces) {
  std::string header;
  (void)parse_csv(generate(R"({"kind":"torus"})", {3, 3}).out, &header);
  EXPECT_EQ(header, "u1,u2,x1,x2,x3,divT,residual");
}

TEST(Generate, RowsAreLexicographicAndExact) {
  const auto rows = parse_csv(generate(R"({"kind":"plane","params":{"half_width":1}})", {3, 2}).out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0][0], -1.0);
  EXPECT_EQ(rows[0][1], -1.0);
  EXPECT_EQ(rows[1][1], 1.0);
  EXPECT_EQ(rows[2][0], 0.0);
  for (const auto& row : rows) {
    EXPECT_EQ(row[5], row[2] * 0 + 2.0);  // div x^T = 2 on a plane through 0
    EXPECT_EQ(row[6], 1.0);
  }
}

TEST(Generate, DeterministicBytes) {
  const std::string scene = R"({"kind":"graph_surface","params":{"a":0.3,"b":-0.1,"f":0.2}})";
  EXPECT_EQ(generate(scene, {7, 5}).out, generate(scene, {7, 5}).out);
}

TEST(Generate, SeventeenSignificantDigits) {
  const auto rows = parse_csv(generate(R"({"kind":"hypersphere","params":{"n":1}})", {3}).out);
  EXPECT_EQ(rows[1][0], 2 * kPi / 3);
}

TEST(Generate, JsonFormat) {
  const Outcome r = generate(R"({"kind":"circle","params":{"r":1}})", {5}, {}, OutputFormat::json);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("rows").size(), 5u);
  EXPECT_EQ(j.at("columns").back(), "residual");
  EXPECT_EQ(j.at("family").at("kind"), "circle");
}

TEST(Generate, FileOutputAndErrors) {
  const auto path = temp_path("gen.csv");
  EXPECT_EQ(generate(R"({"kind":"torus"})", {3, 3}, path.string()).code, kExitPass);
  EXPECT_EQ(slurp(path), generate(R"({"kind":"torus"})", {3, 3}).out);
  std::filesystem::remove(path);
  EXPECT_EQ(generate(R"({"kind":"torus"})", {3, 3}, "/nonexistent-dir/x.csv").code, kExitUsage);
  EXPECT_EQ(generate(R"({"kind":"torus"})", {3, 3, 3}).code, kExitUsage);
}

TEST(Generate, SceneFileWithGridAndOutput) {
  const auto scene = temp_path("scene.json"), out = temp_path("scene_out.json");
  std::ofstream(scene) << nlohmann::json{{"family", {{"kind", "circle"}, {"params", {{"r", 2}}}}},
                                         {"grid", {6}},
                                         {"output", {{"path", out.string()}, {"format", "json"}}}}
                              .dump();
  GenerateOptions opt;
  opt.scene = load_scene(scene.string());
  std::ostringstream o, e;
  ASSERT_EQ(cmd_generate(opt, o, e), kExitPass) << e.str();
  EXPECT_EQ(nlohmann::json::parse(slurp(out)).at("rows").size(), 6u);
  std::filesystem::remove(scene);
  std::filesystem::remove(out);
  EXPECT_THROW((void)load_scene(R"({"family":{"kind":"circle"},"grid":"many"})"), SpecError);
  EXPECT_THROW((void)load_scene(R"({"family":{"kind":"circle"},"output":{"format":"xml"}})"), SpecError);
  EXPECT_THROW((void)load_scene("/nonexistent/scene.json"), SpecError);
}

TEST(Figures, SpiralSpotValue) {
  FigureOptions opt;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_figure1(opt, out, err), kExitPass);
  const auto rows = parse_csv(out.str());
  EXPECT_EQ(rows.size(), 101u);
  EXPECT_EQ(rows.front()[0], 0.01);
  EXPECT_EQ(rows.back()[0], 60 * kPi);
  bool found = false;
  for (const auto& row : rows)
    if (std::abs(row[0] - kPi * kPi) < 1e-12) {
      found = true;
      EXPECT_NEAR(row[1], -2.0, 1e-12);
      EXPECT_NEAR(row[2], 2 * kPi, 1e-12);
    }
  EXPECT_TRUE(found);
}

TEST(Figures, HypercylinderSpotValue) {
  FigureOptions opt;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_figure2(opt, out, err), kExitPass);
  const auto rows = parse_csv(out.str());
  EXPECT_EQ(rows.size(), 29u * 11u);
  int hits = 0;
  for (const auto& row : rows) {
    EXPECT_NEAR(row[5], 0.0, 1e-8);
    if (row[0] == 0.0) {
      ++hits;
      EXPECT_NEAR(row[2], 0.0, 1e-12);
      EXPECT_NEAR(row[3], -std::sqrt(2.0), 1e-12);
    }
  }
  EXPECT_EQ(hits, 11);
}

TEST(SolveRevolution, SphereProfile) {
  const Outcome r = solve(0.7);
  ASSERT_EQ(r.code, kExitPass) << r.err;
  std::string header;
  const auto rows = parse_csv(r.out, &header);
  EXPECT_EQ(header, "s,r,rp,ode_residual");
  EXPECT_EQ(rows.front()[0], 0.0);
  EXPECT_EQ(rows.back()[0], 0.7);
  for (const auto& row : rows) EXPECT_NEAR(row[1], std::sqrt(1 - row[0] * row[0]), 1e-7);
}

TEST(SolveRevolution, ResidualColumnTracksTolerance) {
  auto worst = [](const Outcome& r) {
    double w = 0.0;
    for (const auto& row : parse_csv(r.out)) w = std::max(w, row[3]);
    return w;
  };
  const double loose = worst(solve(0.7, 1e-6)), tight = worst(solve(0.7, 1e-10));
  EXPECT_LE(loose, 1e-5);
  EXPECT_LE(tight, 1e-9);
  EXPECT_GT(loose, 100 * tight);
}

TEST(SolveRevolution, NearSingularEnd) {
  const Outcome r = solve(0.99);
  EXPECT_EQ(r.code, kExitPass) << r.err;
  const auto rows = parse_csv(r.out);
  EXPECT_NEAR(rows.back()[1], std::sqrt(1 - 0.99 * 0.99), 1e-6);
}

TEST(SolveRevolution, SingularityGivesPartialOutput) {
  const Outcome r = solve(1.5);
  EXPECT_EQ(r.code, kExitFail);
  EXPECT_NE(r.err.find("last s = 1.0000"), std::string::npos) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_GT(rows.size(), 10u);
  EXPECT_LT(rows.back()[0], 1.0 + 1e-6);
  for (const auto& row : rows)
    if (row[0] <= 0.7) {
      EXPECT_NEAR(row[1], std::sqrt(1 - row[0] * row[0]), 1e-7);
    }
}

TEST(SolveRevolution, BackwardAndInvalid) {
  const Outcome back = solve(-0.5);
  ASSERT_EQ(back.code, kExitPass);
  const auto rows = parse_csv(back.out);
  EXPECT_EQ(rows.front()[0], 0.0);
  EXPECT_EQ(rows.back()[0], -0.5);
  EXPECT_EQ(solve(0.7, 1e-10, -1.0).code, kExitUsage);
  EXPECT_EQ(solve(0.7, 1e-20).code, kExitUsage);
  EXPECT_EQ(solve(0.0).code, kExitUsage);
}

TEST(Integrate, TorusAndProduct) {
  const Immersion t = make_immersion(parse_family_spec(R"({"kind":"torus","params":{"R":2,"r":1}})"));
  const IntegrationRecord mh = run_integration(t, Integrand::minkowski_hsiung, 32, 1);
  EXPECT_LE(std::abs(mh.value), 1e-6 * mh.volume);
  EXPECT_NEAR(mh.volume, 8 * kPi * kPi, 1e-6 * 8 * kPi * kPi);
  EXPECT_LE(mh.convergence_delta, 1e-9);
  EXPECT_EQ(mh.coarse_order, 16);
  const IntegrationRecord pr = run_integration(product_surface(1.0, 1.0), Integrand::minkowski_hsiung, 32, 1);
  EXPECT_LE(std::abs(pr.value), 1e-6 * pr.volume);
}

TEST(Integrate, CommandOutput) {
  const auto path = temp_path("integ.json");
  IntegrateOptions opt;
  opt.scene = load_scene(R"({"kind":"torus"})");
  opt.integrand = Integrand::volume;
  opt.out = path.string();
  std::ostringstream out, err;
  ASSERT_EQ(cmd_integrate(opt, out, err), kExitPass) << err.str();
  EXPECT_NE(out.str().find("volume = 78.95683520871"), std::string::npos) << out.str();
  const auto j = nlohmann::json::parse(slurp(path));
  EXPECT_EQ(j.at("integrand"), "volume");
  EXPECT_NEAR(j.at("value").get<double>(), 8 * kPi * kPi, 1e-9);
  std::filesystem::remove(path);
}

TEST(Integrate, OpenSceneIsUsageError) {
  IntegrateOptions opt;
  opt.scene = load_scene(R"({"kind":"plane"})");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_integrate(opt, out, err), kExitUsage);
  EXPECT_NE(err.str().find("not closed"), std::string::npos);
  opt.scene = load_scene(R"({"kind":"torus"})");
  opt.order = 1;
  EXPECT_EQ(cmd_integrate(opt, out, err), kExitUsage);
}

TEST(Tool, ExitCodeMatrix) {
  EXPECT_EQ(tool("verify '" + kSphere + "'"), 0);
  EXPECT_EQ(tool("verify '" + kCone + "'"), 1);
  EXPECT_EQ(tool("verify '{bad json'"), 2);
  EXPECT_EQ(tool("verify"), 2);
  EXPECT_EQ(tool("frobnicate"), 2);
  EXPECT_EQ(tool("--help"), 0);
}

TEST(Tool, FlagsAndLogging) {
  EXPECT_EQ(tool("verify '" + kCone + "' --tol-residual 2"), 0);
  EXPECT_EQ(tool("verify '" + kSphere + "' --tol-beltrami 1e-15"), 1);
  EXPECT_EQ(tool("generate '" + kSphere + "' --grid 3,x"), 2);
  EXPECT_EQ(tool("generate '" + kSphere + "' --format xml"), 2);
  EXPECT_EQ(tool("integrate '{\"kind\":\"plane\"}'"), 2);
  EXPECT_EQ(tool("solve-revolution --s-max 1.5"), 1);
  EXPECT_EQ(std::system(("CFL_LOG=debug " + std::string(CFL_TOOL) + " figure2 --out /dev/null 2>/dev/null").c_str()), 0);
}

TEST(Tool, GenerateIsByteIdenticalAcrossProcesses) {
  const auto a = temp_path("a.csv"), b = temp_path("b.csv");
  ASSERT_EQ(tool("figure1 --out " + a.string()), 0);
  ASSERT_EQ(tool("figure1 --out " + b.string()), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}
