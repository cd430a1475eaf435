#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfl/families/family_spec.hpp"
#include "cfl/geometry/immersion.hpp"

namespace cfl::cli {

enum class OutputFormat { csv, json };

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw SpecError("unknown output format '" + s + "' (expected csv or json)");
}

/// Family + sampling grid + output target. On disk either a bare FamilySpec
/// or {"family": {...}, "grid": [..], "output": {"path": .., "format": ..}}.
struct SceneConfig {
  FamilySpec family;
  std::vector<int> grid;  ///< per-axis sample counts; empty means the command default
  std::string output_path;
  OutputFormat format = OutputFormat::csv;
};

inline SceneConfig parse_scene(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError(std::string("scene: invalid JSON: ") + e.what());
  }
  SceneConfig sc;
  if (j.is_object() && j.contains("family")) {
    sc.family = j.at("family").get<FamilySpec>();
    if (j.contains("grid")) {
      if (!j.at("grid").is_array()) throw SpecError("scene: 'grid' must be an array of counts");
      for (const auto& g : j.at("grid")) {
        if (!g.is_number_integer()) throw SpecError("scene: grid counts must be integers");
        sc.grid.push_back(g.get<int>());
      }
    }
    if (j.contains("output")) {
      const auto& o = j.at("output");
      if (o.contains("path")) sc.output_path = o.at("path").get<std::string>();
      if (o.contains("format")) sc.format = parse_format(o.at("format").get<std::string>());
    }
  } else {
    sc.family = j.get<FamilySpec>();
  }
  return sc;
}

/// Accepts inline JSON or a path to a JSON file.
inline SceneConfig load_scene(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && arg[first] == '{') return parse_scene(arg);
  std::ifstream in(arg);
  if (!in) throw SpecError("scene: cannot read '" + arg + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str());
}

inline std::vector<int> parse_grid(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw SpecError("grid: '" + item + "' is not an integer");
    }
    if (used != item.size()) throw SpecError("grid: '" + item + "' is not an integer");
    out.push_back(v);
  }
  return out;
}

/// One count per axis: a single value is broadcast.
inline std::vector<int> resolve_grid(const Immersion& im, std::vector<int> grid, int fallback) {
  const std::size_t n = im.intrinsic_dim();
  if (grid.empty()) grid.assign(n, fallback);
  if (grid.size() == 1 && n > 1) grid.assign(n, grid[0]);
  if (grid.size() != n)
    throw SpecError("grid: expected " + std::to_string(n) + " counts, got " + std::to_string(grid.size()));
  for (int g : grid)
    if (g < 2) throw SpecError("grid: sample counts must be at least 2");
  return grid;
}

enum class NodePlacement {
  /// Non-periodic axes include both endpoints; used for exported data.
  endpoints,
  /// Non-periodic axes use cell centers, keeping every node interior.
  interior,
};

/// Sample coordinates along one axis. Periodic axes never repeat the seam;
/// collapsing axes always use cell centers.
inline std::vector<double> axis_nodes(const ChartAxis& ax, int count, NodePlacement placement) {
  std::vector<double> out;
  const auto N = static_cast<double>(count);
  for (int k = 0; k < count; ++k) {
    if (ax.periodic) {
      out.push_back(ax.lo + ax.length() * k / N);
    } else if (ax.collapsing || placement == NodePlacement::interior) {
      out.push_back(ax.lo + ax.length() * (k + 0.5) / N);
    } else {
      // Written as an affine blend so symmetric ranges hit 0 exactly.
      out.push_back((ax.lo * (count - 1 - k) + ax.hi * k) / (N - 1.0));
    }
  }
  return out;
}

/// Lexicographic grid (first axis slowest).
inline std::vector<std::vector<double>> grid_points(const std::vector<std::vector<double>>& axes) {
  std::vector<std::vector<double>> pts{{}};
  for (const auto& nodes : axes) {
    std::vector<std::vector<double>> next;
    next.reserve(pts.size() * nodes.size());
    for (const auto& p : pts)
      for (double v : nodes) {
        auto q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    pts = std::move(next);
  }
  return pts;
}

inline std::vector<std::vector<double>> grid_points(const Immersion& im, const std::vector<int>& counts,
                                                    NodePlacement placement) {
  std::vector<std::vector<double>> axes;
  for (std::size_t i = 0; i < im.intrinsic_dim(); ++i)
    axes.push_back(axis_nodes(im.axis(i), counts[i], placement));
  return grid_points(axes);
}

/// `count` uniform random points, kept `margin` away from non-periodic ends.
inline std::vector<std::vector<double>> random_points(const Immersion& im, std::size_t count,
                                                      std::uint64_t seed, double margin) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> pts;
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<double> u;
    for (const ChartAxis& ax : im.axes()) {
      const double m = ax.periodic ? 0.0 : std::max(margin, 1e-3 * ax.length());
      std::uniform_real_distribution<double> d(ax.lo + m, ax.hi - m);
      u.push_back(d(rng));
    }
    pts.push_back(std::move(u));
  }
  return pts;
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace cfl::cli
