#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "evodrive/common.hpp"
#include "evodrive/geometry.hpp"

namespace evodrive {

struct Light {
  Vec2 pos;
  double intensity = 1.0;
};

struct Disc {
  Vec2 center;
  double radius = 0.0;
};

struct GridSpec {
  int nx = 10;
  int ny = 8;

  int cell_count() const { return nx * ny; }

  // Row-major cell holding p, or nullopt when p lies outside [0,w] x [0,h].
  // Points on the far edges land in the last row/column.
  std::optional<int> cell_index(const Vec2& p, double width, double height) const {
    if (p.x < 0.0 || p.x > width || p.y < 0.0 || p.y > height) return std::nullopt;
    int ix = std::min(nx - 1, static_cast<int>(p.x / width * nx));
    int iy = std::min(ny - 1, static_cast<int>(p.y / height * ny));
    return iy * nx + ix;
  }
};

// Rectangular world. The interior is [0, width] x [0, height]; the boundary
// walls are part of the obstacle list (always the first four entries), so
// collision and sensing code treats walls and interior obstacles uniformly.
struct Arena {
  double width = 1000.0;
  double height = 800.0;
  std::vector<Rect> obstacles;  // walls first, then interior obstacles
  std::optional<Light> light;
  std::optional<Disc> recharge;
  GridSpec grid;

  static constexpr double kWallThickness = 50.0;
  static constexpr int kWallCount = 4;

  static Arena open(double w, double h) {
    Arena a;
    a.width = w;
    a.height = h;
    a.obstacles = walls_for(w, h);
    return a;
  }

  static std::vector<Rect> walls_for(double w, double h) {
    const double t = kWallThickness;
    return {
        {-t, -t, w + t, 0.0},    // bottom
        {-t, h, w + t, h + t},   // top
        {-t, 0.0, 0.0, h},       // left
        {w, 0.0, w + t, h},      // right
    };
  }

  void add_obstacle(const Rect& r) {
    config_check(r.x0 < r.x1 && r.y0 < r.y1, "arena: degenerate obstacle");
    config_check(r.x0 >= 0 && r.y0 >= 0 && r.x1 <= width && r.y1 <= height,
                 "arena: obstacle outside interior");
    obstacles.push_back(r);
  }

  std::vector<Rect> interior_obstacles() const {
    return {obstacles.begin() + kWallCount, obstacles.end()};
  }

  void validate() const {
    config_check(width > 0 && height > 0, "arena: non-positive dimensions");
    config_check(static_cast<int>(obstacles.size()) >= kWallCount, "arena: walls missing");
    if (recharge) {
      const auto& d = *recharge;
      config_check(d.radius > 0, "arena: recharge radius must be positive");
      config_check(d.center.x - d.radius >= 0 && d.center.x + d.radius <= width &&
                       d.center.y - d.radius >= 0 && d.center.y + d.radius <= height,
                   "arena: recharge disc not fully inside arena");
    }
    config_check(grid.nx > 0 && grid.ny > 0, "arena: bad sweep grid");
  }
};

// ---------------------------------------------------------------------------
// Arena description file: line-oriented key/value text. '#' starts a comment.
// Keys:
//   schema_version 1
//   dimensions <width> <height>
//   obstacle <x0> <y0> <x1> <y1>        (repeatable; interior obstacles only)
//   light <x> <y> [intensity]
//   recharge <x> <y> <radius>
//   grid <nx> <ny>
// ---------------------------------------------------------------------------

inline Arena parse_arena(std::istream& in, const std::string& origin = "<arena>") {
  Arena a = Arena::open(1000.0, 800.0);
  bool have_dims = false;
  std::vector<Rect> pending;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    auto fail = [&](const std::string& what) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + what);
    };
    if (key == "schema_version") {
      int v = 0;
      if (!(ls >> v) || v != 1) fail("unsupported schema_version");
    } else if (key == "dimensions") {
      double w = 0, h = 0;
      if (!(ls >> w >> h)) fail("dimensions needs <width> <height>");
      a = Arena::open(w, h);
      have_dims = true;
    } else if (key == "obstacle") {
      Rect r;
      if (!(ls >> r.x0 >> r.y0 >> r.x1 >> r.y1)) fail("obstacle needs 4 coordinates");
      pending.push_back(r);
    } else if (key == "light") {
      Light l;
      if (!(ls >> l.pos.x >> l.pos.y)) fail("light needs <x> <y>");
      ls >> l.intensity;
      a.light = l;
    } else if (key == "recharge") {
      Disc d;
      if (!(ls >> d.center.x >> d.center.y >> d.radius)) fail("recharge needs <x> <y> <radius>");
      a.recharge = d;
    } else if (key == "grid") {
      GridSpec g;
      if (!(ls >> g.nx >> g.ny)) fail("grid needs <nx> <ny>");
      a.grid = g;
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  config_check(have_dims, origin + ": missing 'dimensions'");
  for (const auto& r : pending) a.add_obstacle(r);
  a.validate();
  return a;
}

inline Arena load_arena(const std::string& path) {
  std::ifstream in(path);
  config_check(in.good(), "cannot open arena file: " + path);
  return parse_arena(in, path);
}

inline void write_arena(std::ostream& out, const Arena& a) {
  out << "schema_version 1\n";
  out << "dimensions " << fmt_g17(a.width) << " " << fmt_g17(a.height) << "\n";
  for (const auto& r : a.interior_obstacles())
    out << "obstacle " << fmt_g17(r.x0) << " " << fmt_g17(r.y0) << " " << fmt_g17(r.x1) << " "
        << fmt_g17(r.y1) << "\n";
  if (a.light)
    out << "light " << fmt_g17(a.light->pos.x) << " " << fmt_g17(a.light->pos.y) << " "
        << fmt_g17(a.light->intensity) << "\n";
  if (a.recharge)
    out << "recharge " << fmt_g17(a.recharge->center.x) << " " << fmt_g17(a.recharge->center.y)
        << " " << fmt_g17(a.recharge->radius) << "\n";
  out << "grid " << a.grid.nx << " " << a.grid.ny << "\n";
}

}  // namespace evodrive
