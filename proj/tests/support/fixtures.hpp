#pragma once

#include "csa/json_io.hpp"
#include "csa/surface.hpp"

namespace csa::testing {

// 0.2 m square at z = 0; the bicubic Bezier net is linear in (u, v).
inline surface::BSplineSurface flat_plate(double size = 0.2, double z = 0.0) {
  surface::ControlGrid g(4, std::vector<Eigen::Vector3d>(4));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = {size * i / 3.0, size * j / 3.0, z};
  return surface::BSplineSurface::clamped_uniform(3, 3, g);
}

// Approach the plate, draw along u while pressing, recede.
inline io::json plate_scenario() {
  using io::json;
  json doc = {{"schema", "csa-scenario"}, {"version", 1}, {"name", "plate"}, {"dt", 0.002}};
  doc["surfaces"]["plate"] = io::surface_to_json(flat_plate());
  doc["segments"] = json::array({
      {{"id", "approach"},
       {"mode", "free_space"},
       {"surface", "plate"},
       {"waypoints", {{0.04, 0.1, 0.05}, {0.04, 0.1, 0.0}}},
       {"duration", 1.0},
       {"correctable", true},
       {"scaling", {0.005, 0.005, 0.005}}},
      {{"id", "draw"},
       {"mode", "hybrid_surface"},
       {"surface", "plate"},
       {"waypoints", {{0.2, 0.5, 0.0}, {0.5, 0.5, 5.0}, {0.8, 0.5, 5.0}, {0.8, 0.5, 0.0}}},
       {"timing", {0.0, 0.2, 0.8, 1.0}},
       {"duration", 2.0},
       {"correctable", true},
       {"scaling", {0.05, 0.05, 4.0}},
       {"orientation", {{"mode", "surface_normal_motion_aligned"}}}},
      {{"id", "recede"},
       {"mode", "free_space"},
       {"surface", "plate"},
       {"waypoints", {{0.16, 0.1, 0.0}, {0.16, 0.1, 0.05}}},
       {"duration", 1.0}},
  });
  return doc;
}

}  // namespace csa::testing
