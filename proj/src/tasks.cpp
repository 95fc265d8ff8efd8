#include "csa/tasks.hpp"

#include <cmath>
#include <stdexcept>

#include "csa/surface.hpp"

namespace csa::tasks {

namespace {

const json kToolDown = {0.0, 1.0, 0.0, 0.0};  // tool z pointing down

json vec3(const Eigen::Vector3d& p) { return {p.x(), p.y(), p.z()}; }

json free_segment(const std::string& id, const std::string& surface, const std::vector<Eigen::Vector3d>& pts,
                  double duration) {
  json w = json::array();
  for (const auto& p : pts) w.push_back(vec3(p));
  json s = {{"id", id},
            {"mode", "free_space"},
            {"waypoints", w},
            {"duration", duration},
            {"orientation", {{"mode", "prescribed"}, {"keyframes", {kToolDown}}}}};
  if (!surface.empty()) s["surface"] = surface;
  return s;
}

json hybrid_segment(const std::string& id, const std::string& surface, const json& waypoints, double duration,
                    const json& orientation) {
  return {{"id", id},
          {"mode", "hybrid_surface"},
          {"surface", surface},
          {"waypoints", waypoints},
          {"duration", duration},
          {"orientation", orientation}};
}

json base(const std::string& name, double max_time) {
  return {{"schema", "csa-scenario"},
          {"version", 1},
          {"name", name},
          {"dt", 0.001},
          {"max_time", max_time},
          {"device_range", 0.02},
          {"correction", {{"k_c", 100.0}}}};
}

json user(const json& events) { return {{"schema", "csa-user"}, {"version", 1}, {"events", events}}; }

surface::BSplineSurface fit(const surface::SampleGrid& samples, int rows, int cols, double max_residual) {
  auto f = surface::fit_control_points(samples, 3, 3, rows, cols, surface::Parameterization::uniform);
  if (f.max_residual > max_residual) throw std::runtime_error("task surface fit residual too large");
  return std::move(f.surface);
}

}  // namespace

TaskFiles insertion() {
  // Cowling: cylinder of radius 0.3 about the y axis, +-40 degrees, y in +-0.15.
  const double R = 0.3;
  const double half = 40.0 * M_PI / 180.0;
  surface::SampleGrid samples;
  for (int r = 0; r < 40; ++r) {
    const double th = -half + 2.0 * half * r / 39.0;
    std::vector<Eigen::Vector3d> row;
    for (int c = 0; c < 10; ++c) row.emplace_back(R * std::sin(th), -0.15 + 0.3 * c / 9.0, R * std::cos(th));
    samples.push_back(row);
  }
  const auto cowling = fit(samples, 10, 4, 1e-4);

  json sc = base("rivet insertion", 60.0);
  sc["surfaces"]["cowling"] = io::surface_to_json(cowling);
  const double rv = cowling.derivatives(0.5, 0.5).dv.norm();

  const Eigen::Vector3d home(0.0, 0.0, 0.45);
  const Eigen::Vector3d bin(-0.35, 0.0, 0.40);
  json segments = json::array();
  json holes = json::array();
  Eigen::Vector3d from = home;
  const double us[3] = {0.25, 0.5, 0.75};
  for (int k = 0; k < 3; ++k) {
    const std::string n = std::to_string(k + 1);
    const double u = us[k];
    const Eigen::Vector3d hole = cowling.point(u, 0.5);
    const Eigen::Vector3d above = hole + 0.03 * surface::eval_normal(cowling, u, 0.5);
    segments.push_back(free_segment("grab_" + n, "", {from, bin + Eigen::Vector3d(0, 0, 0.05), bin}, 2.0));
    auto carry = free_segment("carry_" + n, "cowling", {bin, above, hole}, 2.5);
    carry["timing"] = {0.0, 0.7, 1.0};
    carry["correctable"] = true;
    carry["scaling"] = {0.005, 0.005, 0.005};
    segments.push_back(carry);
    auto place = hybrid_segment("place_" + n, "cowling",
                                {{u, 0.5, 0.0}, {u, 0.5, 10.0}, {u, 0.5, 10.0}, {u, 0.5, 0.0}}, 2.0,
                                {{"mode", "surface_normal_static"}, {"reference", {1.0, 0.0, 0.0}}});
    place["timing"] = {0.0, 0.3, 0.7, 1.0};
    place["correctable"] = {true, true, false};
    place["scaling"] = {0.005 / cowling.derivatives(u, 0.5).du.norm(), 0.005 / rv, 0.0};
    segments.push_back(place);
    holes.push_back({{"segment", "place_" + n}, {"position", vec3(hole)}});
    from = hole;
  }
  segments.push_back(free_segment("retract", "", {from, home}, 2.0));
  sc["segments"] = segments;
  sc["task"] = {{"kind", "insertion"}, {"surface", "cowling"}, {"tolerance", 0.001}, {"holes", holes}};
  sc["injections"] = {{{"kind", "registration_offset"}, {"holes", {2, 3}}, {"offset", {0.0, 0.003, 0.0}}}};

  json events = json::array();
  for (int k : {2, 3}) {
    const std::string n = std::to_string(k);
    events.push_back({{"name", "shift_rivet_" + n},
                      {"u", {0.0, 0.6, 0.0}},
                      {"start", {{"segment", "carry_" + n}, {"progress_ge", 0.5}}},
                      {"stop", {{"segment_end", "place_" + n}}}});
  }
  return {"task1_insertion", sc, user(events)};
}

TaskFiles polishing() {
  // Curved panel, 0.6 m along u by 0.4 m along v, crowned 3 cm.
  surface::SampleGrid samples;
  for (int r = 0; r < 30; ++r) {
    const double x = 0.6 * r / 29.0;
    std::vector<Eigen::Vector3d> row;
    for (int c = 0; c < 20; ++c) {
      const double y = 0.4 * c / 19.0;
      row.emplace_back(x, y, 0.03 * std::sin(M_PI * x / 0.6) + 0.01 * std::sin(M_PI * y / 0.4));
    }
    samples.push_back(row);
  }
  const auto panel = fit(samples, 8, 6, 2e-4);

  json sc = base("panel polishing", 60.0);
  sc["surfaces"]["panel"] = io::surface_to_json(panel);
  const double f0 = 5.0;
  const double lanes[3] = {0.25, 0.47, 0.69};
  const json roller = {{"mode", "surface_normal_motion_aligned"}, {"smoothing", 0.1}};
  const Eigen::Vector3d start = panel.point(0.1, lanes[0]);
  const Eigen::Vector3d n0 = surface::eval_normal(panel, 0.1, lanes[0]);

  json segments = json::array();
  segments.push_back(free_segment("approach", "panel", {start + 0.1 * n0, start + 0.03 * n0, start}, 2.0));
  segments.push_back(hybrid_segment("press", "panel", {{0.1, lanes[0], 0.0}, {0.1, lanes[0], f0}}, 1.0, roller));
  double u = 0.1;
  for (int k = 0; k < 3; ++k) {
    const double u1 = u < 0.5 ? 0.9 : 0.1;
    auto pass = hybrid_segment("pass_" + std::to_string(k + 1), "panel", {{u, lanes[k], f0}, {u1, lanes[k], f0}},
                               7.0, roller);
    pass["correctable"] = true;
    pass["scaling"] = {0.02, 0.02, 8.0};
    segments.push_back(pass);
    u = u1;
    if (k < 2)
      segments.push_back(hybrid_segment("link_" + std::to_string(k + 1), "panel",
                                        {{u, lanes[k], f0}, {u, lanes[k + 1], f0}}, 1.5, roller));
  }
  segments.push_back(hybrid_segment("release", "panel", {{u, lanes[2], f0}, {u, lanes[2], 0.0}}, 1.0, roller));
  const Eigen::Vector3d end = panel.point(u, lanes[2]);
  segments.push_back(free_segment("depart", "panel", {end, end + 0.1 * surface::eval_normal(panel, u, lanes[2])}, 1.5));
  sc["segments"] = segments;
  sc["task"] = {{"kind", "polishing"}, {"surface", "panel"}, {"grid_u", 50}, {"grid_v", 50},
                {"halfwidth_u", 0.02}, {"halfwidth_v", 0.06}};
  sc["injections"] = {{{"kind", "defect_region"},
                       {"u", {0.45, 0.55}},
                       {"v", {0.42, 0.52}},
                       {"required_force", 2.0 * f0},
                       {"dwell", 0.15}}};

  const json events = {{{"name", "bear_down"},
                        {"u", {0.0, 0.0, 0.75}},
                        {"start", {{"segment", "pass_2"}}},
                        {"stop", {{"segment_end", "pass_2"}}}}};
  return {"task2_polishing", sc, user(events)};
}

TaskFiles layup() {
  // Upper surface of a symmetric 12% airfoil, chord 0.6 m, extruded 0.6 m.
  const double chord = 0.6, span = 0.6;
  auto thickness = [&](double xi) {
    return 0.6 * chord *
           (0.2969 * std::sqrt(xi) - 0.1260 * xi - 0.3516 * xi * xi + 0.2843 * xi * xi * xi -
            0.1015 * xi * xi * xi * xi);
  };
  surface::SampleGrid samples;
  for (int r = 0; r < 60; ++r) {
    const double xi = 0.05 + 0.9 * r / 59.0;
    std::vector<Eigen::Vector3d> row;
    for (int c = 0; c < 20; ++c) row.emplace_back(xi * chord, span * c / 19.0, thickness(xi));
    samples.push_back(row);
  }
  const auto wing = fit(samples, 12, 4, 5e-4);
  const auto plane = surface::best_fit_plane(wing);

  json sc = base("airfoil layup", 120.0);
  sc["surfaces"]["wing"] = io::surface_to_json(wing);
  const double f0 = 5.0;
  const json roller = {{"mode", "surface_normal_motion_aligned"}, {"smoothing", 0.1}};
  const double rv = wing.derivatives(0.5, 0.5).dv.norm();
  const double ru = wing.derivatives(0.5, 0.5).du.norm();
  std::vector<double> lane_v;
  for (int k = 0; k < 10; ++k) lane_v.push_back(0.1 + k * 0.8 / 9.0);

  const Eigen::Vector3d start = wing.point(0.1, lane_v[0]);
  const Eigen::Vector3d n0 = surface::eval_normal(wing, 0.1, lane_v[0]);
  json segments = json::array();
  segments.push_back(free_segment("approach", "wing", {start + 0.1 * n0, start + 0.03 * n0, start}, 2.0));
  segments.push_back(hybrid_segment("press", "wing", {{0.1, lane_v[0], 0.0}, {0.1, lane_v[0], f0}}, 1.0, roller));
  json lanes = json::array();
  double u = 0.1;
  for (int k = 0; k < 10; ++k) {
    const double u1 = u < 0.5 ? 0.9 : 0.1;
    const std::string id = "pass_" + std::to_string(k + 1);
    auto pass = hybrid_segment(id, "wing", {{u, lane_v[k], f0}, {u1, lane_v[k], f0}}, 4.0, roller);
    pass["correctable"] = {true, true, false};
    pass["scaling"] = {0.01 / ru, 0.010 / rv, 0.0};
    pass["gamma"] = 2.0;
    segments.push_back(pass);
    lanes.push_back({{"segment", id}, {"v", lane_v[k]}});
    u = u1;
    if (k < 9)
      segments.push_back(hybrid_segment("link_" + std::to_string(k + 1), "wing",
                                        {{u, lane_v[k], f0}, {u, lane_v[k + 1], f0}}, 1.0, roller));
  }
  segments.push_back(hybrid_segment("release", "wing", {{u, lane_v[9], f0}, {u, lane_v[9], 0.0}}, 1.0, roller));
  const Eigen::Vector3d end = wing.point(u, lane_v[9]);
  segments.push_back(free_segment("depart", "wing", {end, end + 0.1 * surface::eval_normal(wing, u, lane_v[9])}, 1.5));
  sc["segments"] = segments;
  sc["task"] = {{"kind", "layup"},       {"surface", "wing"},     {"lanes", lanes},
                {"cells_per_lane", 40},  {"lane_u0", 0.1},        {"lane_u1", 0.9},
                {"crease_bound", 0.004}, {"min_force", 2.0}};
  sc["injections"] = {{{"kind", "misaligned_pass"}, {"segment", "pass_6"}, {"offset", 0.008}}};

  // Pass 6 runs toward -u; undo the +v offset and push back along +u until
  // the pass is retraced, then lay it again.
  const double lateral = -0.8 * plane.v_axis_sign;
  const json events = {
      {{"name", "realign"},
       {"u", {0.0, lateral, 0.0}},
       {"start", {{"segment", "pass_6"}, {"progress_ge", 0.6}}},
       {"stop", {{"segment_end", "pass_6"}}}},
      {{"name", "backtrack"},
       {"u", {1.0, 0.0, 0.0}},
       {"start", {{"segment", "pass_6"}, {"progress_ge", 0.6}}},
       {"stop", {{"segment", "pass_6"}, {"direction", "backward"}, {"progress_le", 0.01}}}}};
  return {"task3_layup", sc, user(events)};
}

std::vector<TaskFiles> all() { return {insertion(), polishing(), layup()}; }

}  // namespace csa::tasks
