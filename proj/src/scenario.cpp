#include "csa/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "csa/errors.hpp"

namespace csa::scenario {

const char* to_string(SegmentMode m) { return m == SegmentMode::free_space ? "free_space" : "hybrid_surface"; }

namespace {

std::size_t channels_for(SegmentMode) { return 3; }

std::vector<bool> bools(const json& j, std::size_t n, const std::string& where) {
  if (j.is_boolean()) return std::vector<bool>(n, j.get<bool>());
  if (!j.is_array() || j.size() != n) throw ConfigError(where + ": expected " + std::to_string(n) + " booleans");
  std::vector<bool> out;
  for (const auto& b : j) out.push_back(b.get<bool>());
  return out;
}

Eigen::Quaterniond quat(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw ConfigError(where + ": quaternion must be [w, x, y, z]");
  Eigen::Quaterniond q(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>());
  if (q.norm() < 1e-9) throw ConfigError(where + ": zero quaternion");
  return q.normalized();
}

orientation::Policy parse_orientation(const json& j, const std::string& where) {
  orientation::Policy p;
  if (j.is_null()) return p;
  try {
    p.mode = orientation::mode_from_string(j.value("mode", std::string("prescribed")));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  if (j.contains("keyframes"))
    for (const auto& q : j.at("keyframes")) p.keyframes.push_back(quat(q, where));
  if (j.contains("reference")) p.reference = io::vector_from_json(j.at("reference")).head<3>();
  p.smoothing = j.value("smoothing", 0.1);
  return p;
}

SegmentDoc parse_segment(const json& j, std::size_t index, const std::filesystem::path& base, json& inlined) {
  SegmentDoc s;
  s.id = j.value("id", "segment_" + std::to_string(index));
  const std::string where = "segment '" + s.id + "'";
  const std::string mode = j.value("mode", std::string("free_space"));
  if (mode == "free_space")
    s.mode = SegmentMode::free_space;
  else if (mode == "hybrid_surface")
    s.mode = SegmentMode::hybrid_surface;
  else
    throw ConfigError(where + ": unknown mode '" + mode + "'");
  s.surface = j.value("surface", std::string());
  const std::size_t n = channels_for(s.mode);

  if (j.contains("model")) {
    const auto& m = j.at("model");
    json doc;
    if (m.is_string()) {
      s.model_source = m.get<std::string>();
      doc = io::read_json_file(base / s.model_source);
    } else {
      doc = m;
    }
    inlined["model"] = doc;
    auto model = std::make_shared<dmp::DmpSegmentModel>(io::model_from_json(doc));
    if (model->channel_count() != n)
      throw ConfigError(where + ": model has " + std::to_string(model->channel_count()) + " channels, expected " +
                        std::to_string(n));
    s.duration = model->duration;
    s.model = std::move(model);
  } else if (j.contains("waypoints")) {
    for (const auto& w : j.at("waypoints")) {
      Eigen::VectorXd v = io::vector_from_json(w);
      if (static_cast<std::size_t>(v.size()) != n)
        throw ConfigError(where + ": waypoint has " + std::to_string(v.size()) + " values, expected " +
                          std::to_string(n));
      s.waypoints.push_back(v);
    }
    if (s.waypoints.size() < 2) throw ConfigError(where + ": needs at least 2 waypoints");
    s.duration = j.value("duration", 1.0);
    if (!(s.duration > 0.0)) throw ConfigError(where + ": duration must be > 0");
    if (j.contains("timing")) {
      s.timing = j.at("timing").get<std::vector<double>>();
      if (s.timing.size() != s.waypoints.size()) throw ConfigError(where + ": timing needs one entry per waypoint");
      if (s.timing.front() != 0.0 || s.timing.back() != 1.0)
        throw ConfigError(where + ": timing must start at 0 and end at 1");
      for (std::size_t k = 1; k < s.timing.size(); ++k)
        if (!(s.timing[k] > s.timing[k - 1])) throw ConfigError(where + ": timing must increase");
    }
  } else {
    throw ConfigError(where + ": needs either 'model' or 'waypoints'");
  }
  s.basis_count = j.value("basis_count", 20);

  s.correctable = j.contains("correctable") ? bools(j.at("correctable"), n, where + " correctable")
                                            : std::vector<bool>(n, false);
  s.scaling = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  if (j.contains("scaling")) {
    s.scaling = io::vector_from_json(j.at("scaling"));
    if (static_cast<std::size_t>(s.scaling.size()) != n)
      throw ConfigError(where + ": scaling needs " + std::to_string(n) + " values");
    if ((s.scaling.array() < 0.0).any()) throw ConfigError(where + ": scaling must be >= 0");
  }
  s.gamma = j.value("gamma", 0.0);
  if (s.gamma < 0.0) throw ConfigError(where + ": gamma must be >= 0");
  s.calibrated = j.value("calibrated", false);
  s.rate_includes_force = j.value("rate_includes_force", false);
  s.orientation = parse_orientation(j.value("orientation", json()), where);
  return s;
}

TaskSpec parse_task(const json& j) {
  TaskSpec t;
  if (j.is_null()) return t;
  const std::string kind = j.value("kind", std::string("none"));
  t.surface = j.value("surface", std::string());
  if (kind == "none") {
    t.kind = TaskKind::none;
  } else if (kind == "insertion") {
    t.kind = TaskKind::insertion;
    t.tolerance = j.value("tolerance", 0.001);
    for (const auto& h : j.at("holes"))
      t.holes.push_back({h.at("segment").get<std::string>(), io::vector_from_json(h.at("position")).head<3>()});
  } else if (kind == "polishing") {
    t.kind = TaskKind::polishing;
    t.grid_u = j.value("grid_u", 50);
    t.grid_v = j.value("grid_v", 50);
    t.halfwidth_u = j.value("halfwidth_u", 0.02);
    t.halfwidth_v = j.value("halfwidth_v", 0.06);
  } else if (kind == "layup") {
    t.kind = TaskKind::layup;
    for (const auto& l : j.at("lanes")) t.lanes.push_back({l.at("segment").get<std::string>(), l.at("v").get<double>()});
    t.cells_per_lane = j.value("cells_per_lane", 40);
    t.lane_u0 = j.value("lane_u0", 0.1);
    t.lane_u1 = j.value("lane_u1", 0.9);
    t.crease_bound = j.value("crease_bound", 0.004);
    t.min_force = j.value("min_force", 2.0);
  } else {
    throw ConfigError("task: unknown kind '" + kind + "'");
  }
  return t;
}

}  // namespace

Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir) {
  io::check_schema(doc, "csa-scenario", 1);
  Scenario sc;
  sc.source = doc;
  try {
    sc.name = doc.value("name", std::string("scenario"));
    sc.dt = doc.value("dt", 0.001);
    if (!(sc.dt >= 0.0005 && sc.dt <= 0.01)) throw ConfigError("dt must lie in [0.0005, 0.01]");
    sc.max_time = doc.value("max_time", 120.0);
    sc.device_range = doc.value("device_range", 0.02);

    if (doc.contains("correction")) {
      const auto& c = doc.at("correction");
      sc.correction.k_c = c.value("k_c", 100.0);
      if (!(sc.correction.k_c > 0.0)) throw ConfigError("correction.k_c must be > 0");
      sc.correction.rate.tau_min = c.value("tau_min", 0.1);
      sc.correction.rate.tau_max = c.value("tau_max", 10.0);
      sc.correction.rate.reversal_ticks = c.value("reversal_ticks", 3);
      sc.correction.edge_margin = c.value("edge_margin", 0.005);
      sc.correction.standoff_band = c.value("standoff_band", 0.010);
    }
    if (doc.contains("plant")) {
      const auto& p = doc.at("plant");
      sc.plant.k_p = p.value("k_p", sc.plant.k_p);
      sc.plant.k_s = p.value("k_s", sc.plant.k_s);
      sc.plant.damping = p.value("damping", sc.plant.damping);
      sc.plant.v_max = p.value("v_max", sc.plant.v_max);
      sc.plant.servo_gain = p.value("servo_gain", sc.plant.servo_gain);
    }

    if (doc.contains("surfaces")) {
      for (const auto& [name, s] : doc.at("surfaces").items()) {
        json surf = s;
        if (s.contains("file")) surf = io::read_json_file(base_dir / s.at("file").get<std::string>());
        try {
          sc.surfaces[name] = std::make_shared<surface::BSplineSurface>(io::surface_from_json(surf));
        } catch (const ConfigError& e) {
          throw ConfigError("surface '" + name + "': " + e.what());
        }
        sc.source["surfaces"][name] = io::surface_to_json(*sc.surfaces[name]);
      }
    }

    const auto& segs = doc.at("segments");
    if (!segs.is_array() || segs.empty()) throw ConfigError("scenario needs a non-empty 'segments' list");
    for (std::size_t i = 0; i < segs.size(); ++i) {
      json inlined = segs[i];
      sc.segments.push_back(parse_segment(segs[i], i, base_dir, inlined));
      sc.source["segments"][i] = inlined;
    }
    sc.task = parse_task(doc.value("task", json()));
    sc.injections = doc.value("injections", json::array());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(io::read_json_file(path), path.parent_path());
}

namespace {

SegmentDoc& find_segment(Scenario& sc, const std::string& id) {
  for (auto& s : sc.segments)
    if (s.id == id) return s;
  throw ConfigError("injection references unknown segment '" + id + "'");
}

void misalign_pass(Scenario& sc, const json& inj) {
  const std::string id = inj.at("segment").get<std::string>();
  const double offset = inj.at("offset").get<double>();
  auto& seg = find_segment(sc, id);
  if (seg.mode != SegmentMode::hybrid_surface || seg.waypoints.empty())
    throw ConfigError("misaligned_pass: '" + id + "' must be a hybrid waypoint segment");
  const auto it = sc.surfaces.find(seg.surface);
  if (it == sc.surfaces.end()) throw ConfigError("misaligned_pass: '" + id + "' has no surface");
  const auto& mid = seg.waypoints[seg.waypoints.size() / 2];
  const double dv = offset / it->second->derivatives(mid[0], mid[1]).dv.norm();
  for (auto& w : seg.waypoints) w[1] += dv;
  // Stitch the neighbouring hybrid segments so the plan stays continuous.
  for (std::size_t i = 0; i < sc.segments.size(); ++i) {
    if (sc.segments[i].id != id) continue;
    if (i > 0) {
      auto& prev = sc.segments[i - 1];
      if (prev.mode == SegmentMode::hybrid_surface && !prev.waypoints.empty()) prev.waypoints.back()[1] += dv;
    }
    if (i + 1 < sc.segments.size()) {
      auto& next = sc.segments[i + 1];
      if (next.mode == SegmentMode::hybrid_surface && !next.waypoints.empty()) next.waypoints.front()[1] += dv;
    }
  }
}

}  // namespace

void inject_error(Scenario& sc, const json& inj) {
  const std::string kind = inj.value("kind", std::string());
  try {
    if (kind == "registration_offset") {
      if (sc.task.kind != TaskKind::insertion) throw ConfigError("registration_offset needs an insertion task");
      const Eigen::Vector3d offset = io::vector_from_json(inj.at("offset")).head<3>();
      for (const auto& h : inj.at("holes")) {
        const int idx = h.get<int>();
        if (idx < 1 || static_cast<std::size_t>(idx) > sc.task.holes.size())
          throw ConfigError("registration_offset: hole " + std::to_string(idx) + " does not exist");
        sc.task.holes[static_cast<std::size_t>(idx - 1)].position += offset;
      }
    } else if (kind == "defect_region") {
      if (sc.task.kind != TaskKind::polishing) throw ConfigError("defect_region needs a polishing task");
      Defect d;
      const auto u = inj.at("u").get<std::vector<double>>();
      const auto v = inj.at("v").get<std::vector<double>>();
      if (u.size() != 2 || v.size() != 2) throw ConfigError("defect_region: u and v must be [lo, hi]");
      d.u0 = u[0];
      d.u1 = u[1];
      d.v0 = v[0];
      d.v1 = v[1];
      d.required_force = inj.at("required_force").get<double>();
      d.dwell = inj.at("dwell").get<double>();
      sc.task.defects.push_back(d);
    } else if (kind == "misaligned_pass") {
      misalign_pass(sc, inj);
    } else {
      throw ConfigError("unknown injection kind '" + kind + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError("injection '" + kind + "': " + e.what());
  }
}

void apply_injections(Scenario& sc) {
  if (sc.injected) return;
  for (const auto& inj : sc.injections) inject_error(sc, inj);
  sc.injected = true;
}

Scenario suppressed(const Scenario& scenario) {
  Scenario out = scenario;
  for (auto& s : out.segments) s.scaling.setZero();
  for (auto& s : out.source["segments"]) s["scaling"] = {0.0, 0.0, 0.0};
  return out;
}

dmp::Demonstration waypoint_demo(const SegmentDoc& seg, double dt) {
  const std::size_t n = seg.waypoints.size();
  std::vector<double> timing = seg.timing;
  if (timing.empty())
    for (std::size_t k = 0; k < n; ++k) timing.push_back(static_cast<double>(k) / static_cast<double>(n - 1));
  dmp::Demonstration d;
  d.channels = seg.mode == SegmentMode::free_space ? cartesian_layout() : surface_layout();
  d.dt = dt;
  const auto steps = static_cast<Eigen::Index>(std::llround(seg.duration / dt));
  if (steps < 2) throw ConfigError("segment '" + seg.id + "': duration too short for dt");
  d.dt = seg.duration / static_cast<double>(steps);
  d.samples.resize(steps + 1, 3);
  std::size_t leg = 0;
  for (Eigen::Index k = 0; k <= steps; ++k) {
    const double r = static_cast<double>(k) / static_cast<double>(steps);
    while (leg + 2 < n && r > timing[leg + 1]) ++leg;
    const double a = std::clamp((r - timing[leg]) / (timing[leg + 1] - timing[leg]), 0.0, 1.0);
    const double b = a * a * a * (10.0 - 15.0 * a + 6.0 * a * a);
    d.samples.row(k) = (seg.waypoints[leg] + b * (seg.waypoints[leg + 1] - seg.waypoints[leg])).transpose();
  }
  return d;
}

}  // namespace csa::scenario
