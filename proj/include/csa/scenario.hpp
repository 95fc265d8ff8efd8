#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "csa/correction.hpp"
#include "csa/json_io.hpp"
#include "csa/orientation.hpp"
#include "csa/plant.hpp"
#include "csa/surface.hpp"

namespace csa::scenario {

using io::json;

enum class SegmentMode { free_space, hybrid_surface };

const char* to_string(SegmentMode m);

struct SegmentDoc {
  std::string id;
  SegmentMode mode = SegmentMode::free_space;
  std::string surface;    // required for hybrid; for free space marks an approach/depart segment
  std::vector<Eigen::VectorXd> waypoints;  // demonstration keypoints, min-jerk between them
  std::vector<double> timing;              // cumulative fractions in [0,1], one per waypoint
  double duration = 1.0;
  int basis_count = 20;
  std::shared_ptr<const dmp::DmpSegmentModel> model;  // from "model" (file or inline) if given
  std::string model_source;                           // file name, for error messages
  std::vector<bool> correctable;
  Eigen::VectorXd scaling;
  double gamma = 0.0;
  bool calibrated = false;
  bool rate_includes_force = false;
  orientation::Policy orientation;
};

struct CorrectionConfig {
  double k_c = 100.0;
  correction::RateOptions rate;
  double edge_margin = 0.005;
  double standoff_band = 0.010;
};

struct Hole {
  std::string segment;  // placement segment whose end is judged
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

struct Defect {
  double u0 = 0.0, u1 = 0.0, v0 = 0.0, v1 = 0.0;
  double required_force = 0.0;
  double dwell = 0.0;
};

struct Lane {
  std::string segment;
  double v = 0.0;  // intended lane in surface parameters
};

enum class TaskKind { none, insertion, polishing, layup };

struct TaskSpec {
  TaskKind kind = TaskKind::none;
  std::string surface;
  // insertion
  std::vector<Hole> holes;
  double tolerance = 0.001;
  // polishing
  int grid_u = 50;
  int grid_v = 50;
  double halfwidth_u = 0.02;
  double halfwidth_v = 0.06;
  std::vector<Defect> defects;
  // layup
  std::vector<Lane> lanes;
  int cells_per_lane = 40;
  double lane_u0 = 0.1;
  double lane_u1 = 0.9;
  double crease_bound = 0.004;
  double min_force = 2.0;
};

struct Scenario {
  std::string name;
  double dt = 0.001;
  double max_time = 120.0;
  double device_range = 0.02;  // meters of device travel per unit input
  CorrectionConfig correction;
  plant::PlantParams plant;
  std::map<std::string, std::shared_ptr<const surface::BSplineSurface>> surfaces;
  std::vector<SegmentDoc> segments;
  TaskSpec task;
  json injections = json::array();
  bool injected = false;
  /// Self-contained copy of the input document (files inlined, before injection).
  json source;
};

/// Parses a "csa-scenario" v1 document; relative file references resolve
/// against base_dir. Throws ConfigError.
Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// Applies one deterministic error injection. Unknown kind -> ConfigError.
void inject_error(Scenario& scenario, const json& injection);
/// Applies every listed injection once.
void apply_injections(Scenario& scenario);

/// Scenario with every correction scaling set to zero (suppression run).
Scenario suppressed(const Scenario& scenario);

/// Synthesized demonstration for a waypoint segment.
dmp::Demonstration waypoint_demo(const SegmentDoc& seg, double dt = 0.001);

}  // namespace csa::scenario
