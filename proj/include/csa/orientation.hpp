#pragma once

#include <Eigen/Geometry>
#include <string>
#include <vector>

#include "csa/surface.hpp"

namespace csa::orientation {

enum class Mode { prescribed, surface_normal_static, surface_normal_motion_aligned };

const char* to_string(Mode m);
Mode mode_from_string(const std::string& name);

struct Policy {
  Mode mode = Mode::prescribed;
  std::vector<Eigen::Quaterniond> keyframes;  // prescribed, evenly spread over progress
  Eigen::Vector3d reference = Eigen::Vector3d::UnitX();  // static spin direction
  double smoothing = 0.1;  // seconds, motion-aligned tangent filter
};

/// Per-session memory for the motion-aligned filter and the hold fallback.
struct Memory {
  Eigen::Vector3d direction = Eigen::Vector3d::Zero();
  bool has_direction = false;
  Eigen::Quaterniond last = Eigen::Quaterniond::Identity();
  bool has_last = false;
};

/// Component-wise lerp on the shorter arc, renormalized.
Eigen::Quaterniond nlerp(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b, double t);

/// Largest angle between consecutive keyframes (radians, shorter arc).
double max_keyframe_gap(const std::vector<Eigen::Quaterniond>& keyframes);

/// Tool orientation with the tool z axis along -n and tool x along x_hint
/// projected into the tangent plane.
Eigen::Quaterniond tool_frame(const Eigen::Vector3d& normal, const Eigen::Vector3d& x_hint);

Eigen::Quaterniond orientation_at(const Policy& policy, double progress, const surface::SurfaceFrame* frame,
                                  const Eigen::Vector3d& motion, double dt, Memory& memory);

}  // namespace csa::orientation
