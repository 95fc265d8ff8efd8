#pragma once

#include <Eigen/Geometry>
#include <utility>

#include "csa/surface.hpp"

namespace csa::plant {

struct PlantParams {
  double k_p = 0.002;        // admittance gain, m/(s N)
  double k_s = 5000.0;       // contact stiffness, N/m
  double damping = 20.0;     // contact damping, N s/m
  double v_max = 0.25;       // m/s
  double servo_gain = 40.0;  // 1/s, position loop
};

struct PlantState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  double force = 0.0;  // measured contact force along n
  bool contact = false;
  double penetration = 0.0;
  std::pair<double, double> foot{0.5, 0.5};  // closest surface parameters
};

enum class CommandMode { position, hybrid };

struct PlantCommand {
  CommandMode mode = CommandMode::position;
  Eigen::Vector3d target = Eigen::Vector3d::Zero();       // position, or r(u, v) in hybrid mode
  Eigen::Vector3d feedforward = Eigen::Vector3d::Zero();  // m/s
  double force = 0.0;                                     // hybrid normal force command
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
};

/// Places the tool at p and initializes the contact state against the surface.
PlantState rest_at(const Eigen::Vector3d& p, const surface::BSplineSurface* surface,
                   std::pair<double, double> seed = {0.5, 0.5});

/// One tick of the kinematic tool point. Position mode: velocity servo on the
/// target. Hybrid mode: servo in the tangent plane plus admittance along the
/// normal, v_n = k_p (f_cmd - f_meas) toward the surface. Contact force is a
/// spring-damper on penetration, never pulling.
PlantState plant_step(const PlantState& state, const PlantCommand& command, const surface::BSplineSurface* surface,
                      const PlantParams& params, double dt);

}  // namespace csa::plant
