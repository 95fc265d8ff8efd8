#include "csa/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csa::plant {

namespace {

void update_contact(PlantState& s, const surface::BSplineSurface* surface, const PlantParams& params, double dt) {
  if (surface == nullptr) {
    s.force = 0.0;
    s.contact = false;
    s.penetration = 0.0;
    return;
  }
  const auto foot = surface::refine_projection(*surface, s.position, s.foot);
  s.foot = {foot.u, foot.v};
  const double sd = surface::signed_distance(*surface, s.position, foot);
  const double depth = std::max(0.0, -sd);
  const double rate = dt > 0.0 ? (depth - s.penetration) / dt : 0.0;
  s.penetration = depth;
  s.force = depth > 0.0 ? std::max(0.0, params.k_s * depth + params.damping * rate) : 0.0;
  s.contact = depth > 0.0;
}

}  // namespace

PlantState rest_at(const Eigen::Vector3d& p, const surface::BSplineSurface* surface, std::pair<double, double> seed) {
  PlantState s;
  s.position = p;
  if (surface != nullptr) {
    const auto foot = surface::project_to_surface(*surface, p, seed);
    s.foot = {foot.u, foot.v};
  }
  update_contact(s, surface, PlantParams{}, 0.0);
  return s;
}

PlantState plant_step(const PlantState& state, const PlantCommand& command, const surface::BSplineSurface* surface,
                      const PlantParams& params, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("plant_step: dt must be > 0");
  PlantState next = state;
  Eigen::Vector3d v;
  if (command.mode == CommandMode::hybrid && surface != nullptr) {
    Eigen::Vector3d n;
    try {
      n = surface::eval_normal(*surface, state.foot.first, state.foot.second);
    } catch (const surface::DegenerateSurface&) {
      n = Eigen::Vector3d::UnitZ();
    }
    const Eigen::Vector3d err = command.target - state.position;
    const Eigen::Vector3d ff = command.feedforward - command.feedforward.dot(n) * n;
    const Eigen::Vector3d tangential = ff + params.servo_gain * (err - err.dot(n) * n);
    const double into = params.k_p * (command.force - state.force);
    v = tangential - into * n;
  } else {
    v = command.feedforward + params.servo_gain * (command.target - state.position);
  }
  const double speed = v.norm();
  if (speed > params.v_max) v *= params.v_max / speed;
  next.velocity = v;
  next.position = state.position + v * dt;
  next.orientation = command.orientation.normalized();
  update_contact(next, surface, params, dt);
  return next;
}

}  // namespace csa::plant
