#include "csa/orientation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csa::orientation {

const char* to_string(Mode m) {
  switch (m) {
    case Mode::prescribed:
      return "prescribed";
    case Mode::surface_normal_static:
      return "surface_normal_static";
    case Mode::surface_normal_motion_aligned:
      return "surface_normal_motion_aligned";
  }
  return "prescribed";
}

Mode mode_from_string(const std::string& name) {
  if (name == "prescribed") return Mode::prescribed;
  if (name == "surface_normal_static") return Mode::surface_normal_static;
  if (name == "surface_normal_motion_aligned") return Mode::surface_normal_motion_aligned;
  throw std::invalid_argument("unknown orientation mode '" + name + "'");
}

Eigen::Quaterniond nlerp(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b, double t) {
  Eigen::Vector4d qa = a.coeffs();
  Eigen::Vector4d qb = b.coeffs();
  if (qa.dot(qb) < 0.0) qb = -qb;
  Eigen::Vector4d q = (1.0 - t) * qa + t * qb;
  q.normalize();
  return Eigen::Quaterniond(q[3], q[0], q[1], q[2]);
}

double max_keyframe_gap(const std::vector<Eigen::Quaterniond>& keyframes) {
  double gap = 0.0;
  for (std::size_t k = 1; k < keyframes.size(); ++k)
    gap = std::max(gap, keyframes[k - 1].angularDistance(keyframes[k]));
  return gap;
}

Eigen::Quaterniond tool_frame(const Eigen::Vector3d& normal, const Eigen::Vector3d& x_hint) {
  const Eigen::Vector3d z = -normal.normalized();
  Eigen::Vector3d x = x_hint - x_hint.dot(z) * z;
  if (x.norm() < 1e-9) {
    // Hint parallel to the normal: any perpendicular will do.
    x = z.unitOrthogonal();
  }
  x.normalize();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  Eigen::Quaterniond q(r);
  q.normalize();
  return q;
}

namespace {

Eigen::Quaterniond prescribed(const Policy& policy, double progress) {
  const auto& k = policy.keyframes;
  if (k.empty()) return Eigen::Quaterniond::Identity();
  if (k.size() == 1) return k.front().normalized();
  const double p = std::clamp(progress, 0.0, 1.0) * static_cast<double>(k.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(p), k.size() - 2);
  return nlerp(k[i], k[i + 1], p - static_cast<double>(i));
}

}  // namespace

Eigen::Quaterniond orientation_at(const Policy& policy, double progress, const surface::SurfaceFrame* frame,
                                  const Eigen::Vector3d& motion, double dt, Memory& memory) {
  Eigen::Quaterniond q;
  if (policy.mode == Mode::prescribed || frame == nullptr) {
    q = prescribed(policy, progress);
  } else if (policy.mode == Mode::surface_normal_static) {
    Eigen::Vector3d hint = policy.reference;
    if ((hint - hint.dot(frame->normal) * frame->normal).norm() < 1e-9) hint = frame->tangent_u;
    q = tool_frame(frame->normal, hint);
  } else {
    const Eigen::Vector3d& n = frame->normal;
    Eigen::Vector3d tangential = motion - motion.dot(n) * n;
    const double speed = tangential.norm();
    if (speed > 1e-6) {
      Eigen::Vector3d d = tangential / speed;
      if (!memory.has_direction) {
        memory.direction = d;
        memory.has_direction = true;
      } else {
        // The roller axis is a line, so keep the filtered direction's sign.
        if (d.dot(memory.direction) < 0.0) d = -d;
        const double a = policy.smoothing > 0.0 ? dt / (policy.smoothing + dt) : 1.0;
        memory.direction += a * (d - memory.direction);
      }
      memory.direction -= memory.direction.dot(n) * n;
      if (memory.direction.norm() > 1e-12) memory.direction.normalize();
    }
    if (!memory.has_direction) {
      q = memory.has_last ? memory.last : tool_frame(n, frame->tangent_u);
    } else {
      q = tool_frame(n, memory.direction);
    }
  }
  memory.last = q;
  memory.has_last = true;
  return q;
}

}  // namespace csa::orientation
