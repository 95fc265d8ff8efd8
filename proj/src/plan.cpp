#include "csa/plan.hpp"

#include <cmath>
#include <sstream>

#include "csa/errors.hpp"

namespace csa::plan {

ChannelLayout SegmentSpec::layout() const {
  return mode == SegmentMode::free_space ? cartesian_layout() : surface_layout();
}

const char* to_string(TransitionKind k) {
  switch (k) {
    case TransitionKind::same_variables:
      return "same_variables";
    case TransitionKind::free_to_surface:
      return "free_to_surface";
    case TransitionKind::surface_to_free:
      return "surface_to_free";
  }
  return "same_variables";
}

const SurfaceEntry* BehaviorPlan::surface_of(const SegmentSpec& seg) const {
  if (seg.surface.empty()) return nullptr;
  const auto it = surfaces.find(seg.surface);
  return it == surfaces.end() ? nullptr : &it->second;
}

std::size_t BehaviorPlan::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < segments.size(); ++i)
    if (segments[i].id == id) return i;
  throw ConfigError("no segment named '" + id + "'");
}

Eigen::Vector3d cartesian_point(const BehaviorPlan& plan, const SegmentSpec& seg, const Eigen::VectorXd& x) {
  if (seg.mode == SegmentMode::free_space) return x.head<3>();
  return plan.surface_of(seg)->surface->point(x[0], x[1]);
}

namespace {

std::shared_ptr<const dmp::DmpSegmentModel> fit_waypoints(const scenario::SegmentDoc& doc) {
  dmp::FitOptions opts;
  opts.basis_count = doc.basis_count;
  try {
    auto model = dmp::fit_segment(scenario::waypoint_demo(doc), opts);
    return std::make_shared<dmp::DmpSegmentModel>(std::move(model));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("segment '" + doc.id + "': " + e.what());
  }
}

std::string describe(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os << "[" << v.transpose() << "]";
  return os.str();
}

}  // namespace

BehaviorPlan compile_plan(const scenario::Scenario& sc) {
  BehaviorPlan plan;
  for (const auto& [name, surf] : sc.surfaces) {
    SurfaceEntry e;
    e.surface = surf;
    try {
      e.plane = surface::best_fit_plane(*surf);
    } catch (const std::exception& ex) {
      throw ConfigError("surface '" + name + "': plane fit failed: " + ex.what());
    }
    plan.surfaces[name] = e;
  }

  for (const auto& doc : sc.segments) {
    SegmentSpec seg;
    seg.id = doc.id;
    seg.mode = doc.mode;
    seg.surface = doc.surface;
    if (!doc.surface.empty() && plan.surfaces.count(doc.surface) == 0)
      throw ConfigError("segment '" + doc.id + "': unknown surface '" + doc.surface + "'");
    if (doc.mode == SegmentMode::hybrid_surface && doc.surface.empty())
      throw ConfigError("segment '" + doc.id + "': hybrid segment needs a surface");
    seg.model = doc.model ? doc.model : fit_waypoints(doc);
    seg.scaling.max = doc.calibrated ? Eigen::VectorXd::Zero(doc.scaling.size()) : doc.scaling;
    seg.scaling.correctable = doc.correctable;
    seg.gamma = doc.gamma;
    seg.calibrated = doc.calibrated;
    seg.rate_includes_force = doc.rate_includes_force;
    seg.orientation = doc.orientation;
    if (seg.orientation.mode != orientation::Mode::prescribed && doc.surface.empty())
      throw ConfigError("segment '" + doc.id + "': surface-normal orientation needs a surface");
    if (orientation::max_keyframe_gap(seg.orientation.keyframes) > M_PI / 2)
      plan.warnings.push_back("segment '" + doc.id + "': keyframes more than 90 degrees apart");

    const SurfaceEntry* entry = plan.surface_of(seg);
    if (seg.mode == SegmentMode::hybrid_surface) {
      seg.mapping = correction::InputMapping::surface(entry->plane.v_axis_sign);
      seg.validation = correction::ValidationMode::on_surface;
    } else {
      seg.mapping = correction::InputMapping::cartesian(entry ? entry->plane.input_rotation : Eigen::Matrix3d::Identity());
      seg.validation = entry ? correction::ValidationMode::approach : correction::ValidationMode::free_space;
    }
    plan.nominal_duration += seg.model->duration;
    plan.segments.push_back(std::move(seg));
  }

  const double tol = 1e-6;
  const double cross_tol = 1e-3;
  for (std::size_t i = 0; i + 1 < plan.segments.size(); ++i) {
    const auto& a = plan.segments[i];
    const auto& b = plan.segments[i + 1];
    const Eigen::VectorXd end = a.model->goal_values();
    const Eigen::VectorXd start = b.model->start_values();
    TransitionKind kind;
    double gap;
    if (a.mode == b.mode) {
      kind = TransitionKind::same_variables;
      if (a.mode == SegmentMode::hybrid_surface && a.surface != b.surface)
        throw ConfigError("segments '" + a.id + "' and '" + b.id + "' are on different surfaces");
      gap = (end - start).lpNorm<Eigen::Infinity>();
      if (gap > tol)
        throw ConfigError("segments '" + a.id + "' -> '" + b.id + "': end " + describe(end) +
                          " does not meet start " + describe(start));
    } else {
      kind = a.mode == SegmentMode::free_space ? TransitionKind::free_to_surface : TransitionKind::surface_to_free;
      gap = (cartesian_point(plan, a, end) - cartesian_point(plan, b, start)).norm();
      if (gap > cross_tol)
        throw ConfigError("segments '" + a.id + "' -> '" + b.id + "': endpoints are " + std::to_string(gap) +
                          " m apart");
    }
    plan.transitions.push_back(kind);
  }
  return plan;
}

std::shared_ptr<const dmp::DmpSegmentModel> starting_at(const dmp::DmpSegmentModel& model, const Eigen::VectorXd& x0) {
  auto m = std::make_shared<dmp::DmpSegmentModel>(model);
  for (std::size_t i = 0; i < m->forward.channels.size(); ++i) {
    m->forward.channels[i].start = x0[static_cast<Eigen::Index>(i)];
    if (i < m->backward.channels.size()) m->backward.channels[i].goal = x0[static_cast<Eigen::Index>(i)];
  }
  return m;
}

TransitionResult transition(const BehaviorPlan& plan, std::size_t from, const Eigen::VectorXd& nominal_end,
                            const Eigen::VectorXd& correction_end) {
  if (from + 1 >= plan.segments.size()) throw std::out_of_range("transition past the last segment");
  const auto& a = plan.segments[from];
  const auto& b = plan.segments[from + 1];
  TransitionResult r;
  r.x0 = b.model->start_values();
  const Eigen::VectorXd corrected = nominal_end + correction_end;

  switch (plan.transitions[from]) {
    case TransitionKind::same_variables:
      for (Eigen::Index i = 0; i < r.x0.size(); ++i)
        if (correction_end[i] != 0.0) r.x0[i] = corrected[i];
      break;
    case TransitionKind::free_to_surface: {
      if (correction_end.head<3>().isZero(0.0)) break;
      const auto& surf = *plan.surface_of(b)->surface;
      const auto foot = surface::project_to_surface(surf, corrected.head<3>(), {r.x0[0], r.x0[1]});
      if (foot.warning) {
        r.warning = true;
        r.message = "projection into '" + b.id + "' did not converge; nominal start kept";
        break;
      }
      r.x0[0] = foot.u;
      r.x0[1] = foot.v;
      break;
    }
    case TransitionKind::surface_to_free: {
      // Only the surface coordinates continue; a force correction is dropped.
      if (correction_end[0] == 0.0 && correction_end[1] == 0.0) break;
      r.x0 = plan.surface_of(a)->surface->point(corrected[0], corrected[1]);
      break;
    }
  }
  return r;
}

}  // namespace csa::plan
