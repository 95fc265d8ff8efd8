#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "csa/correction.hpp"
#include "csa/dmp.hpp"
#include "csa/orientation.hpp"
#include "csa/scenario.hpp"
#include "csa/surface.hpp"

namespace csa::plan {

using scenario::SegmentMode;

struct SurfaceEntry {
  std::shared_ptr<const surface::BSplineSurface> surface;
  surface::PlaneFit plane;
};

struct SegmentSpec {
  std::string id;
  SegmentMode mode = SegmentMode::free_space;
  std::shared_ptr<const dmp::DmpSegmentModel> model;
  correction::CorrectionScaling scaling;
  correction::InputMapping mapping;
  correction::ValidationMode validation = correction::ValidationMode::free_space;
  double gamma = 0.0;
  bool calibrated = false;
  bool rate_includes_force = false;
  orientation::Policy orientation;
  std::string surface;  // empty for plain free-space motion

  ChannelLayout layout() const;
};

enum class TransitionKind { same_variables, free_to_surface, surface_to_free };

const char* to_string(TransitionKind k);

struct BehaviorPlan {
  std::vector<SegmentSpec> segments;
  std::vector<TransitionKind> transitions;  // transitions[i] joins segment i and i + 1
  std::map<std::string, SurfaceEntry> surfaces;
  double nominal_duration = 0.0;
  std::vector<std::string> warnings;

  const SurfaceEntry* surface_of(const SegmentSpec& seg) const;
  std::size_t index_of(const std::string& id) const;
};

/// Fits waypoint segments, resolves surfaces and plane fits, and checks that
/// consecutive segments meet. Errors name the offending segment ids.
BehaviorPlan compile_plan(const scenario::Scenario& scenario);

struct TransitionResult {
  Eigen::VectorXd x0;
  bool warning = false;
  std::string message;
};

/// Start values for segment from + 1 given how segment `from` ended. Channels
/// whose final correction is exactly zero keep the nominal start; corrected
/// ones start from the corrected end (projected or evaluated across modes).
/// Force corrections never cross into position variables.
TransitionResult transition(const BehaviorPlan& plan, std::size_t from, const Eigen::VectorXd& nominal_end,
                            const Eigen::VectorXd& correction_end);

/// Copy of a model that starts forward from x0 and backtracks to x0.
std::shared_ptr<const dmp::DmpSegmentModel> starting_at(const dmp::DmpSegmentModel& model, const Eigen::VectorXd& x0);

/// Cartesian point of a segment's state (evaluates the surface for hybrid).
Eigen::Vector3d cartesian_point(const BehaviorPlan& plan, const SegmentSpec& seg, const Eigen::VectorXd& x);

}  // namespace csa::plan
