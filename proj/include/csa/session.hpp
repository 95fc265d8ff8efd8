#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "csa/input.hpp"
#include "csa/orientation.hpp"
#include "csa/plan.hpp"
#include "csa/plant.hpp"
#include "csa/scenario.hpp"
#include "csa/trace.hpp"

namespace csa::session {

struct SessionOptions {
  std::optional<double> dt;  // overrides the scenario's dt
};

/// One execution of a behavior plan against the simulated plant. All mutable
/// state lives here and is advanced only by tick().
class Session {
 public:
  /// Applies the scenario's injections and compiles the plan; throws ConfigError.
  explicit Session(scenario::Scenario scenario, const SessionOptions& options = {});

  bool finished() const { return finished_; }
  double dt() const { return dt_; }
  long tick_count() const { return tick_; }
  const plan::BehaviorPlan& plan() const { return plan_; }
  const scenario::Scenario& scenario() const { return scenario_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const plant::PlantState& plant_state() const { return plant_; }
  TickContext context() const;
  trace::Header header(const std::string& source) const;
  /// Scaling of the active segment (for display).
  const correction::CorrectionScaling& active_scaling() const;

  /// Runs one control tick with the given raw input and returns its record.
  const trace::Record& tick(const correction::UserInput& input);

 private:
  void start_segment(std::size_t index, const Eigen::VectorXd* x0);
  const surface::BSplineSurface* contact_surface(const plan::SegmentSpec& seg) const;
  Eigen::VectorXd nominal_direction(const plan::SegmentSpec& seg);

  scenario::Scenario scenario_;
  plan::BehaviorPlan plan_;
  double dt_;
  std::vector<std::string> warnings_;

  long tick_ = 0;
  bool finished_ = false;
  std::size_t index_ = 0;
  std::shared_ptr<const dmp::DmpSegmentModel> model_;
  dmp::DmpState dmp_;
  correction::CorrectionState corr_;
  correction::RateState rate_;
  Eigen::VectorXd v_n_;
  bool fresh_segment_ = true;
  Eigen::Vector3d last_target_ = Eigen::Vector3d::Zero();
  std::pair<double, double> approach_seed_{0.5, 0.5};
  orientation::Memory orient_;
  plant::PlantState plant_;
  std::set<std::string> finished_segments_;
  trace::Record record_;
};

struct TickTiming {
  double mean_us = 0.0;
  double max_us = 0.0;
  double p99_us = 0.0;
  long overruns = 0;  // ticks slower than dt
};

struct RunResult {
  trace::Trace trace;
  TickTiming timing;
  std::vector<std::string> warnings;
  bool reached_end = false;  // plan exhausted (otherwise max_time)
};

/// Headless run: ticks until the plan is exhausted or max_time. When
/// record_path is set the trace is streamed to disk as it is produced, so a
/// fault leaves a partial file behind.
RunResult run(const scenario::Scenario& scenario, InputSource& input, const SessionOptions& options = {},
              const std::optional<std::filesystem::path>& record_path = std::nullopt);

}  // namespace csa::session
