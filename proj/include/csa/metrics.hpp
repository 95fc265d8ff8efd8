#pragma once

#include <string>
#include <vector>

#include "csa/outcome.hpp"
#include "csa/trace.hpp"

namespace csa::metrics {

enum class InputMethod { corrective, motion_based };

/// Seconds during which the (synthetic) device counts as in use: displaced
/// more than d from center, or moving faster than v_alpha. Device position is
/// u * device_range; both tests are strict. Counted at tick resolution.
double compute_input_time(const std::vector<trace::Record>& records, InputMethod method, double dt,
                          double device_range, double d = 0.005, double v_alpha = 0.01);

struct Metrics {
  double t_input_corrective = 0.0;
  double t_input_motion = 0.0;
  double t_total = 0.0;
  double d = 0.005;
  double v_alpha = 0.01;
  long ticks = 0;
  long edge_clamped = 0;
  long standoff_scaled = 0;
  long force_floored = 0;
  long backward_ticks = 0;
  bool partial = false;
  outcome::Report outcome;
};

/// Metrics plus outcome; the scenario is rebuilt from the trace header.
Metrics compute_metrics(const trace::Trace& trace, double d = 0.005, double v_alpha = 0.01);

io::json metrics_to_json(const Metrics& m);

}  // namespace csa::metrics
