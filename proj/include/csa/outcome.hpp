#pragma once

#include <string>
#include <vector>

#include "csa/json_io.hpp"
#include "csa/scenario.hpp"
#include "csa/trace.hpp"

namespace csa::outcome {

using io::json;

struct Report {
  std::string task = "none";
  bool success = true;
  bool partial = false;  // trace was truncated; judged on what is there
  json details = json::object();
};

/// Per-cell force dose over the surface parameter grid.
struct DoseMap {
  int grid_u = 0;
  int grid_v = 0;
  std::vector<double> coverage;  // integral of f dt under the footprint
  std::vector<double> dose;      // same, counting only ticks at or above the cell's required force
  std::vector<double> required;  // 0 outside defect regions

  double& at(std::vector<double>& m, int i, int j) const { return m[static_cast<std::size_t>(i * grid_v + j)]; }
};

DoseMap dose_map(const std::vector<trace::Record>& records, const scenario::Scenario& scenario, double dt);

/// Judges the task from the trace alone. The scenario must already carry its
/// injections.
Report evaluate_outcome(const trace::Trace& trace, const scenario::Scenario& scenario);

json report_to_json(const Report& r);

}  // namespace csa::outcome
