#include "csa/metrics.hpp"

#include "csa/errors.hpp"

namespace csa::metrics {

double compute_input_time(const std::vector<trace::Record>& records, InputMethod method, double dt,
                          double device_range, double d, double v_alpha) {
  if (!(device_range > 0.0)) throw ConfigError("trace has no device range");
  if (!(dt > 0.0)) throw ConfigError("trace has no time step");
  long active = 0;
  Eigen::Vector3d prev = Eigen::Vector3d::Zero();
  for (const auto& r : records) {
    const Eigen::Vector3d x = r.u * device_range;
    if (method == InputMethod::corrective) {
      if (x.norm() > d) ++active;
    } else if ((x - prev).norm() / dt > v_alpha) {
      ++active;
    }
    prev = x;
  }
  return static_cast<double>(active) * dt;
}

Metrics compute_metrics(const trace::Trace& trace, double d, double v_alpha) {
  Metrics m;
  m.d = d;
  m.v_alpha = v_alpha;
  const double dt = trace.header.dt;
  const double range = trace.header.device_range;
  m.t_input_corrective = compute_input_time(trace.records, InputMethod::corrective, dt, range, d, v_alpha);
  m.t_input_motion = compute_input_time(trace.records, InputMethod::motion_based, dt, range, d, v_alpha);
  m.ticks = static_cast<long>(trace.records.size());
  m.t_total = static_cast<double>(m.ticks) * dt;
  for (const auto& r : trace.records) {
    m.edge_clamped += r.edge_clamped ? 1 : 0;
    m.standoff_scaled += r.standoff_scaled ? 1 : 0;
    m.force_floored += r.force_floored ? 1 : 0;
    m.backward_ticks += r.direction == dmp::Direction::backward ? 1 : 0;
  }
  m.partial = !trace.complete;
  if (trace.header.scenario.is_object()) {
    auto sc = scenario::parse_scenario(trace.header.scenario);
    scenario::apply_injections(sc);
    m.outcome = outcome::evaluate_outcome(trace, sc);
  }
  m.outcome.partial = m.outcome.partial || m.partial;
  return m;
}

io::json metrics_to_json(const Metrics& m) {
  return {{"t_input_corrective", m.t_input_corrective},
          {"t_input_motion", m.t_input_motion},
          {"t_total", m.t_total},
          {"d", m.d},
          {"v_alpha", m.v_alpha},
          {"ticks", m.ticks},
          {"saturation", {{"edge_clamped", m.edge_clamped}, {"standoff_scaled", m.standoff_scaled}, {"force_floored", m.force_floored}}},
          {"backward_ticks", m.backward_ticks},
          {"partial", m.partial},
          {"outcome", outcome::report_to_json(m.outcome)}};
}

}  // namespace csa::metrics
