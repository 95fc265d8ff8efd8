#include "csa/outcome.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "csa/errors.hpp"

namespace csa::outcome {

namespace {

const surface::BSplineSurface& task_surface(const scenario::Scenario& sc) {
  const auto it = sc.surfaces.find(sc.task.surface);
  if (it == sc.surfaces.end()) throw ConfigError("task surface '" + sc.task.surface + "' not found");
  return *it->second;
}

Report insertion(const trace::Trace& tr, const scenario::Scenario& sc) {
  Report rep;
  rep.task = "insertion";
  const auto& surf = task_surface(sc);
  json holes = json::array();
  int ok = 0;
  for (std::size_t k = 0; k < sc.task.holes.size(); ++k) {
    const auto& h = sc.task.holes[k];
    const trace::Record* last = nullptr;
    for (const auto& r : tr.records)
      if (r.segment == h.segment) last = &r;
    json j = {{"hole", k + 1}, {"segment", h.segment}, {"tolerance", sc.task.tolerance}};
    if (last == nullptr) {
      j["reached"] = false;
      j["success"] = false;
      rep.success = false;
      holes.push_back(j);
      continue;
    }
    const auto foot = surface::project_to_surface(surf, h.position, {0.5, 0.5});
    const Eigen::Vector3d n = surface::eval_normal(surf, foot.u, foot.v);
    const Eigen::Vector3d e = last->position - h.position;
    const double lateral = (e - e.dot(n) * n).norm();
    const bool success = lateral <= sc.task.tolerance;
    ok += success ? 1 : 0;
    rep.success = rep.success && success;
    j["reached"] = true;
    j["lateral_error"] = lateral;
    j["success"] = success;
    holes.push_back(j);
  }
  rep.details = {{"holes", holes}, {"succeeded", ok}};
  return rep;
}

int clamp_index(double x, int n) { return std::clamp(static_cast<int>(std::floor(x)), 0, n - 1); }

}  // namespace

DoseMap dose_map(const std::vector<trace::Record>& records, const scenario::Scenario& sc, double dt) {
  const auto& t = sc.task;
  DoseMap m;
  m.grid_u = t.grid_u;
  m.grid_v = t.grid_v;
  const auto cells = static_cast<std::size_t>(t.grid_u * t.grid_v);
  m.coverage.assign(cells, 0.0);
  m.dose.assign(cells, 0.0);
  m.required.assign(cells, 0.0);
  for (int i = 0; i < t.grid_u; ++i)
    for (int j = 0; j < t.grid_v; ++j) {
      const double cu = (i + 0.5) / t.grid_u;
      const double cv = (j + 0.5) / t.grid_v;
      for (const auto& d : t.defects)
        if (cu >= d.u0 && cu <= d.u1 && cv >= d.v0 && cv <= d.v1) m.at(m.required, i, j) = std::max(m.at(m.required, i, j), d.required_force);
    }
  for (const auto& r : records) {
    if (!r.contact || r.force <= 0.0) continue;
    const auto [fu, fv] = r.foot;
    const int i0 = clamp_index((fu - t.halfwidth_u) * t.grid_u - 0.5, t.grid_u);
    const int i1 = clamp_index((fu + t.halfwidth_u) * t.grid_u + 0.5, t.grid_u);
    const int j0 = clamp_index((fv - t.halfwidth_v) * t.grid_v - 0.5, t.grid_v);
    const int j1 = clamp_index((fv + t.halfwidth_v) * t.grid_v + 0.5, t.grid_v);
    for (int i = i0; i <= i1; ++i) {
      const double cu = (i + 0.5) / t.grid_u;
      if (std::abs(cu - fu) > t.halfwidth_u) continue;
      for (int j = j0; j <= j1; ++j) {
        const double cv = (j + 0.5) / t.grid_v;
        if (std::abs(cv - fv) > t.halfwidth_v) continue;
        m.at(m.coverage, i, j) += r.force * dt;
        if (r.force >= m.at(m.required, i, j)) m.at(m.dose, i, j) += r.force * dt;
      }
    }
  }
  return m;
}

namespace {

Report polishing(const trace::Trace& tr, const scenario::Scenario& sc) {
  Report rep;
  rep.task = "polishing";
  const auto m = dose_map(tr.records, sc, tr.header.dt);
  json defects = json::array();
  for (const auto& d : sc.task.defects) {
    const double threshold = d.required_force * d.dwell;
    double min_dose = std::numeric_limits<double>::infinity();
    int cells = 0;
    for (int i = 0; i < m.grid_u; ++i)
      for (int j = 0; j < m.grid_v; ++j) {
        const double cu = (i + 0.5) / m.grid_u;
        const double cv = (j + 0.5) / m.grid_v;
        if (cu < d.u0 || cu > d.u1 || cv < d.v0 || cv > d.v1) continue;
        ++cells;
        min_dose = std::min(min_dose, m.dose[static_cast<std::size_t>(i * m.grid_v + j)]);
      }
    if (cells == 0) min_dose = 0.0;
    const bool cleared = cells > 0 && min_dose >= threshold;
    rep.success = rep.success && cleared;
    defects.push_back({{"u", {d.u0, d.u1}},
                       {"v", {d.v0, d.v1}},
                       {"required_force", d.required_force},
                       {"threshold", threshold},
                       {"min_dose", min_dose},
                       {"cells", cells},
                       {"cleared", cleared}});
  }
  int covered = 0;
  for (double c : m.coverage) covered += c > 0.0 ? 1 : 0;
  rep.details = {{"defects", defects},
                 {"covered_cells", covered},
                 {"total_cells", m.grid_u * m.grid_v}};
  return rep;
}

Report layup(const trace::Trace& tr, const scenario::Scenario& sc) {
  Report rep;
  rep.task = "layup";
  const auto& t = sc.task;
  const auto& surf = task_surface(sc);
  std::map<std::string, std::size_t> lane_of;
  for (std::size_t k = 0; k < t.lanes.size(); ++k) lane_of[t.lanes[k].segment] = k;
  const auto n = static_cast<std::size_t>(t.cells_per_lane);
  std::vector<std::vector<double>> last(t.lanes.size(), std::vector<double>(n, -1.0));
  std::vector<int> revisits(t.lanes.size(), 0);
  std::vector<bool> went_back(t.lanes.size(), false);
  for (const auto& r : tr.records) {
    const auto it = lane_of.find(r.segment);
    if (it == lane_of.end() || !r.contact || r.force < t.min_force) continue;
    const std::size_t lane = it->second;
    if (r.direction == dmp::Direction::backward) went_back[lane] = true;
    const double x = (r.foot.first - t.lane_u0) / (t.lane_u1 - t.lane_u0);
    if (x < 0.0 || x >= 1.0) continue;
    const auto cell = static_cast<std::size_t>(x * static_cast<double>(n));
    const double dev = (r.position - surf.point(r.foot.first, t.lanes[lane].v)).norm();
    if (last[lane][cell] >= 0.0) ++revisits[lane];
    last[lane][cell] = dev;
  }
  json lanes = json::array();
  bool crease = false;
  int uncovered = 0;
  for (std::size_t k = 0; k < t.lanes.size(); ++k) {
    double worst = 0.0;
    int creased = 0;
    int missing = 0;
    for (double d : last[k]) {
      if (d < 0.0) {
        ++missing;
        continue;
      }
      worst = std::max(worst, d);
      if (d > t.crease_bound) ++creased;
    }
    crease = crease || creased > 0;
    uncovered += missing;
    lanes.push_back({{"segment", t.lanes[k].segment},
                     {"max_deviation", worst},
                     {"creased_cells", creased},
                     {"uncovered_cells", missing},
                     {"backtracked", static_cast<bool>(went_back[k])}});
  }
  rep.success = !crease && uncovered == 0;
  rep.details = {{"crease", crease}, {"uncovered_cells", uncovered}, {"crease_bound", t.crease_bound}, {"lanes", lanes}};
  return rep;
}

}  // namespace

Report evaluate_outcome(const trace::Trace& trace, const scenario::Scenario& scenario) {
  Report rep;
  switch (scenario.task.kind) {
    case scenario::TaskKind::none:
      break;
    case scenario::TaskKind::insertion:
      rep = insertion(trace, scenario);
      break;
    case scenario::TaskKind::polishing:
      rep = polishing(trace, scenario);
      break;
    case scenario::TaskKind::layup:
      rep = layup(trace, scenario);
      break;
  }
  rep.partial = !trace.complete || !trace.footer.value("reached_end", true);
  return rep;
}

json report_to_json(const Report& r) {
  return {{"task", r.task}, {"success", r.success}, {"partial", r.partial}, {"details", r.details}};
}

}  // namespace csa::outcome
