#include "csa/session.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "csa/errors.hpp"

namespace csa::session {

Session::Session(scenario::Scenario scenario, const SessionOptions& options) : scenario_(std::move(scenario)) {
  dt_ = options.dt.value_or(scenario_.dt);
  if (!(dt_ >= 0.0005 && dt_ <= 0.01)) throw ConfigError("dt must lie in [0.0005, 0.01]");
  scenario::apply_injections(scenario_);
  plan_ = plan::compile_plan(scenario_);
  warnings_ = plan_.warnings;

  const auto& first = plan_.segments.front();
  const Eigen::VectorXd x0 = first.model->start_values();
  const bool hybrid = first.mode == scenario::SegmentMode::hybrid_surface;
  plant_ = plant::rest_at(plan::cartesian_point(plan_, first, x0), contact_surface(first),
                          hybrid ? std::pair{x0[0], x0[1]} : std::pair{0.5, 0.5});
  start_segment(0, nullptr);
}

const surface::BSplineSurface* Session::contact_surface(const plan::SegmentSpec& seg) const {
  if (const auto* e = plan_.surface_of(seg)) return e->surface.get();
  if (!scenario_.task.surface.empty()) {
    const auto it = plan_.surfaces.find(scenario_.task.surface);
    if (it != plan_.surfaces.end()) return it->second.surface.get();
  }
  if (plan_.surfaces.size() == 1) return plan_.surfaces.begin()->second.surface.get();
  return nullptr;
}

void Session::start_segment(std::size_t index, const Eigen::VectorXd* x0) {
  index_ = index;
  const auto& seg = plan_.segments[index];
  model_ = x0 ? plan::starting_at(*seg.model, *x0) : seg.model;
  dmp_ = dmp::initial_state(*model_);
  corr_ = correction::CorrectionState::zero(model_->channel_count(), scenario_.correction.k_c);
  rate_ = correction::RateState{};
  v_n_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model_->channel_count()));
  fresh_segment_ = true;
  if (seg.mode == scenario::SegmentMode::free_space) approach_seed_ = plant_.foot;
}

TickContext Session::context() const {
  TickContext c;
  c.tick = tick_;
  c.t = static_cast<double>(tick_) * dt_;
  c.segment_index = index_;
  c.segment = plan_.segments[index_].id;
  c.progress = record_.segment_index == index_ && tick_ > 0 ? record_.progress : 0.0;
  c.direction = rate_.direction;
  c.finished = &finished_segments_;
  return c;
}

trace::Header Session::header(const std::string& source) const {
  trace::Header h;
  h.dt = dt_;
  h.device_range = scenario_.device_range;
  h.source = source;
  h.scenario = scenario_.source;
  h.config_hash = trace::config_hash(h.scenario);
  return h;
}

const correction::CorrectionScaling& Session::active_scaling() const { return plan_.segments[index_].scaling; }

Eigen::VectorXd Session::nominal_direction(const plan::SegmentSpec& seg) {
  // Forward-sense nominal velocity; z flips sign in the backward variant.
  Eigen::VectorXd v = rate_.direction == dmp::Direction::forward ? dmp_.z : Eigen::VectorXd(-dmp_.z);
  const auto layout = seg.layout();
  for (std::size_t i = 0; i < layout.size(); ++i)
    if (!(seg.rate_includes_force || is_kinematic(layout[i].kind))) v[static_cast<Eigen::Index>(i)] = 0.0;
  const double n = v.norm();
  if (n > 1e-9) v_n_ = v / n;
  return v_n_;
}

const trace::Record& Session::tick(const correction::UserInput& raw) {
  if (finished_) throw RuntimeFault("session already finished");
  const auto& seg = plan_.segments[index_];
  const auto layout = seg.layout();
  const correction::UserInput in = correction::clamp_input(raw);
  const double override_factor = in.scaling_override.value_or(1.0);

  corr_ = correction::step_correction(corr_, seg.mapping.apply(in.u), dt_);
  correction::CorrectionScaling scaling = seg.scaling;
  scaling.max = seg.scaling.max * override_factor;
  const Eigen::VectorXd delta = correction::scaled_correction(corr_, scaling);

  const Eigen::VectorXd f_d = correction::correction_direction(corr_, scaling, layout, seg.rate_includes_force);
  const Eigen::VectorXd v_n = nominal_direction(seg);
  rate_ = correction::rate_heuristic(v_n.dot(f_d), seg.gamma, rate_, scenario_.correction.rate);

  if (rate_.switched) dmp_ = dmp::mirror_state(*model_, dmp_);
  bool segment_done = false;
  bool held = rate_.hold;
  if (!held) {
    try {
      const auto next = dmp::step(*model_, dmp_, rate_.tau, dt_, rate_.direction);
      if (rate_.direction == dmp::Direction::backward && next.s < std::exp(-model_->canonical.decay)) {
        held = true;  // backtracking stops at the segment start
      } else {
        dmp_ = next;
        if (rate_.direction == dmp::Direction::forward && dmp_.s < model_->end_phase()) segment_done = true;
      }
    } catch (const dmp::PhaseFrozen&) {
      held = true;
    }
  }
  if (!dmp_.x.allFinite()) throw RuntimeFault("non-finite nominal state in segment '" + seg.id + "'");

  const double forward_s =
      rate_.direction == dmp::Direction::forward ? dmp_.s : std::exp(-model_->canonical.decay) / dmp_.s;
  const StateVector x_n{layout, dmp_.x};

  correction::ValidationContext ctx;
  ctx.mode = seg.validation;
  const auto* own = plan_.surface_of(seg);
  ctx.surface = own ? own->surface.get() : nullptr;
  ctx.edge_margin = scenario_.correction.edge_margin;
  ctx.standoff_band = scenario_.correction.standoff_band;
  ctx.seed = approach_seed_;
  const auto validated = correction::saturate_validate(x_n, delta, ctx);
  if (seg.validation == correction::ValidationMode::approach) approach_seed_ = validated.report.foot;
  const StateVector x_cmd = correction::arbitrate(x_n, validated.correction);

  plant::PlantCommand cmd;
  const auto* surf = contact_surface(seg);
  const surface::SurfaceFrame* frame_ptr = nullptr;
  surface::SurfaceFrame frame;
  if (seg.mode == scenario::SegmentMode::hybrid_surface) {
    const auto& s = *own->surface;
    const auto [u, v] = surface::clamp_params(x_cmd.values[0], x_cmd.values[1], 0.0);
    cmd.mode = plant::CommandMode::hybrid;
    cmd.target = s.point(u, v);
    cmd.force = x_cmd.values[2];
    try {
      frame = surface::surface_frame(s, u, v);
      frame_ptr = &frame;
    } catch (const surface::DegenerateSurface&) {
    }
  } else {
    cmd.mode = plant::CommandMode::position;
    cmd.target = x_cmd.values.head<3>();
    if (surf != nullptr && seg.orientation.mode != orientation::Mode::prescribed) {
      try {
        frame = surface::surface_frame(*surf, plant_.foot.first, plant_.foot.second);
        frame_ptr = &frame;
      } catch (const surface::DegenerateSurface&) {
      }
    }
  }
  cmd.feedforward = fresh_segment_ ? Eigen::Vector3d::Zero() : Eigen::Vector3d((cmd.target - last_target_) / dt_);
  last_target_ = cmd.target;
  fresh_segment_ = false;
  const double progress = dmp::progress_from_phase(*model_, forward_s);
  cmd.orientation = orientation::orientation_at(seg.orientation, progress, frame_ptr, cmd.feedforward, dt_, orient_);
  plant_ = plant::plant_step(plant_, cmd, surf, scenario_.plant, dt_);
  if (!plant_.position.allFinite()) throw RuntimeFault("plant state diverged in segment '" + seg.id + "'");

  trace::Record& r = record_;
  r.tick = tick_;
  r.t = static_cast<double>(tick_) * dt_;
  r.segment = seg.id;
  r.segment_index = index_;
  r.s = dmp_.s;
  r.progress = progress;
  r.tau = std::isfinite(rate_.tau) ? std::optional<double>(rate_.tau) : std::nullopt;
  r.direction = rate_.direction;
  r.hold = held;
  r.x_n = x_n.values;
  r.dy = validated.correction;
  r.x_cmd = x_cmd.values;
  r.u = in.u;
  r.scaling_override = in.scaling_override;
  r.position = plant_.position;
  r.orientation = plant_.orientation;
  r.velocity = plant_.velocity;
  r.force = plant_.force;
  r.contact = plant_.contact;
  r.foot = plant_.foot;
  r.edge_clamped = validated.report.edge_clamped;
  r.standoff_scaled = validated.report.standoff_scaled;
  r.force_floored = validated.report.force_floored;
  r.input_stale = false;
  ++tick_;

  if (segment_done) {
    finished_segments_.insert(seg.id);
    if (index_ + 1 >= plan_.segments.size()) {
      finished_ = true;
    } else {
      const auto tr = plan::transition(plan_, index_, x_n.values, validated.correction);
      if (tr.warning) warnings_.push_back(tr.message);
      start_segment(index_ + 1, &tr.x0);
    }
  }
  return record_;
}

RunResult run(const scenario::Scenario& scenario, InputSource& input, const SessionOptions& options,
              const std::optional<std::filesystem::path>& record_path) {
  Session session(scenario, options);
  RunResult result;
  result.trace.header = session.header(input.kind());
  std::unique_ptr<trace::Writer> writer;
  if (record_path) writer = std::make_unique<trace::Writer>(*record_path, result.trace.header);

  const auto max_ticks = static_cast<long>(std::ceil(scenario.max_time / session.dt()));
  std::vector<double> durations;
  durations.reserve(static_cast<std::size_t>(std::min<long>(max_ticks, 1'000'000)));
  while (!session.finished() && session.tick_count() < max_ticks) {
    const auto ctx = session.context();
    const auto in = input.next(ctx);
    const auto t0 = std::chrono::steady_clock::now();
    const auto& rec = session.tick(in);
    const auto t1 = std::chrono::steady_clock::now();
    durations.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    result.trace.records.push_back(rec);
    if (writer) writer->write(rec);
  }
  result.reached_end = session.finished();
  result.warnings = session.warnings();
  result.trace.complete = true;
  result.trace.footer = {{"end", true},
                         {"ticks", session.tick_count()},
                         {"reached_end", result.reached_end},
                         {"warnings", result.warnings}};
  if (writer) writer->finish(result.trace.footer);

  if (!durations.empty()) {
    double sum = 0.0;
    for (double d : durations) {
      sum += d;
      result.timing.max_us = std::max(result.timing.max_us, d);
      if (d > session.dt() * 1e6) ++result.timing.overruns;
    }
    result.timing.mean_us = sum / static_cast<double>(durations.size());
    auto sorted = durations;
    const auto k = static_cast<std::size_t>(0.99 * static_cast<double>(sorted.size() - 1));
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
    result.timing.p99_us = sorted[k];
  }
  return result;
}

}  // namespace csa::session
