#include "csa/input.hpp"

#include <algorithm>

#include "csa/errors.hpp"

namespace csa::session {

correction::UserInput ZeroInput::next(const TickContext& ctx) {
  correction::UserInput in;
  in.timestamp = ctx.t;
  return in;
}

ReplayInput::ReplayInput(const trace::Trace& trace) {
  for (const auto& r : trace.records) {
    correction::UserInput in;
    in.u = r.u;
    in.timestamp = r.t;
    in.scaling_override = r.scaling_override;
    inputs_.push_back(in);
  }
}

correction::UserInput ReplayInput::next(const TickContext& ctx) {
  if (ctx.tick < 0 || static_cast<std::size_t>(ctx.tick) >= inputs_.size()) return ZeroInput().next(ctx);
  return inputs_[static_cast<std::size_t>(ctx.tick)];
}

bool Trigger::matches(const TickContext& ctx) const {
  if (time_ge && !(ctx.t >= *time_ge)) return false;
  if (time_lt && !(ctx.t < *time_lt)) return false;
  if (!segment.empty() && ctx.segment != segment) return false;
  if (progress_ge && !(ctx.progress >= *progress_ge)) return false;
  if (progress_le && !(ctx.progress <= *progress_le)) return false;
  if (direction && ctx.direction != *direction) return false;
  if (!segment_end.empty() && (ctx.finished == nullptr || ctx.finished->count(segment_end) == 0)) return false;
  return true;
}

ScriptedUser::ScriptedUser(std::vector<UserEvent> events)
    : events_(std::move(events)), phase_(events_.size(), Phase::waiting) {}

correction::UserInput ScriptedUser::next(const TickContext& ctx) {
  correction::UserInput in;
  in.timestamp = ctx.t;
  for (std::size_t k = 0; k < events_.size(); ++k) {
    const auto& e = events_[k];
    if (phase_[k] == Phase::waiting && e.start.matches(ctx)) phase_[k] = Phase::active;
    if (phase_[k] == Phase::active && e.stop && e.stop->matches(ctx)) phase_[k] = Phase::done;
    if (phase_[k] != Phase::active) continue;
    in.u += e.u;
    if (e.scaling_override) in.scaling_override = *e.scaling_override;
  }
  return correction::clamp_input(in);
}

namespace {

Trigger parse_trigger(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": trigger must be an object");
  static const std::set<std::string> known = {"time_ge",     "time_lt",   "segment",    "progress_ge",
                                              "progress_le", "direction", "segment_end"};
  for (const auto& [key, value] : j.items())
    if (known.count(key) == 0) throw ConfigError(where + ": unknown trigger field '" + key + "'");
  Trigger t;
  if (j.contains("time_ge")) t.time_ge = j.at("time_ge").get<double>();
  if (j.contains("time_lt")) t.time_lt = j.at("time_lt").get<double>();
  t.segment = j.value("segment", std::string());
  if (j.contains("progress_ge")) t.progress_ge = j.at("progress_ge").get<double>();
  if (j.contains("progress_le")) t.progress_le = j.at("progress_le").get<double>();
  if (j.contains("direction")) {
    const auto d = j.at("direction").get<std::string>();
    if (d != "forward" && d != "backward") throw ConfigError(where + ": direction must be forward or backward");
    t.direction = d == "forward" ? dmp::Direction::forward : dmp::Direction::backward;
  }
  t.segment_end = j.value("segment_end", std::string());
  return t;
}

json trigger_to_json(const Trigger& t) {
  json j = json::object();
  if (t.time_ge) j["time_ge"] = *t.time_ge;
  if (t.time_lt) j["time_lt"] = *t.time_lt;
  if (!t.segment.empty()) j["segment"] = t.segment;
  if (t.progress_ge) j["progress_ge"] = *t.progress_ge;
  if (t.progress_le) j["progress_le"] = *t.progress_le;
  if (t.direction) j["direction"] = dmp::to_string(*t.direction);
  if (!t.segment_end.empty()) j["segment_end"] = t.segment_end;
  return j;
}

}  // namespace

ScriptedUser parse_user(const json& doc) {
  io::check_schema(doc, "csa-user", 1);
  std::vector<UserEvent> events;
  try {
    const auto& list = doc.at("events");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const auto& j = list[k];
      UserEvent e;
      e.name = j.value("name", "event_" + std::to_string(k));
      const std::string where = "user event '" + e.name + "'";
      const auto u = io::vector_from_json(j.at("u"));
      if (u.size() != 3) throw ConfigError(where + ": u needs 3 values");
      e.u = u;
      if (j.contains("override")) e.scaling_override = j.at("override").get<double>();
      e.start = parse_trigger(j.at("start"), where + " start");
      if (j.contains("stop")) e.stop = parse_trigger(j.at("stop"), where + " stop");
      events.push_back(e);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("user: ") + e.what());
  }
  return ScriptedUser(std::move(events));
}

ScriptedUser load_user(const std::filesystem::path& path) { return parse_user(io::read_json_file(path)); }

json user_to_json(const std::vector<UserEvent>& events) {
  json list = json::array();
  for (const auto& e : events) {
    json j = {{"name", e.name}, {"u", io::vector_to_json(e.u)}, {"start", trigger_to_json(e.start)}};
    if (e.scaling_override) j["override"] = *e.scaling_override;
    if (e.stop) j["stop"] = trigger_to_json(*e.stop);
    list.push_back(j);
  }
  return {{"schema", "csa-user"}, {"version", 1}, {"events", list}};
}

}  // namespace csa::session
