#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "csa/correction.hpp"
#include "csa/json_io.hpp"
#include "csa/trace.hpp"

namespace csa::session {

using io::json;

/// What an input source may look at before a tick runs.
struct TickContext {
  long tick = 0;
  double t = 0.0;
  std::size_t segment_index = 0;
  std::string segment;
  double progress = 0.0;
  dmp::Direction direction = dmp::Direction::forward;
  const std::set<std::string>* finished = nullptr;  // ids of completed segments
};

class InputSource {
 public:
  virtual ~InputSource() = default;
  virtual correction::UserInput next(const TickContext& ctx) = 0;
  virtual std::string kind() const = 0;
};

class ZeroInput : public InputSource {
 public:
  correction::UserInput next(const TickContext& ctx) override;
  std::string kind() const override { return "none"; }
};

/// Feeds back the inputs recorded in a trace, tick by tick.
class ReplayInput : public InputSource {
 public:
  explicit ReplayInput(const trace::Trace& trace);
  correction::UserInput next(const TickContext& ctx) override;
  std::string kind() const override { return "replay"; }

 private:
  std::vector<correction::UserInput> inputs_;
};

/// Condition on the session context; every present field must hold.
struct Trigger {
  std::optional<double> time_ge;
  std::optional<double> time_lt;
  std::string segment;
  std::optional<double> progress_ge;
  std::optional<double> progress_le;
  std::optional<dmp::Direction> direction;
  std::string segment_end;  // holds once that segment has completed

  bool matches(const TickContext& ctx) const;
};

struct UserEvent {
  std::string name;
  Eigen::Vector3d u = Eigen::Vector3d::Zero();
  std::optional<double> scaling_override;
  Trigger start;
  std::optional<Trigger> stop;  // absent: active until the session ends
};

/// Deterministic stand-in for the operator: each event switches on once its
/// start trigger matches and off once its stop trigger matches. Active
/// events add up; the sum is clamped to [-1, 1] per axis.
class ScriptedUser : public InputSource {
 public:
  explicit ScriptedUser(std::vector<UserEvent> events);
  correction::UserInput next(const TickContext& ctx) override;
  std::string kind() const override { return "scripted"; }
  const std::vector<UserEvent>& events() const { return events_; }

 private:
  enum class Phase { waiting, active, done };
  std::vector<UserEvent> events_;
  std::vector<Phase> phase_;
};

/// "csa-user" v1 document. Throws ConfigError.
ScriptedUser parse_user(const json& doc);
ScriptedUser load_user(const std::filesystem::path& path);
json user_to_json(const std::vector<UserEvent>& events);

}  // namespace csa::session
