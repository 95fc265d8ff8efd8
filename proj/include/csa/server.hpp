#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "csa/session.hpp"

namespace csa::server {

using io::json;

inline constexpr const char* kWireSchema = "csa-wire";
inline constexpr int kWireVersion = 1;

struct WireInput {
  double t_client = 0.0;
  Eigen::Vector3d u = Eigen::Vector3d::Zero();
  std::optional<double> scaling_override;
};

/// Parses an input message; returns the error text on failure.
std::optional<WireInput> parse_input(const std::string& body, std::string& error);
json input_message(const WireInput& in);
json state_message(const trace::Record& r, const session::Session& s);
/// Describes every message type and endpoint; served at /api/schema.
json wire_schema();

/// Latest-value input slot shared between network threads and the control
/// thread. Older or duplicate client timestamps are dropped; an input older
/// than stale_after seconds (server clock) reads as zero.
class Mailbox {
 public:
  explicit Mailbox(double stale_after = 0.25) : stale_after_(stale_after) {}
  /// Returns false when the message was dropped as late or duplicate.
  bool post(const WireInput& in, double now);
  /// Input for the tick starting at `now`; stale is true when a held input just expired.
  correction::UserInput take(double now, bool& stale);
  void clear();

 private:
  std::mutex mutex_;
  double stale_after_;
  std::optional<WireInput> latest_;
  double arrival_ = 0.0;
  std::optional<double> last_client_t_;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> record;
  std::optional<std::filesystem::path> static_dir;
  double stream_hz = 60.0;
  double stale_after = 0.25;
  double speed = 1.0;          // wall-clock pacing factor; 0 runs unpaced
  bool wait_for_client = false;  // start ticking on the first connection
  std::size_t history_capacity = 36000;
};

struct ServeSummary {
  long ticks = 0;
  bool reached_end = false;
  long stale_ticks = 0;
  session::TickTiming timing;
};

/// Live session: a control thread paced against the wall clock plus an HTTP
/// server publishing state snapshots and accepting corrections.
class LiveServer {
 public:
  LiveServer(const scenario::Scenario& scenario, ServeOptions options, const session::SessionOptions& session = {});
  ~LiveServer();

  /// Binds and starts both threads; returns the bound port. Throws ConfigError.
  int start();
  /// Blocks until the session has finished.
  ServeSummary wait();
  void stop();
  bool finished() const { return done_; }

 private:
  struct Impl;
  void control_loop();
  void publish(const trace::Record& r, bool force);

  ServeOptions options_;
  std::unique_ptr<session::Session> session_;
  std::unique_ptr<Impl> impl_;
  Mailbox mailbox_;
  std::thread control_;
  std::thread http_;
  std::atomic<bool> done_{false};
  std::atomic<bool> stop_{false};
  std::atomic<bool> client_seen_{false};
  std::atomic<int> streams_{0};

  std::mutex state_mutex_;
  std::condition_variable state_cv_;
  std::shared_ptr<const std::string> latest_;
  long seq_ = 0;
  std::deque<std::shared_ptr<const std::string>> history_;
  std::string end_message_;
  ServeSummary summary_;
};

}  // namespace csa::server
