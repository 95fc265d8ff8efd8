#include "csa/server.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>

#include "csa/errors.hpp"

namespace csa::server {

namespace {

double wall_seconds() {
  using clock = std::chrono::steady_clock;
  static const auto origin = clock::now();
  return std::chrono::duration<double>(clock::now() - origin).count();
}

json error_frame(const std::string& message) {
  return {{"schema", kWireSchema}, {"version", kWireVersion}, {"type", "error"}, {"message", message}};
}

}  // namespace

std::optional<WireInput> parse_input(const std::string& body, std::string& error) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error&) {
    error = "input is not valid JSON";
    return std::nullopt;
  }
  if (!j.is_object() || j.value("schema", std::string()) != kWireSchema) {
    error = "input must be a csa-wire message";
    return std::nullopt;
  }
  if (j.value("version", -1) != kWireVersion) {
    error = "unsupported wire version";
    return std::nullopt;
  }
  if (j.value("type", std::string()) != "input") {
    error = "expected an input message";
    return std::nullopt;
  }
  WireInput in;
  if (!j.contains("t_client") || !j.at("t_client").is_number()) {
    error = "input needs a numeric t_client";
    return std::nullopt;
  }
  in.t_client = j.at("t_client").get<double>();
  const auto& u = j.value("u", json());
  if (!u.is_array() || u.size() != 3 || !std::all_of(u.begin(), u.end(), [](const json& x) { return x.is_number(); })) {
    error = "input needs u as three numbers";
    return std::nullopt;
  }
  in.u = {u[0].get<double>(), u[1].get<double>(), u[2].get<double>()};
  if (j.contains("override") && !j.at("override").is_null()) {
    if (!j.at("override").is_number()) {
      error = "override must be a number";
      return std::nullopt;
    }
    in.scaling_override = j.at("override").get<double>();
  }
  return in;
}

json input_message(const WireInput& in) {
  json j = {{"schema", kWireSchema},
            {"version", kWireVersion},
            {"type", "input"},
            {"t_client", in.t_client},
            {"u", {in.u.x(), in.u.y(), in.u.z()}}};
  if (in.scaling_override) j["override"] = *in.scaling_override;
  return j;
}

json state_message(const trace::Record& r, const session::Session& s) {
  json j = trace::record_to_json(r);
  const auto& seg = s.plan().segments[r.segment_index];
  json names = json::array();
  for (const auto& c : seg.layout()) names.push_back(c.name);
  json mapping = json::array();
  for (Eigen::Index i = 0; i < seg.mapping.matrix.rows(); ++i)
    mapping.push_back({seg.mapping.matrix(i, 0), seg.mapping.matrix(i, 1), seg.mapping.matrix(i, 2)});
  j["schema"] = kWireSchema;
  j["version"] = kWireVersion;
  j["type"] = "state";
  j["mode"] = scenario::to_string(seg.mode);
  j["scaling"] = io::vector_to_json(seg.scaling.max);
  j["correction_frame"] = {{"channels", names}, {"device_to_channel", mapping}};
  return j;
}

json wire_schema() {
  return {{"schema", kWireSchema},
          {"version", kWireVersion},
          {"framing", "one JSON object per line (application/x-ndjson)"},
          {"messages",
           {{"hello", {{"fields", {"scenario", "dt", "segments", "stream_hz"}}}},
            {"state",
             {{"fields",
               {"tick", "t", "segment", "segment_index", "s", "progress", "tau", "direction", "hold", "x_n", "dy",
                "x_cmd", "u", "position", "orientation", "velocity", "force", "contact", "foot", "saturation", "mode",
                "scaling", "correction_frame", "input_stale"}}}},
            {"input", {{"fields", {"t_client", "u", "override"}}, {"required", {"t_client", "u"}}}},
            {"ack", {{"fields", {"accepted"}}}},
            {"error", {{"fields", {"message"}}}},
            {"end", {{"fields", {"ticks", "reached_end"}}}}}},
          {"endpoints",
           {{"GET /api/schema", "this document"},
            {"GET /api/state", "latest state message"},
            {"GET /api/stream", "hello, then state messages at stream_hz, then end"},
            {"GET /api/history", "published state messages as an array (?since=tick)"},
            {"POST /api/input", "input message; answered with ack or error"}}}};
}

bool Mailbox::post(const WireInput& in, double now) {
  std::lock_guard lock(mutex_);
  if (last_client_t_ && !(in.t_client > *last_client_t_)) return false;
  last_client_t_ = in.t_client;
  latest_ = in;
  arrival_ = now;
  return true;
}

correction::UserInput Mailbox::take(double now, bool& stale) {
  std::lock_guard lock(mutex_);
  stale = false;
  correction::UserInput out;
  out.timestamp = now;
  if (!latest_) return out;
  if (now - arrival_ > stale_after_) {
    stale = !latest_->u.isZero(0.0);
    latest_.reset();
    last_client_t_.reset();
    return out;
  }
  out.u = latest_->u;
  out.scaling_override = latest_->scaling_override;
  return out;
}

void Mailbox::clear() {
  std::lock_guard lock(mutex_);
  latest_.reset();
  last_client_t_.reset();
}

struct LiveServer::Impl {
  httplib::Server http;
};

LiveServer::LiveServer(const scenario::Scenario& scenario, ServeOptions options, const session::SessionOptions& so)
    : options_(std::move(options)),
      session_(std::make_unique<session::Session>(scenario, so)),
      impl_(std::make_unique<Impl>()),
      mailbox_(options_.stale_after) {
  if (!(options_.stream_hz > 0.0)) throw ConfigError("stream rate must be > 0");
}

LiveServer::~LiveServer() { stop(); }

void LiveServer::publish(const trace::Record& r, bool force) {
  const long every = std::max<long>(1, std::lround(1.0 / (options_.stream_hz * session_->dt())));
  if (!force && r.tick % every != 0) return;
  auto msg = state_message(r, *session_);
  if (r.input_stale) msg["input_stale"] = true;
  auto text = std::make_shared<const std::string>(msg.dump());
  {
    std::lock_guard lock(state_mutex_);
    latest_ = text;
    ++seq_;
    history_.push_back(text);
    while (history_.size() > options_.history_capacity) history_.pop_front();
  }
  state_cv_.notify_all();
}

int LiveServer::start() {
  auto& svr = impl_->http;
  if (options_.static_dir) {
    if (!svr.set_mount_point("/", options_.static_dir->string()))
      throw ConfigError("static directory " + options_.static_dir->string() + " does not exist");
  }
  svr.Get("/api/schema", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(wire_schema().dump(), "application/json");
  });
  svr.Get("/api/state", [this](const httplib::Request&, httplib::Response& res) {
    std::shared_ptr<const std::string> s;
    {
      std::lock_guard lock(state_mutex_);
      s = latest_;
    }
    if (!s) {
      res.status = 503;
      res.set_content(error_frame("no state published yet").dump(), "application/json");
      return;
    }
    res.set_content(*s, "application/json");
  });
  svr.Get("/api/history", [this](const httplib::Request& req, httplib::Response& res) {
    long since = -1;
    if (req.has_param("since")) {
      try {
        since = std::stol(req.get_param_value("since"));
      } catch (const std::exception&) {
        res.status = 400;
        res.set_content(error_frame("since must be an integer tick").dump(), "application/json");
        return;
      }
    }
    std::string body = "[";
    {
      std::lock_guard lock(state_mutex_);
      bool first = true;
      for (const auto& s : history_) {
        if (since >= 0 && json::parse(*s).value("tick", -1L) <= since) continue;
        if (!first) body += ',';
        body += *s;
        first = false;
      }
    }
    body += "]";
    res.set_content(body, "application/json");
  });
  svr.Post("/api/input", [this](const httplib::Request& req, httplib::Response& res) {
    client_seen_ = true;
    std::string err;
    const auto in = parse_input(req.body, err);
    if (!in) {
      res.status = 400;
      res.set_content(error_frame(err).dump(), "application/json");
      return;
    }
    const bool accepted = mailbox_.post(*in, wall_seconds());
    res.set_content(json({{"schema", kWireSchema}, {"version", kWireVersion}, {"type", "ack"}, {"accepted", accepted}})
                        .dump(),
                    "application/json");
  });
  svr.Get("/api/stream", [this](const httplib::Request&, httplib::Response& res) {
    client_seen_ = true;
    ++streams_;
    auto last = std::make_shared<long>(-1);
    auto hello_sent = std::make_shared<bool>(false);
    res.set_chunked_content_provider(
        "application/x-ndjson",
        [this, last, hello_sent](std::size_t, httplib::DataSink& sink) {
          if (!*hello_sent) {
            json segs = json::array();
            for (const auto& s : session_->plan().segments) segs.push_back(s.id);
            const auto hello = json({{"schema", kWireSchema},
                                     {"version", kWireVersion},
                                     {"type", "hello"},
                                     {"scenario", session_->scenario().name},
                                     {"dt", session_->dt()},
                                     {"segments", segs},
                                     {"stream_hz", options_.stream_hz}})
                                   .dump() +
                               "\n";
            *hello_sent = true;
            return sink.write(hello.data(), hello.size());
          }
          std::shared_ptr<const std::string> msg;
          std::string end;
          {
            std::unique_lock lock(state_mutex_);
            state_cv_.wait_for(lock, std::chrono::milliseconds(100),
                               [&] { return seq_ != *last || done_ || stop_; });
            if (seq_ != *last && latest_) {
              msg = latest_;
              *last = seq_;
            } else if (done_ || stop_) {
              end = end_message_;
            }
          }
          if (msg) {
            const std::string line = *msg + "\n";
            return sink.write(line.data(), line.size());
          }
          if (!end.empty() || stop_) {
            const std::string line = end + "\n";
            if (!end.empty()) sink.write(line.data(), line.size());
            sink.done();
          }
          return true;
        },
        [this](bool) {
          // Losing the stream counts as a disconnect: drop any held input.
          if (--streams_ == 0) mailbox_.clear();
        });
  });

  const int port = options_.port == 0 ? svr.bind_to_any_port(options_.host) : (svr.bind_to_port(options_.host, options_.port) ? options_.port : -1);
  if (port < 0) throw ConfigError("cannot bind " + options_.host + ":" + std::to_string(options_.port));
  http_ = std::thread([this] { impl_->http.listen_after_bind(); });
  control_ = std::thread([this] { control_loop(); });
  return port;
}

void LiveServer::control_loop() {
  using clock = std::chrono::steady_clock;
  std::unique_ptr<trace::Writer> writer;
  try {
    if (options_.record) writer = std::make_unique<trace::Writer>(*options_.record, session_->header("live"));
  } catch (const std::exception&) {
    done_ = true;
    state_cv_.notify_all();
    return;
  }
  while (options_.wait_for_client && !client_seen_ && !stop_) std::this_thread::sleep_for(std::chrono::milliseconds(10));

  const auto max_ticks = static_cast<long>(std::ceil(session_->scenario().max_time / session_->dt()));
  const auto t0 = clock::now();
  std::vector<double> durations;
  while (!stop_ && !session_->finished() && session_->tick_count() < max_ticks) {
    if (options_.speed > 0.0) {
      const auto due = t0 + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(
                                static_cast<double>(session_->tick_count()) * session_->dt() / options_.speed));
      std::this_thread::sleep_until(due);
    }
    bool stale = false;
    const auto in = mailbox_.take(wall_seconds(), stale);
    const auto a = clock::now();
    auto rec = session_->tick(in);
    durations.push_back(std::chrono::duration<double, std::micro>(clock::now() - a).count());
    rec.input_stale = stale;
    if (stale) ++summary_.stale_ticks;
    if (writer) writer->write(rec);
    publish(rec, session_->finished());
  }
  summary_.ticks = session_->tick_count();
  summary_.reached_end = session_->finished();
  for (double d : durations) {
    summary_.timing.mean_us += d / static_cast<double>(durations.size());
    summary_.timing.max_us = std::max(summary_.timing.max_us, d);
    if (d > session_->dt() * 1e6) ++summary_.timing.overruns;
  }
  if (writer)
    writer->finish({{"ticks", summary_.ticks}, {"reached_end", summary_.reached_end}, {"warnings", session_->warnings()}});
  {
    std::lock_guard lock(state_mutex_);
    end_message_ = json({{"schema", kWireSchema},
                         {"version", kWireVersion},
                         {"type", "end"},
                         {"ticks", summary_.ticks},
                         {"reached_end", summary_.reached_end}})
                       .dump();
  }
  done_ = true;
  state_cv_.notify_all();
}

ServeSummary LiveServer::wait() {
  if (control_.joinable()) control_.join();
  return summary_;
}

void LiveServer::stop() {
  stop_ = true;
  state_cv_.notify_all();
  if (control_.joinable()) control_.join();
  impl_->http.stop();
  if (http_.joinable()) http_.join();
}

}  // namespace csa::server
