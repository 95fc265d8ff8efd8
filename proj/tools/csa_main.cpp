#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <iostream>

#include "csa/errors.hpp"
#include "csa/metrics.hpp"
#include "csa/server.hpp"
#include "csa/session.hpp"
#include "csa/tasks.hpp"

using namespace csa;

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kFault = 3;

server::LiveServer* g_live = nullptr;

void on_signal(int) {
  if (g_live) g_live->stop();
}

std::string fmt(double x, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, x);
  return buf;
}

void print_metrics(const metrics::Metrics& m) {
  std::cout << "t_input (corrective, d=" << fmt(m.d * 1000, 1) << " mm): " << fmt(m.t_input_corrective) << " s\n"
            << "t_input (motion, v=" << fmt(m.v_alpha, 3) << " m/s): " << fmt(m.t_input_motion) << " s\n"
            << "t_total: " << fmt(m.t_total) << " s (" << m.ticks << " ticks)\n"
            << "saturation: edge_clamped=" << m.edge_clamped << " standoff_scaled=" << m.standoff_scaled
            << " force_floored=" << m.force_floored << "\n"
            << "backward ticks: " << m.backward_ticks << "\n";
  if (m.partial) std::cout << "partial: trace is truncated\n";
  std::cout << "outcome: " << m.outcome.task << " " << (m.outcome.success ? "success" : "failure")
            << (m.outcome.partial ? " (partial)" : "") << "\n";
  if (!m.outcome.details.empty()) std::cout << m.outcome.details.dump(1) << "\n";
}

std::unique_ptr<session::InputSource> load_input(const std::string& path) {
  if (path.empty()) return std::make_unique<session::ZeroInput>();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string first;
  std::getline(in, first);
  // A trace starts with its one-line header; anything else is a user script.
  try {
    const auto head = io::json::parse(first);
    if (head.value("schema", std::string()) == trace::kSchema)
      return std::make_unique<session::ReplayInput>(trace::read_trace(path));
  } catch (const io::json::parse_error&) {
  }
  return std::make_unique<session::ScriptedUser>(session::load_user(path));
}

int cmd_run(const std::string& scenario_path, const std::string& user_path, const std::string& record,
            double dt, bool suppress, bool as_json) {
  auto sc = scenario::load_scenario(scenario_path);
  if (suppress) sc = scenario::suppressed(sc);
  auto input = load_input(user_path);
  session::SessionOptions opts;
  if (dt > 0.0) opts.dt = dt;
  std::optional<std::filesystem::path> rec;
  if (!record.empty()) rec = record;
  const auto res = session::run(sc, *input, opts, rec);
  const auto m = metrics::compute_metrics(res.trace);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
  if (as_json) {
    auto j = metrics::metrics_to_json(m);
    j["timing_us"] = {{"mean", res.timing.mean_us}, {"p99", res.timing.p99_us}, {"max", res.timing.max_us}, {"overruns", res.timing.overruns}};
    std::cout << j.dump(1) << "\n";
  } else {
    print_metrics(m);
    std::cout << "tick time: mean " << fmt(res.timing.mean_us, 1) << " us, p99 " << fmt(res.timing.p99_us, 1)
              << " us, max " << fmt(res.timing.max_us, 1) << " us, over dt " << res.timing.overruns << "\n";
  }
  return kOk;
}

int cmd_serve(const std::string& scenario_path, int port, const std::string& record, const std::string& static_dir,
              double dt, double speed, bool wait_client) {
  const auto sc = scenario::load_scenario(scenario_path);
  server::ServeOptions o;
  o.port = port;
  if (!record.empty()) o.record = record;
  if (!static_dir.empty()) o.static_dir = static_dir;
  o.speed = speed;
  o.wait_for_client = wait_client;
  session::SessionOptions so;
  if (dt > 0.0) so.dt = dt;
  server::LiveServer live(sc, o, so);
  g_live = &live;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const int bound = live.start();
  std::cout << "serving " << sc.name << " on http://" << o.host << ":" << bound << "/" << std::endl;
  const auto s = live.wait();
  live.stop();
  g_live = nullptr;
  std::cout << "session ended after " << s.ticks << " ticks" << (s.reached_end ? "" : " (stopped early)")
            << ", stale input ticks " << s.stale_ticks << ", tick mean " << fmt(s.timing.mean_us, 1) << " us\n";
  return kOk;
}

int cmd_metrics(const std::string& path, double d, double v_alpha, bool as_json) {
  const auto tr = trace::read_trace(path);
  const auto m = metrics::compute_metrics(tr, d, v_alpha);
  if (as_json)
    std::cout << metrics::metrics_to_json(m).dump(1) << "\n";
  else
    print_metrics(m);
  return kOk;
}

int cmd_fit(const std::string& demo_path, const std::string& out, int bases) {
  const auto demo = io::load_demonstration(demo_path);
  dmp::FitOptions o;
  o.basis_count = bases;
  dmp::DmpSegmentModel model;
  try {
    model = dmp::fit_segment(demo, o);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("fit: ") + e.what());
  }
  io::write_json_file(out, io::model_to_json(model));
  double worst = 0.0;
  const auto roll = dmp::rollout(model, 1.0, demo.dt);
  for (std::size_t c = 0; c < model.channel_count(); ++c) {
    const auto col = demo.samples.col(static_cast<Eigen::Index>(c));
    const double range = std::max(col.maxCoeff() - col.minCoeff(), 1e-12);
    const auto n = std::min<Eigen::Index>(col.size(), roll.positions.rows());
    for (Eigen::Index k = 0; k < n; ++k)
      worst = std::max(worst, std::abs(roll.positions(k, static_cast<Eigen::Index>(c)) - col[k]) / range);
  }
  std::cout << "fitted " << model.channel_count() << " channels, " << model.basis.size() << " bases, T = "
            << fmt(model.duration) << " s; max rollout error " << fmt(100.0 * worst, 2) << "% of range\n";
  return kOk;
}

int cmd_make_tasks(const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& t : tasks::all()) {
    io::write_json_file(std::filesystem::path(dir) / (t.name + ".json"), t.scenario);
    io::write_json_file(std::filesystem::path(dir) / (t.name + "_user.json"), t.user);
    std::cout << "wrote " << t.name << ".json and " << t.name << "_user.json\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corrective shared autonomy simulator"};
  app.require_subcommand(1);

  std::string scenario_path, user_path, record, static_dir, trace_path, demo, out, dir;
  double dt = 0.0, speed = 1.0, d = 0.005, v_alpha = 0.01;
  int port = 8080, bases = 20;
  bool suppress = false, as_json = false, wait_client = false;

  auto* run = app.add_subcommand("run", "Headless session with a scripted or replayed user");
  run->add_option("--scenario", scenario_path, "Scenario file")->required();
  run->add_option("--user", user_path, "User script (csa-user) or a trace to replay");
  run->add_option("--record", record, "Trace output path");
  run->add_option("--dt", dt, "Control time step override [s]");
  run->add_flag("--suppress", suppress, "Zero every correction scaling");
  run->add_flag("--json", as_json, "Print metrics as JSON");

  auto* serve = app.add_subcommand("serve", "Live session for the operator UI");
  serve->add_option("--scenario", scenario_path, "Scenario file")->required();
  serve->add_option("--port", port, "TCP port (0 picks one)");
  serve->add_option("--record", record, "Trace output path");
  serve->add_option("--static", static_dir, "Directory served at /");
  serve->add_option("--dt", dt, "Control time step override [s]");
  serve->add_option("--speed", speed, "Wall-clock pacing factor (0 = unpaced)");
  serve->add_flag("--wait-client", wait_client, "Start ticking on the first connection");

  auto* met = app.add_subcommand("metrics", "Input time, outcome and saturation counts of a trace");
  met->add_option("trace", trace_path, "Trace file")->required();
  met->add_option("--d", d, "Displacement threshold [m]");
  met->add_option("--v-alpha", v_alpha, "Motion threshold [m/s]");
  met->add_flag("--json", as_json, "Print as JSON");

  auto* fit = app.add_subcommand("fit", "Fit a segment model from a demonstration");
  fit->add_option("--demo", demo, "Demonstration (csa-demo JSON or CSV)")->required();
  fit->add_option("--out", out, "Model output path")->required();
  fit->add_option("--bases", bases, "Number of basis functions");

  auto* mk = app.add_subcommand("make-tasks", "Write the three task scenarios and their scripted users");
  mk->add_option("--out", dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*run) return cmd_run(scenario_path, user_path, record, dt, suppress, as_json);
    if (*serve) return cmd_serve(scenario_path, port, record, static_dir, dt, speed, wait_client);
    if (*met) return cmd_metrics(trace_path, d, v_alpha, as_json);
    if (*fit) return cmd_fit(demo, out, bases);
    if (*mk) return cmd_make_tasks(dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime fault: " << e.what() << "\n";
    return kFault;
  }
  return kOk;
}
