#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "csa/correction.hpp"
#include "csa/dmp.hpp"
#include "csa/errors.hpp"
#include "csa/json_io.hpp"
#include "csa/metrics.hpp"
#include "csa/scenario.hpp"
#include "csa/session.hpp"
#include "csa/surface.hpp"
#include "csa/tasks.hpp"
#include "csa/trace.hpp"

namespace py = pybind11;
using namespace csa;
using io::json;

namespace {

bool is_path(const py::handle& obj) {
  return py::isinstance<py::str>(obj) || py::hasattr(obj, "__fspath__");
}

std::filesystem::path as_path(const py::handle& obj) {
  return py::str(py::module_::import("os").attr("fspath")(obj)).cast<std::string>();
}

// Python objects cross as JSON text; documents are small next to the work done with them.
json to_json(const py::handle& obj) {
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return json::parse(text);
}

py::object from_json(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json document(const py::handle& obj) { return is_path(obj) ? io::read_json_file(as_path(obj)) : to_json(obj); }

scenario::Scenario load_scenario(const py::handle& obj) {
  if (is_path(obj)) return scenario::load_scenario(as_path(obj));
  return scenario::parse_scenario(to_json(obj));
}

std::unique_ptr<session::InputSource> load_input(const py::handle& obj) {
  if (obj.is_none()) return std::make_unique<session::ZeroInput>();
  const json doc = is_path(obj) ? json() : to_json(obj);
  if (is_path(obj)) {
    const auto path = as_path(obj);
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    if (json::accept(first) && json::parse(first).value("schema", std::string()) == trace::kSchema)
      return std::make_unique<session::ReplayInput>(trace::read_trace(path));
    return std::make_unique<session::ScriptedUser>(session::load_user(path));
  }
  return std::make_unique<session::ScriptedUser>(session::parse_user(doc));
}

dmp::Demonstration make_demo(const Eigen::MatrixXd& samples, double dt, std::vector<std::string> names,
                             std::vector<std::string> kinds) {
  dmp::Demonstration d;
  d.dt = dt;
  d.samples = samples;
  const auto n = static_cast<std::size_t>(samples.cols());
  if (names.empty())
    for (std::size_t c = 0; c < n; ++c) names.push_back("x" + std::to_string(c));
  if (kinds.empty()) kinds.assign(n, "position");
  if (names.size() != n || kinds.size() != n) throw ConfigError("names and kinds need one entry per column");
  for (std::size_t c = 0; c < n; ++c) {
    const auto kind = channel_kind_from_string(kinds[c]);
    d.channels.push_back({names[c], kind, kind == ChannelKind::force ? "N" : "m"});
  }
  return d;
}

py::dict rollout_dict(const dmp::Rollout& r) {
  py::dict out;
  out["time"] = py::array_t<double>(static_cast<py::ssize_t>(r.time.size()), r.time.data());
  out["phase"] = py::array_t<double>(static_cast<py::ssize_t>(r.phase.size()), r.phase.data());
  out["positions"] = r.positions;
  return out;
}

py::dict trace_dict(const trace::Trace& tr) {
  py::dict out;
  out["header"] = from_json(trace::header_to_json(tr.header));
  json records = json::array();
  for (const auto& r : tr.records) records.push_back(trace::record_to_json(r));
  out["records"] = from_json(records);
  out["complete"] = tr.complete;
  out["footer"] = from_json(tr.footer);
  return out;
}

surface::SampleGrid sample_grid(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw ConfigError("samples must have shape (rows, cols, 3)");
  const auto v = a.unchecked<3>();
  surface::SampleGrid g(static_cast<std::size_t>(v.shape(0)), std::vector<Eigen::Vector3d>(static_cast<std::size_t>(v.shape(1))));
  for (py::ssize_t i = 0; i < v.shape(0); ++i)
    for (py::ssize_t j = 0; j < v.shape(1); ++j)
      g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = {v(i, j, 0), v(i, j, 1), v(i, j, 2)};
  return g;
}

}  // namespace

PYBIND11_MODULE(_csa, m) {
  m.doc() = "Movement primitives, surface geometry, corrections and headless sessions.";

  auto config_error = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<RuntimeFault>(m, "RuntimeFault", PyExc_RuntimeError);
  (void)config_error;

  m.def(
      "load_demonstration",
      [](const std::filesystem::path& path) {
        const auto d = io::load_demonstration(path);
        std::vector<std::string> names;
        for (const auto& c : d.channels) names.push_back(c.name);
        return py::make_tuple(d.samples, d.dt, names);
      },
      py::arg("path"), "Reads a csa-demo JSON or CSV file: (samples, dt, channel names).");

  m.def(
      "fit",
      [](py::object demo, std::optional<double> dt, std::vector<std::string> names, std::vector<std::string> kinds,
         int basis_count) {
        dmp::Demonstration d;
        if (is_path(demo)) {
          d = io::load_demonstration(as_path(demo));
        } else {
          if (!dt) throw ConfigError("dt is required when fitting an array");
          d = make_demo(demo.cast<Eigen::MatrixXd>(), *dt, std::move(names), std::move(kinds));
        }
        dmp::FitOptions o;
        o.basis_count = basis_count;
        try {
          return from_json(io::model_to_json(dmp::fit_segment(d, o)));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(std::string("fit: ") + e.what());
        }
      },
      py::arg("demo"), py::arg("dt") = py::none(), py::arg("names") = std::vector<std::string>{},
      py::arg("kinds") = std::vector<std::string>{}, py::arg("basis_count") = 20,
      "Fits forward and backward primitives; demo is a file path or an (N, channels) array.");

  m.def(
      "rollout",
      [](py::object model, double tau, double dt, bool backward) {
        const auto mdl = io::model_from_json(document(model));
        dmp::RolloutOptions o;
        o.direction = backward ? dmp::Direction::backward : dmp::Direction::forward;
        return rollout_dict(dmp::rollout(mdl, backward ? -std::abs(tau) : tau, dt, o));
      },
      py::arg("model"), py::arg("tau") = 1.0, py::arg("dt") = 0.001, py::arg("backward") = false);

  m.def(
      "step_correction",
      [](const Eigen::VectorXd& dy, const Eigen::VectorXd& rate, const Eigen::VectorXd& u, double k_c, double dt) {
        correction::CorrectionState s = correction::CorrectionState::zero(static_cast<std::size_t>(dy.size()), k_c);
        if (rate.size() != dy.size()) throw ConfigError("dy and rate differ in size");
        s.dy = dy;
        s.rate = rate;
        try {
          const auto next = correction::step_correction(s, u, dt);
          return py::make_tuple(next.dy, next.rate);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
      },
      py::arg("dy"), py::arg("rate"), py::arg("u"), py::arg("k_c") = 100.0, py::arg("dt") = 0.001,
      "One exact step of the critically damped correction dynamics.");

  m.def(
      "execution_time_constant",
      [](double v_dot_f, double gamma) -> std::optional<double> {
        const auto tv = correction::execution_time_constant(v_dot_f, gamma);
        if (tv.singular) return std::nullopt;
        return tv.tau;
      },
      py::arg("v_dot_f"), py::arg("gamma"), "tau for the given alignment and gain; None where the phase holds.");

  py::class_<surface::BSplineSurface>(m, "Surface")
      .def(py::init([](py::object doc) { return io::surface_from_json(document(doc)); }), py::arg("doc"))
      .def_static(
          "fit",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& samples, int rows, int cols,
             int degree_u, int degree_v) {
            try {
              const auto f = surface::fit_control_points(sample_grid(samples), degree_u, degree_v, rows, cols);
              return py::make_tuple(f.surface, f.max_residual);
            } catch (const std::invalid_argument& e) {
              throw ConfigError(e.what());
            }
          },
          py::arg("samples"), py::arg("rows"), py::arg("cols"), py::arg("degree_u") = 3, py::arg("degree_v") = 3,
          "Least-squares control net for a (rows, cols, 3) sample grid: (surface, max residual).")
      .def("point", &surface::BSplineSurface::point, py::arg("u"), py::arg("v"))
      .def("normal", [](const surface::BSplineSurface& s, double u, double v) { return surface::eval_normal(s, u, v); },
           py::arg("u"), py::arg("v"))
      .def(
          "project",
          [](const surface::BSplineSurface& s, const Eigen::Vector3d& p, std::pair<double, double> seed) {
            const auto pr = surface::project_to_surface(s, p, seed);
            py::dict out;
            out["u"] = pr.u;
            out["v"] = pr.v;
            out["distance"] = pr.distance;
            out["warning"] = pr.warning;
            return out;
          },
          py::arg("p"), py::arg("seed") = std::pair<double, double>{0.5, 0.5})
      .def("best_fit_plane",
           [](const surface::BSplineSurface& s) {
             const auto f = surface::best_fit_plane(s);
             py::dict out;
             out["rotation_vector"] = f.rotation_vector;
             out["offset"] = f.offset;
             out["normal"] = f.normal;
             out["input_rotation"] = f.input_rotation;
             out["v_axis_sign"] = f.v_axis_sign;
             out["objective"] = f.objective;
             return out;
           })
      .def("to_json", [](const surface::BSplineSurface& s) { return from_json(io::surface_to_json(s)); });

  m.def(
      "run",
      [](py::object scenario_doc, py::object user, std::optional<std::filesystem::path> record, std::optional<double> dt,
         bool suppress, bool records) {
        auto sc = load_scenario(scenario_doc);
        if (suppress) sc = scenario::suppressed(sc);
        auto input = load_input(user);
        session::SessionOptions opts;
        opts.dt = dt;
        session::RunResult res;
        {
          py::gil_scoped_release release;
          res = session::run(sc, *input, opts, record);
        }
        py::dict out;
        out["reached_end"] = res.reached_end;
        out["ticks"] = res.trace.records.size();
        out["warnings"] = res.warnings;
        out["metrics"] = from_json(metrics::metrics_to_json(metrics::compute_metrics(res.trace)));
        out["timing_us"] = from_json({{"mean", res.timing.mean_us}, {"p99", res.timing.p99_us},
                                      {"max", res.timing.max_us}, {"overruns", res.timing.overruns}});
        if (records) out["trace"] = trace_dict(res.trace);
        return out;
      },
      py::arg("scenario"), py::arg("user") = py::none(), py::arg("record") = py::none(), py::arg("dt") = py::none(),
      py::arg("suppress") = false, py::arg("records") = false,
      "Headless run. user is a csa-user document, a user file, a trace to replay, or None.");

  m.def("read_trace", [](const std::filesystem::path& path) { return trace_dict(trace::read_trace(path)); },
        py::arg("path"));

  m.def(
      "metrics",
      [](const std::filesystem::path& path, double d, double v_alpha) {
        return from_json(metrics::metrics_to_json(metrics::compute_metrics(trace::read_trace(path), d, v_alpha)));
      },
      py::arg("path"), py::arg("d") = 0.005, py::arg("v_alpha") = 0.01);

  m.def(
      "input_time",
      [](const Eigen::MatrixXd& u, double dt, double device_range, const std::string& method, double d, double v_alpha) {
        if (u.cols() != 3) throw ConfigError("u must have shape (N, 3)");
        metrics::InputMethod im;
        if (method == "corrective") im = metrics::InputMethod::corrective;
        else if (method == "motion") im = metrics::InputMethod::motion_based;
        else throw ConfigError("method must be 'corrective' or 'motion'");
        std::vector<trace::Record> recs(static_cast<std::size_t>(u.rows()));
        for (Eigen::Index k = 0; k < u.rows(); ++k) recs[static_cast<std::size_t>(k)].u = u.row(k).transpose();
        return metrics::compute_input_time(recs, im, dt, device_range, d, v_alpha);
      },
      py::arg("u"), py::arg("dt"), py::arg("device_range") = 0.02, py::arg("method") = "corrective",
      py::arg("d") = 0.005, py::arg("v_alpha") = 0.01, "Seconds of device use for an (N, 3) input series.");

  m.def("task_files", [] {
    py::list out;
    for (const auto& t : tasks::all()) {
      py::dict d;
      d["name"] = t.name;
      d["scenario"] = from_json(t.scenario);
      d["user"] = from_json(t.user);
      out.append(d);
    }
    return out;
  });
}
