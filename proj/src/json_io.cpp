#include "csa/json_io.hpp"

#include <fstream>
#include <sstream>

#include "csa/errors.hpp"

namespace csa::io {

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

void check_schema(const json& doc, const std::string& schema, int version) {
  if (!doc.is_object() || doc.value("schema", std::string()) != schema)
    throw VersionError("expected a '" + schema + "' document");
  const int v = doc.value("version", -1);
  if (v != version)
    throw VersionError(schema + " version " + std::to_string(v) + " is not supported (expected " +
                       std::to_string(version) + ")");
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("expected a numeric array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("expected a number at index " + std::to_string(i));
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json surface_to_json(const surface::BSplineSurface& surf) {
  json grid = json::array();
  for (const auto& row : surf.control_points()) {
    json r = json::array();
    for (const auto& p : row) r.push_back({p.x(), p.y(), p.z()});
    grid.push_back(r);
  }
  return {{"schema", "csa-surface"},
          {"version", 1},
          {"degree_u", surf.degree_u()},
          {"degree_v", surf.degree_v()},
          {"knots_u", surf.knots_u()},
          {"knots_v", surf.knots_v()},
          {"normal_sign", surf.normal_sign()},
          {"control_points", grid}};
}

surface::BSplineSurface surface_from_json(const json& doc) {
  if (doc.contains("schema")) check_schema(doc, "csa-surface", 1);
  try {
    const int du = doc.at("degree_u").get<int>();
    const int dv = doc.at("degree_v").get<int>();
    const auto& grid = doc.at("control_points");
    surface::ControlGrid g;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      std::vector<Eigen::Vector3d> row;
      for (std::size_t j = 0; j < grid[i].size(); ++j) {
        const auto& p = grid[i][j];
        if (!p.is_array() || p.size() != 3)
          throw ConfigError("control_points[" + std::to_string(i) + "][" + std::to_string(j) +
                            "] must be [x, y, z]");
        row.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
      }
      g.push_back(std::move(row));
    }
    const int sign = doc.value("normal_sign", 1);
    if (doc.contains("knots_u") || doc.contains("knots_v")) {
      return surface::BSplineSurface(du, dv, doc.at("knots_u").get<std::vector<double>>(),
                                     doc.at("knots_v").get<std::vector<double>>(), std::move(g), sign);
    }
    return surface::BSplineSurface::clamped_uniform(du, dv, std::move(g), sign);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("surface: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("surface: ") + e.what());
  }
}

namespace {

json channel_to_json(const dmp::DmpChannel& c) {
  return {{"name", c.name},       {"kind", to_string(c.kind)}, {"weights", c.weights},
          {"slopes", c.slopes},   {"goal", c.goal},            {"start", c.start},
          {"start_rate", c.start_rate}, {"alpha", c.alpha},    {"beta", c.beta},
          {"range", c.range},     {"degenerate_goal", c.degenerate_goal}};
}

dmp::DmpChannel channel_from_json(const json& j) {
  dmp::DmpChannel c;
  c.name = j.at("name").get<std::string>();
  c.kind = channel_kind_from_string(j.value("kind", std::string("position")));
  c.weights = j.at("weights").get<std::vector<double>>();
  c.slopes = j.value("slopes", std::vector<double>(c.weights.size(), 0.0));
  c.goal = j.at("goal").get<double>();
  c.start = j.at("start").get<double>();
  c.start_rate = j.value("start_rate", 0.0);
  c.alpha = j.value("alpha", 25.0);
  c.beta = j.value("beta", c.alpha / 4.0);
  c.range = j.value("range", 0.0);
  c.degenerate_goal = j.value("degenerate_goal", false);
  return c;
}

}  // namespace

json model_to_json(const dmp::DmpSegmentModel& model) {
  json fwd = json::array();
  json bwd = json::array();
  for (const auto& c : model.forward.channels) fwd.push_back(channel_to_json(c));
  for (const auto& c : model.backward.channels) bwd.push_back(channel_to_json(c));
  return {{"schema", "csa-dmp"},
          {"version", 1},
          {"duration", model.duration},
          {"canonical", {{"decay", model.canonical.decay}}},
          {"basis", {{"centers", model.basis.centers}, {"widths", model.basis.widths}}},
          {"variants", {{"forward", fwd}, {"backward", bwd}}}};
}

dmp::DmpSegmentModel model_from_json(const json& doc) {
  check_schema(doc, "csa-dmp", 1);
  dmp::DmpSegmentModel m;
  try {
    m.duration = doc.at("duration").get<double>();
    m.canonical.decay = doc.at("canonical").value("decay", 1.0);
    m.basis.centers = doc.at("basis").at("centers").get<std::vector<double>>();
    m.basis.widths = doc.at("basis").at("widths").get<std::vector<double>>();
    for (const auto& c : doc.at("variants").at("forward")) m.forward.channels.push_back(channel_from_json(c));
    for (const auto& c : doc.at("variants").at("backward")) m.backward.channels.push_back(channel_from_json(c));
    m.validate();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return m;
}

namespace {

dmp::Demonstration demo_from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty demonstration file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header.front() != "t")
    throw ConfigError("demonstration CSV needs a header starting with 't'");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != header.size())
      throw ConfigError("demonstration row " + std::to_string(rows.size() + 1) + " has the wrong width");
    rows.push_back(std::move(row));
  }
  if (rows.size() < 3) throw ConfigError("demonstration needs at least 3 samples");
  dmp::Demonstration d;
  d.dt = rows[1][0] - rows[0][0];
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (std::abs((rows[k][0] - rows[k - 1][0]) - d.dt) > 1e-9 * std::max(1.0, d.dt * 1e3))
      throw ConfigError("demonstration time stamps are not uniform at row " + std::to_string(k));
  }
  for (std::size_t c = 1; c < header.size(); ++c) {
    const bool force = header[c].rfind("f", 0) == 0;
    d.channels.push_back({header[c], force ? ChannelKind::force : ChannelKind::position, force ? "N" : "m"});
  }
  d.samples.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size() - 1));
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t c = 1; c < header.size(); ++c)
      d.samples(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c - 1)) = rows[k][c];
  return d;
}

}  // namespace

dmp::Demonstration load_demonstration(const std::filesystem::path& path) {
  if (path.extension() == ".csv") {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
      return demo_from_csv(in);
    } catch (const std::invalid_argument&) {
      throw ConfigError(path.string() + ": non-numeric value");
    }
  }
  const json doc = read_json_file(path);
  check_schema(doc, "csa-demo", 1);
  dmp::Demonstration d;
  try {
    d.dt = doc.at("dt").get<double>();
    for (const auto& c : doc.at("channels"))
      d.channels.push_back({c.at("name").get<std::string>(),
                            channel_kind_from_string(c.value("kind", std::string("position"))),
                            c.value("units", std::string())});
    const auto& samples = doc.at("samples");
    d.samples.resize(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(d.channels.size()));
    for (std::size_t k = 0; k < samples.size(); ++k) {
      if (samples[k].size() != d.channels.size())
        throw ConfigError("demonstration sample " + std::to_string(k) + " has the wrong width");
      for (std::size_t c = 0; c < d.channels.size(); ++c)
        d.samples(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = samples[k][c].get<double>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return d;
}

}  // namespace csa::io
