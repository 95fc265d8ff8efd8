#include "csa/trace.hpp"

#include <cstdint>
#include <cstdio>

#include "csa/errors.hpp"

namespace csa::trace {

namespace {

json vec(const Eigen::VectorXd& v) { return io::vector_to_json(v); }

Eigen::Vector3d vec3(const json& j) {
  const auto v = io::vector_from_json(j);
  if (v.size() != 3) throw ConfigError("trace: expected 3 values");
  return v;
}

}  // namespace

json record_to_json(const Record& r) {
  json sat = json::array();
  if (r.edge_clamped) sat.push_back("edge_clamped");
  if (r.standoff_scaled) sat.push_back("standoff_scaled");
  if (r.force_floored) sat.push_back("force_floored");
  json j = {{"tick", r.tick},
            {"t", r.t},
            {"segment", r.segment},
            {"segment_index", r.segment_index},
            {"s", r.s},
            {"progress", r.progress},
            {"tau", r.tau ? json(*r.tau) : json(nullptr)},
            {"direction", dmp::to_string(r.direction)},
            {"hold", r.hold},
            {"x_n", vec(r.x_n)},
            {"dy", vec(r.dy)},
            {"x_cmd", vec(r.x_cmd)},
            {"u", vec(r.u)},
            {"position", vec(r.position)},
            {"orientation", {r.orientation.w(), r.orientation.x(), r.orientation.y(), r.orientation.z()}},
            {"velocity", vec(r.velocity)},
            {"force", r.force},
            {"contact", r.contact},
            {"foot", {r.foot.first, r.foot.second}},
            {"saturation", sat}};
  if (r.scaling_override) j["override"] = *r.scaling_override;
  if (r.input_stale) j["input_stale"] = true;
  return j;
}

Record record_from_json(const json& j) {
  Record r;
  try {
    r.tick = j.at("tick").get<long>();
    r.t = j.at("t").get<double>();
    r.segment = j.at("segment").get<std::string>();
    r.segment_index = j.at("segment_index").get<std::size_t>();
    r.s = j.at("s").get<double>();
    r.progress = j.at("progress").get<double>();
    if (!j.at("tau").is_null()) r.tau = j.at("tau").get<double>();
    r.direction = j.at("direction").get<std::string>() == "backward" ? dmp::Direction::backward
                                                                     : dmp::Direction::forward;
    r.hold = j.at("hold").get<bool>();
    r.x_n = io::vector_from_json(j.at("x_n"));
    r.dy = io::vector_from_json(j.at("dy"));
    r.x_cmd = io::vector_from_json(j.at("x_cmd"));
    r.u = vec3(j.at("u"));
    if (j.contains("override")) r.scaling_override = j.at("override").get<double>();
    r.position = vec3(j.at("position"));
    const auto& q = j.at("orientation");
    r.orientation = Eigen::Quaterniond(q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>(),
                                       q.at(3).get<double>());
    r.velocity = vec3(j.at("velocity"));
    r.force = j.at("force").get<double>();
    r.contact = j.at("contact").get<bool>();
    r.foot = {j.at("foot").at(0).get<double>(), j.at("foot").at(1).get<double>()};
    for (const auto& f : j.at("saturation")) {
      const auto name = f.get<std::string>();
      if (name == "edge_clamped") r.edge_clamped = true;
      if (name == "standoff_scaled") r.standoff_scaled = true;
      if (name == "force_floored") r.force_floored = true;
    }
    r.input_stale = j.value("input_stale", false);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("trace record: ") + e.what());
  }
  return r;
}

json header_to_json(const Header& h) {
  return {{"schema", kSchema},         {"version", kVersion}, {"config_hash", h.config_hash}, {"dt", h.dt},
          {"device_range", h.device_range}, {"source", h.source}, {"scenario", h.scenario}};
}

std::string config_hash(const json& doc) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : doc.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Writer::Writer(const std::filesystem::path& path, const Header& header) : out_(path) {
  if (!out_) throw ConfigError("cannot write trace " + path.string());
  out_ << header_to_json(header).dump() << '\n';
}

void Writer::write(const Record& r) { out_ << record_to_json(r).dump() << '\n'; }

void Writer::finish(const json& summary) {
  if (finished_) return;
  json footer = summary;
  footer["end"] = true;
  out_ << footer.dump() << '\n';
  out_.flush();
  finished_ = true;
}

Writer::~Writer() { out_.flush(); }

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty trace");
  json head;
  try {
    head = json::parse(line);
  } catch (const json::parse_error&) {
    throw ConfigError(path.string() + ": unreadable trace header");
  }
  io::check_schema(head, kSchema, kVersion);
  Trace tr;
  tr.header.config_hash = head.value("config_hash", std::string());
  tr.header.dt = head.value("dt", 0.001);
  tr.header.device_range = head.value("device_range", 0.02);
  tr.header.source = head.value("source", std::string());
  tr.header.scenario = head.value("scenario", json());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      return tr;  // truncated mid-line
    }
    if (j.value("end", false)) {
      tr.footer = j;
      tr.complete = true;
      return tr;
    }
    try {
      tr.records.push_back(record_from_json(j));
    } catch (const ConfigError&) {
      return tr;
    }
  }
  return tr;
}

}  // namespace csa::trace
