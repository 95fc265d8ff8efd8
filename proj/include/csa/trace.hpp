#pragma once

#include <Eigen/Geometry>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "csa/dmp.hpp"
#include "csa/json_io.hpp"

namespace csa::trace {

using io::json;

inline constexpr const char* kSchema = "csa-trace";
inline constexpr int kVersion = 1;

struct Record {
  long tick = 0;
  double t = 0.0;
  std::string segment;
  std::size_t segment_index = 0;
  double s = 1.0;         // phase of the active variant
  double progress = 0.0;  // fraction of the segment's nominal duration
  std::optional<double> tau;  // empty when the rate heuristic was singular
  dmp::Direction direction = dmp::Direction::forward;
  bool hold = false;
  Eigen::VectorXd x_n;
  Eigen::VectorXd dy;  // applied (scaled, validated) correction
  Eigen::VectorXd x_cmd;
  Eigen::Vector3d u = Eigen::Vector3d::Zero();
  std::optional<double> scaling_override;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  double force = 0.0;
  bool contact = false;
  std::pair<double, double> foot{0.5, 0.5};
  bool edge_clamped = false;
  bool standoff_scaled = false;
  bool force_floored = false;
  bool input_stale = false;  // live sessions: input timed out this tick
};

struct Header {
  std::string config_hash;
  double dt = 0.001;
  double device_range = 0.02;
  std::string source;  // "scripted", "replay", "live", "none"
  json scenario;       // self-contained scenario document
};

struct Trace {
  Header header;
  std::vector<Record> records;
  bool complete = false;  // footer present and every line parsed
  json footer;
};

json record_to_json(const Record& r);
Record record_from_json(const json& j);
json header_to_json(const Header& h);

/// 64-bit FNV-1a of the compact JSON dump, as 16 hex digits.
std::string config_hash(const json& doc);

class Writer {
 public:
  Writer(const std::filesystem::path& path, const Header& header);
  void write(const Record& r);
  /// Writes the footer; a trace without it reads back as partial.
  void finish(const json& summary = json::object());
  ~Writer();

 private:
  std::ofstream out_;
  bool finished_ = false;
};

/// Reads a trace file. Version mismatch throws VersionError; a missing footer
/// or an unreadable trailing line yields complete == false.
Trace read_trace(const std::filesystem::path& path);

}  // namespace csa::trace
