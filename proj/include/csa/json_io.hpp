#pragma once

#include <json.hpp>
#include <filesystem>
#include <string>

#include "csa/dmp.hpp"
#include "csa/surface.hpp"

namespace csa::io {

using nlohmann::json;

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& doc);

/// Rejects documents whose "schema" or "version" differ from the expected ones.
void check_schema(const json& doc, const std::string& schema, int version);

json surface_to_json(const surface::BSplineSurface& surf);
/// Throws ConfigError naming the offending field or index.
surface::BSplineSurface surface_from_json(const json& doc);

json model_to_json(const dmp::DmpSegmentModel& model);
dmp::DmpSegmentModel model_from_json(const json& doc);

/// Demonstration file: {"schema": "csa-demo", "dt", "channels", "samples"}
/// or CSV with a header row whose first column is "t".
dmp::Demonstration load_demonstration(const std::filesystem::path& path);

json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const json& j);

}  // namespace csa::io
