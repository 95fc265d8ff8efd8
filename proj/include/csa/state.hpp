#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace csa {

enum class ChannelKind { position, surface_param, force };

struct ChannelSpec {
  std::string name;
  ChannelKind kind = ChannelKind::position;
  std::string units;
};

using ChannelLayout = std::vector<ChannelSpec>;

/// Kinematic channels take part in the execution-rate heuristic; force does not.
inline bool is_kinematic(ChannelKind kind) { return kind != ChannelKind::force; }

const char* to_string(ChannelKind kind);
ChannelKind channel_kind_from_string(const std::string& name);

/// Named robot state x in R^m.
struct StateVector {
  ChannelLayout channels;
  Eigen::VectorXd values;

  std::size_t size() const { return channels.size(); }
  bool same_layout(const StateVector& other) const;
};

/// Cartesian position layout (x, y, z) in meters.
ChannelLayout cartesian_layout();
/// Surface layout (u, v, f_n): two surface parameters and the normal force.
ChannelLayout surface_layout();

}  // namespace csa
