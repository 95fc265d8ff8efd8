#include "csa/state.hpp"

#include "csa/errors.hpp"

namespace csa {

const char* to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::position:
      return "position";
    case ChannelKind::surface_param:
      return "surface_param";
    case ChannelKind::force:
      return "force";
  }
  return "position";
}

ChannelKind channel_kind_from_string(const std::string& name) {
  if (name == "position") return ChannelKind::position;
  if (name == "surface_param") return ChannelKind::surface_param;
  if (name == "force") return ChannelKind::force;
  throw ConfigError("unknown channel kind '" + name + "'");
}

bool StateVector::same_layout(const StateVector& other) const {
  if (channels.size() != other.channels.size()) return false;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i].name != other.channels[i].name || channels[i].kind != other.channels[i].kind)
      return false;
  }
  return true;
}

ChannelLayout cartesian_layout() {
  return {{"x", ChannelKind::position, "m"},
          {"y", ChannelKind::position, "m"},
          {"z", ChannelKind::position, "m"}};
}

ChannelLayout surface_layout() {
  return {{"u", ChannelKind::surface_param, "1"},
          {"v", ChannelKind::surface_param, "1"},
          {"f_n", ChannelKind::force, "N"}};
}

}  // namespace csa
