#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>

#include "csa/dmp.hpp"

namespace csa::testing {

inline double min_jerk(double x0, double x1, double r) {
  r = std::clamp(r, 0.0, 1.0);
  return x0 + (x1 - x0) * (10 * r * r * r - 15 * r * r * r * r + 6 * r * r * r * r * r);
}

// One channel per profile, sampled at dt over [0, T].
inline dmp::Demonstration make_demo(const std::vector<std::function<double(double)>>& profiles,
                                    const ChannelLayout& layout, double T, double dt) {
  dmp::Demonstration d;
  d.channels = layout;
  d.dt = dt;
  const auto n = static_cast<Eigen::Index>(std::llround(T / dt)) + 1;
  d.samples.resize(n, static_cast<Eigen::Index>(profiles.size()));
  for (Eigen::Index k = 0; k < n; ++k)
    for (std::size_t c = 0; c < profiles.size(); ++c)
      d.samples(k, static_cast<Eigen::Index>(c)) = profiles[c](static_cast<double>(k) * dt);
  return d;
}

inline ChannelLayout scalar_layout(std::size_t n = 1) {
  ChannelLayout l;
  for (std::size_t i = 0; i < n; ++i) l.push_back({"c" + std::to_string(i), ChannelKind::position, "m"});
  return l;
}

// Linear interpolation of a rollout channel at time t.
inline double sample_at(const dmp::Rollout& r, Eigen::Index channel, double t) {
  const auto& time = r.time;
  if (t <= time.front()) return r.positions(0, channel);
  if (t >= time.back()) return r.positions(static_cast<Eigen::Index>(time.size()) - 1, channel);
  const auto it = std::upper_bound(time.begin(), time.end(), t);
  const auto k = static_cast<Eigen::Index>(it - time.begin());
  const double a = (t - time[static_cast<std::size_t>(k - 1)]) / (time[static_cast<std::size_t>(k)] - time[static_cast<std::size_t>(k - 1)]);
  return (1 - a) * r.positions(k - 1, channel) + a * r.positions(k, channel);
}

// Max |rollout - demo| over demo samples, relative to the demo's range.
inline double max_range_error(const dmp::Rollout& r, const dmp::Demonstration& d, Eigen::Index channel,
                              bool reversed = false) {
  const auto col = d.samples.col(channel);
  const double range = std::max(col.maxCoeff() - col.minCoeff(), 1e-12);
  double worst = 0.0;
  const Eigen::Index n = col.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double demo = reversed ? col(n - 1 - k) : col(k);
    worst = std::max(worst, std::abs(sample_at(r, channel, static_cast<double>(k) * d.dt) - demo));
  }
  return worst / range;
}

}  // namespace csa::testing
