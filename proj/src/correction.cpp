#include "csa/correction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace csa::correction {

UserInput clamp_input(UserInput in) {
  for (int i = 0; i < 3; ++i) {
    // NaN from a broken client counts as no deflection.
    in.u[i] = std::isfinite(in.u[i]) ? std::clamp(in.u[i], -1.0, 1.0) : 0.0;
  }
  if (in.scaling_override) {
    const double f = *in.scaling_override;
    in.scaling_override = std::isfinite(f) ? std::clamp(f, 0.0, 1.0) : 1.0;
  }
  return in;
}

InputMapping InputMapping::cartesian(const Eigen::Matrix3d& input_rotation) {
  return {input_rotation};
}

InputMapping InputMapping::surface(int v_axis_sign) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
  m(0, 0) = 1.0;
  m(1, 1) = v_axis_sign >= 0 ? 1.0 : -1.0;
  m(2, 2) = 1.0;
  return {m};
}

InputMapping InputMapping::identity(std::size_t channels) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(channels), 3);
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(3, m.rows()); ++i) m(i, i) = 1.0;
  return {m};
}

double CorrectionState::b_c() const { return 2.0 * std::sqrt(k_c); }

CorrectionState CorrectionState::zero(std::size_t channels, double k_c) {
  if (!(k_c > 0.0)) throw std::invalid_argument("k_c must be > 0");
  CorrectionState s;
  s.dy = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(channels));
  s.rate = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(channels));
  s.k_c = k_c;
  return s;
}

CorrectionState step_correction(const CorrectionState& state, const Eigen::VectorXd& input, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (input.size() != state.dy.size()) throw std::invalid_argument("correction input size mismatch");
  const double w = std::sqrt(state.k_c);
  const double e = std::exp(-w * dt);
  const double p11 = e * (1.0 + w * dt);
  const double p12 = e * dt;
  const double p21 = -e * w * w * dt;
  const double p22 = e * (1.0 - w * dt);
  const double g1 = (1.0 - e * (1.0 + w * dt)) / state.k_c;
  const double g2 = dt * e;
  CorrectionState next = state;
  next.dy = p11 * state.dy + p12 * state.rate + g1 * input;
  next.rate = p21 * state.dy + p22 * state.rate + g2 * input;
  return next;
}

CorrectionState step_correction(const CorrectionState& state, const UserInput& input,
                                const InputMapping& mapping, double dt) {
  return step_correction(state, mapping.apply(clamp_input(input).u), dt);
}

CorrectionScaling CorrectionScaling::none(std::size_t channels) {
  return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(channels)), std::vector<bool>(channels, false)};
}

Eigen::VectorXd scaled_correction(const CorrectionState& state, const CorrectionScaling& scaling,
                                  double override_factor) {
  const Eigen::Index n = state.dy.size();
  if (scaling.max.size() != n || scaling.correctable.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("scaling does not match the correction channels");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double bound = scaling.effective(static_cast<std::size_t>(i)) * override_factor;
    if (bound <= 0.0) continue;
    out[i] = std::clamp(state.k_c * state.dy[i], -1.0, 1.0) * bound;
  }
  return out;
}

StateVector arbitrate(const StateVector& nominal, const Eigen::VectorXd& correction) {
  if (correction.size() != nominal.values.size())
    throw std::invalid_argument("arbitrate: correction has " + std::to_string(correction.size()) +
                                " channels, nominal has " + std::to_string(nominal.values.size()));
  StateVector out = nominal;
  out.values = nominal.values + correction;
  return out;
}

Eigen::VectorXd correction_direction(const CorrectionState& state, const CorrectionScaling& scaling,
                                     const ChannelLayout& layout, bool include_force) {
  const Eigen::Index n = state.dy.size();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!(include_force || is_kinematic(layout[k].kind))) continue;
    if (scaling.effective(k) <= 0.0) continue;
    f[i] = std::clamp(state.k_c * state.dy[i], -1.0, 1.0);
  }
  const double norm = f.norm();
  if (norm > 1.0) f /= norm;
  return f;
}

TauValue execution_time_constant(double v_dot_f, double gamma, const RateOptions& options) {
  if (v_dot_f > 0.0) return {1.0, false};
  const double denom = 1.0 + gamma * v_dot_f;
  if (denom == 0.0) return {std::numeric_limits<double>::infinity(), true};
  const double tau = 1.0 / denom;
  const double mag = std::clamp(std::abs(tau), options.tau_min, options.tau_max);
  return {std::copysign(mag, tau), false};
}

RateState rate_heuristic(double v_dot_f, double gamma, const RateState& previous, const RateOptions& options) {
  const TauValue tv = execution_time_constant(v_dot_f, gamma, options);
  RateState next = previous;
  next.switched = false;
  if (tv.singular) {
    next.tau = tv.tau;
    next.hold = true;
    return next;
  }
  next.tau = tv.tau;
  const dmp::Direction wanted = tv.tau > 0.0 ? dmp::Direction::forward : dmp::Direction::backward;
  if (wanted == previous.direction) {
    next.pending = 0;
    next.hold = false;
    return next;
  }
  next.pending = previous.pending + 1;
  if (next.pending >= options.reversal_ticks) {
    next.direction = wanted;
    next.switched = true;
    next.pending = 0;
    next.hold = false;
  } else {
    next.hold = true;
  }
  return next;
}

namespace {

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

Validated validate_surface(const StateVector& nominal, const Eigen::VectorXd& correction,
                           const ValidationContext& ctx) {
  Validated out{correction, {}};
  for (std::size_t k = 0; k < nominal.channels.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const double xn = nominal.values[i];
    const double cmd = xn + correction[i];
    if (nominal.channels[k].kind == ChannelKind::surface_param) {
      // The band widens to include the nominal so only the correction is limited.
      const double lo = std::min(ctx.edge_margin, xn);
      const double hi = std::max(1.0 - ctx.edge_margin, xn);
      if (cmd < lo || cmd > hi) {
        out.correction[i] = std::clamp(cmd, lo, hi) - xn;
        out.report.edge_clamped = true;
      }
    } else if (nominal.channels[k].kind == ChannelKind::force) {
      const double floor = std::min(0.0, xn);
      if (cmd < floor) {
        out.correction[i] = floor - xn;
        out.report.force_floored = true;
      }
    }
  }
  return out;
}

Validated validate_approach(const StateVector& nominal, const Eigen::VectorXd& correction,
                            const ValidationContext& ctx) {
  Validated out{correction, {}};
  if (ctx.surface == nullptr || nominal.values.size() != 3) return out;
  const auto& surf = *ctx.surface;
  const Eigen::Vector3d pn = nominal.values.head<3>();
  const auto foot = surface::refine_projection(surf, pn, ctx.seed);
  out.report.foot = {foot.u, foot.v};
  const double clearance = surface::signed_distance(surf, pn, foot);
  out.report.clearance = clearance;
  if (correction.isZero(0.0)) return out;

  Eigen::Vector3d d = correction.head<3>();
  Eigen::Vector3d n;
  try {
    n = surface::eval_normal(surf, foot.u, foot.v);
  } catch (const surface::DegenerateSurface&) {
    return out;
  }
  const double dn = d.dot(n);
  if (dn < 0.0) {
    double limited = dn * smoothstep(clearance / ctx.standoff_band);
    limited = clearance > 0.0 ? std::max(limited, -clearance) : 0.0;
    if (limited != dn) {
      d += (limited - dn) * n;
      out.report.standoff_scaled = true;
    }
  }
  // Final check against the surface itself, not the tangent plane.
  for (int iter = 0; iter < 8; ++iter) {
    const Eigen::Vector3d p = pn + d;
    const auto pf = surface::refine_projection(surf, p, {foot.u, foot.v});
    const double sd = surface::signed_distance(surf, p, pf);
    if (sd >= 0.0 || clearance < 0.0) break;
    d += (-sd + 1e-9) * n;
    out.report.standoff_scaled = true;
  }
  out.correction.head<3>() = d;
  return out;
}

}  // namespace

Validated saturate_validate(const StateVector& nominal, const Eigen::VectorXd& correction,
                            const ValidationContext& context) {
  if (correction.size() != nominal.values.size())
    throw std::invalid_argument("saturate_validate: channel mismatch");
  switch (context.mode) {
    case ValidationMode::on_surface:
      return validate_surface(nominal, correction, context);
    case ValidationMode::approach:
      return validate_approach(nominal, correction, context);
    case ValidationMode::free_space:
      break;
  }
  return {correction, {}};
}

}  // namespace csa::correction
