#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "csa/dmp.hpp"
#include "csa/state.hpp"
#include "csa/surface.hpp"

namespace csa::correction {

/// Device deflection, one entry per device axis, each in [-1, 1].
struct UserInput {
  Eigen::Vector3d u = Eigen::Vector3d::Zero();
  double timestamp = 0.0;
  /// Optional authority factor in [0, 1] applied on top of the segment scaling.
  std::optional<double> scaling_override;
};

UserInput clamp_input(UserInput in);

/// Maps the three device axes onto the channels of the active segment.
struct InputMapping {
  Eigen::MatrixXd matrix;  // channels x 3

  /// Cartesian channels: device axes expressed in the surface input frame.
  static InputMapping cartesian(const Eigen::Matrix3d& input_rotation);
  /// Surface channels (u, v, f_n): axis 0 -> u, axis 1 -> v (times the
  /// plane fit's v-axis sign), axis 2 -> normal force.
  static InputMapping surface(int v_axis_sign);
  static InputMapping identity(std::size_t channels);

  Eigen::VectorXd apply(const Eigen::Vector3d& u) const { return matrix * u; }
};

/// Critically damped correction system per channel:
///   ddy + b_c dy' + k_c dy = input,  b_c = 2 sqrt(k_c).
struct CorrectionState {
  Eigen::VectorXd dy;
  Eigen::VectorXd rate;
  double k_c = 100.0;

  double b_c() const;
  static CorrectionState zero(std::size_t channels, double k_c);
};

/// Advances the correction ODE by dt holding the input constant over the step
/// (exact discretization, so there is no integrator overshoot).
CorrectionState step_correction(const CorrectionState& state, const Eigen::VectorXd& input, double dt);
CorrectionState step_correction(const CorrectionState& state, const UserInput& input,
                                const InputMapping& mapping, double dt);

/// Per-channel correction bounds and the correctable subspace.
struct CorrectionScaling {
  Eigen::VectorXd max;           // s_bar, channel units, >= 0
  std::vector<bool> correctable;  // S

  static CorrectionScaling none(std::size_t channels);
  double effective(std::size_t i) const { return correctable[i] ? max[static_cast<Eigen::Index>(i)] : 0.0; }
};

/// Linear rescale of the raw output: sustained |input| = 1 maps to s_bar.
/// Channels outside S are exactly zero.
Eigen::VectorXd scaled_correction(const CorrectionState& state, const CorrectionScaling& scaling,
                                  double override_factor = 1.0);

/// Commanded state: nominal plus correction.
StateVector arbitrate(const StateVector& nominal, const Eigen::VectorXd& correction);

/// Normalized correction direction: k_c * dy over kinematic correctable
/// channels with positive scaling, limited to unit norm.
Eigen::VectorXd correction_direction(const CorrectionState& state, const CorrectionScaling& scaling,
                                     const ChannelLayout& layout, bool include_force = false);

struct RateOptions {
  double tau_min = 0.1;
  double tau_max = 10.0;
  int reversal_ticks = 3;
};

/// Execution-rate state carried between control ticks.
struct RateState {
  double tau = 1.0;
  dmp::Direction direction = dmp::Direction::forward;
  bool hold = false;      // phase frozen this tick
  int pending = 0;        // consecutive ticks requesting the other direction
  bool switched = false;  // direction changed on this tick
};

struct TauValue {
  double tau = 1.0;
  bool singular = false;  // gamma * (v.f) == -1: hold the phase
};

/// tau = 1 / (1 + gamma v.f) for v.f <= 0, else 1, with |tau| clamped to [tau_min, tau_max] and the sign kept.
TauValue execution_time_constant(double v_dot_f, double gamma, const RateOptions& options = {});

/// execution_time_constant plus the direction logic: a sign change of tau must persist for
/// reversal_ticks ticks before the direction switches; the phase holds while
/// a switch is pending.
RateState rate_heuristic(double v_dot_f, double gamma, const RateState& previous,
                         const RateOptions& options = {});

enum class ValidationMode { free_space, approach, on_surface };

struct ValidationContext {
  ValidationMode mode = ValidationMode::free_space;
  const surface::BSplineSurface* surface = nullptr;
  double edge_margin = 0.005;
  double standoff_band = 0.010;  // meters
  /// Warm start for the nominal point's surface projection (approach mode).
  std::pair<double, double> seed{0.5, 0.5};
};

struct SaturationReport {
  bool edge_clamped = false;
  bool standoff_scaled = false;
  bool force_floored = false;
  double clearance = 0.0;  // nominal clearance in approach mode
  std::pair<double, double> foot{0.5, 0.5};

  bool any() const { return edge_clamped || standoff_scaled || force_floored; }
};

struct Validated {
  Eigen::VectorXd correction;  // the correction actually applied
  SaturationReport report;
};

/// Returns a safe correction for the proposed command nominal + correction.
/// Limits only ever act on the correction, so a zero correction passes
/// through unchanged.
Validated saturate_validate(const StateVector& nominal, const Eigen::VectorXd& correction,
                            const ValidationContext& context);

}  // namespace csa::correction
