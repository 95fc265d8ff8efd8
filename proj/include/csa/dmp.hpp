#pragma once

#include <Eigen/Core>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "csa/state.hpp"

namespace csa::dmp {

enum class Direction { forward, backward };
enum class Integrator { rk4, semi_implicit_euler };

const char* to_string(Direction d);

/// Phase system: (T * tau) ds/dt = -a s, s(0) = 1. With a = 1 the phase
/// reaches exp(-a) when the nominal duration T has elapsed.
struct CanonicalSystem {
  double decay = 1.0;
};

/// Gaussian bases psi_i(s) = exp(-h_i (s - c_i)^2) over the phase.
struct BasisSet {
  std::vector<double> centers;
  std::vector<double> widths;

  /// Centers equispaced in time, i.e. c_i = exp(-a i / (N - 1)); widths
  /// h_i = 0.5 / (c_{i+1} - c_i)^2 (last one reuses the previous spacing).
  static BasisSet exponential(int count, double decay);

  std::size_t size() const { return centers.size(); }
  double activation(std::size_t i, double s) const;
  /// Throws std::invalid_argument when the invariants (N >= 2, ordered
  /// centers in (0,1], positive widths) do not hold.
  void validate() const;
};

struct DmpChannel {
  std::string name;
  ChannelKind kind = ChannelKind::position;
  std::vector<double> weights;
  std::vector<double> slopes;  // local-linear term per basis, may be all zero
  double goal = 0.0;
  double start = 0.0;
  double start_rate = 0.0;  // z at s = 1, i.e. T * dx/dt of the demonstration
  double alpha = 25.0;
  double beta = 6.25;
  double range = 0.0;  // max - min of the fitted demonstration
  bool degenerate_goal = false;
};

struct DmpVariant {
  std::vector<DmpChannel> channels;
};

/// Per-segment model with both execution directions. The backward variant is
/// fitted on the time-reversed demonstration; its phase s_b relates to the
/// forward phase s_f through s_b = exp(-a) / s_f.
struct DmpSegmentModel {
  CanonicalSystem canonical;
  BasisSet basis;
  double duration = 1.0;
  DmpVariant forward;
  DmpVariant backward;

  std::size_t channel_count() const { return forward.channels.size(); }
  ChannelLayout layout() const;
  /// Phase below which a segment counts as finished.
  double end_phase() const;
  const DmpVariant& variant(Direction d) const { return d == Direction::forward ? forward : backward; }
  Eigen::VectorXd start_values() const;
  Eigen::VectorXd goal_values() const;
  void validate() const;
};

struct Demonstration {
  ChannelLayout channels;
  double dt = 0.0;
  Eigen::MatrixXd samples;  // rows: time steps, cols: channels

  double duration() const { return dt * static_cast<double>(samples.rows() - 1); }
  void validate() const;
};

struct FitOptions {
  int basis_count = 20;
  double alpha = 25.0;
  double decay = 1.0;
  double ridge = 1e-8;
};

struct ForcingValue {
  double value = 0.0;
  bool degenerate = false;  // all activations under the denominator guard
};

inline constexpr double kForcingGuard = 1e-10;

ForcingValue forcing_value(const DmpChannel& channel, const BasisSet& basis, double s);

struct ForcingWeights {
  std::vector<double> weights;
  std::vector<double> slopes;
};

/// Per-basis locally weighted regression of target forcing samples over phase.
ForcingWeights fit_forcing(const BasisSet& basis, const std::vector<double>& phase,
                           const std::vector<double>& target, double ridge);

/// Fits the forward variant; the returned model's backward variant is empty.
DmpSegmentModel fit_lwr(const Demonstration& demo, const FitOptions& options = {});
/// Fits the backward variant from the reversed demonstration.
DmpVariant fit_backward(const Demonstration& demo, const FitOptions& options = {});
/// Forward and backward variants together.
DmpSegmentModel fit_segment(const Demonstration& demo, const FitOptions& options = {});

struct DmpState {
  double s = 1.0;
  Eigen::VectorXd x;
  Eigen::VectorXd z;
};

DmpState initial_state(const DmpSegmentModel& model, Direction d = Direction::forward);

/// Converts a state between the forward and backward variants: same position,
/// mirrored phase and negated scaled velocity.
DmpState mirror_state(const DmpSegmentModel& model, const DmpState& state);

class PhaseFrozen : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct StepOptions {
  Integrator integrator = Integrator::rk4;
  double tau_guard = 1e-6;
};

/// One integration step of the selected variant. tau must be finite, its sign
/// must match the direction, and |tau| >= tau_guard; otherwise PhaseFrozen.
DmpState step(const DmpSegmentModel& model, const DmpState& state, double tau, double dt,
              Direction direction, const StepOptions& options = {});

struct Rollout {
  std::vector<double> time;
  std::vector<double> phase;
  Eigen::MatrixXd positions;  // rows: samples, cols: channels
};

class RolloutError : public std::runtime_error {
 public:
  RolloutError(const std::string& what, Rollout partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const Rollout& partial() const { return partial_; }

 private:
  Rollout partial_;
};

using TauSchedule = std::function<double(double t)>;

struct RolloutOptions {
  StepOptions step;
  std::size_t max_steps = 2'000'000;
  Direction direction = Direction::forward;
};

/// Integrates from the variant's start until the phase drops below the end
/// threshold. tau_schedule must keep the sign implied by the direction.
Rollout rollout(const DmpSegmentModel& model, const TauSchedule& tau_schedule, double dt,
                const RolloutOptions& options = {});
Rollout rollout(const DmpSegmentModel& model, double tau, double dt,
                const RolloutOptions& options = {});

/// Fraction of nominal duration elapsed at forward phase s, clamped to [0,1].
double progress_from_phase(const DmpSegmentModel& model, double forward_phase);

}  // namespace csa::dmp
