#include "csa/dmp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace csa::dmp {

const char* to_string(Direction d) { return d == Direction::forward ? "forward" : "backward"; }

BasisSet BasisSet::exponential(int count, double decay) {
  if (count < 2) throw std::invalid_argument("basis count must be >= 2");
  if (!(decay > 0.0)) throw std::invalid_argument("canonical decay must be > 0");
  BasisSet basis;
  basis.centers.resize(count);
  basis.widths.resize(count);
  for (int i = 0; i < count; ++i) {
    basis.centers[i] = std::exp(-decay * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  for (int i = 0; i < count; ++i) {
    const int j = i + 1 < count ? i : i - 1;
    const double spacing = basis.centers[j] - basis.centers[j + 1];
    basis.widths[i] = 0.5 / (spacing * spacing);
  }
  return basis;
}

double BasisSet::activation(std::size_t i, double s) const {
  const double d = s - centers[i];
  return std::exp(-widths[i] * d * d);
}

void BasisSet::validate() const {
  if (centers.size() < 2 || centers.size() != widths.size())
    throw std::invalid_argument("basis set needs >= 2 centers with matching widths");
  for (std::size_t i = 0; i < centers.size(); ++i) {
    if (!(centers[i] > 0.0 && centers[i] <= 1.0))
      throw std::invalid_argument("basis center " + std::to_string(i) + " outside (0,1]");
    if (!(widths[i] > 0.0))
      throw std::invalid_argument("basis width " + std::to_string(i) + " must be positive");
    if (i > 0 && !(centers[i] < centers[i - 1]))
      throw std::invalid_argument("basis centers must be strictly ordered");
  }
}

ChannelLayout DmpSegmentModel::layout() const {
  ChannelLayout out;
  for (const auto& c : forward.channels) out.push_back({c.name, c.kind, ""});
  return out;
}

double DmpSegmentModel::end_phase() const { return std::exp(-canonical.decay) * 0.999; }

Eigen::VectorXd DmpSegmentModel::start_values() const {
  Eigen::VectorXd v(forward.channels.size());
  for (std::size_t i = 0; i < forward.channels.size(); ++i) v[i] = forward.channels[i].start;
  return v;
}

Eigen::VectorXd DmpSegmentModel::goal_values() const {
  Eigen::VectorXd v(forward.channels.size());
  for (std::size_t i = 0; i < forward.channels.size(); ++i) v[i] = forward.channels[i].goal;
  return v;
}

void DmpSegmentModel::validate() const {
  basis.validate();
  if (!(duration > 0.0)) throw std::invalid_argument("segment duration must be > 0");
  if (!(canonical.decay > 0.0)) throw std::invalid_argument("canonical decay must be > 0");
  if (forward.channels.empty()) throw std::invalid_argument("model has no channels");
  if (forward.channels.size() != backward.channels.size())
    throw std::invalid_argument("forward and backward variants differ in channel count");
  for (std::size_t i = 0; i < forward.channels.size(); ++i) {
    const auto& f = forward.channels[i];
    const auto& b = backward.channels[i];
    if (f.name != b.name || f.kind != b.kind)
      throw std::invalid_argument("forward/backward channel mismatch at index " + std::to_string(i));
    for (const auto* c : {&f, &b}) {
      if (c->weights.size() != basis.size() || c->slopes.size() != basis.size())
        throw std::invalid_argument("channel '" + c->name + "' weight count does not match basis");
      if (!(c->alpha > 0.0 && c->beta > 0.0))
        throw std::invalid_argument("channel '" + c->name + "' gains must be positive");
    }
  }
}

void Demonstration::validate() const {
  if (samples.rows() < 3) throw std::invalid_argument("demonstration needs at least 3 samples");
  if (!(dt > 0.0)) throw std::invalid_argument("demonstration dt must be > 0");
  if (static_cast<std::size_t>(samples.cols()) != channels.size())
    throw std::invalid_argument("demonstration columns do not match its channel list");
  if (!samples.allFinite()) throw std::invalid_argument("demonstration contains non-finite samples");
}

ForcingValue forcing_value(const DmpChannel& channel, const BasisSet& basis, double s) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double psi = basis.activation(i, s);
    const double slope = channel.slopes.empty() ? 0.0 : channel.slopes[i];
    num += psi * (channel.weights[i] + slope * (s - basis.centers[i]));
    den += psi;
  }
  if (den < kForcingGuard) return {0.0, true};
  return {num / den, false};
}

ForcingWeights fit_forcing(const BasisSet& basis, const std::vector<double>& phase,
                           const std::vector<double>& target, double ridge) {
  if (phase.size() != target.size()) throw std::invalid_argument("phase/target size mismatch");
  ForcingWeights out;
  out.weights.assign(basis.size(), 0.0);
  out.slopes.assign(basis.size(), 0.0);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
    Eigen::Vector2d b = Eigen::Vector2d::Zero();
    for (std::size_t k = 0; k < phase.size(); ++k) {
      const double psi = basis.activation(i, phase[k]);
      const double d = phase[k] - basis.centers[i];
      a(0, 0) += psi;
      a(0, 1) += psi * d;
      a(1, 1) += psi * d * d;
      b(0) += psi * target[k];
      b(1) += psi * target[k] * d;
    }
    a(1, 0) = a(0, 1);
    a += ridge * Eigen::Matrix2d::Identity();
    const Eigen::Vector2d sol = a.ldlt().solve(b);
    out.weights[i] = sol(0);
    out.slopes[i] = sol(1);
  }
  return out;
}

namespace {

// First and second derivatives with second-order accurate stencils everywhere.
Eigen::VectorXd derivative(const Eigen::VectorXd& x, double dt) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd d(n);
  for (Eigen::Index k = 1; k + 1 < n; ++k) d[k] = (x[k + 1] - x[k - 1]) / (2.0 * dt);
  d[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * dt);
  d[n - 1] = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / (2.0 * dt);
  return d;
}

DmpChannel fit_channel(const ChannelSpec& spec, const Eigen::VectorXd& x, double dt,
                       const BasisSet& basis, const FitOptions& options, double duration) {
  const Eigen::Index n = x.size();
  const Eigen::VectorXd xd = derivative(x, dt);
  const Eigen::VectorXd xdd = derivative(xd, dt);

  DmpChannel ch;
  ch.name = spec.name;
  ch.kind = spec.kind;
  ch.alpha = options.alpha;
  ch.beta = options.alpha / 4.0;
  ch.start = x[0];
  ch.goal = x[n - 1];
  ch.start_rate = duration * xd[0];
  ch.range = x.maxCoeff() - x.minCoeff();
  ch.degenerate_goal = std::abs(ch.goal - ch.start) <= 1e-12 * std::max(1.0, std::abs(ch.goal));

  std::vector<double> phase(n);
  std::vector<double> target(n);
  const double t2 = duration * duration;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = dt * static_cast<double>(k);
    phase[k] = std::exp(-options.decay * t / duration);
    target[k] = t2 * xdd[k] - ch.alpha * (ch.beta * (ch.goal - x[k]) - duration * xd[k]);
  }
  auto fw = fit_forcing(basis, phase, target, options.ridge);
  ch.weights = std::move(fw.weights);
  ch.slopes = std::move(fw.slopes);
  return ch;
}

DmpVariant fit_variant(const Demonstration& demo, const FitOptions& options, const BasisSet& basis,
                       bool reversed) {
  DmpVariant variant;
  const double duration = demo.duration();
  for (std::size_t c = 0; c < demo.channels.size(); ++c) {
    Eigen::VectorXd x = demo.samples.col(static_cast<Eigen::Index>(c));
    if (reversed) x = x.reverse().eval();
    variant.channels.push_back(fit_channel(demo.channels[c], x, demo.dt, basis, options, duration));
  }
  return variant;
}

struct Derivative {
  double ds;
  Eigen::VectorXd dx;
  Eigen::VectorXd dz;
};

Derivative evaluate(const DmpVariant& variant, const BasisSet& basis, double decay, double scale,
                    double s, const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
  Derivative d;
  d.ds = -decay * s / scale;
  d.dx = z / scale;
  d.dz.resize(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const auto& ch = variant.channels[static_cast<std::size_t>(i)];
    const double f = forcing_value(ch, basis, s).value;
    d.dz[i] = (ch.alpha * (ch.beta * (ch.goal - x[i]) - z[i]) + f) / scale;
  }
  return d;
}

}  // namespace

DmpSegmentModel fit_lwr(const Demonstration& demo, const FitOptions& options) {
  demo.validate();
  DmpSegmentModel model;
  model.canonical.decay = options.decay;
  model.basis = BasisSet::exponential(options.basis_count, options.decay);
  model.duration = demo.duration();
  model.forward = fit_variant(demo, options, model.basis, false);
  return model;
}

DmpVariant fit_backward(const Demonstration& demo, const FitOptions& options) {
  demo.validate();
  return fit_variant(demo, options, BasisSet::exponential(options.basis_count, options.decay), true);
}

DmpSegmentModel fit_segment(const Demonstration& demo, const FitOptions& options) {
  DmpSegmentModel model = fit_lwr(demo, options);
  model.backward = fit_variant(demo, options, model.basis, true);
  return model;
}

DmpState initial_state(const DmpSegmentModel& model, Direction d) {
  const auto& variant = model.variant(d);
  DmpState st;
  st.s = 1.0;
  st.x.resize(static_cast<Eigen::Index>(variant.channels.size()));
  st.z.resize(st.x.size());
  for (std::size_t i = 0; i < variant.channels.size(); ++i) {
    st.x[static_cast<Eigen::Index>(i)] = variant.channels[i].start;
    st.z[static_cast<Eigen::Index>(i)] = variant.channels[i].start_rate;
  }
  return st;
}

DmpState mirror_state(const DmpSegmentModel& model, const DmpState& state) {
  DmpState out;
  out.s = std::exp(-model.canonical.decay) / state.s;
  out.x = state.x;
  out.z = -state.z;
  return out;
}

DmpState step(const DmpSegmentModel& model, const DmpState& state, double tau, double dt,
              Direction direction, const StepOptions& options) {
  if (!std::isfinite(tau) || std::abs(tau) < options.tau_guard)
    throw PhaseFrozen("phase frozen: time constant is not usable, hold the state instead");
  if ((tau > 0.0) != (direction == Direction::forward))
    throw std::invalid_argument("time constant sign does not match execution direction");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");

  const auto& variant = model.variant(direction);
  const double scale = std::abs(tau) * model.duration;
  const double a = model.canonical.decay;
  DmpState next;

  if (options.integrator == Integrator::semi_implicit_euler) {
    const Derivative d = evaluate(variant, model.basis, a, scale, state.s, state.x, state.z);
    next.z = state.z + dt * d.dz;
    next.x = state.x + dt * next.z / scale;
    next.s = state.s + dt * d.ds;
    return next;
  }

  const Derivative k1 = evaluate(variant, model.basis, a, scale, state.s, state.x, state.z);
  const Derivative k2 = evaluate(variant, model.basis, a, scale, state.s + 0.5 * dt * k1.ds,
                                 state.x + 0.5 * dt * k1.dx, state.z + 0.5 * dt * k1.dz);
  const Derivative k3 = evaluate(variant, model.basis, a, scale, state.s + 0.5 * dt * k2.ds,
                                 state.x + 0.5 * dt * k2.dx, state.z + 0.5 * dt * k2.dz);
  const Derivative k4 = evaluate(variant, model.basis, a, scale, state.s + dt * k3.ds,
                                 state.x + dt * k3.dx, state.z + dt * k3.dz);
  next.s = state.s + dt / 6.0 * (k1.ds + 2.0 * k2.ds + 2.0 * k3.ds + k4.ds);
  next.x = state.x + dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
  next.z = state.z + dt / 6.0 * (k1.dz + 2.0 * k2.dz + 2.0 * k3.dz + k4.dz);
  return next;
}

Rollout rollout(const DmpSegmentModel& model, const TauSchedule& tau_schedule, double dt,
                const RolloutOptions& options) {
  const auto& variant = model.variant(options.direction);
  if (variant.channels.empty()) throw std::invalid_argument("rollout: variant not fitted");
  const Eigen::Index m = static_cast<Eigen::Index>(variant.channels.size());

  DmpState st = initial_state(model, options.direction);
  std::vector<double> time{0.0};
  std::vector<double> phase{st.s};
  std::vector<Eigen::VectorXd> xs{st.x};
  const double end = model.end_phase();

  auto pack = [&]() {
    Rollout r;
    r.time = time;
    r.phase = phase;
    r.positions.resize(static_cast<Eigen::Index>(xs.size()), m);
    for (std::size_t k = 0; k < xs.size(); ++k) r.positions.row(static_cast<Eigen::Index>(k)) = xs[k];
    return r;
  };

  std::size_t steps = 0;
  double t = 0.0;
  while (st.s >= end) {
    if (steps >= options.max_steps)
      throw RolloutError("rollout did not reach the end phase within max_steps", pack());
    st = step(model, st, tau_schedule(t), dt, options.direction, options.step);
    ++steps;
    t = dt * static_cast<double>(steps);
    time.push_back(t);
    phase.push_back(st.s);
    xs.push_back(st.x);
  }
  return pack();
}

Rollout rollout(const DmpSegmentModel& model, double tau, double dt, const RolloutOptions& options) {
  return rollout(model, [tau](double) { return tau; }, dt, options);
}

double progress_from_phase(const DmpSegmentModel& model, double forward_phase) {
  if (!(forward_phase > 0.0)) return 1.0;
  const double p = -std::log(forward_phase) / model.canonical.decay;
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace csa::dmp
