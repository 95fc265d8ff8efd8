// Acceptance checks, one line per criterion. Exit status is the number of
// failed criteria.
#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "csa/correction.hpp"
#include "csa/dmp.hpp"
#include "csa/metrics.hpp"
#include "csa/plan.hpp"
#include "csa/scenario.hpp"
#include "csa/session.hpp"
#include "csa/surface.hpp"
#include "csa/tasks.hpp"
#include "csa/trace.hpp"
#include "support/demos.hpp"

using namespace csa;

namespace {

struct Checks {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  template <typename T>
  void below(T value, T limit, const std::string& what) {
    if (!(value < limit)) {
      std::ostringstream os;
      os << what << ": " << value << " >= " << limit;
      failures.push_back(os.str());
    }
  }
};

scenario::Scenario task_scenario(const tasks::TaskFiles& t) { return scenario::parse_scenario(t.scenario); }

session::RunResult run_task(const tasks::TaskFiles& t, bool corrective, bool suppress = false,
                            const std::optional<std::filesystem::path>& record = std::nullopt) {
  auto sc = task_scenario(t);
  if (suppress) sc = scenario::suppressed(sc);
  if (corrective) {
    auto user = session::parse_user(t.user);
    return session::run(sc, user, {}, record);
  }
  session::ZeroInput zero;
  return session::run(sc, zero, {}, record);
}

bool same_except_input(const trace::Record& a, const trace::Record& b) {
  return a.tick == b.tick && a.t == b.t && a.segment == b.segment && a.s == b.s && a.progress == b.progress &&
         a.tau == b.tau && a.direction == b.direction && a.hold == b.hold && a.x_n == b.x_n && a.dy == b.dy &&
         a.x_cmd == b.x_cmd && a.position == b.position && a.orientation.coeffs() == b.orientation.coeffs() &&
         a.velocity == b.velocity && a.force == b.force && a.contact == b.contact && a.foot == b.foot;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

// ---------------------------------------------------------------------------

void arbitration_audit(Checks& c) {
  const auto t1 = tasks::insertion();
  const auto path = temp_file("csa_acceptance_audit.jsonl");
  run_task(t1, true, false, path);
  const auto corrected = trace::read_trace(path);
  std::filesystem::remove(path);
  c.expect(corrected.complete, "corrective trace did not read back complete");
  long nonzero = 0, bad = 0;
  for (const auto& r : corrected.records) {
    for (Eigen::Index i = 0; i < r.x_n.size(); ++i)
      if (r.x_cmd[i] != r.x_n[i] + r.dy[i]) ++bad;
    if (!r.dy.isZero(0.0)) ++nonzero;
  }
  c.expect(bad == 0, std::to_string(bad) + " channel values violate x_cmd = x_n + dy");
  c.expect(nonzero > 0, "corrective run applied no correction");

  const auto suppressed = run_task(t1, true, true);
  const auto nominal = run_task(t1, false);
  c.expect(suppressed.trace.records.size() == nominal.trace.records.size(), "suppressed run length differs");
  const std::size_t n = std::min(suppressed.trace.records.size(), nominal.trace.records.size());
  long differ = 0;
  for (std::size_t k = 0; k < n; ++k)
    if (!same_except_input(suppressed.trace.records[k], nominal.trace.records[k])) ++differ;
  c.expect(differ == 0, std::to_string(differ) + " suppressed records differ from nominal");

  // Each nominal segment is the plain rollout of its primitive.
  const session::Session s(task_scenario(t1));
  const auto& plan = s.plan();
  std::vector<std::vector<const trace::Record*>> by_segment(plan.segments.size());
  for (const auto& r : nominal.trace.records) by_segment[r.segment_index].push_back(&r);
  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    const auto roll = dmp::rollout(*plan.segments[i].model, 1.0, s.dt());
    const auto& recs = by_segment[i];
    c.expect(recs.size() + 1 == roll.time.size(), "segment " + plan.segments[i].id + " tick count differs from rollout");
    for (std::size_t k = 0; k < recs.size() && k + 1 < roll.time.size(); ++k) {
      const Eigen::VectorXd row = roll.positions.row(static_cast<Eigen::Index>(k + 1)).transpose();
      if (recs[k]->x_n != row) {
        c.expect(false, "segment " + plan.segments[i].id + " departs from rollout at tick " + std::to_string(recs[k]->tick));
        break;
      }
    }
  }
}

// ---------------------------------------------------------------------------

double x_at_phase(const dmp::Rollout& r, double s, Eigen::Index ch) {
  for (std::size_t k = 1; k < r.phase.size(); ++k) {
    if (r.phase[k] <= s) {
      const double a = (r.phase[k - 1] - s) / (r.phase[k - 1] - r.phase[k]);
      return (1 - a) * r.positions(static_cast<Eigen::Index>(k - 1), ch) + a * r.positions(static_cast<Eigen::Index>(k), ch);
    }
  }
  return r.positions(r.positions.rows() - 1, ch);
}

void dmp_fidelity(Checks& c) {
  using testing::make_demo;
  using testing::min_jerk;
  const double dt = 0.001;

  auto trapezoid = [](double t) {
    if (t < 0.4) return min_jerk(0.0, 10.0, t / 0.4);
    if (t < 0.6) return 10.0;
    return min_jerk(10.0, 0.0, (t - 0.6) / 0.4);
  };
  const auto one_d = make_demo({[](double t) { return min_jerk(0.0, 1.0, t); }}, testing::scalar_layout(), 1.0, dt);
  // Planar path: straight run in x with a lateral bump in y.
  const auto two_d = make_demo({[](double t) { return min_jerk(0.1, 0.4, t); },
                                [](double t) { return 0.05 * std::pow(std::sin(M_PI * t), 2); }},
                               testing::scalar_layout(2), 1.0, dt);
  // Position plus a force profile. The force lags its goal by about 0.2% of
  // range when the phase runs out, so only shape and timing are judged there.
  const ChannelLayout mixed_layout{{"x", ChannelKind::position, "m"}, {"f_z", ChannelKind::force, "N"}};
  const auto mixed = make_demo({[](double t) { return 0.1 + 0.3 * t; }, trapezoid}, mixed_layout, 1.0, dt);

  for (const auto* demo : {&one_d, &two_d, &mixed}) {
    const auto m = dmp::fit_segment(*demo);
    const auto r = dmp::rollout(m, 1.0, dt);
    const std::string tag = demo == &one_d ? "1-D" : demo == &two_d ? "2-D" : "position+force";
    for (Eigen::Index ch = 0; ch < demo->samples.cols(); ++ch) {
      c.below(testing::max_range_error(r, *demo, ch), 0.02, tag + " range error ch" + std::to_string(ch));
      if (demo->channels[static_cast<std::size_t>(ch)].kind != ChannelKind::force) {
        const double goal = m.forward.channels[static_cast<std::size_t>(ch)].goal;
        c.below(std::abs(r.positions(r.positions.rows() - 1, ch) - goal), 1e-3, tag + " goal error ch" + std::to_string(ch));
      }
    }
    for (double tau : {0.5, 2.0}) {
      const auto scaled = dmp::rollout(m, tau, dt);
      for (Eigen::Index ch = 0; ch < demo->samples.cols(); ++ch) {
        double worst = 0;
        for (std::size_t i = 0; i < r.phase.size(); ++i)
          worst = std::max(worst, std::abs(x_at_phase(scaled, r.phase[i], ch) - r.positions(static_cast<Eigen::Index>(i), ch)));
        // Newtons are judged relative to the channel's range.
        const bool force = demo->channels[static_cast<std::size_t>(ch)].kind == ChannelKind::force;
        const double range = force ? m.forward.channels[static_cast<std::size_t>(ch)].range : 1.0;
        c.below(worst / range, 1e-3, tag + " temporal invariance tau=" + std::to_string(tau));
      }
    }
  }
}

// ---------------------------------------------------------------------------

double step_response(double k, double t) {
  const double w = std::sqrt(k);
  return (1.0 - (1.0 + w * t) * std::exp(-w * t)) / k;
}

void correction_ode(Checks& c) {
  const double dt = 0.001;
  for (double k : {100.0, 400.0}) {
    for (double u : {1.0, -0.7}) {
      auto s = correction::CorrectionState::zero(1, k);
      Eigen::VectorXd in(1);
      in << u;
      double overshoot = 0.0, worst = 0.0;
      for (int n = 1; n <= 5000; ++n) {
        s = correction::step_correction(s, in, dt);
        overshoot = std::max(overshoot, std::abs(s.dy[0]) - std::abs(u) / k);
        worst = std::max(worst, std::abs(s.dy[0] - u * step_response(k, n * dt)));
      }
      const std::string tag = "k_c=" + std::to_string(k) + " u=" + std::to_string(u);
      c.expect(overshoot <= 0.0, tag + " overshoots");
      c.below(worst, 1e-12, tag + " step response vs closed form");
      c.below(std::abs(s.dy[0] - u / k), 1e-9, tag + " steady state");
      const double sbar = 0.005;
      correction::CorrectionScaling sc{Eigen::VectorXd::Constant(1, sbar), {true}};
      c.below(std::abs(correction::scaled_correction(s, sc)[0] - u * sbar), 1e-9, tag + " scaled steady state");

      const double start = std::abs(s.dy[0]);
      const int ticks = static_cast<int>(std::ceil(6.0 / std::sqrt(k) / dt));
      bool monotone = true;
      for (int n = 0; n < ticks; ++n) {
        const double before = std::abs(s.dy[0]);
        s = correction::step_correction(s, Eigen::VectorXd::Zero(1), dt);
        monotone = monotone && std::abs(s.dy[0]) <= before;
      }
      c.expect(monotone, tag + " release is not monotone");
      c.below(std::abs(s.dy[0]) / start, 0.02, tag + " decay within 6/sqrt(k_c)");
    }
  }
}

// ---------------------------------------------------------------------------

void rate_heuristic(Checks& c) {
  struct Row {
    double vf, gamma, tau;
  };
  // 1 / (1 + gamma v.f) by hand, or 1 on the positive branch.
  const Row table[] = {{0.5, 3.0, 1.0}, {0.0, 2.0, 1.0}, {-0.5, 1.0, 2.0}, {-1.0, 2.0, -1.0},
                       {-0.25, 2.0, 2.0}, {-0.5, 0.0, 1.0}, {-0.8, 2.5, -1.0}, {-0.2, 1.0, 1.25}};
  for (const auto& row : table) {
    const auto tv = correction::execution_time_constant(row.vf, row.gamma);
    std::ostringstream os;
    os << "tau(" << row.vf << ", " << row.gamma << ") = " << tv.tau << ", expected " << row.tau;
    c.expect(!tv.singular && std::abs(tv.tau - row.tau) < 1e-12, os.str());
  }
  c.expect(correction::execution_time_constant(-0.5, 2.0).singular, "(-0.5, 2) is not singular");

  const auto t3 = tasks::layup();
  const auto sc = task_scenario(t3);
  const session::Session s(sc);
  const auto& plan = s.plan();
  auto user = session::parse_user(t3.user);
  const auto res = session::run(sc, user);
  const auto& recs = res.trace.records;
  const double bound = sc.plant.v_max * s.dt();

  int switches = 0;
  double worst_jump = 0.0;
  for (std::size_t k = 1; k < recs.size(); ++k) {
    if (recs[k].segment_index != recs[k - 1].segment_index || recs[k].direction == recs[k - 1].direction) continue;
    ++switches;
    const auto& seg = plan.segments[recs[k].segment_index];
    const double jump = (plan::cartesian_point(plan, seg, recs[k].x_cmd) - plan::cartesian_point(plan, seg, recs[k - 1].x_cmd)).norm();
    worst_jump = std::max(worst_jump, jump);
  }
  c.expect(switches >= 2, "expected a reversal and a resume, saw " + std::to_string(switches) + " switches");
  c.expect(worst_jump <= bound, "command jumps " + std::to_string(worst_jump) + " m across a switch");

  // Backward nominal path against the forward one at equal progress.
  const auto& seg = plan.segments[plan.index_of("pass_6")];
  std::vector<const trace::Record*> fwd, bwd;
  bool reversed = false;
  for (const auto& r : recs) {
    if (r.segment != "pass_6") continue;
    if (r.direction == dmp::Direction::backward) reversed = true;
    if (!reversed) fwd.push_back(&r);
    else if (r.direction == dmp::Direction::backward && !r.hold) bwd.push_back(&r);
  }
  c.expect(!fwd.empty() && !bwd.empty(), "pass_6 has no reversal episode");
  double range = 0.0;
  for (const auto& ch : seg.model->forward.channels)
    if (is_kinematic(ch.kind)) range = std::max(range, ch.range);
  double worst = 0.0;
  for (const auto* b : bwd) {
    std::size_t j = 1;
    while (j < fwd.size() && fwd[j]->progress < b->progress) ++j;
    if (j >= fwd.size() || fwd[j - 1]->progress > b->progress) continue;
    const double span = fwd[j]->progress - fwd[j - 1]->progress;
    const double a = span > 0 ? (b->progress - fwd[j - 1]->progress) / span : 0.0;
    const Eigen::VectorXd xf = (1 - a) * fwd[j - 1]->x_n + a * fwd[j]->x_n;
    double d = 0.0;
    for (std::size_t ch = 0; ch < seg.model->forward.channels.size(); ++ch)
      if (is_kinematic(seg.model->forward.channels[ch].kind))
        d = std::max(d, std::abs(xf[static_cast<Eigen::Index>(ch)] - b->x_n[static_cast<Eigen::Index>(ch)]));
    worst = std::max(worst, d);
  }
  c.below(worst / range, 0.03, "backward/forward path overlap");
}

// ---------------------------------------------------------------------------

double cox_de_boor(const std::vector<double>& U, int i, int p, double u) {
  auto at = [&](int k) { return U[static_cast<std::size_t>(k)]; };
  if (p == 0) {
    const bool last = u == U.back() && at(i + 1) == U.back() && at(i) < at(i + 1);
    return ((at(i) <= u && u < at(i + 1)) || last) ? 1.0 : 0.0;
  }
  double a = 0.0, b = 0.0;
  if (at(i + p) > at(i)) a = (u - at(i)) / (at(i + p) - at(i)) * cox_de_boor(U, i, p - 1, u);
  if (at(i + p + 1) > at(i + 1)) b = (at(i + p + 1) - u) / (at(i + p + 1) - at(i + 1)) * cox_de_boor(U, i + 1, p - 1, u);
  return a + b;
}

Eigen::Vector3d naive_point(const surface::BSplineSurface& s, double u, double v) {
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (int i = 0; i < s.rows(); ++i)
    for (int j = 0; j < s.cols(); ++j)
      out += cox_de_boor(s.knots_u(), i, s.degree_u(), u) * cox_de_boor(s.knots_v(), j, s.degree_v(), v) *
             s.control_points()[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return out;
}

std::vector<std::pair<std::string, surface::BSplineSurface>> task_surfaces() {
  std::vector<std::pair<std::string, surface::BSplineSurface>> out;
  for (const auto& t : tasks::all()) {
    const auto sc = task_scenario(t);
    for (const auto& [name, surf] : sc.surfaces) out.emplace_back(t.name + "/" + name, *surf);
  }
  return out;
}

void surface_suite(Checks& c) {
  for (int p : {1, 2, 3, 4}) {
    const auto U = surface::clamped_uniform_knots(9, p);
    double worst = 0;
    for (int k = 0; k <= 2000; ++k) {
      double sum = 0;
      for (double x : surface::basis_values(U, p, 9, k / 2000.0)) sum += x;
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    c.below(worst, 1e-12, "partition of unity p=" + std::to_string(p));
  }

  for (const auto& [name, s] : task_surfaces()) {
    double eval = 0, normal = 0, idem = 0;
    const double h = 1e-6;
    for (int a = 1; a < 20; ++a)
      for (int b = 1; b < 20; ++b) {
        const double u = a / 20.0, v = b / 20.0;
        eval = std::max(eval, (s.point(u, v) - naive_point(s, u, v)).norm());
        const Eigen::Vector3d tu = (s.point(u + h, v) - s.point(u - h, v)) / (2 * h);
        const Eigen::Vector3d tv = (s.point(u, v + h) - s.point(u, v - h)) / (2 * h);
        const Eigen::Vector3d fd = s.normal_sign() * tu.cross(tv).normalized();
        normal = std::max(normal, (surface::eval_normal(s, u, v) - fd).norm());
        const auto pr = surface::project_to_surface(s, s.point(u, v), {0.5, 0.5});
        idem = std::max(idem, std::max(std::abs(pr.u - u), std::abs(pr.v - v)));
      }
    c.below(eval, 1e-12, name + " evaluation vs naive sum");
    c.below(normal, 1e-5, name + " normal vs finite differences");
    c.below(idem, 1e-6, name + " projection idempotence");

    std::vector<Eigen::Vector3d> pts;
    for (const auto& row : s.control_points())
      for (const auto& q : row) pts.push_back(q);
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto& q : pts) centroid += q;
    centroid /= static_cast<double>(pts.size());
    Eigen::MatrixXd A(static_cast<Eigen::Index>(pts.size()), 3);
    for (std::size_t k = 0; k < pts.size(); ++k) A.row(static_cast<Eigen::Index>(k)) = (pts[k] - centroid).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinV);
    const Eigen::Vector3d n = svd.matrixV().col(2);
    double oracle = 0;
    for (const auto& q : pts) oracle += std::pow((q - centroid).dot(n), 2);
    const auto fit = surface::best_fit_plane(s);
    c.expect(fit.objective <= oracle + 1e-8, name + " plane objective above the SVD optimum");
  }

  // Planar nets: known plane, known rotation.
  for (double deg : {0.0, 15.0, 35.0}) {
    const double angle = deg * M_PI / 180.0;
    const Eigen::Matrix3d R = Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitY()).toRotationMatrix();
    surface::ControlGrid g(5, std::vector<Eigen::Vector3d>(4));
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 4; ++j)
        g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = R * Eigen::Vector3d(0.1 * i - 0.2, 0.08 * j - 0.1, 0.4);
    const auto fit = surface::best_fit_plane(surface::BSplineSurface::clamped_uniform(3, 3, g));
    const std::string tag = "plane tilted " + std::to_string(static_cast<int>(deg)) + " deg";
    c.below(fit.objective, 1e-16, tag + " objective");
    const double err = std::acos(std::clamp(fit.normal.dot(R.col(2)), -1.0, 1.0));
    c.below(err, 1e-4, tag + " normal angle");
    c.below(std::abs(fit.offset - 0.4), 1e-6, tag + " offset");
  }
}

// ---------------------------------------------------------------------------

void transition_suite(Checks& c) {
  int free_to_surface = 0, surface_to_free = 0;
  for (const auto& t : tasks::all()) {
    const session::Session s(task_scenario(t));
    const auto& plan = s.plan();
    for (std::size_t i = 0; i + 1 < plan.segments.size(); ++i) {
      const auto& from = plan.segments[i];
      const auto& to = plan.segments[i + 1];
      const Eigen::VectorXd end = from.model->goal_values();
      const Eigen::VectorXd start = to.model->start_values();
      const std::string tag = t.name + " " + from.id + "->" + to.id;

      const auto zero = plan::transition(plan, i, end, Eigen::VectorXd::Zero(end.size()));
      c.expect(zero.x0 == start, tag + " zero-correction start differs from nominal");

      const auto kind = plan.transitions[i];
      if (kind == plan::TransitionKind::free_to_surface) {
        ++free_to_surface;
        const auto& surf = *plan.surface_of(to)->surface;
        const double u = std::clamp(start[0] + 0.01, 0.05, 0.95);
        const double v = std::clamp(start[1] - 0.01, 0.05, 0.95);
        const Eigen::Vector3d target = surf.point(u, v);
        const Eigen::VectorXd corr = target - end.head<3>();
        const auto tr = plan::transition(plan, i, end, corr);
        const double miss = (surf.point(tr.x0[0], tr.x0[1]) - target).norm();
        c.below(miss, 1e-4, tag + " handoff");
        c.expect(tr.x0[2] == start[2], tag + " handoff changed the force");
      } else if (kind == plan::TransitionKind::surface_to_free) {
        ++surface_to_free;
        const auto& surf = *plan.surface_of(from)->surface;
        Eigen::VectorXd corr(3), pushed(3);
        corr << 0.003, -0.002, 0.0;
        pushed << 0.003, -0.002, 4.0;
        const auto a = plan::transition(plan, i, end, corr);
        const auto b = plan::transition(plan, i, end, pushed);
        c.expect(a.x0 == b.x0, tag + " force correction leaked into position");
        const Eigen::Vector3d oracle = surf.point(end[0] + 0.003, end[1] - 0.002);
        c.below((b.x0.head<3>() - oracle).norm(), 1e-12, tag + " lift-off point");
      }
    }
  }
  c.expect(free_to_surface > 0 && surface_to_free > 0, "task plans lack cross-mode transitions");
}

// ---------------------------------------------------------------------------

void scenario_reenactment(Checks& c) {
  {
    const auto t1 = tasks::insertion();
    const auto nominal = metrics::compute_metrics(run_task(t1, false).trace).outcome;
    const auto corrective = metrics::compute_metrics(run_task(t1, true).trace).outcome;
    const auto& nh = nominal.details.at("holes");
    const auto& ch = corrective.details.at("holes");
    c.expect(nh.size() == 3 && ch.size() == 3, "task 1 expects three holes");
    if (nh.size() == 3 && ch.size() == 3) {
      c.expect(nh[0].at("success").get<bool>(), "task 1 nominal: rivet 1 should succeed");
      c.expect(!nh[1].at("success").get<bool>() && !nh[2].at("success").get<bool>(),
               "task 1 nominal: rivets 2 and 3 should fail");
      for (int k = 0; k < 3; ++k)
        c.expect(ch[static_cast<std::size_t>(k)].at("success").get<bool>(),
                 "task 1 corrective: rivet " + std::to_string(k + 1) + " failed");
    }
    c.expect(!nominal.success && corrective.success, "task 1 overall outcome");
  }
  {
    const auto t2 = tasks::polishing();
    const auto nominal = metrics::compute_metrics(run_task(t2, false).trace).outcome;
    const auto corrective = metrics::compute_metrics(run_task(t2, true).trace).outcome;
    auto cleared = [](const outcome::Report& r) {
      for (const auto& d : r.details.at("defects"))
        if (!d.at("cleared").get<bool>()) return false;
      return true;
    };
    c.expect(!cleared(nominal), "task 2 nominal cleared the defect");
    c.expect(cleared(corrective), "task 2 corrective left the defect");
    c.expect(corrective.success, "task 2 corrective outcome");
  }
  {
    const auto t3 = tasks::layup();
    const auto sc = task_scenario(t3);
    for (const auto& seg : sc.segments)
      if (seg.id == "pass_6") c.expect(seg.gamma > 1.0, "task 3 pass_6 gamma is not above 1");
    const auto nominal = metrics::compute_metrics(run_task(t3, false).trace);
    const auto corrective = metrics::compute_metrics(run_task(t3, true).trace);
    c.expect(nominal.outcome.details.at("crease").get<bool>(), "task 3 nominal raised no crease");
    c.expect(!corrective.outcome.details.at("crease").get<bool>(), "task 3 corrective still creased");
    c.expect(corrective.outcome.success, "task 3 corrective outcome");
    c.expect(corrective.backward_ticks > 0, "task 3 corrective never backtracked");
  }
}

// ---------------------------------------------------------------------------

std::vector<trace::Record> synthetic(const std::vector<double>& u_x) {
  std::vector<trace::Record> out(u_x.size());
  for (std::size_t k = 0; k < u_x.size(); ++k) {
    out[k].tick = static_cast<long>(k);
    out[k].u = Eigen::Vector3d(u_x[k], 0.0, 0.0);
  }
  return out;
}

void metrics_suite(Checks& c) {
  using metrics::InputMethod;
  const double dt = 0.001, range = 0.02;
  auto corrective = [&](const std::vector<trace::Record>& r) {
    return metrics::compute_input_time(r, InputMethod::corrective, dt, range);
  };
  auto motion = [&](const std::vector<trace::Record>& r) {
    return metrics::compute_input_time(r, InputMethod::motion_based, dt, range);
  };

  // Idle 3 s, then held at 10 mm for 2 s.
  std::vector<double> u(3000, 0.0);
  u.insert(u.end(), 2000, 0.5);
  auto r = synthetic(u);
  c.expect(corrective(r) == 2000 * dt, "idle-then-hold corrective time");
  c.expect(motion(r) == 1 * dt, "idle-then-hold motion time");

  r = synthetic(std::vector<double>(4000, 0.0));
  c.expect(corrective(r) == 0.0 && motion(r) == 0.0, "all-zero trace");

  // Exactly d is not beyond d; only the first tick moves.
  r = synthetic(std::vector<double>(1000, 0.25));
  c.expect(corrective(r) == 0.0, "displacement of exactly d counted");
  c.expect(motion(r) == 1 * dt, "exactly-d motion time");

  // Fast ramp at 22 mm/s for 500 ticks, slow ramp at 5 mm/s for 500, hold
  // 200, snap back, rest 299. Beyond 5 mm from tick 227 of the fast ramp.
  u.clear();
  for (int k = 0; k < 500; ++k) u.push_back(0.0011 * (k + 1));
  for (int k = 0; k < 500; ++k) u.push_back(0.55 + 0.00025 * (k + 1));
  u.insert(u.end(), 200, u.back());
  u.insert(u.end(), 300, 0.0);
  r = synthetic(u);
  c.expect(motion(r) == 501 * dt, "ramp motion time " + std::to_string(motion(r)));
  c.expect(corrective(r) == 973 * dt, "ramp corrective time " + std::to_string(corrective(r)));

  // Task 1: device held during each scripted window.
  const auto t1 = tasks::insertion();
  const auto path = temp_file("csa_acceptance_metrics.jsonl");
  run_task(t1, true, false, path);
  const auto tr = trace::read_trace(path);
  std::filesystem::remove(path);
  const auto m = metrics::compute_metrics(tr);
  long window_ticks = 0;
  int windows = 0;
  for (const char* n : {"2", "3"}) {
    long first = -1, last = -1;
    for (const auto& rec : tr.records) {
      if (first < 0 && rec.segment == std::string("carry_") + n && rec.progress >= 0.5) first = rec.tick;
      if (rec.segment == std::string("place_") + n) last = rec.tick;
    }
    if (first >= 0 && last >= first) {
      window_ticks += last - first + 1;
      ++windows;
    }
  }
  c.expect(windows == 2, "task 1 scripted windows not found");
  const double expected = static_cast<double>(window_ticks) * tr.header.dt;
  c.expect(std::abs(m.t_input_corrective - expected) <= windows * tr.header.dt + 1e-12,
           "task 1 corrective time " + std::to_string(m.t_input_corrective) + " vs window " + std::to_string(expected));

  // Replay closure.
  auto sc = scenario::parse_scenario(tr.header.scenario);
  session::ReplayInput replay(tr);
  const auto again = session::run(sc, replay);
  c.expect(again.trace.records.size() == tr.records.size(), "replay length differs");
  long mismatched = 0;
  for (std::size_t k = 0; k < std::min(again.trace.records.size(), tr.records.size()); ++k)
    if (trace::record_to_json(again.trace.records[k]) != trace::record_to_json(tr.records[k])) ++mismatched;
  c.expect(mismatched == 0, std::to_string(mismatched) + " replayed records differ");
  const auto m2 = metrics::compute_metrics(again.trace);
  c.expect(m2.t_input_corrective == m.t_input_corrective && m2.t_input_motion == m.t_input_motion,
           "replayed metrics differ");
}

struct Criterion {
  int id;
  std::string name;
  double limit_s;
  std::function<void(Checks&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "arbitration audit", 5.0, arbitration_audit},
      {2, "primitive fidelity", 10.0, dmp_fidelity},
      {3, "correction dynamics", 2.0, correction_ode},
      {4, "rate heuristic", 5.0, rate_heuristic},
      {5, "surface suite", 10.0, surface_suite},
      {6, "transition suite", 5.0, transition_suite},
      {7, "scenario re-enactment", 60.0, scenario_reenactment},
      {8, "input-time metrics", 5.0, metrics_suite},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Checks checks;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.body(checks);
    } catch (const std::exception& e) {
      checks.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= cr.limit_s) {
      std::ostringstream os;
      os << "took " << secs << " s, limit " << cr.limit_s << " s";
      checks.failures.push_back(os.str());
    }
    const bool pass = checks.failures.empty();
    failed += pass ? 0 : 1;
    std::printf("criterion %d: %s  %-22s %.2f s (limit %.0f s)\n", cr.id, pass ? "PASS" : "FAIL", cr.name.c_str(), secs,
                cr.limit_s);
    for (const auto& f : checks.failures) std::printf("    %s\n", f.c_str());
    std::fflush(stdout);
  }
  return failed;
}
