#pragma once

#include <Eigen/Core>
#include <functional>
#include <stdexcept>
#include <string>

namespace csa::optim {

struct NelderMeadOptions {
  int max_iterations = 20000;
  double f_abs_tolerance = 1e-18;
  double f_rel_tolerance = 1e-14;
  double x_tolerance = 1e-11;
  int restarts = 2;  // fresh simplex around the incumbent after convergence
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
};

/// Thrown when the simplex has not met the tolerances after max_iterations.
class SimplexStagnation : public std::runtime_error {
 public:
  SimplexStagnation(const std::string& what, Eigen::VectorXd best, double value)
      : std::runtime_error(what), best_(std::move(best)), value_(value) {}
  const Eigen::VectorXd& best() const { return best_; }
  double value() const { return value_; }

 private:
  Eigen::VectorXd best_;
  double value_;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Downhill simplex minimization. initial_step gives the per-coordinate
/// offset of the starting simplex vertices from x0.
NelderMeadResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& initial_step,
                             const NelderMeadOptions& options = {});

}  // namespace csa::optim
