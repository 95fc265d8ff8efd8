#include "csa/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace csa::optim {

namespace {

struct Simplex {
  std::vector<Eigen::VectorXd> x;
  std::vector<double> f;

  void sort() {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> fs;
    for (auto i : idx) {
      xs.push_back(x[i]);
      fs.push_back(f[i]);
    }
    x.swap(xs);
    f.swap(fs);
  }

  double diameter() const {
    double d = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) d = std::max(d, (x[i] - x[0]).lpNorm<Eigen::Infinity>());
    return d;
  }
};

Simplex make_simplex(const Objective& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& step) {
  Simplex s;
  s.x.push_back(x0);
  s.f.push_back(f(x0));
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    Eigen::VectorXd v = x0;
    v[i] += step[i];
    s.x.push_back(v);
    s.f.push_back(f(v));
  }
  return s;
}

// Runs until convergence; returns false when the iteration budget ran out.
bool descend(const Objective& f, Simplex& s, const NelderMeadOptions& o, int& iterations) {
  const std::size_t n = s.x.size() - 1;
  while (true) {
    s.sort();
    const double spread = s.f[n] - s.f[0];
    if (spread <= o.f_abs_tolerance + o.f_rel_tolerance * std::abs(s.f[0]) &&
        s.diameter() <= o.x_tolerance)
      return true;
    if (iterations >= o.max_iterations) return false;
    ++iterations;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(s.x[0].size());
    for (std::size_t i = 0; i < n; ++i) centroid += s.x[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + o.reflection * (centroid - s.x[n]);
    const double fr = f(xr);
    if (fr < s.f[0]) {
      const Eigen::VectorXd xe = centroid + o.expansion * (xr - centroid);
      const double fe = f(xe);
      if (fe < fr) {
        s.x[n] = xe;
        s.f[n] = fe;
      } else {
        s.x[n] = xr;
        s.f[n] = fr;
      }
      continue;
    }
    if (fr < s.f[n - 1]) {
      s.x[n] = xr;
      s.f[n] = fr;
      continue;
    }
    const bool outside = fr < s.f[n];
    const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + o.contraction * (xr - centroid))
                                       : Eigen::VectorXd(centroid + o.contraction * (s.x[n] - centroid));
    const double fc = f(xc);
    if (fc < (outside ? fr : s.f[n])) {
      s.x[n] = xc;
      s.f[n] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      s.x[i] = s.x[0] + o.shrink * (s.x[i] - s.x[0]);
      s.f[i] = f(s.x[i]);
    }
  }
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& initial_step, const NelderMeadOptions& options) {
  if (x0.size() == 0 || initial_step.size() != x0.size())
    throw std::invalid_argument("nelder_mead: bad dimensions");
  int iterations = 0;
  Simplex s = make_simplex(f, x0, initial_step);
  for (int round = 0; round <= options.restarts; ++round) {
    if (!descend(f, s, options, iterations)) {
      s.sort();
      throw SimplexStagnation("simplex stagnated before reaching tolerance", s.x[0], s.f[0]);
    }
    if (round == options.restarts) break;
    // Restart around the incumbent with a step proportional to the original one.
    const Eigen::VectorXd best = s.x[0];
    s = make_simplex(f, best, initial_step * 1e-3);
  }
  s.sort();
  return {s.x[0], s.f[0], iterations};
}

}  // namespace csa::optim
