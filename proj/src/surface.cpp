#include "csa/surface.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "csa/nelder_mead.hpp"

namespace csa::surface {

namespace {

int find_span(int n, int p, double u, const std::vector<double>& U) {
  // n: index of the last control point
  if (u >= U[static_cast<std::size_t>(n + 1)]) return n;
  if (u <= U[static_cast<std::size_t>(p)]) return p;
  int low = p;
  int high = n + 1;
  int mid = (low + high) / 2;
  while (u < U[static_cast<std::size_t>(mid)] || u >= U[static_cast<std::size_t>(mid + 1)]) {
    if (u < U[static_cast<std::size_t>(mid)])
      high = mid;
    else
      low = mid;
    mid = (low + high) / 2;
  }
  return mid;
}

// Basis functions and derivatives up to order nd at span i: ders[k][j] is the
// k-th derivative of N_{i-p+j,p}(u).
std::vector<std::vector<double>> ders_basis(int i, double u, int p, int nd, const std::vector<double>& U) {
  std::vector<std::vector<double>> ndu(p + 1, std::vector<double>(p + 1, 0.0));
  std::vector<double> left(p + 1), right(p + 1);
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = u - U[static_cast<std::size_t>(i + 1 - j)];
    right[j] = U[static_cast<std::size_t>(i + j)] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  std::vector<std::vector<double>> ders(nd + 1, std::vector<double>(p + 1, 0.0));
  for (int j = 0; j <= p; ++j) ders[0][j] = ndu[j][p];
  std::array<std::vector<double>, 2> a{std::vector<double>(p + 1, 0.0), std::vector<double>(p + 1, 0.0)};
  for (int r = 0; r <= p; ++r) {
    int s1 = 0;
    int s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= nd; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      ders[k][r] = d;
      std::swap(s1, s2);
    }
  }
  int factor = p;
  for (int k = 1; k <= nd; ++k) {
    for (int j = 0; j <= p; ++j) ders[k][j] *= factor;
    factor *= (p - k);
  }
  return ders;
}

void validate_knots(const std::vector<double>& knots, int degree, int count, const char* axis) {
  const std::string name(axis);
  if (degree < 1) throw std::invalid_argument("degree_" + name + " must be >= 1");
  if (count < degree + 1)
    throw std::invalid_argument("control count along " + name + " (" + std::to_string(count) +
                                ") must exceed degree");
  const std::size_t expected = static_cast<std::size_t>(count + degree + 1);
  if (knots.size() != expected)
    throw std::invalid_argument("knots_" + name + " has " + std::to_string(knots.size()) +
                                " entries, expected " + std::to_string(expected));
  for (std::size_t k = 0; k < knots.size(); ++k) {
    if (!std::isfinite(knots[k]))
      throw std::invalid_argument("knots_" + name + "[" + std::to_string(k) + "] is not finite");
    if (k > 0 && knots[k] < knots[k - 1])
      throw std::invalid_argument("knots_" + name + " decreases at index " + std::to_string(k));
  }
  for (int k = 0; k <= degree; ++k) {
    if (knots[static_cast<std::size_t>(k)] != 0.0)
      throw std::invalid_argument("knots_" + name + "[" + std::to_string(k) +
                                  "] must be 0 (clamped start)");
    const std::size_t e = knots.size() - 1 - static_cast<std::size_t>(k);
    if (knots[e] != 1.0)
      throw std::invalid_argument("knots_" + name + "[" + std::to_string(e) + "] must be 1 (clamped end)");
  }
}

}  // namespace

std::vector<double> clamped_uniform_knots(int control_count, int degree) {
  if (degree < 1 || control_count < degree + 1)
    throw std::invalid_argument("clamped_uniform_knots: need control_count > degree >= 1");
  std::vector<double> knots;
  for (int k = 0; k <= degree; ++k) knots.push_back(0.0);
  const int interior = control_count - degree - 1;
  for (int k = 1; k <= interior; ++k) knots.push_back(static_cast<double>(k) / (interior + 1));
  for (int k = 0; k <= degree; ++k) knots.push_back(1.0);
  return knots;
}

std::vector<double> basis_values(const std::vector<double>& knots, int degree, int control_count,
                                 double u) {
  u = std::clamp(u, 0.0, 1.0);
  std::vector<double> out(static_cast<std::size_t>(control_count), 0.0);
  const int span = find_span(control_count - 1, degree, u, knots);
  const auto d = ders_basis(span, u, degree, 0, knots);
  for (int j = 0; j <= degree; ++j) out[static_cast<std::size_t>(span - degree + j)] = d[0][j];
  return out;
}

BSplineSurface::BSplineSurface(int degree_u, int degree_v, std::vector<double> knots_u,
                               std::vector<double> knots_v, ControlGrid control_points, int normal_sign)
    : degree_u_(degree_u),
      degree_v_(degree_v),
      knots_u_(std::move(knots_u)),
      knots_v_(std::move(knots_v)),
      control_(std::move(control_points)),
      normal_sign_(normal_sign) {
  if (normal_sign_ != 1 && normal_sign_ != -1) throw std::invalid_argument("normal_sign must be +1 or -1");
  if (control_.empty() || control_.front().empty())
    throw std::invalid_argument("control net is empty");
  const std::size_t cols = control_.front().size();
  for (std::size_t i = 0; i < control_.size(); ++i) {
    if (control_[i].size() != cols)
      throw std::invalid_argument("control row " + std::to_string(i) + " has " +
                                  std::to_string(control_[i].size()) + " points, expected " +
                                  std::to_string(cols));
    for (std::size_t j = 0; j < cols; ++j)
      if (!control_[i][j].allFinite())
        throw std::invalid_argument("control point (" + std::to_string(i) + "," + std::to_string(j) +
                                    ") is not finite");
  }
  validate_knots(knots_u_, degree_u_, rows(), "u");
  validate_knots(knots_v_, degree_v_, static_cast<int>(cols), "v");
  for (std::size_t i = 0; i + 1 < control_.size(); ++i) {
    bool same = true;
    for (std::size_t j = 0; j < cols && same; ++j) same = control_[i][j] == control_[i + 1][j];
    if (same)
      throw std::invalid_argument("control rows " + std::to_string(i) + " and " + std::to_string(i + 1) +
                                  " are identical");
  }
  for (std::size_t j = 0; j + 1 < cols; ++j) {
    bool same = true;
    for (std::size_t i = 0; i < control_.size() && same; ++i) same = control_[i][j] == control_[i][j + 1];
    if (same)
      throw std::invalid_argument("control columns " + std::to_string(j) + " and " + std::to_string(j + 1) +
                                  " are identical");
  }
}

BSplineSurface BSplineSurface::clamped_uniform(int degree_u, int degree_v, ControlGrid control_points,
                                               int normal_sign) {
  const int r = static_cast<int>(control_points.size());
  const int c = r > 0 ? static_cast<int>(control_points.front().size()) : 0;
  if (r <= degree_u || c <= degree_v) throw std::invalid_argument("control net too small for degree");
  return BSplineSurface(degree_u, degree_v, clamped_uniform_knots(r, degree_u),
                        clamped_uniform_knots(c, degree_v), std::move(control_points), normal_sign);
}

Eigen::Vector3d BSplineSurface::point(double u, double v) const {
  u = std::clamp(u, 0.0, 1.0);
  v = std::clamp(v, 0.0, 1.0);
  const int su = find_span(rows() - 1, degree_u_, u, knots_u_);
  const int sv = find_span(cols() - 1, degree_v_, v, knots_v_);
  const auto nu = ders_basis(su, u, degree_u_, 0, knots_u_);
  const auto nv = ders_basis(sv, v, degree_v_, 0, knots_v_);
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (int a = 0; a <= degree_u_; ++a) {
    Eigen::Vector3d row = Eigen::Vector3d::Zero();
    for (int b = 0; b <= degree_v_; ++b)
      row += nv[0][b] * control_[static_cast<std::size_t>(su - degree_u_ + a)][static_cast<std::size_t>(sv - degree_v_ + b)];
    out += nu[0][a] * row;
  }
  return out;
}

SurfacePoint BSplineSurface::derivatives(double u, double v) const {
  u = std::clamp(u, 0.0, 1.0);
  v = std::clamp(v, 0.0, 1.0);
  const int su = find_span(rows() - 1, degree_u_, u, knots_u_);
  const int sv = find_span(cols() - 1, degree_v_, v, knots_v_);
  const int du = std::min(2, degree_u_);
  const int dv = std::min(2, degree_v_);
  const auto nu = ders_basis(su, u, degree_u_, du, knots_u_);
  const auto nv = ders_basis(sv, v, degree_v_, dv, knots_v_);
  Eigen::Vector3d s[3][3];
  for (auto& r : s)
    for (auto& c : r) c.setZero();
  for (int k = 0; k <= du; ++k) {
    for (int l = 0; l + k <= 2 && l <= dv; ++l) {
      for (int a = 0; a <= degree_u_; ++a) {
        Eigen::Vector3d row = Eigen::Vector3d::Zero();
        for (int b = 0; b <= degree_v_; ++b)
          row += nv[l][b] * control_[static_cast<std::size_t>(su - degree_u_ + a)][static_cast<std::size_t>(sv - degree_v_ + b)];
        s[k][l] += nu[k][a] * row;
      }
    }
  }
  return {s[0][0], s[1][0], s[0][1], s[2][0], s[1][1], s[0][2]};
}

Eigen::Vector3d eval_surface(const BSplineSurface& surf, double u, double v) { return surf.point(u, v); }

Eigen::Vector3d eval_normal(const BSplineSurface& surf, double u, double v) {
  const SurfacePoint d = surf.derivatives(u, v);
  const Eigen::Vector3d n = d.du.cross(d.dv);
  const double len = n.norm();
  if (len < 1e-10)
    throw DegenerateSurface("degenerate parameterization at (" + std::to_string(u) + "," +
                            std::to_string(v) + ")");
  return static_cast<double>(surf.normal_sign()) * n / len;
}

SurfaceFrame surface_frame(const BSplineSurface& surf, double u, double v) {
  const SurfacePoint d = surf.derivatives(u, v);
  SurfaceFrame f;
  f.origin = d.point;
  f.normal = eval_normal(surf, u, v);
  f.tangent_u = d.du.normalized();
  f.tangent_v = f.normal.cross(f.tangent_u);
  return f;
}

namespace {

std::vector<double> averaged_params(const SampleGrid& q, bool along_u, Parameterization param) {
  const std::size_t R = q.size();
  const std::size_t C = q.front().size();
  const std::size_t n = along_u ? R : C;
  const std::size_t lines = along_u ? C : R;
  std::vector<double> out(n, 0.0);
  if (param == Parameterization::uniform) {
    for (std::size_t k = 0; k < n; ++k) out[k] = static_cast<double>(k) / static_cast<double>(n - 1);
    return out;
  }
  std::size_t used = 0;
  for (std::size_t line = 0; line < lines; ++line) {
    std::vector<double> cum(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
      const auto& a = along_u ? q[k][line] : q[line][k];
      const auto& b = along_u ? q[k - 1][line] : q[line][k - 1];
      cum[k] = cum[k - 1] + (a - b).norm();
    }
    if (cum[n - 1] <= 0.0) continue;
    for (std::size_t k = 0; k < n; ++k) out[k] += cum[k] / cum[n - 1];
    ++used;
  }
  if (used == 0) throw DegenerateSurface("insufficient sample coverage: zero chord length");
  for (auto& x : out) x /= static_cast<double>(used);
  out.front() = 0.0;
  out.back() = 1.0;
  return out;
}

Eigen::MatrixXd collocation(const std::vector<double>& params, const std::vector<double>& knots, int degree,
                            int count) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(params.size()), count);
  for (std::size_t r = 0; r < params.size(); ++r) {
    const auto row = basis_values(knots, degree, count, params[r]);
    for (int c = 0; c < count; ++c) a(static_cast<Eigen::Index>(r), c) = row[static_cast<std::size_t>(c)];
  }
  return a;
}

void require_full_rank(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) < 1e-12 * sv(0))
    throw DegenerateSurface("insufficient sample coverage");
}

}  // namespace

SurfaceFit fit_control_points(const SampleGrid& samples, int degree_u, int degree_v, int rows, int cols,
                              Parameterization param, int normal_sign) {
  if (samples.empty() || samples.front().empty()) throw std::invalid_argument("empty sample grid");
  const std::size_t R = samples.size();
  const std::size_t C = samples.front().size();
  for (const auto& row : samples)
    if (row.size() != C) throw std::invalid_argument("sample grid rows have different lengths");
  if (static_cast<int>(R) < rows || static_cast<int>(C) < cols)
    throw DegenerateSurface("insufficient sample coverage: sample grid smaller than control grid");

  const auto pu = averaged_params(samples, true, param);
  const auto pv = averaged_params(samples, false, param);
  const auto ku = clamped_uniform_knots(rows, degree_u);
  const auto kv = clamped_uniform_knots(cols, degree_v);
  const Eigen::MatrixXd au = collocation(pu, ku, degree_u, rows);
  const Eigen::MatrixXd av = collocation(pv, kv, degree_v, cols);
  require_full_rank(au);
  require_full_rank(av);

  const auto qru = au.colPivHouseholderQr();
  const auto qrv = av.colPivHouseholderQr();
  ControlGrid grid(static_cast<std::size_t>(rows), std::vector<Eigen::Vector3d>(static_cast<std::size_t>(cols)));
  for (int coord = 0; coord < 3; ++coord) {
    Eigen::MatrixXd q(static_cast<Eigen::Index>(R), static_cast<Eigen::Index>(C));
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < C; ++c) q(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = samples[r][c][coord];
    const Eigen::MatrixXd x = qru.solve(q);                       // rows x C
    const Eigen::MatrixXd p = qrv.solve(x.transpose()).transpose();  // rows x cols
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][coord] = p(i, j);
  }

  SurfaceFit fit{BSplineSurface(degree_u, degree_v, ku, kv, std::move(grid), normal_sign), 0.0, pu, pv};
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c)
      fit.max_residual = std::max(fit.max_residual, (fit.surface.point(pu[r], pv[c]) - samples[r][c]).norm());
  return fit;
}

Eigen::Vector3d plane_normal(const Eigen::Vector3d& w) {
  const double theta = std::hypot(w.x(), w.y());
  const double sinc = theta < 1e-8 ? 1.0 - theta * theta / 6.0 : std::sin(theta) / theta;
  return {w.y() * sinc, -w.x() * sinc, std::cos(theta)};
}

double plane_objective(const std::vector<Eigen::Vector3d>& points, const Eigen::Vector3d& w, double d) {
  const Eigen::Vector3d n = plane_normal(w);
  double sum = 0.0;
  for (const auto& p : points) {
    const double r = (d * n - p).dot(n);
    sum += r * r;
  }
  return sum;
}

double plane_linear_objective(const std::vector<Eigen::Vector3d>& points, const Eigen::Vector3d& w, double d) {
  const Eigen::Vector3d n = plane_normal(w);
  double sum = 0.0;
  for (const auto& p : points) sum += (d * n - p).dot(n);
  return sum;
}

namespace {

Eigen::Vector3d rotation_vector_for(const Eigen::Vector3d& n) {
  const double s = std::hypot(n.x(), n.y());
  const double theta = std::atan2(s, n.z());
  if (s < 1e-300) return n.z() >= 0.0 ? Eigen::Vector3d::Zero() : Eigen::Vector3d(M_PI, 0.0, 0.0);
  return {-theta * n.y() / s, theta * n.x() / s, 0.0};
}

}  // namespace

PlaneFit best_fit_plane(const BSplineSurface& surf) {
  std::vector<Eigen::Vector3d> pts;
  for (const auto& row : surf.control_points())
    for (const auto& p : row) pts.push_back(p);
  if (pts.size() < 3) throw std::invalid_argument("plane fit needs at least 3 control points");

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  Eigen::MatrixXd centered(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t k = 0; k < pts.size(); ++k) centered.row(static_cast<Eigen::Index>(k)) = (pts[k] - centroid).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  if (svd.singularValues()(1) < 1e-12 * std::max(1.0, svd.singularValues()(0)))
    throw std::invalid_argument("plane fit needs non-collinear control points");
  Eigen::Vector3d n0 = svd.matrixV().col(2);

  // Orient toward the tool side using the surface normals.
  Eigen::Vector3d ref = Eigen::Vector3d::Zero();
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      try {
        ref += eval_normal(surf, 0.1 + 0.2 * a, 0.1 + 0.2 * b);
      } catch (const DegenerateSurface&) {
      }
    }
  if (n0.dot(ref) < 0.0) n0 = -n0;

  PlaneFit fit;
  const Eigen::Vector3d w0 = rotation_vector_for(n0);
  const double d0 = centroid.dot(plane_normal(w0));
  fit.svd_objective = plane_objective(pts, w0, d0);

  double extent = 0.0;
  for (const auto& p : pts) extent = std::max(extent, (p - centroid).norm());
  const auto objective = [&pts](const Eigen::VectorXd& x) {
    return plane_objective(pts, Eigen::Vector3d(x[0], x[1], 0.0), x[2]);
  };
  Eigen::VectorXd x0(3);
  x0 << w0.x(), w0.y(), d0;
  Eigen::VectorXd step(3);
  step << 0.05, 0.05, std::max(1e-3, 0.05 * extent);
  const auto result = optim::nelder_mead(objective, x0, step);

  fit.rotation_vector = {result.x[0], result.x[1], 0.0};
  fit.offset = result.x[2];
  fit.objective = result.value;
  fit.iterations = result.iterations;
  fit.normal = plane_normal(fit.rotation_vector);
  fit.linear_objective = plane_linear_objective(pts, fit.rotation_vector, fit.offset);

  const auto& grid = surf.control_points();
  Eigen::Vector3d gu = Eigen::Vector3d::Zero();
  Eigen::Vector3d gv = Eigen::Vector3d::Zero();
  for (std::size_t j = 0; j < grid.front().size(); ++j) gu += grid.back()[j] - grid.front()[j];
  for (const auto& row : grid) gv += row.back() - row.front();
  const Eigen::Vector3d& n = fit.normal;
  Eigen::Vector3d eu = gu - gu.dot(n) * n;
  if (eu.norm() < 1e-12) {
    eu = Eigen::Vector3d::UnitX() - n.x() * n;
    if (eu.norm() < 1e-12) eu = Eigen::Vector3d::UnitY() - n.y() * n;
  }
  eu.normalize();
  const Eigen::Vector3d ev = n.cross(eu);
  fit.input_rotation.col(0) = eu;
  fit.input_rotation.col(1) = ev;
  fit.input_rotation.col(2) = n;
  fit.v_axis_sign = ev.dot(gv) >= 0.0 ? 1 : -1;
  return fit;
}

namespace {

double dist2(const BSplineSurface& surf, const Eigen::Vector3d& p, double u, double v) {
  return (surf.point(u, v) - p).squaredNorm();
}

}  // namespace

Projection refine_projection(const BSplineSurface& surf, const Eigen::Vector3d& p,
                             std::pair<double, double> seed, const ProjectionOptions& options) {
  double u = std::clamp(seed.first, 0.0, 1.0);
  double v = std::clamp(seed.second, 0.0, 1.0);
  Projection out;
  double f = dist2(surf, p, u, v);
  for (int it = 0; it < options.max_iterations; ++it) {
    out.iterations = it + 1;
    const SurfacePoint d = surf.derivatives(u, v);
    const Eigen::Vector3d r = d.point - p;
    Eigen::Vector2d g(r.dot(d.du), r.dot(d.dv));
    Eigen::Matrix2d jtj;
    jtj << d.du.dot(d.du), d.du.dot(d.dv), d.du.dot(d.dv), d.dv.dot(d.dv);
    Eigen::Matrix2d h = jtj;
    h(0, 0) += r.dot(d.duu);
    h(0, 1) += r.dot(d.duv);
    h(1, 0) += r.dot(d.duv);
    h(1, 1) += r.dot(d.dvv);
    if (h.determinant() <= 0.0 || h(0, 0) <= 0.0) h = jtj;

    // Bound constraints: freeze parameters pushed outward at the boundary.
    const bool fix_u = (u <= 0.0 && g[0] > 0.0) || (u >= 1.0 && g[0] < 0.0);
    const bool fix_v = (v <= 0.0 && g[1] > 0.0) || (v >= 1.0 && g[1] < 0.0);
    Eigen::Vector2d delta = Eigen::Vector2d::Zero();
    if (!fix_u && !fix_v) {
      delta = -h.ldlt().solve(g);
    } else if (!fix_u && h(0, 0) > 0.0) {
      delta[0] = -g[0] / h(0, 0);
    } else if (!fix_v && h(1, 1) > 0.0) {
      delta[1] = -g[1] / h(1, 1);
    }
    if (!delta.allFinite() || delta.isZero(0.0)) break;

    double t = 1.0;
    bool accepted = false;
    double nu = u;
    double nv = v;
    double nf = f;
    for (int ls = 0; ls < 30; ++ls) {
      nu = std::clamp(u + t * delta[0], 0.0, 1.0);
      nv = std::clamp(v + t * delta[1], 0.0, 1.0);
      nf = dist2(surf, p, nu, nv);
      if (nf <= f) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    const double moved = (d.du * (nu - u) + d.dv * (nv - v)).norm();
    if (!accepted) {
      // No descent: accept only if we are already stationary.
      const double scale = std::sqrt(jtj.trace()) + 1e-300;
      if (g.norm() / scale > options.tolerance) out.warning = true;
      break;
    }
    u = nu;
    v = nv;
    f = nf;
    if (moved < options.tolerance) break;
  }
  out.u = u;
  out.v = v;
  out.distance = std::sqrt(f);
  return out;
}

Projection project_to_surface(const BSplineSurface& surf, const Eigen::Vector3d& p,
                              std::pair<double, double> seed, const ProjectionOptions& options) {
  double best_u = std::clamp(seed.first, 0.0, 1.0);
  double best_v = std::clamp(seed.second, 0.0, 1.0);
  double best = dist2(surf, p, best_u, best_v);
  const int n = std::max(2, options.grid);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const double u = static_cast<double>(a) / (n - 1);
      const double v = static_cast<double>(b) / (n - 1);
      const double f = dist2(surf, p, u, v);
      if (f < best) {
        best = f;
        best_u = u;
        best_v = v;
      }
    }
  }
  Projection out = refine_projection(surf, p, {best_u, best_v}, options);
  if (out.distance * out.distance > best) {
    out.u = best_u;
    out.v = best_v;
    out.distance = std::sqrt(best);
    out.warning = true;
  }
  return out;
}

std::pair<double, double> clamp_params(double u, double v, double margin) {
  return {std::clamp(u, margin, 1.0 - margin), std::clamp(v, margin, 1.0 - margin)};
}

double signed_distance(const BSplineSurface& surf, const Eigen::Vector3d& p, const Projection& foot) {
  const Eigen::Vector3d r = p - surf.point(foot.u, foot.v);
  Eigen::Vector3d n;
  try {
    n = eval_normal(surf, foot.u, foot.v);
  } catch (const DegenerateSurface&) {
    return r.norm();
  }
  const double along = r.dot(n);
  return along >= 0.0 ? r.norm() : -r.norm();
}

}  // namespace csa::surface
