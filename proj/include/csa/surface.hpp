#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace csa::surface {

/// Control points indexed [i][j], i along u and j along v.
using ControlGrid = std::vector<std::vector<Eigen::Vector3d>>;
/// Gridded samples indexed [r][c], r along u and c along v.
using SampleGrid = std::vector<std::vector<Eigen::Vector3d>>;

class DegenerateSurface : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Clamped knot vector over [0,1] with uniformly spaced interior knots.
std::vector<double> clamped_uniform_knots(int control_count, int degree);

/// All basis function values N_{i,p}(u), i = 0..n-1 (dense, mostly zero).
std::vector<double> basis_values(const std::vector<double>& knots, int degree, int control_count,
                                 double u);

struct SurfacePoint {
  Eigen::Vector3d point;
  Eigen::Vector3d du;
  Eigen::Vector3d dv;
  Eigen::Vector3d duu;
  Eigen::Vector3d duv;
  Eigen::Vector3d dvv;
};

/// Tensor-product B-spline surface r(u,v) over [0,1]^2. Immutable once built;
/// construction validates knots and the control net and throws
/// std::invalid_argument naming the first violation.
class BSplineSurface {
 public:
  BSplineSurface(int degree_u, int degree_v, std::vector<double> knots_u,
                 std::vector<double> knots_v, ControlGrid control_points, int normal_sign = 1);

  static BSplineSurface clamped_uniform(int degree_u, int degree_v, ControlGrid control_points,
                                        int normal_sign = 1);

  int degree_u() const { return degree_u_; }
  int degree_v() const { return degree_v_; }
  int rows() const { return static_cast<int>(control_.size()); }
  int cols() const { return static_cast<int>(control_.front().size()); }
  const std::vector<double>& knots_u() const { return knots_u_; }
  const std::vector<double>& knots_v() const { return knots_v_; }
  const ControlGrid& control_points() const { return control_; }
  /// +1 or -1; multiplies du x dv so the normal points to the tool side.
  int normal_sign() const { return normal_sign_; }

  Eigen::Vector3d point(double u, double v) const;
  /// Point plus first and second partial derivatives.
  SurfacePoint derivatives(double u, double v) const;

 private:
  int degree_u_;
  int degree_v_;
  std::vector<double> knots_u_;
  std::vector<double> knots_v_;
  ControlGrid control_;
  int normal_sign_;
};

struct SurfaceFrame {
  Eigen::Vector3d origin;
  Eigen::Vector3d normal;
  Eigen::Vector3d tangent_u;
  Eigen::Vector3d tangent_v;
};

Eigen::Vector3d eval_surface(const BSplineSurface& surf, double u, double v);
/// Unit normal, oriented by the surface's normal sign. Throws
/// DegenerateSurface when |du x dv| < 1e-10.
Eigen::Vector3d eval_normal(const BSplineSurface& surf, double u, double v);
/// Hybrid control frame: normal plus an orthonormal tangent pair with
/// tangent_u along du.
SurfaceFrame surface_frame(const BSplineSurface& surf, double u, double v);

enum class Parameterization { chord_length, uniform };

struct SurfaceFit {
  BSplineSurface surface;
  double max_residual = 0.0;
  std::vector<double> params_u;
  std::vector<double> params_v;
};

/// Global least-squares fit of a rows x cols control net to gridded samples.
/// Throws DegenerateSurface("insufficient sample coverage") when the
/// collocation system is rank deficient.
SurfaceFit fit_control_points(const SampleGrid& samples, int degree_u, int degree_v, int rows,
                              int cols, Parameterization param = Parameterization::chord_length,
                              int normal_sign = 1);

struct PlaneFit {
  Eigen::Vector3d rotation_vector = Eigen::Vector3d::Zero();  // (w_x, w_y, 0)
  double offset = 0.0;                                        // d
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  /// Columns: in-plane u axis, in-plane axis n x e_u, plane normal (tool side).
  Eigen::Matrix3d input_rotation = Eigen::Matrix3d::Identity();
  /// +1 when n x e_u points along increasing v, -1 otherwise.
  int v_axis_sign = 1;
  double objective = 0.0;         // sum of squared point-plane residuals
  double linear_objective = 0.0;  // unsquared residual sum at the optimum
  double svd_objective = 0.0;     // closed-form plane fit, used as initializer
  int iterations = 0;
};

/// Squared residual of the plane {x : n(w).x = d}, n(w) = exp([w]x) e_z.
double plane_objective(const std::vector<Eigen::Vector3d>& points, const Eigen::Vector3d& w,
                       double d);
/// Unsquared variant (sum of d - P.n).
double plane_linear_objective(const std::vector<Eigen::Vector3d>& points, const Eigen::Vector3d& w,
                              double d);
Eigen::Vector3d plane_normal(const Eigen::Vector3d& w);

/// Closest plane to the control points via Nelder-Mead, SVD-initialized.
PlaneFit best_fit_plane(const BSplineSurface& surf);

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double distance = 0.0;
  int iterations = 0;
  bool warning = false;
};

struct ProjectionOptions {
  int grid = 32;
  int max_iterations = 50;
  double tolerance = 1e-8;  // meters of foot-point motion per iteration
};

/// Closest surface point: coarse grid plus seed, refined by bounded Newton /
/// Gauss-Newton. Parameters are clamped to the domain.
Projection project_to_surface(const BSplineSurface& surf, const Eigen::Vector3d& p,
                              std::pair<double, double> seed, const ProjectionOptions& options = {});
/// Local refinement from a seed only (warm-started per tick).
Projection refine_projection(const BSplineSurface& surf, const Eigen::Vector3d& p,
                             std::pair<double, double> seed, const ProjectionOptions& options = {});

std::pair<double, double> clamp_params(double u, double v, double margin);

/// Signed clearance of p above the surface (positive on the normal side).
double signed_distance(const BSplineSurface& surf, const Eigen::Vector3d& p, const Projection& foot);

}  // namespace csa::surface
