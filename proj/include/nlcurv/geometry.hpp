#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nlcurv/common.hpp"

namespace nlcurv {

/// C^2 level-set description of E = {phi >= 0} with boundary {phi = 0}.
class ImplicitSurface {
 public:
  virtual ~ImplicitSurface() = default;
  virtual int dimension() const = 0;
  virtual double phi(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;
  virtual Mat hessian(const Vec& x) const = 0;
  /// Radius R with the boundary inside B(0, R); +inf for unbounded boundaries.
  virtual double bounding_radius() const = 0;
  virtual std::string name() const = 0;
};

using SurfacePtr = std::shared_ptr<const ImplicitSurface>;

/// phi = R^2 - |y - c|^2
SurfacePtr make_ball(const Vec& center, double radius);
/// phi = 1 - sum ((y - c)_i / a_i)^2
SurfacePtr make_ellipsoid(const Vec& center, const Vec& semiaxes);
/// phi = offset - y.e, so E is the side opposite to e and e is the outer normal.
SurfacePtr make_halfspace(const Vec& normal, double offset = 0.0);
/// phi'(y) = phi(R^T (y - shift)), i.e. the set R E + shift.
SurfacePtr make_transformed(SurfacePtr base, const Mat& rotation, const Vec& shift);
/// Complement {phi <= 0} written as {-phi >= 0}.
SurfacePtr make_complement(SurfacePtr base);

/// Node values on a uniform grid lo + h * index, row-major with the last axis fastest,
/// interpolated by Catmull-Rom cubics in each axis. Outside the grid phi is c_out.
SurfacePtr make_grid_surface(const Vec& lo, double h, std::vector<int> dims, std::vector<double> values,
                             double c_out, double bounding_radius);

struct BoundaryData {
  Vec normal;  // outer unit normal -grad phi / |grad phi|
  double grad_norm = 0.0;
  Mat hessian;
};

constexpr double kBoundaryTolerance = 1e-8;
constexpr double kDegenerateGradient = 1e-12;

BoundaryData normal_and_curvature_data(const ImplicitSurface& s, const Vec& x,
                                       double boundary_tol = kBoundaryTolerance);

/// Newton projection along grad phi onto {phi = 0}.
Vec project_to_boundary(const ImplicitSurface& s, const Vec& y, double tol = 1e-12, int max_iter = 100);

/// Local description of the boundary near x as {x + z - f(z) n : z in n-perp, |z| < radius}
/// with E on the side t > f(z) of x + z - t n.
class GraphChart {
 public:
  GraphChart(SurfacePtr surface, const Vec& base, double radius);

  const Vec& base_point() const { return base_; }
  const Vec& normal() const { return normal_; }
  /// d x (d-1), columns orthonormal and perpendicular to the normal.
  const Mat& tangent_frame() const { return frame_; }
  double radius() const { return radius_; }
  int dimension() const { return static_cast<int>(base_.size()); }
  const ImplicitSurface& surface() const { return *surface_; }
  SurfacePtr surface_ptr() const { return surface_; }

  /// z given in frame coordinates (d-1 entries).
  double f(const Vec& z) const;
  Vec grad_f(const Vec& z) const;
  Mat hess_f(const Vec& z) const;
  /// Point of R^d for chart coordinates (z, t).
  Vec point(const Vec& z, double t) const { return base_ + frame_ * z - t * normal_; }

  const Mat& hess_f0() const { return hess0_; }
  /// sup over the chart disk of the spectral norm of hess f, sampled.
  double sup_hess() const { return sup_hess_; }
  /// sup_{|z| < delta} |hess f(z) - hess f(0)|, monotone envelope of a sampled radial ladder.
  double modulus(double delta) const;

 private:
  double root(const Vec& z) const;

  SurfacePtr surface_;
  Vec base_;
  Vec normal_;
  Mat frame_;
  double radius_;
  Mat hess0_;
  double sup_hess_ = 0.0;
  std::vector<std::pair<double, double>> modulus_ladder_;
};

/// Largest chart radius default: min(R/4, 0.8/|hess f(0)|), capped at 1.
double default_chart_radius(const ImplicitSurface& s, const Vec& x);

/// Builds a chart of the requested radius (radius <= 0 selects the default), shrinking by
/// half on failure when auto_shrink is set.
GraphChart graph_chart(SurfacePtr s, const Vec& x, double radius = 0.0, bool auto_shrink = true);

/// |y.e| <= lambda/2 |y - (y.e)e|^2
bool paraboloid_membership(const Vec& e, double lambda, const Vec& y);

/// Points on the boundary of a builtin curve sampled by parameter; for a grid or transformed
/// surface use project_to_boundary.
std::vector<Vec> ellipse_boundary_points(const Vec& center, double a, double b, int n);

}  // namespace nlcurv
