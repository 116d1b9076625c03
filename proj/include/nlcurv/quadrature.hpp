#pragma once

#include <functional>

#include "nlcurv/geometry.hpp"
#include "nlcurv/kernels.hpp"

namespace nlcurv {

struct QuadratureBudget {
  double rel_tol = 1e-6;
  int max_depth = 6;         // order doublings before giving up
  double grading = 2.0;      // ratio of consecutive radial shells
  int angular_nodes = 16;    // starting azimuthal nodes in 3-D
  double inner_radius = 1e-6;  // first shell, as a fraction of the chart radius

  void validate() const;
};

/// Principal-value contribution of the chart cylinder,
///   int_{|z| < r} int_{-f(-z)}^{f(z)} K(z - t n) dt dz,
/// which is positive for convex sets.
double symmetrized_cylinder_integral(const Kernel& k, const GraphChart& chart, const QuadratureBudget& budget);

/// int over the complement of the chart cylinder of K(y - x) chi(y), chi = +1 on E and -1 off E.
double farfield_integral(const Kernel& k, const GraphChart& chart, const QuadratureBudget& budget);
double farfield_integral(const Kernel& k, SurfacePtr s, const Vec& x, double radius, const QuadratureBudget& budget);

/// int_{e-perp} K(z) w(z) dz for weights bounded by C|z|^2.
double hyperplane_integral(const Kernel& k, const Vec& e, const std::function<double(const Vec&)>& weight,
                           const QuadratureBudget& budget);

/// Radius beyond which the kernel mass is below tol * reference.
double cutoff_radius(const Kernel& k, double from, double tol_mass);

}  // namespace nlcurv
