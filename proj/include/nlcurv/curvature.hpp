#pragma once

#include "nlcurv/geometry.hpp"
#include "nlcurv/kernels.hpp"
#include "nlcurv/quadrature.hpp"

namespace nlcurv {

struct AnisotropyMatrix {
  Vec direction;
  Mat matrix;  // int_{e-perp} K(z) z (x) z dz
  double tolerance = 0.0;
};

/// H_K(E, x) = -PV int K(y - x) chi(y) dy, positive on balls. radius <= 0 picks the default
/// chart radius (shrunk automatically when the boundary is not graphical).
double nonlocal_curvature(const Kernel& k, SurfacePtr s, const Vec& x, double radius, const QuadratureBudget& budget);
double nonlocal_curvature(const Kernel& k, const GraphChart& chart, const QuadratureBudget& budget);

/// (1/eps) H_{K_eps}(E, x)
double rescaled_curvature(const Kernel& k, double eps, SurfacePtr s, const Vec& x, const QuadratureBudget& budget,
                          double radius = 0.0);

AnisotropyMatrix anisotropy_matrix(const Kernel& k, const Vec& e, const QuadratureBudget& budget);

/// H_0 = -(1/|grad phi|) tr(M_K(n) hess phi)
double local_curvature(const Kernel& k, const ImplicitSurface& s, const Vec& x, const QuadratureBudget& budget);
double local_curvature(const AnisotropyMatrix& m, const ImplicitSurface& s, const Vec& x);

/// Mean curvature normalised by the sphere area,
///   -(1/(|S^{d-1}| |grad phi|)) int_{S^{d-2}} e . hess phi e,
/// so that H_0 = |S^{d-1}| c_K H for radial kernels.
double normalized_mean_curvature(const ImplicitSurface& s, const Vec& x);

/// c_K = int_0^inf r^d K0(r) dr for radial kernels.
double radial_constant(const Kernel& k, const QuadratureBudget& budget);

struct ConvergenceBudget {
  double alpha = 0.4;
  double beta = 0.4;
  double gamma = 0.2;
  double q = 1.1;
  double eps_bar = 0.3;
  double chart_radius = 0.0;  // 0: taken from the chart

  void validate(double s) const;
  /// delta = q eps^gamma, clamped to the chart radius.
  double split_radius(double eps, double radius) const;
};

/// E(eps, delta) = (1/delta)(eps/delta)^alpha + (b0 + 1)|hess f|^2 delta + a0 w_f(delta)
///               + |hess f(0)| (eps/delta)^beta
double convergence_error_bound(const ConvergenceBudget& budget, double eps, double delta, const GraphChart& chart,
                               double a0, double b0);

/// Chart of the largest radius in {start, 0.9 start, 0.81 start, ...} that is a valid graph;
/// start = 0 means the default chart radius.
GraphChart largest_chart(SurfacePtr s, const Vec& x, double start = 0.0);

}  // namespace nlcurv
