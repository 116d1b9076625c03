#include "nlcurv/curvature.hpp"

#include <algorithm>
#include <limits>

#include "nlcurv/numerics.hpp"

namespace nlcurv {

double nonlocal_curvature(const Kernel& k, const GraphChart& chart, const QuadratureBudget& budget) {
  return symmetrized_cylinder_integral(k, chart, budget) - farfield_integral(k, chart, budget);
}

double nonlocal_curvature(const Kernel& k, SurfacePtr s, const Vec& x, double radius, const QuadratureBudget& budget) {
  if (k.dimension() != s->dimension()) throw InvalidParameter("kernel and surface dimensions differ");
  const GraphChart chart = graph_chart(std::move(s), x, radius, radius <= 0.0);
  return nonlocal_curvature(k, chart, budget);
}

double rescaled_curvature(const Kernel& k, double eps, SurfacePtr s, const Vec& x, const QuadratureBudget& budget,
                          double radius) {
  if (!(eps > 0.0 && eps <= 1.0)) throw InvalidParameter("eps must lie in (0, 1]");
  return nonlocal_curvature(k.rescaled(eps), std::move(s), x, radius, budget) / eps;
}

AnisotropyMatrix anisotropy_matrix(const Kernel& k, const Vec& e, const QuadratureBudget& budget) {
  const int d = k.dimension();
  if (e.size() != d || std::abs(e.norm() - 1.0) > 1e-12) throw InvalidParameter("direction must be a unit vector");
  // entries in the frame of e-perp, so that M e vanishes up to the frame's orthogonality
  const Mat frame = tangent_frame(e);
  const int m = d - 1;
  Mat local(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      const auto w = [&](const Vec& z) { return z.dot(frame.col(a)) * z.dot(frame.col(b)); };
      local(a, b) = local(b, a) = hyperplane_integral(k, e, w, budget);
    }
  Mat out = frame * local * frame.transpose();
  out = 0.5 * (out + out.transpose()).eval();
  return {e, out, budget.rel_tol};
}

double local_curvature(const AnisotropyMatrix& m, const ImplicitSurface& s, const Vec& x) {
  const BoundaryData bd = normal_and_curvature_data(s, x);
  if ((m.direction - bd.normal).norm() > 1e-9) throw InvalidParameter("anisotropy matrix is for another normal");
  return -(m.matrix * bd.hessian).trace() / bd.grad_norm;
}

double local_curvature(const Kernel& k, const ImplicitSurface& s, const Vec& x, const QuadratureBudget& budget) {
  const BoundaryData bd = normal_and_curvature_data(s, x);
  const AnisotropyMatrix m = anisotropy_matrix(k, bd.normal, budget);
  return -(m.matrix * bd.hessian).trace() / bd.grad_norm;
}

double normalized_mean_curvature(const ImplicitSurface& s, const Vec& x) {
  const int d = s.dimension();
  const BoundaryData bd = normal_and_curvature_data(s, x);
  const Mat frame = tangent_frame(bd.normal);
  // int over the unit sphere of e-perp of e . A e equals |S^{d-2}| tr(A) / (d - 1)
  const double sphere = sphere_area(d - 1);
  const double integral = sphere * (frame.transpose() * bd.hessian * frame).trace() / (d - 1);
  return -integral / (sphere_area(d) * bd.grad_norm);
}

double radial_constant(const Kernel& k, const QuadratureBudget& budget) {
  budget.validate();
  if (!k.is_radial()) throw Unsupported("radial constant needs a radial kernel");
  const int d = k.dimension();
  const auto h = [&](double r) { return std::pow(r, d) * k.scaled_profile(r); };
  const double lo = 1e-8 * k.scale(), hi = 1e8 * k.scale();
  const std::vector<double> panels = numerics::graded_panels(lo, hi, budget.grading, k.breakpoints());
  const auto estimate = [&](int order) {
    numerics::Accumulator acc;
    const double ph = numerics::power_exponent(lo, h(lo), 2.0 * lo, h(2.0 * lo));
    if (std::isfinite(ph) && ph > -1.0) acc.add(numerics::power_head(h(lo), lo, ph));
    const double pt = numerics::power_exponent(0.5 * hi, h(0.5 * hi), hi, h(hi));
    if (std::isfinite(pt) && pt < -1.0) acc.add(numerics::power_tail(h(hi), hi, pt));
    for (std::size_t i = 0; i + 1 < panels.size(); ++i) acc.add(numerics::gauss(h, panels[i], panels[i + 1], order));
    return acc.value();
  };
  int order = 8;
  double prev = estimate(order), cur = prev;
  for (int level = 0; level < budget.max_depth; ++level) {
    order = std::min(2 * order, 256);
    cur = estimate(order);
    if (std::abs(cur - prev) <= budget.rel_tol * std::abs(cur)) break;
    if (level + 1 == budget.max_depth) throw BudgetExceeded("radial constant did not converge", prev, cur);
    prev = cur;
  }

  // H_0 = |S^{d-1}| c_K H on the unit sphere
  const auto ball = make_ball(Vec::Zero(d), 1.0);
  Vec x = Vec::Zero(d);
  x(0) = 1.0;
  const double h0 = local_curvature(k, *ball, x, budget);
  const double rhs = sphere_area(d) * cur * normalized_mean_curvature(*ball, x);
  if (std::abs(h0 - rhs) > 10.0 * budget.rel_tol * std::abs(rhs))
    throw Error("radial reduction identity failed: H_0 = " + std::to_string(h0) + " vs " + std::to_string(rhs));
  return cur;
}

void ConvergenceBudget::validate(double s) const {
  if (!(alpha > 0.0 && alpha < s)) throw InvalidParameter("alpha must lie in (0, s)");
  if (!(beta > 0.0 && beta < s)) throw InvalidParameter("beta must lie in (0, s)");
  if (!(gamma > 0.0 && gamma < alpha / (1.0 + alpha))) throw InvalidParameter("gamma must lie in (0, alpha/(1+alpha))");
  if (!(q > 1.0)) throw InvalidParameter("q must exceed 1");
  if (!(eps_bar > 0.0 && eps_bar < 1.0)) throw InvalidParameter("eps_bar must lie in (0, 1)");
  if (chart_radius > 0.0 && q * eps_bar > chart_radius) throw InvalidParameter("need q * eps_bar <= chart radius");
}

double ConvergenceBudget::split_radius(double eps, double radius) const {
  return std::min(q * std::pow(eps, gamma), radius);
}

double convergence_error_bound(const ConvergenceBudget& budget, double eps, double delta, const GraphChart& chart,
                               double a0, double b0) {
  const double radius = budget.chart_radius > 0.0 ? std::min(budget.chart_radius, chart.radius()) : chart.radius();
  if (!(eps > 0.0 && eps < budget.eps_bar)) throw OutOfRegime("eps must lie in (0, eps_bar)");
  if (!(budget.q * eps <= delta && delta <= radius)) throw OutOfRegime("need q eps <= delta <= chart radius");
  const Mat& h0 = chart.hess_f0();
  double h0norm = 0.0;
  if (h0.rows() == 1) h0norm = std::abs(h0(0, 0));
  else h0norm = Eigen::SelfAdjointEigenSolver<Mat>(h0, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
  const double ratio = eps / delta;
  const double sup = chart.sup_hess();
  return std::pow(ratio, budget.alpha) / delta + (b0 + 1.0) * sup * sup * delta + a0 * chart.modulus(delta) +
         h0norm * std::pow(ratio, budget.beta);
}

GraphChart largest_chart(SurfacePtr s, const Vec& x, double start) {
  double r = start > 0.0 ? start : default_chart_radius(*s, x);
  for (int i = 0; i < 60; ++i, r *= 0.9) {
    try {
      return GraphChart(s, x, r);
    } catch (const ChartRadiusTooLarge&) {
    }
  }
  throw ChartRadiusTooLarge("no valid chart radius found");
}

}  // namespace nlcurv
