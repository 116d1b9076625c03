#pragma once

// Independent reference values used by the tests. Nothing here calls the library's quadrature.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

namespace oracle {

constexpr double pi = std::numbers::pi;

// int_u^inf K0(t) t^{d-1} dt for K0 = mu t^-(d+sigma) on t <= 1 and m t^-(d+1+s) beyond.
inline double two_exponent_tail(double u, double s = 0.5, double m = 1.0, double sigma = 0.5, double mu = 1.0) {
  if (u >= 1.0) return m * std::pow(u, -1.0 - s) / (1.0 + s);
  return mu * (std::pow(u, -sigma) - 1.0) / sigma + m / (1.0 + s);
}

// Rescaled curvature of a ball of radius R for the default two-exponent kernel.
inline double ball_curvature(double radius, double eps, int d) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const auto t = [&](double psi) { return two_exponent_tail(2.0 * radius * std::cos(psi) / eps); };
  // split where 2R cos psi = eps
  const double c = eps / (2.0 * radius);
  const double kink = c < 1.0 ? std::acos(c) : 0.0;
  double v = 0.0;
  if (d == 2) {
    if (kink > 0.0) v += ts.integrate(t, 0.0, kink);
    v += ts.integrate(t, kink, pi / 2);
    return 4.0 * v / eps;
  }
  const auto f = [&](double psi) { return t(psi) * std::sin(psi); };
  if (kink > 0.0) v += ts.integrate(f, 0.0, kink);
  v += ts.integrate(f, kink, pi / 2);
  return 4.0 * pi * v / eps;
}

// Plane ellipse ((y - c)/a)^2 + ((y - c)/b)^2 = 1 seen from a boundary point x along rays.
struct Ellipse {
  double a, b, cx, cy;

  // second intersection of the ray x + rho w with the ellipse (the first one is rho = 0)
  double chord(double x, double y, double angle) const {
    const double wx = std::cos(angle), wy = std::sin(angle);
    const double lin = (x - cx) * wx / (a * a) + (y - cy) * wy / (b * b);
    const double quad = wx * wx / (a * a) + wy * wy / (b * b);
    return -2.0 * lin / quad;
  }
  double normal_angle(double x, double y) const { return std::atan2((y - cy) / (b * b), (x - cx) / (a * a)); }
};

// Angles in (lo, hi) where g changes sign, located by sampling and TOMS 748.
template <class G>
std::vector<double> sign_changes(G g, double lo, double hi, int samples = 2000) {
  std::vector<double> out;
  double prev = g(lo);
  for (int i = 1; i <= samples; ++i) {
    const double a = lo + (hi - lo) * (i - 1) / samples, b = lo + (hi - lo) * i / samples;
    const double cur = g(b);
    if ((prev > 0) != (cur > 0)) {
      boost::uintmax_t it = 200;
      const auto r = boost::math::tools::toms748_solve(g, a, b, prev, cur,
                                                       boost::math::tools::eps_tolerance<double>(50), it);
      out.push_back(0.5 * (r.first + r.second));
    }
    prev = cur;
  }
  return out;
}

// H_eps(E, x) = (2/eps) int over inward directions of T0(chord/eps), two-exponent kernel.
inline double ellipse_curvature(const Ellipse& e, double x, double y, double eps) {
  const double an = e.normal_angle(x, y);
  const double lo = an + pi / 2, hi = an + 3 * pi / 2;
  const auto t = [&](double ang) {
    const double c = e.chord(x, y, ang);
    return c > 0.0 ? two_exponent_tail(c / eps) : 0.0;
  };
  std::vector<double> cuts{lo};
  for (double c : sign_changes([&](double ang) { return e.chord(x, y, ang) - eps; }, lo, hi)) cuts.push_back(c);
  cuts.push_back(hi);
  boost::math::quadrature::tanh_sinh<double> ts;
  double v = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) v += ts.integrate(t, cuts[i], cuts[i + 1]);
  return 2.0 * v / eps;
}

// Same integral on a fixed grid: composite 15-point Gauss-Kronrod on panels graded by
// 2^(1/resolution) toward every cut, closed at the integrable end singularity by its
// power law.
inline double ellipse_curvature_fixed(const Ellipse& e, double x, double y, double eps, int resolution) {
  const double an = e.normal_angle(x, y);
  const double lo = an + pi / 2, hi = an + 3 * pi / 2;
  const auto t = [&](double ang) {
    const double c = e.chord(x, y, ang);
    return c > 0.0 ? two_exponent_tail(c / eps) : 0.0;
  };
  std::vector<double> cuts{lo};
  for (double c : sign_changes([&](double ang) { return e.chord(x, y, ang) - eps; }, lo, hi)) cuts.push_back(c);
  cuts.push_back(hi);
  const double ratio = std::pow(2.0, 1.0 / resolution);
  double v = 0.0;
  const auto gk = [&](double a, double b) { return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(t, a, b, 0); };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    // graded toward both ends of the piece
    for (int side = 0; side < 2; ++side) {
      const double end = side == 0 ? a : b;
      const double dir = side == 0 ? 1.0 : -1.0;
      double h = 0.5 * (b - a);
      while (h > 1e-12) {
        const double hn = h / ratio;
        const double p = end + dir * hn, q = end + dir * h;
        v += gk(std::min(p, q), std::max(p, q));
        h = hn;
      }
      // power-law closure on [end, end + h]
      const double f1 = t(end + dir * h), f2 = t(end + dir * 0.5 * h);
      const double p = std::log(f1 / f2) / std::log(2.0);
      if (std::isfinite(p) && p > -1.0) v += f1 * h / (p + 1.0);
    }
  }
  return 2.0 * v / eps;
}

}  // namespace oracle
