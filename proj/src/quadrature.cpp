#include "nlcurv/quadrature.hpp"

#include <algorithm>
#include <limits>

#include <boost/math/tools/roots.hpp>

#include "nlcurv/numerics.hpp"

namespace nlcurv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct AngularNode {
  Vec theta;  // in chart/frame coordinates, d-1 entries
  double weight;
};

std::vector<AngularNode> circle_nodes(int dm1, int n) {
  if (dm1 == 1) return {{Vec::Constant(1, 1.0), 1.0}, {Vec::Constant(1, -1.0), 1.0}};
  std::vector<AngularNode> out;
  for (int j = 0; j < n; ++j) {
    const double a = 2.0 * std::numbers::pi * (j + 0.5) / n;
    out.push_back({make_vec(std::cos(a), std::sin(a)), 2.0 * std::numbers::pi / n});
  }
  return out;
}

// int_lo^hi with lo > hi allowed
double oriented(const std::function<double(double)>& f, double a, double b, std::vector<double> breaks,
                double rel_tol) {
  if (a == b) return 0.0;
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double v = numerics::adaptive(f, lo, hi, breaks, rel_tol, 0.0, 30).value;
  return b > a ? v : -v;
}

bool converged(double prev, double cur, double scale, double tol) {
  return std::abs(cur - prev) <= tol * std::max(std::abs(cur), scale);
}

}  // namespace

void QuadratureBudget::validate() const {
  if (!(rel_tol > 0.0)) throw InvalidParameter("quadrature tolerance must be positive");
  if (max_depth < 1) throw InvalidParameter("quadrature depth must be at least 1");
  if (!(grading > 1.0)) throw InvalidParameter("radial grading must exceed 1");
  if (angular_nodes < 4) throw InvalidParameter("need at least 4 angular nodes");
  if (!(inner_radius > 0.0 && inner_radius < 1.0)) throw InvalidParameter("inner radius fraction must be in (0,1)");
}

double cutoff_radius(const Kernel& k, double from, double tol_mass) {
  double r = from;
  while (k.tail_mass(r) > tol_mass && r < 1e12 * from) r *= 2.0;
  return r;
}

double symmetrized_cylinder_integral(const Kernel& k, const GraphChart& chart, const QuadratureBudget& budget) {
  budget.validate();
  const int d = chart.dimension();
  if (k.dimension() != d) throw InvalidParameter("kernel and chart dimensions differ");
  const double r = chart.radius();
  const Mat& frame = chart.tangent_frame();
  const Vec& n = chart.normal();
  const std::vector<double> kb = k.breakpoints();
  const double rho0 = budget.inner_radius * r;
  const double p = k.near_exponent();
  const double c = k.near_constant();
  const Mat& a0 = chart.hess_f0();
  // below rho_q the graph is replaced by its quadratic part; there the roundoff of f
  // (relative to the size of the base point) would outweigh the quartic model error
  const double kappa = std::max(chart.sup_hess(), 1.0 / r);
  const double scale = r;
  const double rho_q =
      std::clamp(std::pow(8.0 * std::numeric_limits<double>::epsilon() * scale * kappa, 0.25) / kappa, rho0, r);
  std::vector<double> breaks_q = kb;
  breaks_q.push_back(rho_q);

  const auto graph = [&](const Vec& z) { return z.norm() < rho_q ? 0.5 * z.dot(a0 * z) : chart.f(z); };
  // the kink sphere |y| = b meets the ends of the t-interval where rho^2 + f^2 = b^2
  const auto node_panels = [&](const Vec& theta) {
    std::vector<double> br = breaks_q;
    for (double b : kb) {
      if (!(b < r)) continue;
      for (double sign : {1.0, -1.0}) {
        double rho = b;
        for (int it = 0; it < 20; ++it) {
          const double t = graph(sign * rho * theta);
          const double next = std::sqrt(std::max(b * b - t * t, 0.0));
          const bool done = std::abs(next - rho) <= 1e-15 * b;
          rho = next;
          if (done) break;
        }
        if (rho > rho0 && rho < b) br.push_back(rho);
      }
    }
    return numerics::graded_panels(rho0, r, budget.grading, br);
  };

  const auto inner = [&](double rho, const Vec& theta) {
    const Vec z = rho * theta;
    const double top = graph(z);
    const double bottom = -graph(-z);
    if (top == bottom) return 0.0;
    const Vec base = frame * z;
    std::vector<double> breaks;
    for (double b : kb)
      if (b > rho) {
        const double t = std::sqrt(b * b - rho * rho);
        breaks.push_back(t);
        breaks.push_back(-t);
      }
    const auto f = [&](double t) { return k.value(base - t * n); };
    return oriented(f, bottom, top, breaks, 0.1 * budget.rel_tol);
  };

  const auto estimate = [&](int order, int nang) {
    numerics::Accumulator acc;
    for (const AngularNode& node : circle_nodes(d - 1, nang)) {
      const double quad = node.theta.dot(a0 * node.theta);
      acc.add(node.weight * c * k.angular(frame * node.theta) * quad * std::pow(rho0, 1.0 - p) / (1.0 - p));
      const auto g = [&](double rho) { return std::pow(rho, d - 2) * inner(rho, node.theta); };
      const std::vector<double> panels = node_panels(node.theta);
      for (std::size_t i = 0; i + 1 < panels.size(); ++i)
        acc.add(node.weight * numerics::gauss(g, panels[i], panels[i + 1], order));
    }
    return acc.value();
  };

  int order = 8, nang = budget.angular_nodes;
  const double floor = 0.01 * k.tail_mass(r);
  double prev = estimate(order, nang);
  for (int level = 0; level < budget.max_depth; ++level) {
    order = std::min(2 * order, 256);
    if (d == 3) nang *= 2;
    const double cur = estimate(order, nang);
    if (converged(prev, cur, floor, budget.rel_tol)) return cur;
    prev = cur;
    if (order == 256 && d == 2) break;
  }
  throw BudgetExceeded("cylinder integral did not converge", prev, estimate(order, nang));
}

namespace {

struct RayField {
  const Kernel& k;
  const ImplicitSurface& s;
  Vec x, n;
  Mat frame;
  double r;        // cylinder radius and half-height
  double bound;    // bounding radius of the boundary
  double rcut;     // truncation radius for unbounded boundaries
  double step0;

  bool inside(double rho, const Vec& w) const { return s.phi(x + rho * w) >= 0.0; }

  double crossing(double a, double b, const Vec& w) const {
    const auto F = [&](double rho) { return s.phi(x + rho * w); };
    boost::uintmax_t iters = 100;
    const auto tol = [](double u, double v) { return std::abs(v - u) <= 1e-14 * std::max(1.0, std::abs(u)); };
    const auto res = boost::math::tools::toms748_solve(F, a, b, F(a), F(b), tol, iters);
    return 0.5 * (res.first + res.second);
  }

  // int over the ray {x + rho w, rho >= entry into the cylinder complement} of K chi rho^{d-1}
  double ray(const Vec& w) const {
    const double wz = (frame.transpose() * w).norm();
    const double wt = std::abs(w.dot(n));
    const double rho_c = std::min(wz > 0.0 ? r / wz : kInf, wt > 0.0 ? r / wt : kInf);
    double rho_end;
    const bool bounded = std::isfinite(bound);
    if (bounded) {
      const double xw = x.dot(w);
      // a little past the bounding sphere, where the sign of phi is settled
      const double outer = bound + step0;
      const double disc = xw * xw - x.squaredNorm() + outer * outer;
      rho_end = disc > 0.0 ? std::max(rho_c, -xw + std::sqrt(disc)) : rho_c;
    } else {
      rho_end = std::max(rho_c, rcut);
    }
    double total = 0.0;
    double a = rho_c, rho = rho_c;
    bool in = inside(rho, w);
    while (rho < rho_end) {
      const double step = bounded ? step0 : std::max(step0, 0.05 * rho);
      const double next = std::min(rho_end, rho + step);
      const bool in_next = inside(next, w);
      if (in_next != in) {
        const double cross = crossing(rho, next, w);
        total += (in ? 1.0 : -1.0) * k.ray_mass(w, a, cross);
        a = cross;
        in = in_next;
      }
      rho = next;
    }
    total += (in ? 1.0 : -1.0) * k.ray_mass(w, a, kInf);
    return total;
  }
};

}  // namespace

double farfield_integral(const Kernel& k, const GraphChart& chart, const QuadratureBudget& budget) {
  budget.validate();
  const int d = chart.dimension();
  if (k.dimension() != d) throw InvalidParameter("kernel and chart dimensions differ");
  const double r = chart.radius();
  // |far field| <= tail_mass(r), which sets the absolute accuracy target
  const double target = budget.rel_tol * k.tail_mass(r);
  const double bound = chart.surface().bounding_radius();
  RayField field{k,
                 chart.surface(),
                 chart.base_point(),
                 chart.normal(),
                 chart.tangent_frame(),
                 r,
                 bound,
                 std::isfinite(bound) ? kInf : cutoff_radius(k, r, 1e-3 * target),
                 std::isfinite(bound) ? std::min(r, bound) / 32.0 : r / 8.0};
  const Vec& n = chart.normal();
  const Mat& frame = chart.tangent_frame();
  const double pi = std::numbers::pi;
  numerics::Integral total;

  if (d == 2) {
    const auto f = [&](double a) { return field.ray(std::cos(a) * frame.col(0) - std::sin(a) * n); };
    std::vector<double> breaks;
    for (int j = -3; j <= 3; ++j) breaks.push_back(j * pi / 4.0);
    total = numerics::adaptive(f, -pi, pi, breaks, 0.0, 0.25 * target, 24);
  } else {
    const auto outer = [&](double psi) {
      const auto inner = [&](double beta) {
        const Vec w = -std::cos(psi) * n + std::sin(psi) * (std::cos(beta) * frame.col(0) + std::sin(beta) * frame.col(1));
        return field.ray(w);
      };
      std::vector<double> breaks{0.5 * pi, pi, 1.5 * pi};
      return std::sin(psi) * numerics::adaptive(inner, 0.0, 2.0 * pi, breaks, 0.0, 0.01 * target, 20).value;
    };
    std::vector<double> breaks{0.25 * pi, 0.5 * pi, 0.75 * pi};
    total = numerics::adaptive(outer, 0.0, pi, breaks, 0.0, 0.25 * target, 20);
  }
  // a near-tangent ray can hide a pair of crossings inside one sampling step, which leaves small
  // jumps in the angular integrand; judge by the accumulated error estimate
  if (!(total.error <= target)) throw BudgetExceeded("far-field integral did not converge", total.value - total.error, total.value);
  return total.value;
}

double farfield_integral(const Kernel& k, SurfacePtr s, const Vec& x, double radius, const QuadratureBudget& budget) {
  return farfield_integral(k, GraphChart(std::move(s), x, radius), budget);
}

double hyperplane_integral(const Kernel& k, const Vec& e, const std::function<double(const Vec&)>& weight,
                           const QuadratureBudget& budget) {
  budget.validate();
  const int d = k.dimension();
  if (e.size() != d || std::abs(e.norm() - 1.0) > 1e-12) throw InvalidParameter("direction must be a unit vector");
  const Mat frame = tangent_frame(e);
  const double lo = 1e-8 * k.scale(), hi = 1e8 * k.scale();
  const std::vector<double> panels = numerics::graded_panels(lo, hi, budget.grading, k.breakpoints());

  struct Result {
    double value, magnitude;
  };
  const auto estimate = [&](int order, int nang) {
    numerics::Accumulator acc, mag;
    for (const AngularNode& node : circle_nodes(d - 1, nang)) {
      const Vec dir = frame * node.theta;
      const auto h = [&](double rho) { return k.value_polar(rho, dir) * weight(rho * dir) * std::pow(rho, d - 2); };
      const double h0 = h(lo), h1 = h(2.0 * lo);
      const double ph = numerics::power_exponent(lo, h0, 2.0 * lo, h1);
      if (std::isfinite(ph)) {
        if (ph <= -1.0) throw InvalidWeight("weight too singular at the origin for the kernel");
        acc.add(node.weight * numerics::power_head(h0, lo, ph));
        mag.add(node.weight * std::abs(numerics::power_head(h0, lo, ph)));
      }
      const double t0 = h(0.5 * hi), t1 = h(hi);
      const double pt = numerics::power_exponent(0.5 * hi, t0, hi, t1);
      if (std::isfinite(pt)) {
        if (pt >= -1.0) throw InvalidWeight("weight grows too fast for the kernel tail");
        acc.add(node.weight * numerics::power_tail(t1, hi, pt));
        mag.add(node.weight * std::abs(numerics::power_tail(t1, hi, pt)));
      }
      for (std::size_t i = 0; i + 1 < panels.size(); ++i) {
        acc.add(node.weight * numerics::gauss(h, panels[i], panels[i + 1], order));
        mag.add(node.weight * numerics::gauss([&](double rho) { return std::abs(h(rho)); }, panels[i], panels[i + 1], order));
      }
    }
    return Result{acc.value(), mag.value()};
  };

  int order = 8, nang = budget.angular_nodes;
  Result prev = estimate(order, nang);
  for (int level = 0; level < budget.max_depth; ++level) {
    order = std::min(2 * order, 256);
    if (d == 3) nang *= 2;
    const Result cur = estimate(order, nang);
    if (converged(prev.value, cur.value, cur.magnitude, budget.rel_tol)) return cur.value;
    prev = cur;
  }
  throw BudgetExceeded("hyperplane integral did not converge", prev.value, estimate(order, nang).value);
}

}  // namespace nlcurv
