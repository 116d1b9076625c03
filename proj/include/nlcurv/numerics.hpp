#pragma once

#include <functional>
#include <span>
#include <vector>

namespace nlcurv::numerics {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// Gauss-Legendre rule with n points, 1 <= n <= 256. Rules are built once and shared.
const GaussRule& gauss_legendre(int n);

/// Fixed-order Gauss-Legendre on [a, b].
template <class F>
double gauss(F&& f, double a, double b, int n) {
  const GaussRule& rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

struct Integral {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

/// Adaptive Gauss-Kronrod (7/15) on [a, b] with bisection down to max_depth.
Integral adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol,
                  double abs_tol = 0.0, int max_depth = 40);

/// Same as adaptive(), but pre-splits [a, b] at the given interior breakpoints.
Integral adaptive(const std::function<double(double)>& f, double a, double b, std::span<const double> breaks,
                  double rel_tol, double abs_tol = 0.0, int max_depth = 40);

/// Geometric panel boundaries from lo to hi with ratio, merged with breakpoints inside (lo, hi).
std::vector<double> graded_panels(double lo, double hi, double ratio, std::span<const double> breaks = {});

/// Integral of c*r^p over [0, r] for p > -1, given the value v = c*r^p at r.
inline double power_head(double v, double r, double p) { return v * r / (p + 1.0); }

/// Integral of c*r^p over [r, inf) for p < -1, given the value v = c*r^p at r.
inline double power_tail(double v, double r, double p) { return -v * r / (p + 1.0); }

/// Exponent of a local power law through (r1, v1), (r2, v2). Returns NaN if the values change sign.
double power_exponent(double r1, double v1, double r2, double v2);

/// Kahan-compensated running sum.
class Accumulator {
 public:
  void add(double x) {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace nlcurv::numerics
