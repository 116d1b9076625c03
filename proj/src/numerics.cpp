#include "nlcurv/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nlcurv::numerics {

namespace {

GaussRule build_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

constexpr int kMaxRule = 256;

// Kronrod 15-point extension of the 7-point Gauss rule.
constexpr std::array<double, 8> kXgk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double value;
  double error;
};

Panel kronrod(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double k = fc * kWgk[7];
  double g = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    k += kWgk[j] * s;
    if (j % 2 == 1) g += kWg[j / 2] * s;
  }
  return {k * h, std::abs((k - g) * h)};
}

constexpr int kMaxPanels = 1 << 13;
constexpr double kTiny = 1e-290;

void recurse(const std::function<double(double)>& f, double a, double b, Panel whole, double tol, int depth,
             Integral& out, int& budget) {
  if (whole.error <= tol || depth <= 0 || --budget <= 0 || !std::isfinite(whole.value)) {
    out.value += whole.value;
    out.error += whole.error;
    if (whole.error > tol || !std::isfinite(whole.value)) out.converged = false;
    return;
  }
  const double m = 0.5 * (a + b);
  recurse(f, a, m, kronrod(f, a, m), 0.5 * tol, depth - 1, out, budget);
  recurse(f, m, b, kronrod(f, m, b), 0.5 * tol, depth - 1, out, budget);
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static const std::vector<GaussRule> rules = [] {
    std::vector<GaussRule> r(kMaxRule + 1);
    for (int k = 1; k <= kMaxRule; ++k) r[k] = build_rule(k);
    return r;
  }();
  if (n < 1 || n > kMaxRule) throw std::out_of_range("gauss_legendre: unsupported order");
  return rules[n];
}

Integral adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol, double abs_tol,
                  int max_depth) {
  Integral out;
  if (a == b) return out;
  const Panel first = kronrod(f, a, b);
  const double tol = std::max({abs_tol, rel_tol * std::abs(first.value), kTiny});
  int budget = kMaxPanels;
  recurse(f, a, b, first, tol, max_depth, out, budget);
  // one retry against the refined magnitude, which may be much larger than the first guess
  const double tol2 = std::max({abs_tol, rel_tol * std::abs(out.value), kTiny});
  if (tol2 < 0.5 * tol) {
    Integral again;
    budget = kMaxPanels;
    recurse(f, a, b, first, tol2, max_depth, again, budget);
    return again;
  }
  return out;
}

Integral adaptive(const std::function<double(double)>& f, double a, double b, std::span<const double> breaks,
                  double rel_tol, double abs_tol, int max_depth) {
  std::vector<double> pts{a};
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  Integral total;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Integral part = adaptive(f, pts[i], pts[i + 1], rel_tol, abs_tol, max_depth);
    total.value += part.value;
    total.error += part.error;
    total.converged = total.converged && part.converged;
  }
  return total;
}

std::vector<double> graded_panels(double lo, double hi, double ratio, std::span<const double> breaks) {
  std::vector<double> pts;
  for (double r = lo; r < hi; r *= ratio) pts.push_back(r);
  pts.push_back(hi);
  for (double x : breaks)
    if (x > lo && x < hi) pts.push_back(x);
  std::sort(pts.begin(), pts.end());
  // drop panels thinner than a tiny fraction of their position (breakpoints landing on a grade)
  std::vector<double> out{pts.front()};
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i] - out.back() > 1e-12 * pts[i]) out.push_back(pts[i]);
  if (out.back() != hi) out.back() = hi;
  return out;
}

double power_exponent(double r1, double v1, double r2, double v2) {
  if (v1 == 0.0 || v2 == 0.0 || (v1 > 0) != (v2 > 0)) return std::nan("");
  return std::log(v2 / v1) / std::log(r2 / r1);
}

}  // namespace nlcurv::numerics
