#include "nlcurv/admissibility.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace nlcurv {

namespace {

struct AngularRule {
  std::vector<Vec> dirs;
  std::vector<double> weights;
};

// Directions in e-perp with quadrature weights for the unit sphere S^{d-2}.
AngularRule perp_directions(const Vec& e, int nodes3d) {
  const Mat frame = tangent_frame(e);
  AngularRule rule;
  if (e.size() == 2) {
    rule.dirs = {frame.col(0), -frame.col(0)};
    rule.weights = {1.0, 1.0};
    return rule;
  }
  for (int j = 0; j < nodes3d; ++j) {
    const double beta = 2.0 * std::numbers::pi * (j + 0.5) / nodes3d;
    rule.dirs.push_back(std::cos(beta) * frame.col(0) + std::sin(beta) * frame.col(1));
    rule.weights.push_back(2.0 * std::numbers::pi / nodes3d);
  }
  return rule;
}

double radial_integral(const std::function<double(double)>& h, double lo, double hi,
                       const std::vector<double>& breaks, int order) {
  const std::vector<double> panels = numerics::graded_panels(lo, hi, 2.0, breaks);
  numerics::Accumulator acc;
  for (std::size_t i = 0; i + 1 < panels.size(); ++i) acc.add(numerics::gauss(h, panels[i], panels[i + 1], order));
  // closures below lo and above hi from the local power law
  const double h0 = h(lo), h1 = h(2.0 * lo);
  const double p0 = numerics::power_exponent(lo, h0, 2.0 * lo, h1);
  if (std::isfinite(p0) && p0 > -1.0) acc.add(numerics::power_head(h0, lo, p0));
  const double g0 = h(0.5 * hi), g1 = h(hi);
  const double p1 = numerics::power_exponent(0.5 * hi, g0, hi, g1);
  if (std::isfinite(p1) && p1 < -1.0) acc.add(numerics::power_tail(g1, hi, p1));
  return acc.value();
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

Vec random_unit(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = n01(rng);
  return v.normalized();
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

}  // namespace

AdmissibilityConfig AdmissibilityConfig::defaults(int d) {
  AdmissibilityConfig cfg;
  for (int k = 1; k <= 10; ++k) cfg.small_lambdas.push_back(std::ldexp(1.0, -k));
  for (int k = 0; k <= 10; ++k) cfg.large_lambdas.push_back(std::ldexp(1.0, k));
  for (int k = 1; k <= 12; ++k) cfg.radii.push_back(std::pow(10.0, -k));
  if (d == 2) {
    for (int j = 0; j < 8; ++j) {
      const double a = std::numbers::pi * j / 8.0;
      cfg.directions.push_back(make_vec(std::cos(a), std::sin(a)));
    }
  } else {
    // Fibonacci points on the upper hemisphere
    const int n = 10;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < n; ++j) {
      const double z = 1.0 - (j + 0.5) / n;
      const double r = std::sqrt(1.0 - z * z);
      cfg.directions.push_back(make_vec(r * std::cos(golden * j), r * std::sin(golden * j), z));
    }
  }
  return cfg;
}

numerics::Integral paraboloid_integral(const Kernel& k, const Vec& e, double lambda, bool gradient_weight,
                                       double rel_tol) {
  const int d = k.dimension();
  if (e.size() != d || std::abs(e.norm() - 1.0) > 1e-12) throw InvalidParameter("direction must be a unit vector");
  if (!(lambda > 0.0)) throw InvalidParameter("lambda must be positive");
  AngularRule ang = perp_directions(e, 24);
  if (k.is_radial()) {
    // every direction in e-perp gives the same line integral
    const double total = std::accumulate(ang.weights.begin(), ang.weights.end(), 0.0);
    ang.dirs.resize(1);
    ang.weights.assign(1, total);
  }
  const std::vector<double> kbreaks = k.breakpoints();

  const auto weight = [&](const Vec& y) {
    if (!gradient_weight) return k.value(y);
    return k.gradient(y).norm() * y.norm();
  };

  const auto inner = [&](double rho, const Vec& theta) {
    const double a = 0.5 * lambda * rho * rho;
    std::vector<double> breaks{0.0};
    const double knee = std::min(a, rho);
    breaks.push_back(knee);
    breaks.push_back(-knee);
    for (double t = 2.0 * rho; t < a; t *= 2.0) {
      breaks.push_back(t);
      breaks.push_back(-t);
    }
    for (double b : kbreaks)
      if (b > rho) {
        const double t = std::sqrt(b * b - rho * rho);
        breaks.push_back(t);
        breaks.push_back(-t);
      }
    const Vec base = rho * theta;
    const auto f = [&](double t) { return weight(base + t * e); };
    return numerics::adaptive(f, -a, a, breaks, 0.1 * rel_tol, 0.0, 30).value;
  };

  const auto h = [&](double rho) {
    double sum = 0.0;
    for (std::size_t j = 0; j < ang.dirs.size(); ++j) sum += ang.weights[j] * inner(rho, ang.dirs[j]);
    return sum * std::pow(rho, d - 2);
  };

  const double scale = k.scale();
  const double lo = 1e-8 * std::min(scale, 1.0 / lambda);
  double hi = 1e8 * std::max(scale, 1.0 / lambda);
  // fast-decaying profiles: stop where the mass beyond hi is negligible against a crude size of the result
  const double size = std::min(lambda * scale, 1.0) * k.tail_mass(scale);
  for (double r = scale; r < hi; r *= 2.0)
    if (k.tail_mass(r) * (1.0 + r / scale) <= 1e-3 * rel_tol * size) {
      hi = std::max(r, 4.0 / lambda);
      break;
    }
  std::vector<double> breaks = kbreaks;
  breaks.push_back(1.0 / lambda);
  // radius where the paraboloid boundary crosses a kink of the profile
  for (double b : kbreaks) {
    const double l2 = lambda * lambda;
    breaks.push_back(std::sqrt(2.0 * (std::sqrt(1.0 + l2 * b * b) - 1.0) / l2));
  }

  numerics::Integral out;
  double previous = radial_integral(h, lo, hi, breaks, 8);
  for (int order = 16; order <= 64; order *= 2) {
    const double current = radial_integral(h, lo, hi, breaks, order);
    out.value = current;
    out.error = std::abs(current - previous);
    if (out.error <= rel_tol * std::abs(current)) return out;
    previous = current;
  }
  out.converged = false;
  return out;
}

std::pair<double, double> extrapolate_halving(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n == 0) return {std::nan(""), std::nan("")};
  if (n < 3) return {values.back(), n == 2 ? std::abs(values[1] - values[0]) : 0.0};
  const double d1 = values[n - 2] - values[n - 3];
  const double d2 = values[n - 1] - values[n - 2];
  const double ratio = d1 / d2;  // 2^q for a geometric trend
  if (!(ratio > 1.0) || !std::isfinite(ratio)) return {values.back(), std::abs(d2)};
  const double limit = values[n - 1] + d2 / (ratio - 1.0);
  double uncertainty = 0.0;
  if (n >= 4) {
    const double d0 = values[n - 3] - values[n - 4];
    const double r0 = d0 / d1;
    if (r0 > 1.0 && std::isfinite(r0)) uncertainty = std::abs(limit - (values[n - 2] + d1 / (r0 - 1.0)));
    else uncertainty = std::abs(d2);
  }
  return {limit, uncertainty};
}

AdmissibilityReport validate_admissibility(const Kernel& k, const AdmissibilityConfig& cfg) {
  if (cfg.small_lambdas.empty() || cfg.large_lambdas.empty() || cfg.radii.empty() || cfg.directions.empty())
    throw InvalidParameter("admissibility ladders must be nonempty");
  for (const Vec& e : cfg.directions)
    if (e.size() != k.dimension() || std::abs(e.norm() - 1.0) > 1e-12)
      throw InvalidParameter("admissibility directions must be unit vectors");

  const int d = k.dimension();
  const double tol = cfg.hypothesis_tol;
  AdmissibilityReport rep;
  rep.kernel = k.name();
  std::mt19937_64 rng(cfg.seed);

  // evenness and nonnegativity on a log-uniform radial sample
  {
    std::uniform_real_distribution<double> logr(-3.0, 3.0);
    bool even = true, nonneg = true;
    for (int i = 0; i < 10000; ++i) {
      const Vec y = std::pow(10.0, logr(rng)) * random_unit(d, rng);
      const double a = k.value(y), b = k.value(-y);
      even = even && a == b;
      nonneg = nonneg && a >= 0.0;
    }
    rep.verdicts.push_back({"evenness", even, 0.0, even ? "K(y) == K(-y) on 10^4 samples" : "asymmetric sample"});
    rep.verdicts.push_back({"nonnegativity", nonneg, 0.0, nonneg ? "K >= 0 on 10^4 samples" : "negative sample"});
  }

  // integrability away from the origin
  {
    bool finite = true;
    for (double r : {1e-3, 1e-1, 1.0, 10.0, 1e3}) finite = finite && std::isfinite(k.tail_mass(r));
    rep.verdicts.push_back({"integrability_off_origin", finite, 0.0, "tail_mass finite at r in {1e-3..1e3}"});
  }

  // r * tail_mass(r) -> 0 as r -> 0
  {
    std::vector<double> vals;
    for (double r : cfg.radii) {
      const double v = r * k.tail_mass(r);
      rep.singularity_table.emplace_back(r, v);
      vals.push_back(v);
    }
    rep.singularity_limit = vals.back();
    const bool ok = strictly_decreasing(vals) && vals.back() < tol;
    rep.verdicts.push_back({"singularity_at_origin", ok, tol,
                            "r*tail_mass(r) at smallest r = " + fmt(vals.back())});
  }

  // paraboloid-region masses
  bool all_converged = true, all_finite = true, monotone = true;
  const auto masses_for = [&](double lambda, bool with_gradient) {
    std::vector<ParaboloidMass> rows;
    for (std::size_t j = 0; j < cfg.directions.size(); ++j) {
      ParaboloidMass row{lambda, static_cast<int>(j), 0.0, 0.0};
      const numerics::Integral m = paraboloid_integral(k, cfg.directions[j], lambda, false, cfg.quadrature_tol);
      row.mass = m.value;
      all_converged = all_converged && m.converged;
      if (with_gradient) {
        const numerics::Integral g = paraboloid_integral(k, cfg.directions[j], lambda, true, cfg.quadrature_tol);
        row.grad_mass = g.value;
        all_converged = all_converged && g.converged;
        all_finite = all_finite && std::isfinite(g.value);
      }
      all_finite = all_finite && std::isfinite(m.value) && m.value > 0.0;
      rows.push_back(row);
    }
    return rows;
  };

  std::vector<double> a_quot, b_quot;
  for (double lambda : cfg.small_lambdas) {
    const auto rows = masses_for(lambda, true);
    double qa = 0.0, qb = 0.0;
    for (const auto& r : rows) {
      qa = std::max(qa, r.mass / lambda);
      qb = std::max(qb, r.grad_mass / lambda);
    }
    a_quot.push_back(qa);
    b_quot.push_back(qb);
    rep.small_lambda_quotients.emplace_back(lambda, qa);
    rep.small_lambda_grad_quotients.emplace_back(lambda, qb);
    rep.a_lambda_table.insert(rep.a_lambda_table.end(), rows.begin(), rows.end());
  }
  std::vector<double> decay;
  for (double lambda : cfg.large_lambdas) {
    const auto rows = masses_for(lambda, false);
    double q = 0.0;
    for (const auto& r : rows) q = std::max(q, r.mass / lambda);
    decay.push_back(q);
    rep.large_lambda_decay.emplace_back(lambda, q);
    rep.a_lambda_table.insert(rep.a_lambda_table.end(), rows.begin(), rows.end());
  }

  // a_lambda(e) is nondecreasing in lambda for each e (up to quadrature noise)
  for (std::size_t j = 0; j < cfg.directions.size(); ++j) {
    std::vector<std::pair<double, double>> seq;
    for (const auto& r : rep.a_lambda_table)
      if (r.direction == static_cast<int>(j)) seq.emplace_back(r.lambda, r.mass);
    std::sort(seq.begin(), seq.end());
    for (std::size_t i = 1; i < seq.size(); ++i)
      if (seq[i].second < seq[i - 1].second * (1.0 - 10.0 * cfg.quadrature_tol)) monotone = false;
  }

  rep.verdicts.push_back({"paraboloid_integrability", all_finite && all_converged, cfg.quadrature_tol,
                          all_converged ? "all paraboloid integrals converged"
                                        : "paraboloid quadrature did not converge within budget"});
  rep.verdicts.push_back({"uniform_paraboloid_mass", all_finite && monotone, cfg.quadrature_tol,
                          monotone ? "a_lambda finite and nondecreasing in lambda" : "a_lambda not monotone"});

  // small-lambda limsup quotients, certified by extrapolation plus tolerance margin
  const auto certify = [&](const std::vector<double>& q, double& estimate) {
    const auto [limit, unc] = extrapolate_halving(q);
    const double dn = q[q.size() - 1] - q[q.size() - 2];
    const double dp = q.size() >= 3 ? q[q.size() - 2] - q[q.size() - 3] : dn;
    const bool contracting = std::abs(dn) < std::abs(dp);
    estimate = std::max(*std::max_element(q.begin(), q.end()), limit + unc) * (1.0 + tol);
    return std::isfinite(estimate) && contracting && unc <= tol * std::abs(limit);
  };
  const bool a0_ok = certify(a_quot, rep.a0_estimate);
  const bool b0_ok = certify(b_quot, rep.b0_estimate);
  rep.verdicts.push_back({"small_lambda_mass_quotient", a0_ok, tol, "a0_estimate = " + fmt(rep.a0_estimate)});
  rep.verdicts.push_back({"small_lambda_gradient_quotient", b0_ok, tol, "b0_estimate = " + fmt(rep.b0_estimate)});

  // large-lambda decay of mass/lambda
  {
    const auto peak = std::max_element(decay.begin(), decay.end());
    const std::vector<double> after(peak, decay.end());
    bool ok = after.size() >= 3 && strictly_decreasing(after);
    double slope = 0.0;
    if (ok) {
      const std::size_t n = cfg.large_lambdas.size();
      slope = std::log(decay[n - 1] / decay[n - 3]) / std::log(cfg.large_lambdas[n - 1] / cfg.large_lambdas[n - 3]);
      ok = slope < -tol;
    }
    rep.verdicts.push_back({"large_lambda_decay", ok, tol, "terminal log-log slope = " + fmt(slope)});
  }

  // pointwise fractional domination K(y) <= m |y|^-(d+1+s) for |y| >= 1
  {
    std::uniform_real_distribution<double> logr(0.0, 6.0);
    double worst = 0.0;
    for (int i = 0; i < cfg.domination_samples; ++i) {
      const double r = std::pow(10.0, logr(rng));
      const Vec y = r * random_unit(d, rng);
      worst = std::max(worst, k.value(y) * std::pow(r, d + 1.0 + k.s()) / k.m());
    }
    rep.max_domination_ratio = worst;
    rep.verdicts.push_back({"fractional_domination", worst <= 1.0 + tol, tol,
                            "max K(y)|y|^(d+1+s)/m = " + fmt(worst)});
  }
  return rep;
}

bool AdmissibilityReport::pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.pass; });
}

const HypothesisVerdict* AdmissibilityReport::verdict(const std::string& name) const {
  for (const auto& v : verdicts)
    if (v.name == name) return &v;
  return nullptr;
}

std::string AdmissibilityReport::to_text() const {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "kernel = " << kernel << '\n';
  os << "singularity_limit = " << singularity_limit << '\n';
  os << "a0_estimate = " << a0_estimate << '\n';
  os << "b0_estimate = " << b0_estimate << '\n';
  os << "max_domination_ratio = " << max_domination_ratio << '\n';
  for (const auto& [r, v] : singularity_table) os << "singularity[" << r << "] = " << v << '\n';
  for (const auto& [l, v] : small_lambda_quotients) os << "mass_quotient[" << l << "] = " << v << '\n';
  for (const auto& [l, v] : small_lambda_grad_quotients) os << "gradient_quotient[" << l << "] = " << v << '\n';
  for (const auto& [l, v] : large_lambda_decay) os << "large_lambda_quotient[" << l << "] = " << v << '\n';
  for (const auto& v : verdicts)
    os << "verdict." << v.name << " = " << (v.pass ? "pass" : "fail") << " ; tol = " << v.tolerance << " ; "
       << v.detail << '\n';
  os << "verdict = " << (pass() ? "pass" : "fail") << '\n';
  return os.str();
}

std::string AdmissibilityReport::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(15);
  os << "lambda,direction,mass,grad_mass\n";
  for (const auto& r : a_lambda_table) os << r.lambda << ',' << r.direction << ',' << r.mass << ',' << r.grad_mass << '\n';
  return os.str();
}

}  // namespace nlcurv
