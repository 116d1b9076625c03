#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlcurv/kernels.hpp"
#include "nlcurv/numerics.hpp"

namespace nlcurv {

struct AdmissibilityConfig {
  std::vector<double> small_lambdas;  // decreasing, default 2^-1 ... 2^-10
  std::vector<double> large_lambdas;  // increasing, default 2^0 ... 2^10
  std::vector<double> radii;          // decreasing, default 1e-1 ... 1e-12
  std::vector<Vec> directions;        // unit vectors; default: evenly spread over a half-sphere
  double quadrature_tol = 1e-6;
  double hypothesis_tol = 1e-3;
  int domination_samples = 4000;
  std::uint64_t seed = 12345;

  static AdmissibilityConfig defaults(int d);
};

struct HypothesisVerdict {
  std::string name;
  bool pass = false;
  double tolerance = 0.0;
  std::string detail;
};

struct ParaboloidMass {
  double lambda = 0.0;
  int direction = 0;
  double mass = 0.0;       // int_{Q_lambda(e)} K
  double grad_mass = 0.0;  // int_{Q_lambda(e)} |grad K| |y|
};

struct AdmissibilityReport {
  std::string kernel;
  std::vector<std::pair<double, double>> singularity_table;  // (r, r * tail_mass(r))
  double singularity_limit = 0.0;
  std::vector<ParaboloidMass> a_lambda_table;                // small and large lambdas
  std::vector<std::pair<double, double>> small_lambda_quotients;       // (lambda, max_e mass/lambda)
  std::vector<std::pair<double, double>> small_lambda_grad_quotients;  // (lambda, max_e grad_mass/lambda)
  double a0_estimate = 0.0;
  double b0_estimate = 0.0;
  std::vector<std::pair<double, double>> large_lambda_decay;  // (lambda, max_e mass/lambda)
  double max_domination_ratio = 0.0;  // max of K(y)|y|^{d+1+s}/m over the sample
  std::vector<HypothesisVerdict> verdicts;

  bool pass() const;
  const HypothesisVerdict* verdict(const std::string& name) const;
  /// key = value lines.
  std::string to_text() const;
  /// lambda,direction,mass,grad_mass rows.
  std::string to_csv() const;
};

/// int_{Q_lambda(e)} F(y) dy with Q_lambda(e) = {|y.e| <= lambda/2 |pi_e(y)|^2}, in graph coordinates
/// z in e-perp, |t| <= lambda|z|^2/2.
numerics::Integral paraboloid_integral(const Kernel& k, const Vec& e, double lambda, bool gradient_weight,
                                       double rel_tol);

/// Estimates every standing hypothesis on the kernel and returns per-hypothesis verdicts.
AdmissibilityReport validate_admissibility(const Kernel& k, const AdmissibilityConfig& cfg);

/// Limit of a sequence sampled on a halving ladder, by Richardson extrapolation with the
/// convergence order fitted from the last three entries. Returns {limit, uncertainty};
/// falls back to {last, |last - previous|} when the trend is not geometric.
std::pair<double, double> extrapolate_halving(const std::vector<double>& values);

}  // namespace nlcurv
