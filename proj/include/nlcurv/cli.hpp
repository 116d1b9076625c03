#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nlcurv/curvature.hpp"
#include "nlcurv/geometry.hpp"
#include "nlcurv/kernels.hpp"

namespace nlcurv {

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentKind { curvature_convergence, flow_convergence, admissibility, apriori };

ExperimentKind parse_kind(const std::string& s);
std::string to_string(ExperimentKind k);

/// One [section] of a config file.
struct ExperimentConfig {
  std::string name;
  ExperimentKind kind = ExperimentKind::curvature_convergence;

  // kernel
  std::string kernel = "family1";  // family1 | family2 | slow_tail
  KernelParams params;
  double modulation = 0.0;  // amplitude a of 1 + a (w.v)^2
  double modulation_angle = 0.0;

  // shape: circle (radius) or ellipse (semi_a, semi_b), centred at the origin
  std::string shape = "circle";
  double radius = 1.0;
  double semi_a = 2.0, semi_b = 1.0;

  std::vector<double> eps;  // strictly decreasing
  ConvergenceBudget budget;
  int points = 64;
  double rel_tol = 1e-6;

  // grid and flow
  int grid = 128;
  double half_width = 1.5;
  double clamp = 0.25;
  double T = 0.02;
  double snapshot_every = 0.0;
  double cfl = 0.9;
  double partner_radius = 0.0;  // > 0: also evolve the nested circle and check ordering
  bool local = true;            // flow and apriori runs include eps = 0

  std::uint64_t seed = 12345;

  /// Required fields per kind, ladder order, ranges.
  void validate() const;
  /// key = value lines in a fixed order; the hash is taken over this text.
  std::string canonical() const;
  std::string hash() const;
};

/// Flat key = value sections; '#' starts a comment. Throws ConfigError with the line number.
std::vector<ExperimentConfig> parse_config(std::istream& in);
std::vector<ExperimentConfig> load_config(const std::string& path);

Kernel make_kernel(const ExperimentConfig& cfg);
SurfacePtr make_shape(const ExperimentConfig& cfg);
/// N points evenly spread in the boundary parameter.
std::vector<Vec> boundary_points(const ExperimentConfig& cfg);

enum ExitCode { kPass = 0, kConfigFailure = 1, kThresholdFailure = 2, kBudgetFailure = 3 };

struct CurvatureRow {
  double eps = 0.0;
  int point = 0;
  Vec x;
  double h_eps = 0.0, h_0 = 0.0, error = 0.0;
  double bound = 0.0;  // E(eps, delta), NaN out of regime
  double delta = 0.0;
};

struct CurvatureConvergence {
  std::vector<CurvatureRow> rows;
  std::vector<double> max_error;  // per eps
  double fitted_c = 0.0;          // max error / E over the in-regime rows
  double a0 = 0.0, b0 = 0.0;
  double h0_scale = 0.0;          // max |H_0| over the points
  bool decreasing = true;
};

/// a0 and b0 come from the kernel's admissibility report (seeded by cfg.seed).
CurvatureConvergence curvature_convergence(const ExperimentConfig& cfg);

struct FlowRow {
  double eps = 0.0;  // 0 for the local problem
  double t = 0.0;
  double sup_distance = 0.0;  // to the local solution at the same time
  double front_radius = 0.0;
  double ordering_gap = 0.0;  // max(u_small - u_large), <= 0 when ordered
};

struct FlowConvergence {
  std::vector<FlowRow> rows;
  std::vector<double> final_distance;  // per eps on the ladder
  bool decreasing = true;
  bool ordered = true;
  int steps = 0;
};

FlowConvergence flow_convergence(const ExperimentConfig& cfg);

struct AprioriRow {
  double eps = 0.0;
  bool lipschitz_ok = false, hoelder_ok = false;
  double max_lipschitz_ratio = 0.0, hoelder_constant = 0.0;
};

std::vector<AprioriRow> apriori_study(const ExperimentConfig& cfg);
/// max c / min c - 1 over the rows with eps > 0.
double hoelder_spread(const std::vector<AprioriRow>& rows);

/// Runs one experiment, writes its CSVs and plot script into out_dir and returns the exit code.
int run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);

}  // namespace nlcurv
