// nlcurv: experiment runner. Each verb runs the config sections of its kind.
#include <algorithm>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <tbb/global_control.h>

#include "nlcurv/cli.hpp"
#include "nlcurv/common.hpp"

using namespace nlcurv;

namespace {

struct Options {
  std::string config;
  std::string out = "out";
  int threads = 0;
  std::optional<std::uint64_t> seed;
};

int run_kind(const Options& opt, ExperimentKind kind) {
  std::vector<ExperimentConfig> sections;
  try {
    sections = load_config(opt.config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigFailure;
  }
  std::unique_ptr<tbb::global_control> limit;
  if (opt.threads > 0)
    limit = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism, opt.threads);

  int code = kPass, ran = 0;
  for (ExperimentConfig cfg : sections) {
    if (cfg.kind != kind) continue;
    if (opt.seed) cfg.seed = *opt.seed;
    ++ran;
    std::cout << "[" << cfg.name << "] " << to_string(kind) << ", config " << cfg.hash() << '\n';
    int rc = kPass;
    try {
      rc = run_experiment(cfg, opt.out, std::cout);
    } catch (const BudgetExceeded& e) {
      std::cerr << cfg.name << ": budget exceeded: " << e.what() << '\n';
      rc = kBudgetFailure;
    } catch (const ConfigError& e) {
      std::cerr << cfg.name << ": config error: " << e.what() << '\n';
      rc = kConfigFailure;
    } catch (const std::exception& e) {
      std::cerr << cfg.name << ": " << e.what() << '\n';
      rc = kConfigFailure;
    }
    std::cout << "[" << cfg.name << "] " << (rc == kPass ? "pass" : "FAIL (exit " + std::to_string(rc) + ")")
              << '\n';
    code = std::max(code, rc);
  }
  if (ran == 0) std::cerr << "no " << to_string(kind) << " sections in " << opt.config << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonlocal curvature experiments"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Options opt;
  const auto add_flags = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory")->capture_default_str();
    sub->add_option("--threads", opt.threads, "worker threads (0 = all)")->check(CLI::NonNegativeNumber);
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { opt.seed = s; },
                                            "override the seed of every section");
  };
  const std::pair<const char*, ExperimentKind> verbs[] = {
      {"validate", ExperimentKind::admissibility},
      {"curvature", ExperimentKind::curvature_convergence},
      {"flow", ExperimentKind::flow_convergence},
      {"apriori", ExperimentKind::apriori}};
  const char* help[] = {"kernel admissibility reports", "curvature convergence along the eps ladder",
                        "nonlocal flows against the local flow", "Lipschitz and Hoelder estimates"};
  std::optional<ExperimentKind> chosen;
  for (std::size_t i = 0; i < std::size(verbs); ++i) {
    CLI::App* sub = app.add_subcommand(verbs[i].first, help[i]);
    add_flags(sub);
    sub->callback([&, kind = verbs[i].second] { chosen = kind; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigFailure;
  }
  return run_kind(opt, *chosen);
}
