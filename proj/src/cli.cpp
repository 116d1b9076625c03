#include "nlcurv/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include <tbb/parallel_for.h>

#include "nlcurv/admissibility.hpp"
#include "nlcurv/levelset.hpp"

namespace nlcurv {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// shortest round-trip text, independent of the locale
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  // 2^-3 style powers
  if (const auto caret = t.find('^'); caret != std::string::npos)
    return std::pow(parse_number(key, t.substr(0, caret)), parse_number(key, t.substr(caret + 1)));
  double v = 0.0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("'" + key + "' expects an integer");
  return static_cast<int>(v);
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::string t = text;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream in(t);
  std::vector<double> out;
  for (std::string tok; in >> tok;) out.push_back(parse_number(key, tok));
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  throw ConfigError("'" + key + "' expects true or false");
}

void assign(ExperimentConfig& c, const std::string& key, const std::string& value) {
  static const std::map<std::string, double KernelParams::*> kernel_keys{
      {"s", &KernelParams::s}, {"m", &KernelParams::m}, {"sigma", &KernelParams::sigma}, {"mu", &KernelParams::mu}};
  static const std::map<std::string, double ConvergenceBudget::*> budget_keys{
      {"alpha", &ConvergenceBudget::alpha}, {"beta", &ConvergenceBudget::beta}, {"gamma", &ConvergenceBudget::gamma},
      {"q", &ConvergenceBudget::q},         {"eps_bar", &ConvergenceBudget::eps_bar}};
  static const std::map<std::string, double ExperimentConfig::*> reals{
      {"modulation", &ExperimentConfig::modulation},
      {"modulation_angle", &ExperimentConfig::modulation_angle},
      {"radius", &ExperimentConfig::radius},
      {"semi_a", &ExperimentConfig::semi_a},
      {"semi_b", &ExperimentConfig::semi_b},
      {"rel_tol", &ExperimentConfig::rel_tol},
      {"half_width", &ExperimentConfig::half_width},
      {"clamp", &ExperimentConfig::clamp},
      {"T", &ExperimentConfig::T},
      {"snapshot_every", &ExperimentConfig::snapshot_every},
      {"cfl", &ExperimentConfig::cfl},
      {"partner_radius", &ExperimentConfig::partner_radius}};
  if (key == "kind") c.kind = parse_kind(trim(value));
  else if (key == "kernel") c.kernel = trim(value);
  else if (key == "shape") c.shape = trim(value);
  else if (key == "eps") c.eps = parse_list(key, value);
  else if (key == "points") c.points = parse_int(key, value);
  else if (key == "grid") c.grid = parse_int(key, value);
  else if (key == "local") c.local = parse_bool(key, value);
  else if (key == "seed") {
    const double v = parse_number(key, value);
    if (v < 0 || v != std::floor(v)) throw ConfigError("'seed' expects a nonnegative integer");
    c.seed = static_cast<std::uint64_t>(v);
  } else if (auto k = kernel_keys.find(key); k != kernel_keys.end()) c.params.*(k->second) = parse_number(key, value);
  else if (auto b = budget_keys.find(key); b != budget_keys.end()) c.budget.*(b->second) = parse_number(key, value);
  else if (auto r = reals.find(key); r != reals.end()) c.*(r->second) = parse_number(key, value);
  else throw ConfigError("unknown key '" + key + "'");
}

// FNV-1a
std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

ExperimentKind parse_kind(const std::string& s) {
  if (s == "curvature-convergence") return ExperimentKind::curvature_convergence;
  if (s == "flow-convergence") return ExperimentKind::flow_convergence;
  if (s == "admissibility") return ExperimentKind::admissibility;
  if (s == "apriori") return ExperimentKind::apriori;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::curvature_convergence: return "curvature-convergence";
    case ExperimentKind::flow_convergence: return "flow-convergence";
    case ExperimentKind::admissibility: return "admissibility";
    case ExperimentKind::apriori: return "apriori";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (kernel != "family1" && kernel != "family2" && kernel != "slow_tail")
    throw ConfigError(name + ": kernel must be family1, family2 or slow_tail");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0 && eps[i] <= 1.0)) throw ConfigError(name + ": eps values must lie in (0, 1]");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw ConfigError(name + ": eps ladder must be strictly decreasing");
  }
  switch (kind) {
    case ExperimentKind::admissibility:
      return;
    case ExperimentKind::curvature_convergence:
      if (eps.empty()) throw ConfigError(name + ": eps ladder required");
      if (shape != "circle" && shape != "ellipse") throw ConfigError(name + ": shape must be circle or ellipse");
      if (!(radius > 0.0 && semi_a > 0.0 && semi_b > 0.0)) throw ConfigError(name + ": shape sizes must be positive");
      if (points < 1) throw ConfigError(name + ": points must be positive");
      if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ConfigError(name + ": rel_tol must lie in (0, 1)");
      try {
        budget.validate(params.s);
      } catch (const InvalidParameter& e) {
        throw ConfigError(name + ": " + e.what());
      }
      return;
    case ExperimentKind::flow_convergence:
    case ExperimentKind::apriori: {
      if (eps.empty() && !local) throw ConfigError(name + ": nothing to run");
      if (shape != "circle") throw ConfigError(name + ": flows start from a clamped circle");
      if (grid < 16) throw ConfigError(name + ": grid needs at least 16 nodes");
      if (!(T > 0.0)) throw ConfigError(name + ": T must be positive");
      if (!(clamp > 0.0 && radius > 0.0)) throw ConfigError(name + ": radius and clamp must be positive");
      if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError(name + ": cfl must lie in (0, 1]");
      if (!(snapshot_every >= 0.0)) throw ConfigError(name + ": snapshot_every must be nonnegative");
      if (partner_radius < 0.0) throw ConfigError(name + ": partner_radius must be nonnegative");
      const double h = 2.0 * half_width / (grid - 1);
      if (std::max(radius, partner_radius) + clamp >= half_width - 3.0 * h)
        throw ConfigError(name + ": the clamped circle reaches the padding band; enlarge half_width");
      return;
    }
  }
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream o;
  o << "kind = " << to_string(kind) << "\nkernel = " << kernel << "\ns = " << num(params.s) << "\nm = "
    << num(params.m) << "\nsigma = " << num(params.sigma) << "\nmu = " << num(params.mu)
    << "\nmodulation = " << num(modulation) << "\nmodulation_angle = " << num(modulation_angle)
    << "\nshape = " << shape << "\nradius = " << num(radius) << "\nsemi_a = " << num(semi_a)
    << "\nsemi_b = " << num(semi_b) << "\neps =";
  for (double e : eps) o << ' ' << num(e);
  o << "\nalpha = " << num(budget.alpha) << "\nbeta = " << num(budget.beta) << "\ngamma = " << num(budget.gamma)
    << "\nq = " << num(budget.q) << "\neps_bar = " << num(budget.eps_bar) << "\npoints = " << points
    << "\nrel_tol = " << num(rel_tol) << "\ngrid = " << grid << "\nhalf_width = " << num(half_width)
    << "\nclamp = " << num(clamp) << "\nT = " << num(T) << "\nsnapshot_every = " << num(snapshot_every)
    << "\ncfl = " << num(cfl) << "\npartner_radius = " << num(partner_radius)
    << "\nlocal = " << (local ? "true" : "false") << "\nseed = " << seed << "\n";
  return o.str();
}

std::string ExperimentConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical())));
  return buf;
}

std::vector<ExperimentConfig> parse_config(std::istream& in) {
  std::vector<ExperimentConfig> out;
  std::vector<std::string> seen;
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      ExperimentConfig c;
      c.name = trim(line.substr(1, line.size() - 2));
      if (c.name.empty()) throw ConfigError(where + "empty section name");
      for (const auto& e : out)
        if (e.name == c.name) throw ConfigError(where + "duplicate section '" + c.name + "'");
      out.push_back(c);
      seen.clear();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    if (out.empty()) throw ConfigError(where + "key outside a section");
    const std::string key = trim(line.substr(0, eq));
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) throw ConfigError(where + "duplicate key '" + key + "'");
    seen.push_back(key);
    try {
      assign(out.back(), key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  for (const auto& c : out) c.validate();
  return out;
}

std::vector<ExperimentConfig> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in);
}

Kernel make_kernel(const ExperimentConfig& cfg) {
  Kernel k = [&] {
    if (cfg.kernel == "family1") return Kernel::make_builtin(Family::fractional_two_exponent, 2, cfg.params);
    if (cfg.kernel == "family2") return Kernel::make_builtin(Family::fractional_exp_tail, 2, cfg.params);
    // r^-(2+sigma) inside the unit ball, r^-3 outside: the tail decays like |y|^-(d+1), not faster
    CustomProfile p;
    const double sig = cfg.params.sigma;
    p.value = [sig](double r) { return r <= 1.0 ? std::pow(r, -(2.0 + sig)) : std::pow(r, -3.0); };
    p.derivative = [sig](double r) {
      return r <= 1.0 ? -(2.0 + sig) * std::pow(r, -(3.0 + sig)) : -3.0 * std::pow(r, -4.0);
    };
    p.near_exponent = sig;
    p.near_constant = 1.0;
    p.breakpoints = {1.0};
    return Kernel::custom_radial(2, "slow_tail", p, cfg.params.s, cfg.params.m);
  }();
  if (cfg.modulation != 0.0)
    k = k.modulated(make_vec(std::cos(cfg.modulation_angle), std::sin(cfg.modulation_angle)), cfg.modulation);
  return k;
}

SurfacePtr make_shape(const ExperimentConfig& cfg) {
  if (cfg.shape == "circle") return make_ball(make_vec(0, 0), cfg.radius);
  if (cfg.shape == "ellipse") return make_ellipsoid(make_vec(0, 0), make_vec(cfg.semi_a, cfg.semi_b));
  throw ConfigError("unknown shape '" + cfg.shape + "'");
}

std::vector<Vec> boundary_points(const ExperimentConfig& cfg) {
  std::vector<Vec> pts;
  const double a = cfg.shape == "circle" ? cfg.radius : cfg.semi_a;
  const double b = cfg.shape == "circle" ? cfg.radius : cfg.semi_b;
  for (int i = 0; i < cfg.points; ++i) {
    const double t = 2.0 * std::numbers::pi * i / cfg.points;
    pts.push_back(make_vec(a * std::cos(t), b * std::sin(t)));
  }
  return pts;
}

CurvatureConvergence curvature_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  const Kernel k = make_kernel(cfg);
  const SurfacePtr shape = make_shape(cfg);
  const std::vector<Vec> pts = boundary_points(cfg);
  CurvatureConvergence out;
  AdmissibilityConfig ac = AdmissibilityConfig::defaults(2);
  ac.seed = cfg.seed;
  const AdmissibilityReport rep = validate_admissibility(k, ac);
  out.a0 = rep.a0_estimate;
  out.b0 = rep.b0_estimate;

  QuadratureBudget qb;
  qb.rel_tol = cfg.rel_tol;
  const int n = static_cast<int>(pts.size());
  std::vector<double> h0(n);
  std::vector<GraphChart> charts;
  for (const Vec& x : pts) charts.push_back(largest_chart(shape, x));
  tbb::parallel_for(0, n, [&](int i) { h0[i] = local_curvature(k, *shape, pts[i], qb); });
  for (double v : h0) out.h0_scale = std::max(out.h0_scale, std::abs(v));

  for (double eps : cfg.eps) {
    std::vector<CurvatureRow> rows(n);
    tbb::parallel_for(0, n, [&](int i) {
      CurvatureRow& r = rows[i];
      r.eps = eps;
      r.point = i;
      r.x = pts[i];
      r.h_0 = h0[i];
      r.h_eps = rescaled_curvature(k, eps, shape, pts[i], qb);
      r.error = std::abs(r.h_eps - r.h_0);
      r.delta = cfg.budget.split_radius(eps, charts[i].radius());
      try {
        r.bound = convergence_error_bound(cfg.budget, eps, r.delta, charts[i], out.a0, out.b0);
      } catch (const OutOfRegime&) {
        r.bound = nan();
      }
    });
    double worst = 0.0;
    for (const CurvatureRow& r : rows) {
      worst = std::max(worst, r.error);
      if (std::isfinite(r.bound) && r.bound > 0.0) out.fitted_c = std::max(out.fitted_c, r.error / r.bound);
      out.rows.push_back(r);
    }
    if (!out.max_error.empty() && !(worst < out.max_error.back())) out.decreasing = false;
    out.max_error.push_back(worst);
  }
  return out;
}

FlowConvergence flow_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  const Kernel k = make_kernel(cfg);
  const GridFunction u0 = clamped_circle(cfg.grid, cfg.half_width, make_vec(0, 0), cfg.radius, cfg.clamp);
  std::optional<GridFunction> partner;
  if (cfg.partner_radius > 0.0)
    partner = clamped_circle(cfg.grid, cfg.half_width, make_vec(0, 0), cfg.partner_radius, cfg.clamp);
  const bool partner_small = partner && cfg.partner_radius < cfg.radius;

  const auto config = [&](double eps) {
    FlowConfig fc(k);
    fc.eps = eps;
    fc.T = cfg.T;
    fc.cfl = cfg.cfl;
    fc.snapshot_every = cfg.snapshot_every;
    // a pair shares its steps
    if (partner) fc.dt = std::min(stable_time_step(u0, fc), stable_time_step(*partner, fc));
    return fc;
  };

  FlowConvergence out;
  std::optional<Trajectory> local;
  std::vector<double> ladder;
  if (cfg.local) ladder.push_back(0.0);
  ladder.insert(ladder.end(), cfg.eps.begin(), cfg.eps.end());
  for (double eps : ladder) {
    const FlowConfig fc = config(eps);
    const Trajectory tr = evolve(u0, fc);
    out.steps += tr.steps;
    std::optional<Trajectory> other;
    if (partner) other = evolve(*partner, fc);
    if (eps == 0.0) local = tr;
    for (std::size_t s = 0; s < tr.snapshots.size(); ++s) {
      const GridFunction& g = tr.snapshots[s];
      FlowRow r;
      r.eps = eps;
      r.t = g.t;
      r.sup_distance = local ? sup_distance(g, local->snapshots.at(s)) : nan();
      const auto front = extract_front(g);
      r.front_radius = front.empty() ? nan() : mean_front_radius(front, make_vec(0, 0));
      r.ordering_gap = nan();
      if (other) {
        const GridFunction& small = partner_small ? other->snapshots.at(s) : g;
        const GridFunction& large = partner_small ? g : other->snapshots.at(s);
        double gap = -std::numeric_limits<double>::infinity();
        for (std::size_t q = 0; q < g.u.size(); ++q) gap = std::max(gap, small.u[q] - large.u[q]);
        r.ordering_gap = gap;
        if (gap > 1e-10) out.ordered = false;
      }
      out.rows.push_back(r);
    }
    if (eps > 0.0 && local) {
      const double d = out.rows.back().sup_distance;
      if (!out.final_distance.empty() && !(d < out.final_distance.back())) out.decreasing = false;
      out.final_distance.push_back(d);
    }
  }
  return out;
}

std::vector<AprioriRow> apriori_study(const ExperimentConfig& cfg) {
  cfg.validate();
  const Kernel k = make_kernel(cfg);
  const GridFunction u0 = clamped_circle(cfg.grid, cfg.half_width, make_vec(0, 0), cfg.radius, cfg.clamp);
  std::vector<double> ladder;
  if (cfg.local) ladder.push_back(0.0);
  ladder.insert(ladder.end(), cfg.eps.begin(), cfg.eps.end());
  std::vector<AprioriRow> rows;
  for (double eps : ladder) {
    FlowConfig fc(k);
    fc.eps = eps;
    fc.T = cfg.T;
    fc.cfl = cfg.cfl;
    fc.snapshot_every = cfg.snapshot_every > 0.0 ? cfg.snapshot_every : cfg.T / 8.0;
    const AprioriReport rep = check_apriori(evolve(u0, fc), u0, 0.01);
    rows.push_back({eps, rep.lipschitz_ok, rep.hoelder_ok, rep.max_lipschitz_ratio, rep.hoelder_constant});
  }
  return rows;
}

double hoelder_spread(const std::vector<AprioriRow>& rows) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const AprioriRow& r : rows)
    if (r.eps > 0.0) lo = std::min(lo, r.hoelder_constant), hi = std::max(hi, r.hoelder_constant);
  if (!(hi > 0.0)) return 0.0;
  return hi / lo - 1.0;
}

// ---------------------------------------------------------------------------------------------
// files

namespace {

std::string header(const ExperimentConfig& cfg) {
  return "# nlcurv " + std::string(kVersion) + " " + to_string(cfg.kind) + " config " + cfg.hash() + " seed " +
         std::to_string(cfg.seed) + "\n";
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + p.string() + "'");
  f << text;
}

// generic template: columns x and ys of a CSV, rows grouped by an optional key column
std::string plot_script(const std::string& csv, const std::string& x, const std::vector<std::string>& ys,
                        const std::string& group, bool loglog, const std::string& title) {
  std::ostringstream o;
  o << "import csv\nimport matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n\n"
    << "with open('" << csv << "') as f:\n"
    << "    rows = list(csv.DictReader(line for line in f if not line.startswith('#')))\n"
    << "groups = {}\nfor r in rows:\n    groups.setdefault(r.get('" << group << "', ''), []).append(r)\n"
    << "for key, rs in sorted(groups.items()):\n";
  for (const std::string& y : ys)
    o << "    xs = [float(r['" << x << "']) for r in rs if r['" << y << "'] != 'nan']\n"
      << "    vs = [float(r['" << y << "']) for r in rs if r['" << y << "'] != 'nan']\n"
      << "    plt.plot(xs, vs, marker='o', label=('" << y << " ' + key).strip())\n";
  if (loglog) o << "plt.xscale('log')\nplt.yscale('log')\n";
  o << "plt.xlabel('" << x << "')\nplt.title('" << title << "')\nplt.legend()\n"
    << "plt.savefig('" << csv.substr(0, csv.rfind('.')) << ".png', dpi=150)\n";
  return o.str();
}

int run_curvature(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const CurvatureConvergence r = curvature_convergence(cfg);
  std::ostringstream rows, summary;
  rows << header(cfg) << "eps,point,x,y,H_eps,H_0,error,delta,bound,c_bound\n";
  for (const CurvatureRow& c : r.rows)
    rows << num(c.eps) << ',' << c.point << ',' << num(c.x(0)) << ',' << num(c.x(1)) << ',' << num(c.h_eps) << ','
         << num(c.h_0) << ',' << num(c.error) << ',' << num(c.delta) << ',' << num(c.bound) << ','
         << num(r.fitted_c * c.bound) << '\n';
  summary << header(cfg) << "eps,max_error,max_c_bound\n";
  for (std::size_t e = 0; e < cfg.eps.size(); ++e) {
    double b = nan();
    for (const CurvatureRow& c : r.rows)
      if (c.eps == cfg.eps[e] && std::isfinite(c.bound)) b = std::isnan(b) ? c.bound : std::max(b, c.bound);
    summary << num(cfg.eps[e]) << ',' << num(r.max_error[e]) << ',' << num(r.fitted_c * b) << '\n';
  }
  const std::string stem = cfg.name + "_curvature";
  write_file(dir / (stem + ".csv"), rows.str());
  write_file(dir / (stem + "_summary.csv"), summary.str());
  write_file(dir / (stem + "_plot.py"),
             plot_script(stem + "_summary.csv", "eps", {"max_error", "max_c_bound"}, "", true,
                         cfg.name + ": max |H_eps - H_0| and the fitted bound"));
  log << cfg.name << ": a0 " << num(r.a0) << ", b0 " << num(r.b0) << ", fitted c " << num(r.fitted_c)
      << ", final max error " << num(r.max_error.back()) << " (H_0 scale " << num(r.h0_scale) << ")\n";
  if (cfg.eps.size() < 2) {
    log << cfg.name << ": warning: ladder of length 1, monotonicity not checked\n";
    return kPass;
  }
  if (!r.decreasing) {
    log << cfg.name << ": max error is not strictly decreasing along the ladder\n";
    return kThresholdFailure;
  }
  return kPass;
}

int run_flow(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const FlowConvergence r = flow_convergence(cfg);
  std::ostringstream o;
  o << header(cfg) << "eps,t,sup_distance,front_radius,ordering_gap\n";
  for (const FlowRow& f : r.rows)
    o << num(f.eps) << ',' << num(f.t) << ',' << num(f.sup_distance) << ',' << num(f.front_radius) << ','
      << num(f.ordering_gap) << '\n';
  const std::string stem = cfg.name + "_flow";
  write_file(dir / (stem + ".csv"), o.str());
  write_file(dir / (stem + "_plot.py"),
             plot_script(stem + ".csv", "t", {"sup_distance"}, "eps", false, cfg.name + ": sup |u_eps - u|"));
  log << cfg.name << ": " << r.steps << " steps; final distances";
  for (double d : r.final_distance) log << ' ' << num(d);
  log << '\n';
  int code = kPass;
  if (cfg.local && cfg.eps.size() >= 2 && !r.decreasing) {
    log << cfg.name << ": distance to the local solution is not strictly decreasing\n";
    code = kThresholdFailure;
  }
  if (!r.ordered) {
    log << cfg.name << ": ordered initial data lost their order\n";
    code = kThresholdFailure;
  }
  return code;
}

int run_admissibility(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  AdmissibilityConfig ac = AdmissibilityConfig::defaults(2);
  ac.seed = cfg.seed;
  const AdmissibilityReport rep = validate_admissibility(make_kernel(cfg), ac);
  const std::string stem = cfg.name + "_admissibility";
  write_file(dir / (stem + ".txt"), header(cfg) + rep.to_text());
  write_file(dir / (stem + ".csv"), header(cfg) + rep.to_csv());
  write_file(dir / (stem + "_plot.py"), plot_script(stem + ".csv", "lambda", {"mass"}, "direction", true,
                                                    cfg.name + ": paraboloid mass"));
  for (const HypothesisVerdict& v : rep.verdicts)
    log << cfg.name << ": " << (v.pass ? "pass " : "FAIL ") << v.name << (v.pass ? "" : " (" + v.detail + ")")
        << '\n';
  return rep.pass() ? kPass : kThresholdFailure;
}

int run_apriori(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const std::vector<AprioriRow> rows = apriori_study(cfg);
  std::ostringstream o;
  o << header(cfg) << "eps,lipschitz_ok,max_lipschitz_ratio,hoelder_ok,hoelder_constant\n";
  bool ok = true;
  for (const AprioriRow& r : rows) {
    o << num(r.eps) << ',' << r.lipschitz_ok << ',' << num(r.max_lipschitz_ratio) << ',' << r.hoelder_ok << ','
      << num(r.hoelder_constant) << '\n';
    ok = ok && r.lipschitz_ok && r.hoelder_ok;
  }
  const std::string stem = cfg.name + "_apriori";
  write_file(dir / (stem + ".csv"), o.str());
  write_file(dir / (stem + "_plot.py"),
             plot_script(stem + ".csv", "eps", {"hoelder_constant"}, "", false, cfg.name + ": fitted c"));
  const double spread = hoelder_spread(rows);
  log << cfg.name << ": Hoelder constants spread " << num(spread) << '\n';
  if (!ok) log << cfg.name << ": an a-priori estimate failed\n";
  if (spread > 0.25) log << cfg.name << ": Hoelder constants differ by more than 25%\n";
  return ok && spread <= 0.25 ? kPass : kThresholdFailure;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  switch (cfg.kind) {
    case ExperimentKind::curvature_convergence: return run_curvature(cfg, dir, log);
    case ExperimentKind::flow_convergence: return run_flow(cfg, dir, log);
    case ExperimentKind::admissibility: return run_admissibility(cfg, dir, log);
    case ExperimentKind::apriori: return run_apriori(cfg, dir, log);
  }
  return kConfigFailure;
}

}  // namespace nlcurv
