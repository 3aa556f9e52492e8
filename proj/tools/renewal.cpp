// renewal: simulate thinned flows, estimate f_W and F_D, run preset studies.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "renewal/error.hpp"
#include "renewal/experiments.hpp"
#include "renewal/gap_inversion.hpp"
#include "renewal/simulator.hpp"
#include "renewal/size_inversion.hpp"

using namespace renewal;

namespace {

enum Exit { kOk = 0, kUsage = 2, kData = 3, kEstimator = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError("bad number '" + s + "' in " + what);
}

// geometric:C | pareto:ALPHA | point:W | pmf:P1,P2,... (P_k = f_W(k))
SizeDistribution parse_size(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("--size needs KIND:PARAMS, got '" + text + "'");
  const std::string kind = text.substr(0, colon), arg = text.substr(colon + 1);
  if (kind == "geometric") return SizeDistribution(Geometric{to_double(arg, "--size")});
  if (kind == "pareto") return SizeDistribution(DiscretePareto{to_double(arg, "--size")});
  if (kind == "point") return SizeDistribution(Pmf::point_mass(static_cast<std::int64_t>(to_double(arg, "--size"))));
  if (kind == "pmf") {
    std::vector<double> p;
    std::stringstream ss(arg);
    for (std::string item; std::getline(ss, item, ',');) p.push_back(to_double(item, "--size"));
    return SizeDistribution(Pmf(1, p));
  }
  throw UsageError("unknown size distribution '" + kind + "'");
}

GapDistribution parse_gap(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos || text.substr(0, colon) != "exp") {
    throw UsageError("--gap must be exp:RATE, got '" + text + "'");
  }
  return GapDistribution(Exponential{to_double(text.substr(colon + 1), "--gap")});
}

Grid parse_grid(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("--grid needs TMAX:STEP, got '" + text + "'");
  return Grid{to_double(text.substr(0, colon), "--grid"), to_double(text.substr(colon + 1), "--grid")};
}

// Flags > config file > defaults: config entries become flags unless the
// flag is already on the command line.
std::vector<std::string> with_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) {
      path = args[k + 1];
      args.erase(args.begin() + static_cast<long>(k), args.begin() + static_cast<long>(k) + 2);
      break;
    }
    if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
      args.erase(args.begin() + static_cast<long>(k));
      break;
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open config file " + path);
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(n) + ": expected key = value");
    const std::string flag = "--" + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    bool given = false;
    for (const auto& a : args) given |= a == flag || a.rfind(flag + "=", 0) == 0;
    if (!given) {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

std::uint64_t seed_or_env(std::uint64_t seed) {
  if (const char* env = std::getenv("RENEWAL_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (env[used] == '\0') return v;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("RENEWAL_SEED is not an unsigned integer: '") + env + "'");
  }
  return seed;
}

// Writes to `path`, or stdout when empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path);
    if (!file_) throw Error(Errc::Io, "cannot write " + path);
  }
  std::ostream& get() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct SimulateArgs {
  std::string size = "geometric:0.25", gap = "exp:1", out;
  double q = 0.6;
  std::size_t n = 500;
  std::uint64_t seed = 1;
};

int cmd_simulate(const SimulateArgs& a) {
  const ModelSpec model{parse_size(a.size), parse_gap(a.gap), a.q};
  const SampledDataset ds = simulate_dataset(model, a.n, seed_or_env(a.seed));
  write_dataset(ds, a.out);
  std::int64_t max_s = 0;
  std::size_t empty = 0;
  for (const auto& r : ds.records) {
    max_s = std::max(max_s, r.sampled_count);
    empty += r.sampled_count == 0;
  }
  std::cout << "N = " << ds.size() << "\nq = " << ds.q << "\nmax s = " << max_s
            << "\nempty fraction = " << (ds.size() ? static_cast<double>(empty) / ds.size() : 0.0) << "\n";
  return kOk;
}

struct FwArgs {
  std::string data, out, regime_out;
  std::int64_t w_max = 0;
  double alpha = 0.9;
  std::size_t bootstrap = 0;
  std::int64_t l = 5;
  std::uint64_t seed = 1;
};

int cmd_estimate_fw(const FwArgs& a) {
  const SampledDataset ds = read_dataset(a.data);
  const FwEstimate e = estimate_fw(ds, a.w_max, a.alpha);
  Output out(a.out);
  std::ostream& os = out.get();
  if (a.bootstrap > 0) {
    const double radius = bootstrap_sup_ci(ds, a.l, a.bootstrap, a.alpha, seed_or_env(a.seed));
    os << "# bootstrap sup radius (l = " << a.l << ", B = " << a.bootstrap << ", alpha = " << num(a.alpha)
       << ") = " << num(radius) << "\n";
  }
  os << "w,f_hat,var_hat,ci_lo,ci_hi\n";
  for (std::int64_t w = 1; w <= e.f_hat.w_max(); ++w) {
    const auto k = static_cast<std::size_t>(w - 1);
    os << w << "," << num(e.f_hat.values[k]) << "," << num(e.var_hat[k]) << "," << num(e.ci[k].lo) << ","
       << num(e.ci[k].hi) << "\n";
  }
  std::string regime_path = a.regime_out;
  if (regime_path.empty() && !a.out.empty() && a.out != "-") {
    regime_path = (std::filesystem::path(a.out).parent_path() / "regime.csv").string();
  }
  if (!regime_path.empty()) {
    Output reg(regime_path);
    reg.get() << "w,R_hat\n";
    for (std::size_t k = 0; k < e.r_hat.size(); ++k) reg.get() << k + 1 << "," << num(e.r_hat[k]) << "\n";
  }
  return kOk;
}

struct FdArgs {
  std::string data, out, diag, cond = "s=2", grid = "5:0.005";
  std::int64_t i = 1;
  std::size_t n_max = 64, bootstrap = 999;
  double trunc_tol = 1e-8, alpha = 0.9;
  std::uint64_t seed = 1;
};

int cmd_estimate_fd(const FdArgs& a) {
  DecompoundConfig cfg;
  try {
    cfg.cond = Conditioning::parse(a.cond);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  cfg.i = a.i;
  cfg.n_max = a.n_max;
  cfg.trunc_tol = a.trunc_tol;
  cfg.grid = parse_grid(a.grid);
  cfg.bootstrap_B = a.bootstrap;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const SampledDataset ds = read_dataset(a.data);
  const DecompoundResult r = decompound(ds, ds.q, cfg);
  BootstrapBand band;
  band.radius = std::nan("");
  if (a.bootstrap > 0) band = bootstrap_band_FD(ds, ds.q, cfg, a.alpha, seed_or_env(a.seed));

  Output out(a.out);
  std::ostream& os = out.get();
  os << "# grid = " << a.grid << "\n# cond = " << cfg.cond.to_string() << ", i = " << cfg.i << "\n";
  if (a.bootstrap > 0) {
    os << "# band: " << num(a.alpha) << " bootstrap sup-norm band, B = " << a.bootstrap
       << "; heuristic, no bootstrap consistency result backs it\n";
  }
  os << "t,F_hat,band_lo,band_hi\n";
  for (std::size_t k = 0; k < r.estimate.size(); ++k) {
    const double f = r.estimate.values[k];
    os << num(r.estimate.t(k)) << "," << num(f) << "," << num(f - band.radius) << "," << num(f + band.radius)
       << "\n";
  }

  std::ostringstream d;
  d << "n_star = " << r.diag.n_star << "\n"
    << "tail_bound = " << num(r.diag.tail_bound) << "\n"
    << "reversion_residual = " << num(r.diag.reversion_residual) << "\n"
    << "dropped_replicates = " << band.dropped << "\n"
    << "monotonicity_violations = " << r.diag.monotonicity_violations << "\n"
    << "conditioning_records = " << r.diag.conditioning_records << "\n";
  if (a.bootstrap > 0) d << "band_radius = " << num(band.radius) << "\n";
  for (const auto& w : r.diag.warnings) d << "warning = " << w << "\n";
  if (a.diag.empty()) {
    std::cerr << d.str();
  } else {
    Output diag(a.diag);
    diag.get() << d.str();
  }
  return kOk;
}

struct RegimeArgs {
  std::string data, size, out;
  double q = 0.0;
  std::int64_t w_max = 10;
};

int cmd_regime(const RegimeArgs& a) {
  std::vector<std::int64_t> probe;
  for (std::int64_t w = 1; w <= a.w_max; ++w) probe.push_back(w);
  RegimeReport rep;
  if (!a.data.empty()) {
    const SampledDataset ds = read_dataset(a.data);
    rep = classify_regime(empirical_sampled_pmf(ds), ds.q, probe);
  } else {
    if (a.size.empty() || !(a.q > 0.0 && a.q < 1.0)) throw UsageError("regime needs --data, or --size and --q");
    rep = classify_regime(parse_size(a.size), a.q, probe);
  }
  Output out(a.out);
  std::ostream& os = out.get();
  os << "# regime = " << to_string(rep.classification) << "\n# growth_rate = " << num(rep.growth_rate) << "\n";
  os << "w,R,variance\n";
  for (std::size_t k = 0; k < rep.r_values.size(); ++k) {
    os << rep.r_values[k].first << "," << num(rep.r_values[k].second) << "," << num(rep.variance[k].second)
       << "\n";
  }
  return kOk;
}

struct ExperimentArgs {
  std::string preset, out = "results";
  std::size_t reps = 1000, jobs = 1, bootstrap = 0;
  std::uint64_t seed = 1;
};

int cmd_experiment(const ExperimentArgs& a) {
  PresetOptions opt;
  opt.reps = a.reps;
  opt.seed = seed_or_env(a.seed);
  opt.jobs = a.jobs;
  opt.bootstrap_B = a.bootstrap;
  run_preset(a.preset, opt, a.out, std::cout);
  return kOk;
}

int exit_code(Errc c) {
  switch (c) {
    case Errc::InvalidArgument:
      return kUsage;
    case Errc::Io:
    case Errc::Format:
      return kData;
    default:
      return kEstimator;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thinned finite renewal processes: simulation and inversion"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate a sampled dataset");
  s->add_option("--size", sim.size, "geometric:C | pareto:ALPHA | point:W | pmf:P1,P2,...")->capture_default_str();
  s->add_option("--gap", sim.gap, "exp:RATE")->capture_default_str();
  s->add_option("--q", sim.q, "sampling probability")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  s->add_option("--n", sim.n, "number of flows")->capture_default_str();
  s->add_option("--seed", sim.seed, "master seed (RENEWAL_SEED overrides)")->capture_default_str();
  s->add_option("--out", sim.out, "dataset file")->required();

  FwArgs fw;
  auto* f = app.add_subcommand("estimate-fw", "Estimate the flow size pmf f_W");
  f->add_option("data", fw.data, "dataset file")->required();
  f->add_option("--out", fw.out, "CSV path (default stdout)");
  f->add_option("--regime", fw.regime_out, "regime CSV path (default regime.csv beside --out)");
  f->add_option("--wmax", fw.w_max, "largest w (0: largest sampled size)")->capture_default_str();
  f->add_option("--alpha", fw.alpha, "confidence level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  f->add_option("--bootstrap", fw.bootstrap, "bootstrap replicates for the sup-norm radius (0: off)")
      ->capture_default_str();
  f->add_option("--l", fw.l, "sup-norm range 1..l")->capture_default_str();
  f->add_option("--seed", fw.seed, "bootstrap seed (RENEWAL_SEED overrides)")->capture_default_str();

  FdArgs fd;
  auto* g = app.add_subcommand("estimate-fd", "Estimate the inter-renewal CDF F_D");
  g->add_option("data", fd.data, "dataset file")->required();
  g->add_option("--out", fd.out, "CSV path (default stdout)");
  g->add_option("--diag", fd.diag, "diagnostics path (default stderr)");
  g->add_option("--cond", fd.cond, "s=K or s>=K")->capture_default_str();
  g->add_option("--i", fd.i, "gap index")->capture_default_str();
  g->add_option("--n-max", fd.n_max, "series order")->capture_default_str();
  g->add_option("--trunc-tol", fd.trunc_tol, "tail tolerance")->capture_default_str();
  g->add_option("--grid", fd.grid, "TMAX:STEP")->capture_default_str();
  g->add_option("--bootstrap", fd.bootstrap, "bootstrap replicates for the band (0: off)")->capture_default_str();
  g->add_option("--alpha", fd.alpha, "band level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  g->add_option("--seed", fd.seed, "bootstrap seed (RENEWAL_SEED overrides)")->capture_default_str();

  RegimeArgs rg;
  auto* r = app.add_subcommand("regime", "Stable/explosive diagnosis from R_{q,w}");
  r->add_option("--data", rg.data, "dataset file (plug-in R_hat)");
  r->add_option("--size", rg.size, "model size distribution (exact R)");
  r->add_option("--q", rg.q, "sampling probability with --size")->check(CLI::Range(0.0, 1.0));
  r->add_option("--wmax", rg.w_max, "probe w = 1..wmax")->capture_default_str();
  r->add_option("--out", rg.out, "CSV path (default stdout)");

  ExperimentArgs ex;
  auto* e = app.add_subcommand("experiment", "Run a preset Monte Carlo study");
  e->add_option("preset", ex.preset, "fig2 | fig3 | fig4 | fig5_case1 | fig5_case2 | fig6")
      ->required()
      ->check(CLI::IsMember(preset_names()));
  e->add_option("--reps", ex.reps, "Monte Carlo replications")->check(CLI::PositiveNumber)->capture_default_str();
  e->add_option("--seed", ex.seed, "master seed (RENEWAL_SEED overrides)")->capture_default_str();
  e->add_option("--out", ex.out, "output directory")->capture_default_str();
  e->add_option("--jobs", ex.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  e->add_option("--bootstrap", ex.bootstrap, "bootstrap replicates (0: preset default 999)");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = with_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? kOk : kUsage;
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kUsage;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return exit_code(err.code());
  }

  try {
    if (s->parsed()) return cmd_simulate(sim);
    if (f->parsed()) return cmd_estimate_fw(fw);
    if (g->parsed()) return cmd_estimate_fd(fd);
    if (r->parsed()) return cmd_regime(rg);
    return cmd_experiment(ex);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kUsage;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return exit_code(err.code());
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kData;
  }
}
