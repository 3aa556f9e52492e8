#include "renewal/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <thread>

#include "renewal/error.hpp"
#include "renewal/simulator.hpp"

namespace renewal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::string& header) : path_(path) {
    out_.open(path);
    if (!out_) throw Error(Errc::Io, "cannot open " + path.string() + " for writing");
    out_ << header << '\n';
  }
  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }
  void values(const std::vector<double>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << fmt(cells[k]);
    out_ << '\n';
  }

 private:
  static std::string cell(double x) { return fmt(x); }
  static std::string cell(std::int64_t x) { return std::to_string(x); }
  static std::string cell(std::size_t x) { return std::to_string(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }

  std::filesystem::path path_;
  std::ofstream out_;
};

ModelSpec geometric_model(double c, double q) {
  return ModelSpec{SizeDistribution(Geometric{c}), GapDistribution(Exponential{1.0}), q};
}

ModelSpec fig2_model() { return geometric_model(0.25, 0.6); }
ModelSpec fig3_model() {
  return ModelSpec{SizeDistribution(DiscretePareto{1.5}), GapDistribution(Exponential{1.0}), 0.7};
}

FwStudyConfig fw_config(const std::string& which) {
  FwStudyConfig cfg{.model = which == "fig3" ? fig3_model() : fig2_model()};
  cfg.n = which == "fig3" ? 1000 : 500;
  cfg.w_max = which == "fig3" ? 11 : 10;
  return cfg;
}

FdStudyConfig fd_config(int which_case, Conditioning cond) {
  FdStudyConfig cfg{.model = geometric_model(which_case == 1 ? 0.25 : 0.7, 0.6), .n = 500, .fd = {}};
  cfg.fd.cond = cond;
  cfg.fd.bootstrap_B = 999;
  return cfg;
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t j) {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (j < r.size()) out.push_back(r[j]);
  }
  return out;
}

double mc_sd(const std::vector<double>& v) {
  if (v.size() < 2) return kNaN;
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

void write_fw_outputs(const std::filesystem::path& dir, const FwStudyConfig& cfg,
                      const FwStudy& st, std::ostream& log) {
  const double q = cfg.model.q;
  const double n = static_cast<double>(cfg.n);
  CsvFile truth(dir / "truth.csv", "w,f_w,r_true,sd_true");
  CsvFile pct(dir / "fw_percentiles.csv", "w,truth,p05,p50,p95");
  CsvFile sd(dir / "sd_percentiles.csv", "w,sd_true,sd_mc,p05,p50,p95");
  CsvFile reg(dir / "regime.csv", "w,R_true");
  std::vector<std::int64_t> probe;
  for (std::int64_t w = 1; w <= cfg.w_max; ++w) {
    const double f = cfg.model.size.pmf(w);
    const double r = risk_R(cfg.model.size, q, w);
    const double sd_true = std::sqrt(std::max(0.0, r - f * f) / n);
    const auto fh = column(st.f_hat, static_cast<std::size_t>(w - 1));
    const auto sh = column(st.sd_hat, static_cast<std::size_t>(w - 1));
    truth.row(w, f, r, sd_true);
    pct.row(w, f, percentile(fh, 0.05), percentile(fh, 0.5), percentile(fh, 0.95));
    sd.row(w, sd_true, mc_sd(fh), percentile(sh, 0.05), percentile(sh, 0.5), percentile(sh, 0.95));
    reg.row(w, r);
    probe.push_back(w);
  }
  const RegimeReport theory = classify_regime(cfg.model.size, q, probe);
  std::size_t counts[3] = {0, 0, 0};
  for (Regime r : st.regime) ++counts[static_cast<int>(r)];
  log << "model regime: " << to_string(theory.classification)
      << " (growth rate " << fmt(theory.growth_rate) << ")\n"
      << "per-dataset regimes: stable " << counts[0] << ", explosive " << counts[1]
      << ", inconclusive " << counts[2] << "\n";
}

void run_fw_preset(const std::string& name, const PresetOptions& opt,
                   const std::filesystem::path& dir, std::ostream& log) {
  const FwStudyConfig cfg = fw_config(name);
  log << name << ": " << cfg.model.size.describe() << ", q=" << cfg.model.q << ", N=" << cfg.n
      << ", reps=" << opt.reps << "\n";
  const FwStudy st = run_fw_study(cfg, opt.reps, opt.seed, opt.jobs);
  write_fw_outputs(dir, cfg, st, log);
}

void run_ci_preset(const PresetOptions& opt, const std::filesystem::path& dir, std::ostream& log) {
  CsvFile cov(dir / "coverage.csv", "model,w,normal_coverage,bootstrap_pointwise_coverage");
  CsvFile sim(dir / "coverage_simultaneous.csv", "model,l,normal_all,bootstrap_sup");
  CsvFile bounds(dir / "ci_bounds.csv", "model,w,mc_upper,bt_upper_median,an_true_upper,an_est_upper_median");
  for (const std::string which : {"fig2", "fig3"}) {
    FwStudyConfig cfg = fw_config(which);
    cfg.intervals = true;
    if (opt.bootstrap_B > 0) cfg.bootstrap_B = opt.bootstrap_B;
    const std::string label = which == std::string("fig2") ? "geometric" : "pareto";
    log << "fig4/" << label << ": " << cfg.model.size.describe() << ", N=" << cfg.n
        << ", reps=" << opt.reps << ", B=" << cfg.bootstrap_B << "\n";
    const FwStudy st = run_fw_study(cfg, opt.reps, opt.seed, opt.jobs);
    const double z = normal_abs_quantile(cfg.alpha);
    const double root_n = std::sqrt(static_cast<double>(cfg.n));
    const auto reps = static_cast<double>(st.f_hat.size());
    std::vector<std::size_t> all_normal(st.f_hat.size(), 1);
    std::size_t sup_hits = 0;
    for (std::size_t r = 0; r < st.f_hat.size(); ++r) {
      double dev = 0;
      for (std::int64_t w = 1; w <= cfg.l; ++w) {
        dev = std::max(dev, std::abs(st.f_hat[r][static_cast<std::size_t>(w - 1)] -
                                     cfg.model.size.pmf(w)));
      }
      if (dev <= st.boot_radius[r] / root_n) ++sup_hits;
    }
    for (std::int64_t w = 1; w <= cfg.w_max; ++w) {
      const auto j = static_cast<std::size_t>(w - 1);
      const double f = cfg.model.size.pmf(w);
      std::size_t normal_hits = 0, boot_hits = 0;
      std::vector<double> diff, an_est, bt_upper;
      for (std::size_t r = 0; r < st.f_hat.size(); ++r) {
        const Interval ci = st.normal[r][j];
        const bool in = ci.lo <= f && f <= ci.hi;
        normal_hits += in;
        if (w <= cfg.l && !in) all_normal[r] = 0;
        boot_hits += std::abs(st.f_hat[r][j] - f) <= st.boot_radius[r] / root_n;
        diff.push_back(st.f_hat[r][j] - f);
        an_est.push_back(z * st.sd_hat[r][j]);
        bt_upper.push_back(st.boot_radius[r] / root_n);
      }
      const double r_true = risk_R(cfg.model.size, cfg.model.q, w);
      const double an_true = z * std::sqrt(std::max(0.0, r_true - f * f) / static_cast<double>(cfg.n));
      cov.row(label, w, static_cast<double>(normal_hits) / reps, static_cast<double>(boot_hits) / reps);
      bounds.row(label, w, percentile(diff, 0.95), percentile(bt_upper, 0.5), an_true,
                 percentile(an_est, 0.5));
    }
    std::size_t normal_all = 0;
    for (std::size_t v : all_normal) normal_all += v;
    sim.row(label, cfg.l, static_cast<double>(normal_all) / reps,
            static_cast<double>(sup_hits) / reps);
    log << "  simultaneous bootstrap coverage (l=" << cfg.l << "): "
        << fmt(static_cast<double>(sup_hits) / reps) << "\n";
  }
}

void write_fd_percentiles(const std::filesystem::path& file, const FdStudyConfig& cfg,
                          const FdStudy& st, bool with_band) {
  const GridCdf truth = cfg.model.gap.on_grid(cfg.fd.grid);
  CsvFile out(file, with_band ? "t,truth,p05,p50,p95,bt_lo_median,bt_hi_median"
                              : "t,truth,p05,p50,p95");
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto v = column(st.estimate, i);
    if (!with_band) {
      out.row(truth.t(i), truth.values[i], percentile(v, 0.05), percentile(v, 0.5),
              percentile(v, 0.95));
      continue;
    }
    std::vector<double> lo, hi;
    for (std::size_t r = 0; r < st.estimate.size(); ++r) {
      if (st.estimate[r].empty() || std::isnan(st.boot_radius[r])) continue;
      lo.push_back(st.estimate[r][i] - st.boot_radius[r]);
      hi.push_back(st.estimate[r][i] + st.boot_radius[r]);
    }
    out.row(truth.t(i), truth.values[i], percentile(v, 0.05), percentile(v, 0.5),
            percentile(v, 0.95), percentile(lo, 0.5), percentile(hi, 0.5));
  }
}

std::size_t failures(const FdStudy& st) {
  std::size_t f = 0;
  for (const auto& e : st.estimate) f += e.empty();
  return f;
}

void run_fd_preset(int which_case, const PresetOptions& opt, const std::filesystem::path& dir,
                   std::ostream& log) {
  FdStudyConfig cfg = fd_config(which_case, Conditioning::exact(2));
  cfg.bootstrap = true;
  if (opt.bootstrap_B > 0) cfg.fd.bootstrap_B = opt.bootstrap_B;
  log << "fig5_case" << which_case << ": " << cfg.model.size.describe() << ", q=" << cfg.model.q
      << ", N=" << cfg.n << ", reps=" << opt.reps << ", B=" << cfg.fd.bootstrap_B << "\n";
  const FdStudy st = run_fd_study(cfg, opt.reps, opt.seed, opt.jobs);
  write_fd_percentiles(dir / "fd_percentiles.csv", cfg, st, true);
  const GridCdf truth = cfg.model.gap.on_grid(cfg.fd.grid);
  {
    CsvFile t(dir / "truth.csv", "t,F_D");
    for (std::size_t i = 0; i < truth.size(); ++i) t.row(truth.t(i), truth.values[i]);
  }
  std::size_t used = 0, hits = 0;
  for (std::size_t r = 0; r < st.estimate.size(); ++r) {
    if (st.estimate[r].empty() || std::isnan(st.boot_radius[r])) continue;
    ++used;
    const GridCdf est(cfg.fd.grid, st.estimate[r]);
    hits += sup_distance(est, truth, cfg.fd.grid.t_max) <= st.boot_radius[r];
  }
  CsvFile cov(dir / "coverage.csv", "target,coverage,reps_used");
  cov.row("sup_band_0_" + fmt(cfg.fd.grid.t_max),
          used ? static_cast<double>(hits) / static_cast<double>(used) : kNaN, used);
  log << "  failed replicates: " << failures(st) << "; band coverage "
      << (used ? fmt(static_cast<double>(hits) / static_cast<double>(used)) : "n/a") << "\n";
}

void run_conditioning_preset(const PresetOptions& opt, const std::filesystem::path& dir,
                             std::ostream& log) {
  const std::vector<std::pair<Conditioning, std::string>> conds = {
      {Conditioning::exact(2), "s2"}, {Conditioning::at_least(2), "sge2"}, {Conditioning::exact(3), "s3"}};
  std::vector<std::string> header = {"t"};
  std::vector<std::vector<double>> widths;
  Grid grid;
  for (int which_case : {1, 2}) {
    for (const auto& [cond, tag] : conds) {
      const FdStudyConfig cfg = fd_config(which_case, cond);
      grid = cfg.fd.grid;
      log << "fig6/case" << which_case << "/" << cond.to_string() << ": reps=" << opt.reps << "\n";
      const FdStudy st = run_fd_study(cfg, opt.reps, opt.seed, opt.jobs);
      const std::string name = "case" + std::to_string(which_case) + "_" + tag;
      write_fd_percentiles(dir / ("fd_percentiles_" + name + ".csv"), cfg, st, false);
      std::vector<double> w(grid.points());
      for (std::size_t i = 0; i < w.size(); ++i) {
        const auto v = column(st.estimate, i);
        w[i] = percentile(v, 0.95) - percentile(v, 0.05);
      }
      widths.push_back(std::move(w));
      header.push_back(name);
      log << "  failed replicates: " << failures(st) << "\n";
    }
  }
  std::string h;
  for (std::size_t k = 0; k < header.size(); ++k) h += (k ? "," : "") + header[k];
  CsvFile out(dir / "width.csv", h);
  for (std::size_t i = 0; i < grid.points(); ++i) {
    std::vector<double> cells = {grid.step * static_cast<double>(i)};
    for (const auto& w : widths) cells.push_back(w[i]);
    out.values(cells);
  }
}

}  // namespace

void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  std::vector<std::exception_ptr> errors(count);
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double percentile(std::vector<double> values, double p) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double x) { return std::isnan(x); }),
               values.end());
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r) { return mix_seed(seed, r); }

std::uint64_t bootstrap_seed(std::uint64_t seed, std::size_t r) {
  return mix_seed(mix_seed(seed, r), 0xb0075742ULL);
}

FwStudy run_fw_study(const FwStudyConfig& cfg, std::size_t reps, std::uint64_t seed,
                     std::size_t jobs) {
  cfg.model.validate();
  FwStudy st;
  st.f_hat.resize(reps);
  st.sd_hat.resize(reps);
  st.regime.resize(reps);
  if (cfg.intervals) {
    st.normal.resize(reps);
    st.boot_radius.resize(reps);
  }
  std::vector<std::int64_t> probe;
  for (std::int64_t w = 1; w <= 10; ++w) probe.push_back(w);
  parallel_for(reps, jobs, [&](std::size_t r) {
    const SampledDataset ds = simulate_dataset(cfg.model, cfg.n, replicate_seed(seed, r));
    const FwEstimate e = estimate_fw(ds, cfg.w_max, cfg.alpha);
    st.f_hat[r] = e.f_hat.values;
    for (double v : e.var_hat) st.sd_hat[r].push_back(std::sqrt(v));
    st.regime[r] = classify_regime(empirical_sampled_pmf(ds), cfg.model.q, probe).classification;
    if (cfg.intervals) {
      st.normal[r] = e.ci;
      st.boot_radius[r] = bootstrap_sup_ci(ds, cfg.l, cfg.bootstrap_B, cfg.alpha,
                                           bootstrap_seed(seed, r));
    }
  });
  return st;
}

FdStudy run_fd_study(const FdStudyConfig& cfg, std::size_t reps, std::uint64_t seed,
                     std::size_t jobs) {
  cfg.model.validate();
  cfg.fd.validate();
  FdStudy st;
  st.estimate.resize(reps);
  st.failure.resize(reps);
  st.boot_radius.assign(reps, kNaN);
  st.n_star.assign(reps, 0);
  parallel_for(reps, jobs, [&](std::size_t r) {
    const SampledDataset ds = simulate_dataset(cfg.model, cfg.n, replicate_seed(seed, r));
    try {
      const DecompoundResult res = decompound(ds, cfg.model.q, cfg.fd);
      st.estimate[r] = res.estimate.values;
      st.n_star[r] = res.diag.n_star;
    } catch (const Error& e) {
      if (e.code() == Errc::Io || e.code() == Errc::InvalidArgument) throw;
      st.failure[r] = e.what();
      return;
    }
    if (!cfg.bootstrap) return;
    try {
      st.boot_radius[r] =
          bootstrap_band_FD(ds, cfg.model.q, cfg.fd, cfg.alpha, bootstrap_seed(seed, r)).radius;
    } catch (const Error& e) {
      if (e.code() == Errc::Io || e.code() == Errc::InvalidArgument) throw;
      st.failure[r] = std::string("bootstrap: ") + e.what();
    }
  });
  return st;
}

std::vector<std::string> preset_names() {
  return {"fig2", "fig3", "fig4", "fig5_case1", "fig5_case2", "fig6"};
}

void run_preset(const std::string& name, const PresetOptions& opt, const std::string& out_dir,
                std::ostream& log) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw Error(Errc::InvalidArgument, "unknown preset '" + name + "'");
  }
  if (opt.reps == 0) throw Error(Errc::InvalidArgument, "reps must be >= 1");
  const std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + out_dir + ": " + ec.message());
  if (name == "fig2" || name == "fig3") {
    run_fw_preset(name, opt, dir, log);
  } else if (name == "fig4") {
    run_ci_preset(opt, dir, log);
  } else if (name == "fig5_case1") {
    run_fd_preset(1, opt, dir, log);
  } else if (name == "fig5_case2") {
    run_fd_preset(2, opt, dir, log);
  } else {
    run_conditioning_preset(opt, dir, log);
  }
}

}  // namespace renewal
