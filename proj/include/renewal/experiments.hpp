#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "renewal/distributions.hpp"
#include "renewal/gap_inversion.hpp"
#include "renewal/size_inversion.hpp"

namespace renewal {

/// Runs body(0..count-1) on `jobs` threads. Results must be written by index;
/// the first exception (by index) is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& body);

/// Sample quantile with linear interpolation between order statistics
/// (the "type 7" rule). p in [0, 1].
double percentile(std::vector<double> values, double p);

/// Seed of Monte Carlo replicate r, and of its bootstrap stream.
std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r);
std::uint64_t bootstrap_seed(std::uint64_t seed, std::size_t r);

struct FwStudyConfig {
  ModelSpec model;
  std::size_t n = 500;
  std::int64_t w_max = 10;
  double alpha = 0.9;
  /// Also compute normal intervals and the bootstrap sup-norm radius.
  bool intervals = false;
  std::int64_t l = 5;
  std::size_t bootstrap_B = 999;
};

struct FwStudy {
  std::vector<std::vector<double>> f_hat;      // [rep][w-1]
  std::vector<std::vector<double>> sd_hat;     // plug-in sqrt(var_hat)
  std::vector<std::vector<Interval>> normal;   // when intervals
  std::vector<double> boot_radius;             // when intervals
  std::vector<Regime> regime;                  // classify_regime on w = 1..10
};

FwStudy run_fw_study(const FwStudyConfig& cfg, std::size_t reps, std::uint64_t seed,
                     std::size_t jobs);

struct FdStudyConfig {
  ModelSpec model;
  std::size_t n = 500;
  DecompoundConfig fd;
  double alpha = 0.9;
  bool bootstrap = false;  // uses fd.bootstrap_B
};

struct FdStudy {
  std::vector<std::vector<double>> estimate;  // [rep][grid]; empty if the rep failed
  std::vector<std::string> failure;           // error text per failed rep
  std::vector<double> boot_radius;            // NaN when absent or failed
  std::vector<std::size_t> n_star;
};

FdStudy run_fd_study(const FdStudyConfig& cfg, std::size_t reps, std::uint64_t seed,
                     std::size_t jobs);

/// Preset names: fig2, fig3, fig4, fig5_case1, fig5_case2, fig6.
std::vector<std::string> preset_names();

struct PresetOptions {
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  /// Bootstrap replicates for presets that use them (0 keeps the default 999).
  std::size_t bootstrap_B = 0;
};

/// Runs a preset and writes its CSV files into out_dir (created if needed).
/// Progress and a summary go to `log`.
void run_preset(const std::string& name, const PresetOptions& opt, const std::string& out_dir,
                std::ostream& log);

}  // namespace renewal
