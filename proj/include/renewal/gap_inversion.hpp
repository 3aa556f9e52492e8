#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "renewal/grid_cdf.hpp"
#include "renewal/pmf.hpp"
#include "renewal/series.hpp"
#include "renewal/simulator.hpp"
#include "renewal/size_inversion.hpp"

namespace renewal {

/// Which sampled flows contribute gap observations: W_q = s or W_q >= s.
struct Conditioning {
  enum class Kind { Exact, AtLeast };
  Kind kind = Kind::Exact;
  std::int64_t s = 2;

  static Conditioning exact(std::int64_t s) { return {Kind::Exact, s}; }
  static Conditioning at_least(std::int64_t s) { return {Kind::AtLeast, s}; }
  /// "s=3" or "s>=2"; throws InvalidArgument otherwise.
  static Conditioning parse(const std::string& text);
  std::string to_string() const;
  bool admits(std::int64_t sampled_count) const noexcept {
    return kind == Kind::Exact ? sampled_count == s : sampled_count >= s;
  }
};

struct DecompoundConfig {
  Conditioning cond;
  std::int64_t i = 1;
  std::size_t n_max = CoeffSeries::kDefaultOrder;
  double trunc_tol = 1e-8;
  Grid grid{5.0, 0.005};
  std::size_t bootstrap_B = 0;
  /// Fewer conditioning records than this produces a warning.
  std::size_t min_records = 30;

  void validate() const;
};

struct DecompoundDiagnostics {
  std::size_t n_star = 0;
  double tail_bound = 0.0;  // bound on sum_{k>n*} |a_hat_k| sup|F^{*k}| up to n_max
  double reversion_residual = 0.0;
  std::size_t monotonicity_violations = 0;
  std::size_t conditioning_records = 0;
  std::size_t dropped_replicates = 0;
  std::vector<std::string> warnings;
};

struct DecompoundResult {
  GridCdf estimate;
  CoeffSeries mix;       // A_hat
  CoeffSeries reverted;  // a_hat
  DecompoundDiagnostics diag;
};

/// A_hat_{s,n} = q^s / f_hat_Wq(s) sum_w f_hat_W(w) C(w-n, s-1) (1-q)^{w-s},
/// n = 1..n_max. Entries may be negative.
CoeffSeries empirical_A_hat(const SignedSeq& f_hat_w, const Pmf& f_hat_wq, double q,
                            std::int64_t s, std::size_t n_max);

/// Plug-in A_{s+}: sum_{s'>=s} f_hat_Wq(s') A_hat_{s'} / P_hat(W_q >= s).
CoeffSeries empirical_A_hat_geq(const SignedSeq& f_hat_w, const Pmf& f_hat_wq, double q,
                                std::int64_t s, std::size_t n_max);

/// Empirical CDF of the i-th gap over the records admitted by `cond`,
/// sampled at the grid points. Throws ZeroConditioningMass if none qualify.
GridCdf empirical_conditional_cdf(const SampledDataset& ds, const Conditioning& cond,
                                  std::int64_t i, Grid grid);

/// F^{*n} with the midpoint discretized Stieltjes convolution.
GridCdf cdf_convolve_power(const GridCdf& f, std::size_t n);

/// Reverts `mix` and sums a_n F^{*n} for n <= n*, where n* is the first n
/// with sum_{k=n+1}^{n_max} |a_k| sup_t|F^{*k}(t)| < trunc_tol. Throws
/// NotRevertible or TailTooHeavy.
DecompoundResult decompound_series(const CoeffSeries& mix, const GridCdf& conditional,
                                   std::size_t n_max, double trunc_tol);

/// Full plug-in pipeline: f_hat_Wq -> f_hat_W -> A_hat -> a_hat, applied to
/// the empirical conditional CDF. Honors cfg.cond (Exact or AtLeast).
DecompoundResult decompound(const SampledDataset& ds, double q, const DecompoundConfig& cfg);

/// decompound with cfg.cond forced to AtLeast(cfg.cond.s).
DecompoundResult decompound_geq(const SampledDataset& ds, double q, DecompoundConfig cfg);

struct BootstrapBand {
  double radius = 0.0;
  std::size_t replicates = 0;
  std::size_t dropped = 0;
};

/// Percentile (order statistic ceil(alpha B')) of sup_t |F*_D - F_hat_D| over
/// B = cfg.bootstrap_B resamples, B' of which succeed. Replicates without
/// conditioning mass are dropped and counted; other failures propagate.
/// Heuristic: no bootstrap consistency result backs these bands.
BootstrapBand bootstrap_band_FD(const SampledDataset& ds, double q, const DecompoundConfig& cfg,
                                double alpha, std::uint64_t seed);

}  // namespace renewal
