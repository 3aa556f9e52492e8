#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "renewal/distributions.hpp"
#include "renewal/pmf.hpp"
#include "renewal/simulator.hpp"

namespace renewal {

/// Real sequence indexed from w = 1; entries may be negative.
struct SignedSeq {
  std::vector<double> values;  // values[w-1]

  std::int64_t w_max() const noexcept { return static_cast<std::int64_t>(values.size()); }
  /// Entry w, or 0 outside 1..w_max.
  double at(std::int64_t w) const noexcept {
    return (w >= 1 && w <= w_max()) ? values[static_cast<std::size_t>(w - 1)] : 0.0;
  }
};

/// Nodes z_0 = 1-q > z_1 > ... > z_l = 0 of the staged inversion.
struct ContinuationPath {
  std::vector<double> nodes;
};

/// Default path: shrink by `factor` while z > threshold, then step to 0.
/// Each step is also capped at disk_margin * (1 - z_prev), which only binds
/// for q < 1/3, where plain halving would leave the disk |z - z_prev| < 1 - z_prev.
struct PathRule {
  double threshold = 0.05;
  double factor = 0.5;
  double disk_margin = 0.9;
};

enum class Regime { Stable, Explosive, Inconclusive };
std::string_view to_string(Regime r) noexcept;

/// Engineering thresholds for classify_regime (diagnostics, not theorems).
struct RegimeThresholds {
  /// Explosive when the log-linear growth rate exceeds this multiple of log(1/q).
  double explosive_fraction = 0.5;
  /// Stable needs a nonpositive rate and max R / R(first probe) below this.
  double stable_ratio = 10.0;
};

struct RegimeReport {
  std::vector<std::pair<std::int64_t, double>> r_values;
  std::vector<std::pair<std::int64_t, double>> variance;  // R - f_W(w)^2
  Regime classification = Regime::Inconclusive;
  double growth_rate = 0.0;
};

/// f_hat_Wq(s) = #{k : s_k = s} / N on 0..max observed s.
Pmf empirical_sampled_pmf(const SampledDataset& ds);

/// S(x)_w = sum_{s>=w} C(s,w) (-1)^{s-w} q^{-s} (1-q)^{s-w} x_s, w = 1..w_max.
/// Terms are added in decreasing magnitude with compensation.
/// Throws InfiniteSupport if x.tail_mass > 0.
SignedSeq invert_S(const Pmf& x, double q, std::int64_t w_max);

/// Throws InvalidPath unless nodes start at 1-q, decrease strictly to 0 and
/// every step stays inside the disk |z_k - z_{k-1}| < 1 - z_{k-1}.
void validate_path(const ContinuationPath& path, double q);

ContinuationPath build_path(double q, const PathRule& rule = {});

/// Staged inversion: T0_i = x_i / q^i, then
/// Tk_n = sum_{i>=n} C(i,n) T(k-1)_i (z_k - z_{k-1})^{i-n} along the path.
/// Every intermediate sequence keeps indices < per_stage_trunc
/// (0 keeps the full support).
SignedSeq continuation_invert(const Pmf& x, double q, const ContinuationPath& path,
                              std::int64_t w_max, std::size_t per_stage_trunc = 0);

/// R_{q,w} = sum_s C(s,w)^2 (1-q)^{2(s-w)} q^{-2s} f_Wq(s) over the explicit
/// entries of f_wq.
double risk_R(const Pmf& f_wq, double q, std::int64_t w);

/// R_{q,w} for a model, with f_Wq computed on the fly. Returns +inf once the
/// terms have grown for 50 consecutive s.
double risk_R(const SizeDistribution& f_w, double q, std::int64_t w);

/// z with P(|Z| <= z) = alpha for standard normal Z.
double normal_abs_quantile(double alpha);

struct Interval {
  double lo;
  double hi;
};

/// f_hat(w) +- z_alpha sqrt(max(0, R_hat - f_hat(w)^2) / N).
Interval normal_ci(const SignedSeq& f_hat_w, const Pmf& f_hat_wq, double q, std::int64_t w,
                   double alpha, std::size_t n);

/// Percentile (order statistic ceil(alpha B)) of
/// sqrt(N) max_{w<=l} |S(f*)_w - S(f_hat)_w| over B resamples of the records.
/// Records are resampled from a canonical ordering, with replicate b drawing
/// from stream (seed, b), so the radius ignores record order.
double bootstrap_sup_ci(const SampledDataset& ds, std::int64_t l, std::size_t b,
                        double alpha, std::uint64_t seed);

/// Regime from the least-squares slope of log R over w_probe: Explosive if
/// slope > explosive_fraction log(1/q), Stable if slope <= 0 and
/// max R / R(first) < stable_ratio, Inconclusive otherwise.
RegimeReport classify_regime(const Pmf& f_hat_wq, double q, std::span<const std::int64_t> w_probe,
                             const RegimeThresholds& th = {});
RegimeReport classify_regime(const SizeDistribution& f_w, double q,
                             std::span<const std::int64_t> w_probe,
                             const RegimeThresholds& th = {});

/// Euclidean projection onto the probability simplex. Optional post-hoc
/// step; the raw estimator is signed and unnormalized.
SignedSeq project_simplex(const SignedSeq& f);

/// Per-w estimate with plug-in variance (R_hat - f_hat^2)/N floored at 0 and
/// the normal interval.
struct FwEstimate {
  SignedSeq f_hat;
  std::vector<double> r_hat;
  std::vector<double> var_hat;
  std::vector<Interval> ci;
};

FwEstimate estimate_fw(const SampledDataset& ds, std::int64_t w_max, double alpha);

}  // namespace renewal
