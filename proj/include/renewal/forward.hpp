#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "renewal/distributions.hpp"
#include "renewal/grid_cdf.hpp"
#include "renewal/pmf.hpp"
#include "renewal/series.hpp"

namespace renewal {

// Sums over w for unbounded supports stop once 50 consecutive terms are
// below this fraction of the running sum.
inline constexpr double kSumRelTol = 1e-15;
inline constexpr int kSumPatience = 50;

/// Shortfall of a mixing series below which its truncation is accepted.
inline constexpr double kMixTailTol = 1e-6;

/// f_{W_q}(s) = sum_{w>=s} C(w,s) q^s (1-q)^{w-s} f_W(w).
double sampled_size_mass(const SizeDistribution& f_w, double q, std::int64_t s);

/// P(W_q >= s), summed over the position of the s-th kept renewal so that
/// heavy tails enter only through P(W >= j).
double sampled_size_survival(const SizeDistribution& f_w, double q, std::int64_t s);

/// f_{W_q} on 0..s_max. tail_mass is exactly 0 when f_W has finite support
/// within s_max, otherwise the leftover 1 - sum.
Pmf sampled_size_pmf(const SizeDistribution& f_w, double q, std::int64_t s_max);

/// A_{s,m}, m = 0..m_max: probability that the gap between two consecutive
/// kept renewals spans m original gaps, given W_q = s. A_{s,0} = 0.
/// Throws ZeroConditioningMass if f_Wq(s) = 0 and TailTooHeavy if
/// 1 - sum_m A_{s,m} >= 1e-6.
CoeffSeries gap_mix_coeffs(const SizeDistribution& f_w, const Pmf& f_wq, double q,
                           std::int64_t s, std::size_t m_max = CoeffSeries::kDefaultOrder);

/// A_{s+,m}: as gap_mix_coeffs but conditioned on W_q >= s.
CoeffSeries gap_mix_coeffs_geq(const SizeDistribution& f_w, double q, std::int64_t s,
                               std::size_t m_max = CoeffSeries::kDefaultOrder);

/// The A_{s,m} formula applied to a finitely supported, possibly signed
/// sequence f[w-1] = f(w), w = 1..f.size(), with f_Wq(s) supplied directly.
/// No tail or sign checks.
CoeffSeries gap_mix_coeffs_finite(std::span<const double> f, double f_wq_s, double q,
                                  std::int64_t s, std::size_t m_max);

/// B_{s,(m_1..m_n)} for the first n gaps given W_q = s. The value depends only
/// on m = m_1 + ... + m_n, so it is stored by total.
struct JointGapCoeffs {
  int n = 0;
  std::vector<double> by_total;  // index m; zero for m < n
  double shortfall = 0.0;        // 1 - sum over all compositions

  /// B for an explicit composition (entries >= 1); 0 beyond the stored range.
  double at(std::span<const int> ms) const;
};

/// Requires 1 <= n <= s - 1.
JointGapCoeffs joint_gap_coeffs(const SizeDistribution& f_w, const Pmf& f_wq, double q,
                                std::int64_t s, int n, std::int64_t m_total_max);

/// C_m, m = 0..m_max: number of original gaps between the first and last kept
/// renewals, given W_q >= 2. C_0 = 0.
CoeffSeries duration_coeffs(const SizeDistribution& f_w, double q, std::size_t m_max);

/// F_{D_q|s} = sum_m A_{s,m} F_D^{*m}, truncated at the first m where the
/// remaining coefficient mass drops below trunc_tol.
GridCdf conditional_gap_cdf(const GridCdf& f_d, const CoeffSeries& a_s,
                            double trunc_tol = 1e-8);

/// Ratios whose limits describe heavy tails f_W(w) ~ c alpha w^{-alpha-1}:
///   P(W_q > w) w^alpha                  -> q^alpha c
///   C_m m^{alpha+1}                     -> c alpha / P(W_q >= 2)
///   A_{s,m} m^{alpha+1} / (1-q)^m       -> c alpha / ((1-q) f_Wq(s))
struct HeavyTailReport {
  std::vector<std::int64_t> index;
  std::vector<double> survival_ratio;
  std::vector<double> duration_ratio;
  std::vector<double> mix_ratio;
  double survival_limit = 0.0;
  double duration_limit = 0.0;
  double mix_limit = 0.0;
};

/// Evaluates the ratios on a log-spaced index set in [10, w_max] plus the
/// explicit points in `extra`.
HeavyTailReport heavy_tail_diagnostics(const SizeDistribution& f_w, double alpha, double c,
                                       double q, std::int64_t w_max, std::int64_t s = 2,
                                       std::span<const std::int64_t> extra = {});

}  // namespace renewal
