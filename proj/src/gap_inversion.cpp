#include "renewal/gap_inversion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "renewal/error.hpp"
#include "renewal/forward.hpp"
#include "renewal/special.hpp"

namespace renewal {

namespace {

constexpr std::int64_t kNotConditioning = -1;

// What the pipeline needs from one record: its sampled count and the grid
// bin of its conditioning gap (the first grid index k with gap <= t_k;
// points() when beyond t_max; kNotConditioning if the record is not admitted).
struct GapSample {
  std::int64_t s;
  std::int64_t bin;
  auto operator<=>(const GapSample&) const = default;
};

std::int64_t grid_bin(double gap, const Grid& grid, std::size_t points) {
  auto k = static_cast<std::int64_t>(std::ceil(gap / grid.step));
  if (k > 0 && static_cast<double>(k - 1) * grid.step >= gap) --k;
  if (static_cast<double>(k) * grid.step < gap) ++k;
  return std::min<std::int64_t>(k, static_cast<std::int64_t>(points));
}

std::vector<GapSample> gap_samples(const SampledDataset& ds, const DecompoundConfig& cfg) {
  const std::size_t points = cfg.grid.points();
  std::vector<GapSample> out;
  out.reserve(ds.records.size());
  for (const FlowRecord& r : ds.records) {
    GapSample g{r.sampled_count, kNotConditioning};
    if (cfg.cond.admits(r.sampled_count)) {
      g.bin = grid_bin(r.gaps[static_cast<std::size_t>(cfg.i - 1)], cfg.grid, points);
    }
    out.push_back(g);
  }
  return out;
}

GridCdf cdf_from_bins(const std::vector<std::size_t>& bin_counts, std::size_t total,
                      const Grid& grid) {
  std::vector<double> v(grid.points(), 0.0);
  std::size_t acc = 0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    acc += bin_counts[k];
    v[k] = static_cast<double>(acc) / static_cast<double>(total);
  }
  return GridCdf(grid, std::move(v));
}

DecompoundResult run_pipeline(const std::vector<GapSample>& samples,
                              const std::vector<std::size_t>& multiplicity, double q,
                              const DecompoundConfig& cfg) {
  const std::size_t points = cfg.grid.points();
  std::int64_t s_max = 0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (multiplicity[k] == 0) continue;
    s_max = std::max(s_max, samples[k].s);
    n += multiplicity[k];
  }
  std::vector<double> counts(static_cast<std::size_t>(s_max + 1), 0.0);
  std::vector<std::size_t> bins(points + 1, 0);
  std::size_t conditioning = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const std::size_t m = multiplicity[k];
    if (m == 0) continue;
    counts[static_cast<std::size_t>(samples[k].s)] += static_cast<double>(m);
    if (samples[k].bin != kNotConditioning) {
      bins[static_cast<std::size_t>(samples[k].bin)] += m;
      conditioning += m;
    }
  }
  if (conditioning == 0) {
    throw Error(Errc::ZeroConditioningMass,
                "no sampled flows with " + cfg.cond.to_string());
  }
  for (double& c : counts) c /= static_cast<double>(n);
  const Pmf f_wq(0, std::move(counts), 0.0);
  const SignedSeq f_w = invert_S(f_wq, q, std::max<std::int64_t>(s_max, 1));
  const CoeffSeries mix = cfg.cond.kind == Conditioning::Kind::Exact
                              ? empirical_A_hat(f_w, f_wq, q, cfg.cond.s, cfg.n_max)
                              : empirical_A_hat_geq(f_w, f_wq, q, cfg.cond.s, cfg.n_max);
  const GridCdf conditional = cdf_from_bins(bins, conditioning, cfg.grid);
  DecompoundResult r = decompound_series(mix, conditional, cfg.n_max, cfg.trunc_tol);
  r.diag.conditioning_records = conditioning;
  if (conditioning < cfg.min_records) {
    r.diag.warnings.push_back("only " + std::to_string(conditioning) +
                              " conditioning records for " + cfg.cond.to_string());
  }
  return r;
}

}  // namespace

Conditioning Conditioning::parse(const std::string& text) {
  auto number = [&](std::size_t pos) {
    const std::string digits = text.substr(pos);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
      throw Error(Errc::InvalidArgument, "bad conditioning '" + text + "'");
    }
    return std::stoll(digits);
  };
  Conditioning c;
  if (text.rfind("s>=", 0) == 0) {
    c = at_least(number(3));
  } else if (text.rfind("s=", 0) == 0) {
    c = exact(number(2));
  } else {
    throw Error(Errc::InvalidArgument, "conditioning must look like s=2 or s>=2, got '" + text + "'");
  }
  if (c.s < 2) throw Error(Errc::InvalidArgument, "conditioning needs s >= 2");
  return c;
}

std::string Conditioning::to_string() const {
  return (kind == Kind::Exact ? "s=" : "s>=") + std::to_string(s);
}

void DecompoundConfig::validate() const {
  if (cond.s < 2) throw Error(Errc::InvalidArgument, "conditioning needs s >= 2");
  if (i < 1 || i >= cond.s) throw Error(Errc::InvalidArgument, "gap index must satisfy 1 <= i < s");
  if (n_max < 1) throw Error(Errc::InvalidArgument, "n_max must be >= 1");
  if (!(trunc_tol > 0.0)) throw Error(Errc::InvalidArgument, "trunc_tol must be > 0");
  grid.points();
}

CoeffSeries empirical_A_hat(const SignedSeq& f_hat_w, const Pmf& f_hat_wq, double q,
                            std::int64_t s, std::size_t n_max) {
  return gap_mix_coeffs_finite(f_hat_w.values, f_hat_wq(s), q, s, n_max);
}

CoeffSeries empirical_A_hat_geq(const SignedSeq& f_hat_w, const Pmf& f_hat_wq, double q,
                                std::int64_t s, std::size_t n_max) {
  const double at_least = f_hat_wq.survival(s);
  if (!(at_least > 0.0)) {
    throw Error(Errc::ZeroConditioningMass, "no sampled flows with s>=" + std::to_string(s));
  }
  // f_Wq(s') A_{s'} is the unnormalized mixing sum, so pass mass 1.
  CoeffSeries acc(n_max);
  const std::int64_t top = std::max(f_hat_w.w_max(), f_hat_wq.max_support());
  for (std::int64_t sp = s; sp <= top; ++sp) {
    acc = acc + gap_mix_coeffs_finite(f_hat_w.values, 1.0, q, sp, n_max);
  }
  return acc * (1.0 / at_least);
}

GridCdf empirical_conditional_cdf(const SampledDataset& ds, const Conditioning& cond,
                                  std::int64_t i, Grid grid) {
  DecompoundConfig cfg;
  cfg.cond = cond;
  cfg.i = i;
  cfg.grid = grid;
  cfg.validate();
  const auto samples = gap_samples(ds, cfg);
  std::vector<std::size_t> bins(grid.points() + 1, 0);
  std::size_t total = 0;
  for (const GapSample& g : samples) {
    if (g.bin == kNotConditioning) continue;
    ++bins[static_cast<std::size_t>(g.bin)];
    ++total;
  }
  if (total == 0) {
    throw Error(Errc::ZeroConditioningMass, "no sampled flows with " + cond.to_string());
  }
  return cdf_from_bins(bins, total, grid);
}

GridCdf cdf_convolve_power(const GridCdf& f, std::size_t n) { return convolve_power(f, n); }

DecompoundResult decompound_series(const CoeffSeries& mix, const GridCdf& conditional,
                                   std::size_t n_max, double trunc_tol) {
  const CoeffSeries a = mix.resized(std::min(n_max, mix.order()));
  CoeffSeries b = revert(a);
  DecompoundResult r{GridCdf{}, a, b, {}};
  r.diag.reversion_residual = max_abs_diff(compose(b, a), CoeffSeries::identity(a.order()));

  const std::size_t m = b.order();
  // tail[n] = sum_{k=n}^{m} |b_k| sup_t |F^{*k}(t)|
  const std::vector<GridCdf> powers = convolution_powers(conditional, m);
  std::vector<double> tail(m + 2, 0.0);
  for (std::size_t k = m + 1; k-- > 1;) {
    double sup = 0.0;
    for (double v : powers[k - 1].values) sup = std::max(sup, std::abs(v));
    tail[k] = tail[k + 1] + std::abs(b[k]) * sup;
  }
  std::size_t n_star = 0;
  for (std::size_t n = 1; n < m; ++n) {
    if (tail[n + 1] < trunc_tol) {
      n_star = n;
      break;
    }
  }
  if (n_star == 0) {
    if (m == 1) {
      n_star = 1;
    } else {
      char tol[32];
      std::snprintf(tol, sizeof tol, "%g", trunc_tol);
      throw Error(Errc::TailTooHeavy, std::string("tail bound of the reverted series stays above ") +
                                          tol + " up to order " + std::to_string(m));
    }
  }
  r.diag.n_star = n_star;
  r.diag.tail_bound = tail[n_star + 1];
  r.estimate = GridCdf::zeros(conditional.grid);
  for (std::size_t k = 1; k <= n_star; ++k) {
    const auto& p = powers[k - 1].values;
    for (std::size_t i = 0; i < p.size(); ++i) r.estimate.values[i] += b[k] * p[i];
  }
  r.diag.monotonicity_violations = monotonicity_violations(r.estimate);
  return r;
}

DecompoundResult decompound(const SampledDataset& ds, double q, const DecompoundConfig& cfg) {
  cfg.validate();
  if (!(q > 0.0 && q < 1.0)) throw Error(Errc::InvalidArgument, "q must lie in (0,1)");
  const auto samples = gap_samples(ds, cfg);
  return run_pipeline(samples, std::vector<std::size_t>(samples.size(), 1), q, cfg);
}

DecompoundResult decompound_geq(const SampledDataset& ds, double q, DecompoundConfig cfg) {
  cfg.cond.kind = Conditioning::Kind::AtLeast;
  return decompound(ds, q, cfg);
}

BootstrapBand bootstrap_band_FD(const SampledDataset& ds, double q, const DecompoundConfig& cfg,
                                double alpha, std::uint64_t seed) {
  cfg.validate();
  if (cfg.bootstrap_B < 100) throw Error(Errc::InvalidArgument, "bootstrap needs B >= 100");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidArgument, "alpha must lie in (0,1)");
  auto samples = gap_samples(ds, cfg);
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  const DecompoundResult base = run_pipeline(samples, std::vector<std::size_t>(n, 1), q, cfg);

  BootstrapBand band;
  std::vector<double> stats;
  stats.reserve(cfg.bootstrap_B);
  std::vector<std::size_t> mult(n);
  for (std::size_t b = 0; b < cfg.bootstrap_B; ++b) {
    Engine rng = make_stream(seed, b);
    std::fill(mult.begin(), mult.end(), 0);
    for (std::size_t k = 0; k < n; ++k) ++mult[uniform_index(rng, n)];
    try {
      const DecompoundResult rep = run_pipeline(samples, mult, q, cfg);
      stats.push_back(sup_distance(rep.estimate, base.estimate, cfg.grid.t_max));
    } catch (const Error& e) {
      if (e.code() != Errc::ZeroConditioningMass) throw;
      ++band.dropped;
    }
  }
  band.replicates = stats.size();
  if (stats.empty()) {
    throw Error(Errc::ZeroConditioningMass, "every bootstrap replicate lacked conditioning mass");
  }
  std::sort(stats.begin(), stats.end());
  const auto rank = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(stats.size())));
  band.radius = stats[std::clamp<std::size_t>(rank, 1, stats.size()) - 1];
  return band;
}

}  // namespace renewal
