#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "renewal/error.hpp"
#include "renewal/forward.hpp"
#include "renewal/gap_inversion.hpp"

using namespace renewal;

namespace {

ModelSpec geometric_model(double c) {
  return ModelSpec{SizeDistribution(Geometric{c}), GapDistribution(Exponential{1.0}), 0.6};
}

GridCdf exp_cdf(Grid g, double rate = 1.0) {
  return GridCdf::from_function(g, [rate](double t) { return 1 - std::exp(-rate * t); });
}

CoeffSeries geometric_mix(double rho, std::size_t order) {
  CoeffSeries a(order);
  for (std::size_t m = 1; m <= order; ++m) a[m] = (1 - rho) * std::pow(rho, m - 1.0);
  return a;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("conditioning spec") {
  CHECK(Conditioning::parse("s=3").kind == Conditioning::Kind::Exact);
  CHECK(Conditioning::parse("s=3").s == 3);
  CHECK(Conditioning::parse("s>=2").kind == Conditioning::Kind::AtLeast);
  CHECK(Conditioning::parse("s>=2").to_string() == "s>=2");
  CHECK_THROWS_AS(Conditioning::parse("s=1"), Error);
  CHECK_THROWS_AS(Conditioning::parse("t=2"), Error);
  CHECK_THROWS_AS(Conditioning::parse("s=x"), Error);
  DecompoundConfig cfg;
  cfg.i = 2;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("empirical_A_hat") {
  SampledDataset ds;
  ds.q = 0.6;
  for (int k = 0; k < 20; ++k) ds.records.push_back(FlowRecord{2, {0.5}});
  const Pmf fq = empirical_sampled_pmf(ds);
  const CoeffSeries a = empirical_A_hat(invert_S(fq, 0.6, 2), fq, 0.6, 2, 8);
  CHECK(a[1] == doctest::Approx(1.0).epsilon(1e-14));
  for (std::size_t n = 2; n <= 8; ++n) CHECK(std::abs(a[n]) < 1e-14);

  // exact inputs for the geometric model
  const SizeDistribution geo(Geometric{0.25});
  const Pmf exact = sampled_size_pmf(geo, 0.6, 300);
  SignedSeq fw;
  for (std::int64_t w = 1; w <= 300; ++w) fw.values.push_back(geo.pmf(w));
  for (std::int64_t s : {2, 3}) {
    const CoeffSeries e = empirical_A_hat(fw, exact, 0.6, s, 40);
    CHECK(max_abs_diff(e, geometric_mix(0.1, 40)) < 1e-10);
  }

  const SampledDataset big = simulate_dataset(geometric_model(0.25), 100000, 13);
  const Pmf emp = empirical_sampled_pmf(big);
  const CoeffSeries est = empirical_A_hat(invert_S(emp, 0.6, emp.max_support()), emp, 0.6, 2, 64);
  CHECK(max_abs_diff(est, geometric_mix(0.1, 64)) < 0.01);
}

TEST_CASE("empirical_conditional_cdf") {
  SampledDataset one;
  one.q = 0.5;
  one.records.push_back(FlowRecord{2, {1.0}});
  one.records.push_back(FlowRecord{0, {}});
  const GridCdf f = empirical_conditional_cdf(one, Conditioning::exact(2), 1, Grid{2.0, 0.5});
  CHECK(f.values == std::vector<double>{0, 0, 1, 1, 1});
  CHECK(code_of([&] { empirical_conditional_cdf(one, Conditioning::exact(3), 1, Grid{2.0, 0.5}); }) ==
        Errc::ZeroConditioningMass);

  SampledDataset pool;
  pool.q = 0.5;
  pool.records.push_back(FlowRecord{2, {0.2}});
  pool.records.push_back(FlowRecord{3, {1.2, 0.1}});
  pool.records.push_back(FlowRecord{4, {3.0, 0.1, 0.1}});
  const GridCdf p = empirical_conditional_cdf(pool, Conditioning::at_least(2), 1, Grid{4.0, 0.5});
  const std::vector<double> want{0, 1 / 3.0, 1 / 3.0, 2 / 3.0, 2 / 3.0, 2 / 3.0, 1, 1, 1};
  for (std::size_t k = 0; k < want.size(); ++k) CHECK(p.values[k] == doctest::Approx(want[k]));
  // gap 2 for s >= 3 only
  const GridCdf second = empirical_conditional_cdf(pool, Conditioning::at_least(3), 2, Grid{4.0, 0.5});
  CHECK(second.values[1] == 1.0);
}

TEST_CASE("simulated conditional gaps follow the forward model") {
  const ModelSpec m = geometric_model(0.25);
  const Grid grid{5.0, 0.005};
  const SampledDataset ds = simulate_dataset(m, 1000000, 14);
  const Pmf fq = sampled_size_pmf(m.size, m.q, 200);
  const GridCdf model_cdf = conditional_gap_cdf(m.gap.on_grid(grid), gap_mix_coeffs(m.size, fq, m.q, 2));
  const GridCdf emp = empirical_conditional_cdf(ds, Conditioning::exact(2), 1, grid);
  std::size_t n2 = 0;
  for (const FlowRecord& r : ds.records) n2 += r.sampled_count == 2;
  CHECK(sup_distance(emp, model_cdf, 5.0) < oracle::dkw(static_cast<double>(n2), 0.999));

  // pointwise within 3 standard errors of the geometric mixture
  std::size_t outside = 0;
  for (std::size_t i = 1; i < emp.size(); i += 50) {
    const double p = model_cdf.values[i];
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(n2));
    outside += std::abs(emp.values[i] - p) > 3 * se + 1e-12;
  }
  CHECK(outside <= 1);
}

TEST_CASE("decompound_series") {
  const Grid grid{5.0, 0.005};
  const GridCdf fd = exp_cdf(grid);
  const GridCdf cond = exp_cdf(grid, 0.9);

  const DecompoundResult id = decompound_series(CoeffSeries::identity(64), cond, 64, 1e-8);
  CHECK(id.diag.n_star == 1);
  CHECK(sup_distance(id.estimate, cond, 5.0) == 0.0);

  const CoeffSeries mix = geometric_mix(0.1, 64);
  const GridCdf exact_cond = conditional_gap_cdf(fd, mix);
  const DecompoundResult r = decompound_series(mix, exact_cond, 64, 1e-8);
  for (std::size_t n = 1; n <= 10; ++n) {
    CHECK(r.reverted[n] == doctest::Approx(std::pow(-0.1, n - 1.0) / std::pow(0.9, static_cast<double>(n))).epsilon(1e-10));
  }
  CHECK(sup_distance(r.estimate, fd, 5.0) < 2e-3);
  CHECK(r.diag.reversion_residual < 1e-8);
  CHECK(r.diag.tail_bound < 1e-8);

  // grid refinement
  const Grid coarse{5.0, 0.01};
  const DecompoundResult rc = decompound_series(mix, conditional_gap_cdf(exp_cdf(coarse), mix), 64, 1e-8);
  double diff = 0;
  for (std::size_t i = 0; i < rc.estimate.size(); ++i) diff = std::max(diff, std::abs(rc.estimate.values[i] - r.estimate.values[2 * i]));
  CHECK(diff < 2 * coarse.step);

  CHECK(code_of([&] { decompound_series(mix, exact_cond, 3, 1e-8); }) == Errc::TailTooHeavy);
  CoeffSeries flat(8);
  flat[2] = 1.0;
  CHECK(code_of([&] { decompound_series(flat, exact_cond, 8, 1e-8); }) == Errc::NotRevertible);
}

TEST_CASE("decompound on data") {
  const ModelSpec m = geometric_model(0.25);
  const SampledDataset ds = simulate_dataset(m, 2000, 15);
  DecompoundConfig cfg;
  const DecompoundResult r = decompound(ds, 0.6, cfg);
  CHECK(r.diag.reversion_residual < 1e-8);
  CHECK(r.diag.n_star >= 1);
  CHECK(r.diag.conditioning_records > 30);
  CHECK(r.estimate.size() == 1001);

  cfg.cond = Conditioning::exact(40);
  CHECK(code_of([&] { decompound(ds, 0.6, cfg); }) == Errc::ZeroConditioningMass);

  // no flows with more than two sampled renewals: s>=2 is s=2
  SampledDataset small = ds;
  std::erase_if(small.records, [](const FlowRecord& f) { return f.sampled_count > 2; });
  DecompoundConfig two;
  const DecompoundResult exact2 = decompound(small, 0.6, two);
  const DecompoundResult geq2 = decompound_geq(small, 0.6, two);
  CHECK(sup_distance(exact2.estimate, geq2.estimate, 5.0) < 1e-12);

  // geometric: A_{s+} equals A_s, so the population-level plug-ins agree
  const SizeDistribution geo(Geometric{0.25});
  CHECK(max_abs_diff(gap_mix_coeffs_geq(geo, 0.6, 2, 30), gap_mix_coeffs(geo, sampled_size_pmf(geo, 0.6, 100), 0.6, 3, 30)) < 1e-12);
}

TEST_CASE("bootstrap_band_FD") {
  SampledDataset same;
  same.q = 0.6;
  for (int k = 0; k < 40; ++k) same.records.push_back(FlowRecord{2, {0.7}});
  for (int k = 0; k < 40; ++k) same.records.push_back(FlowRecord{2, {0.7}});
  DecompoundConfig cfg;
  cfg.bootstrap_B = 100;
  CHECK(bootstrap_band_FD(same, 0.6, cfg, 0.9, 1).radius == 0.0);

  SampledDataset ds = simulate_dataset(geometric_model(0.25), 400, 16);
  const BootstrapBand b = bootstrap_band_FD(ds, 0.6, cfg, 0.9, 3);
  CHECK(b.radius > 0.0);
  CHECK(b.replicates + b.dropped == 100);
  std::mt19937_64 g(2);
  std::shuffle(ds.records.begin(), ds.records.end(), g);
  CHECK(bootstrap_band_FD(ds, 0.6, cfg, 0.9, 3).radius == b.radius);
  cfg.bootstrap_B = 99;
  CHECK_THROWS_AS(bootstrap_band_FD(ds, 0.6, cfg, 0.9, 3), Error);
}
