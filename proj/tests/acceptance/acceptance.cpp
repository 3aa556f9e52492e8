// Acceptance run: one PASS/FAIL line per criterion. Optional arguments pick a
// subset, e.g. `acceptance 1 7`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "renewal/error.hpp"
#include "renewal/experiments.hpp"
#include "renewal/forward.hpp"
#include "renewal/gap_inversion.hpp"
#include "renewal/series.hpp"
#include "renewal/simulator.hpp"
#include "renewal/size_inversion.hpp"
#include "renewal/special.hpp"

using namespace renewal;

namespace {

constexpr std::uint64_t kSeed = 20100801;
constexpr std::size_t kReps = 1000;

std::size_t jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + ("failed: " + what);
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ModelSpec geometric(double c, double q) {
  return ModelSpec{SizeDistribution(Geometric{c}), GapDistribution(Exponential{1.0}), q};
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t i) {
  std::vector<double> v;
  for (const auto& r : rows) {
    if (i < r.size()) v.push_back(r[i]);
  }
  return v;
}

double mean_sd(const std::vector<double>& v, double* sd) {
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  *sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return m;
}

std::vector<double> random_pmf(std::mt19937_64& g, int support) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> f(static_cast<std::size_t>(support));
  double total = 0;
  for (double& x : f) total += (x = u(g));
  for (double& x : f) x /= total;
  return f;
}

// ---------------------------------------------------------------------------

Outcome round_trip() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 g(kSeed);
  std::uniform_int_distribution<int> support(1, 12);
  double worst_fw = 0, worst_path = 0, worst_fwd = 0;
  for (double q : {0.55, 0.6, 0.7, 0.9}) {
    for (int k = 0; k < 50; ++k) {
      const auto f = random_pmf(g, support(g));
      const auto w_max = static_cast<std::int64_t>(f.size());
      const Pmf fq = sampled_size_pmf(SizeDistribution(Pmf(1, f)), q, w_max);
      const auto ref = oracle::thin_pmf(f, q);
      for (std::size_t s = 0; s < ref.size(); ++s) {
        worst_fwd = std::max(worst_fwd, std::abs(fq(static_cast<std::int64_t>(s)) - ref[s]));
      }
      const SignedSeq back = invert_S(fq, q, 12);
      const SignedSeq path = continuation_invert(fq, q, build_path(q), 12);
      for (std::int64_t w = 1; w <= 12; ++w) {
        const double truth = w <= w_max ? f[static_cast<std::size_t>(w - 1)] : 0.0;
        worst_fw = std::max(worst_fw, std::abs(back.at(w) - truth));
        worst_path = std::max(worst_path, std::abs(path.at(w) - back.at(w)));
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.note(fmt("200 pmfs, max |invert_S - f_W| = %.2e, max |continuation - invert_S| = %.2e, "
             "forward vs binomial sum %.2e, %.2f s",
             worst_fw, worst_path, worst_fwd, secs));
  o.require(worst_fw <= 1e-8, "invert_S within 1e-8");
  o.require(worst_path <= 1e-9, "continuation within 1e-9");
  o.require(worst_fwd <= 1e-12, "forward thinning");
  o.require(secs < 10.0, "runtime under 10 s");
  return o;
}

// Shared by the f_W reproduction and interval criteria.
const FwStudy& fig2_study() {
  static const FwStudy st = [] {
    FwStudyConfig cfg{.model = geometric(0.25, 0.6), .n = 500, .w_max = 10, .alpha = 0.9,
                      .intervals = true, .l = 5, .bootstrap_B = 999};
    return run_fw_study(cfg, kReps, kSeed, jobs());
  }();
  return st;
}

Outcome fig2_reproduction() {
  Outcome o;
  const FwStudy& st = fig2_study();
  double worst_median = 0, worst_sd = 0;
  for (std::int64_t w = 1; w <= 5; ++w) {
    const auto v = column(st.f_hat, static_cast<std::size_t>(w - 1));
    const double truth = oracle::geom_pmf(0.25, w);
    worst_median = std::max(worst_median, std::abs(percentile(v, 0.5) - truth));
    if (w <= 4) {
      double sd = 0;
      mean_sd(v, &sd);
      const double theory =
          std::sqrt((oracle::geom_R(0.25, 0.6, static_cast<int>(w)) - truth * truth) / 500.0);
      const double rel = std::abs(sd / theory - 1);
      worst_sd = std::max(worst_sd, rel);
      o.note(fmt("w=%d sd %.4f vs %.4f", static_cast<int>(w), sd, theory));
    }
  }
  o.note(fmt("max |median - f_W| (w<=5) = %.4f, max relative sd error (w<=4) = %.3f", worst_median,
             worst_sd));
  o.require(worst_median <= 0.01, "median within 0.01");
  o.require(worst_sd <= 0.15, "sd within 15%");
  return o;
}

Outcome fig3_regime() {
  Outcome o;
  const double alpha = 1.5, q = 0.7;
  const SizeDistribution par(DiscretePareto{alpha});
  std::vector<std::int64_t> probe;
  for (std::int64_t w = 1; w <= 10; ++w) probe.push_back(w);
  const Regime regime = classify_regime(par, q, probe).classification;
  o.note(std::string("classify_regime: ") + std::string(to_string(regime)));
  o.require(regime == Regime::Explosive, "explosive regime");

  FwStudyConfig cfg{.model = ModelSpec{par, GapDistribution(Exponential{1.0}), q}, .n = 1000, .w_max = 11};
  const FwStudy st = run_fw_study(cfg, kReps, kSeed, jobs());
  std::vector<double> sd(11);
  for (std::int64_t w = 1; w <= 10; ++w) mean_sd(column(st.f_hat, static_cast<std::size_t>(w - 1)), &sd[static_cast<std::size_t>(w)]);
  const double growth = sd[10] / sd[2];
  o.note(fmt("MC sd w=2 %.4g, w=10 %.4g, growth %.1f", sd[2], sd[10], growth));
  o.require(growth >= 5.0, "sd growth >= 5");
  // 2 MC standard errors: twice the MC standard deviation of f_hat(w)
  const double zeta = riemann_zeta(alpha + 1);
  double worst = 0;
  for (std::int64_t w = 1; w <= 5; ++w) {
    const double truth = std::pow(static_cast<double>(w), -alpha - 1) / zeta;
    const double med = percentile(column(st.f_hat, static_cast<std::size_t>(w - 1)), 0.5);
    worst = std::max(worst, std::abs(med - truth) / sd[static_cast<std::size_t>(w)]);
  }
  o.note(fmt("max |median - f_W| / sd (w<=5) = %.3f", worst));
  o.require(worst <= 2.0, "median within 2 standard errors");
  return o;
}

Outcome fig4_intervals() {
  Outcome o;
  const FwStudy& st = fig2_study();
  const std::size_t reps = st.f_hat.size();
  double lo = 1, hi = 0;
  // No record with W_q >= w gives f_hat(w) = 0 with zero variance, a degenerate interval missing f_W(w).
  const Pmf fq = sampled_size_pmf(SizeDistribution(Geometric{0.25}), 0.6, 200);
  for (std::int64_t w = 1; w <= 5; ++w) {
    std::size_t hits = 0;
    const double truth = oracle::geom_pmf(0.25, w);
    const double cap = 1 - std::pow(1 - fq.survival(w), 500.0);
    for (std::size_t r = 0; r < reps; ++r) {
      const Interval& ci = st.normal[r][static_cast<std::size_t>(w - 1)];
      hits += ci.lo <= truth && truth <= ci.hi;
    }
    const double cov = static_cast<double>(hits) / static_cast<double>(reps);
    lo = std::min(lo, cov);
    hi = std::max(hi, cov);
    o.note(fmt("w=%d %.3f (cap %.3f)", static_cast<int>(w), cov, cap));
  }
  std::size_t sim = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    double sup = 0;
    for (std::int64_t w = 1; w <= 5; ++w) {
      sup = std::max(sup, std::abs(st.f_hat[r][static_cast<std::size_t>(w - 1)] - oracle::geom_pmf(0.25, w)));
    }
    sim += sup <= st.boot_radius[r] / std::sqrt(500.0);
  }
  const double sim_cov = static_cast<double>(sim) / static_cast<double>(reps);
  o.note(fmt("normal per-w coverage in [%.3f, %.3f], bootstrap simultaneous %.3f", lo, hi, sim_cov));
  o.require(lo >= 0.87 && hi <= 0.93, "per-w coverage in [0.87, 0.93]");
  o.require(sim_cov >= 0.86 && sim_cov <= 0.94, "simultaneous coverage in [0.86, 0.94]");
  return o;
}

FdStudyConfig fd_config(double c, Conditioning cond, bool bootstrap) {
  DecompoundConfig fd;
  fd.cond = cond;
  fd.bootstrap_B = 999;
  return FdStudyConfig{.model = geometric(c, 0.6), .n = 500, .fd = fd, .alpha = 0.9, .bootstrap = bootstrap};
}

const FdStudy& fd_study(int which_case, const std::string& tag) {
  static std::map<std::string, FdStudy> cache;
  const std::string key = std::to_string(which_case) + tag;
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const double c = which_case == 1 ? 0.25 : 0.7;
  const Conditioning cond = tag == "s2"     ? Conditioning::exact(2)
                            : tag == "sge2" ? Conditioning::at_least(2)
                                            : Conditioning::exact(3);
  // the case-1 s=2 study also carries the bootstrap bands
  const bool boot = which_case == 1 && tag == "s2";
  return cache.emplace(key, run_fd_study(fd_config(c, cond, boot), kReps, kSeed, jobs())).first->second;
}

std::size_t failed(const FdStudy& st) {
  std::size_t n = 0;
  for (const auto& e : st.estimate) n += e.empty();
  return n;
}

Outcome fig5_decompounding() {
  Outcome o;
  const Grid grid = DecompoundConfig{}.grid;
  for (int which_case : {1, 2}) {
    const FdStudy& st = fd_study(which_case, "s2");
    const double t_lim = which_case == 1 ? 5.0 : 4.0;
    double worst = 0;
    for (std::size_t i = 0; i < grid.points(); ++i) {
      const double t = grid.step * static_cast<double>(i);
      if (t > t_lim + 1e-9) break;
      worst = std::max(worst, std::abs(percentile(column(st.estimate, i), 0.5) - (1 - std::exp(-t))));
    }
    o.note(fmt("case %d: sup |median - F_D| on [0,%g] = %.4f (%zu of %zu reps failed)", which_case,
               t_lim, worst, failed(st), st.estimate.size()));
    o.require(worst <= 0.05, "case " + std::to_string(which_case) + " median within 0.05");
  }
  const FdStudy& st = fd_study(1, "s2");
  std::size_t used = 0, hits = 0;
  for (std::size_t r = 0; r < st.estimate.size(); ++r) {
    if (st.estimate[r].empty() || std::isnan(st.boot_radius[r])) continue;
    ++used;
    double sup = 0;
    for (std::size_t i = 0; i < grid.points(); ++i) {
      const double t = grid.step * static_cast<double>(i);
      sup = std::max(sup, std::abs(st.estimate[r][i] - (1 - std::exp(-t))));
    }
    hits += sup <= st.boot_radius[r];
  }
  const double cov = used ? static_cast<double>(hits) / static_cast<double>(used) : 0.0;
  o.note(fmt("case 1 band coverage %.3f over %zu reps with a band (%zu without)", cov, used,
             st.estimate.size() - used));
  o.require(cov >= 0.85 && cov <= 0.95, "band coverage in [0.85, 0.95]");
  return o;
}

Outcome fig6_conditioning() {
  Outcome o;
  const Grid grid = DecompoundConfig{}.grid;
  for (int which_case : {1, 2}) {
    auto width = [&](const std::string& tag, std::size_t i) {
      const auto v = column(fd_study(which_case, tag).estimate, i);
      return percentile(v, 0.95) - percentile(v, 0.05);
    };
    std::size_t points = 0, ordered = 0;
    for (std::size_t i = 0; i < grid.points(); ++i) {
      if (grid.step * static_cast<double>(i) > 4.0 + 1e-9) break;
      ++points;
      ordered += width("sge2", i) <= width("s2", i) && width("s2", i) <= width("s3", i);
    }
    const double frac = static_cast<double>(ordered) / static_cast<double>(points);
    o.note(fmt("case %d: ordering holds at %.3f of grid points on [0,4]", which_case, frac));
    o.require(frac > 0.5, "case " + std::to_string(which_case) + " majority");
  }
  return o;
}

Outcome closed_forms() {
  Outcome o;
  double worst_geo = 0, worst_b = 0;
  for (double c : {0.25, 0.7}) {
    for (double q : {0.3, 0.6}) {
      const SizeDistribution geo(Geometric{c});
      const Pmf fq = sampled_size_pmf(geo, q, 200);
      const double rho = c * (1 - q);
      for (std::int64_t s : {2, 3, 5}) {
        const CoeffSeries a = gap_mix_coeffs(geo, fq, q, s, 40);
        for (std::size_t m = 1; m <= 40; ++m) {
          worst_geo = std::max(worst_geo, std::abs(a[m] - (1 - rho) * std::pow(rho, m - 1.0)));
        }
      }
      const JointGapCoeffs b = joint_gap_coeffs(geo, fq, q, 4, 2, 30);
      for (int m1 = 1; m1 <= 10; ++m1) {
        for (int m2 = 1; m2 <= 10; ++m2) {
          const int ms[2] = {m1, m2};
          const double prod = (1 - rho) * std::pow(rho, m1 - 1.0) * (1 - rho) * std::pow(rho, m2 - 1.0);
          worst_b = std::max(worst_b, std::abs(b.at(ms) - prod));
        }
      }
    }
  }
  o.note(fmt("geometric A max error %.1e, B factorization error %.1e", worst_geo, worst_b));
  o.require(worst_geo <= 1e-10, "geometric A");
  o.require(worst_b <= 1e-10, "geometric B factorizes");

  const double alpha = 1.5, q = 0.7;
  const SizeDistribution par(DiscretePareto{alpha});
  const Pmf pq = sampled_size_pmf(par, q, 50);
  const double a31 = gap_mix_coeffs(par, pq, q, 3, 200)[1];
  const int ones[2] = {1, 1};
  const double b311 = joint_gap_coeffs(par, pq, q, 3, 2, 60).at(ones);
  const auto ref = oracle::pareto_a31_b311(alpha, q);
  o.note(fmt("Pareto A_{3,1}^2 = %.12f, B_{3,(1,1)} = %.12f", a31 * a31, b311));
  o.require(std::abs(a31 - ref.a31) <= 1e-8, "A_{3,1} polylog form");
  o.require(std::abs(b311 - ref.b311) <= 1e-8, "B_{3,(1,1)} polylog form");
  o.require(std::abs(a31 * a31 - b311) > 1e-3, "A^2 differs from B");

  double worst_three = 0;
  for (double qq : {0.2, 0.6, 0.9}) {
    const SizeDistribution three(Pmf::point_mass(3));
    const CoeffSeries a = gap_mix_coeffs(three, sampled_size_pmf(three, qq, 3), qq, 2, 4);
    const auto ref3 = oracle::enumerate_gap_mix({0, 0, 1}, qq, 2, 1);
    worst_three = std::max({worst_three, std::abs(a[1] - 2 / 3.0), std::abs(a[2] - 1 / 3.0),
                            std::abs(a[3]), std::abs(ref3[1] - 2 / 3.0), std::abs(ref3[2] - 1 / 3.0)});
  }
  o.note(fmt("W=3 pattern error %.1e", worst_three));
  o.require(worst_three <= 1e-14, "W=3 gives (2/3, 1/3)");
  return o;
}

double cdf_gap(const SampledDataset& ds, const Pmf& truth) {
  const Pmf emp = empirical_sampled_pmf(ds);
  double fe = 0, ft = 0, worst = 0;
  for (std::int64_t s = 0; s <= std::max(emp.max_support(), truth.max_support()); ++s) {
    fe += emp(s);
    ft += truth(s);
    worst = std::max(worst, std::abs(fe - ft));
  }
  return worst;
}

Outcome properties() {
  Outcome o;
  std::mt19937_64 g(kSeed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_series = [&](std::size_t order, double decay) {
    std::vector<double> c(order + 1, 0.0);
    c[1] = 1.0 + 0.2 * u(g);
    for (std::size_t n = 2; n <= order; ++n) c[n] = u(g) * std::pow(decay, n - 1.0);
    return CoeffSeries(c);
  };

  double worst_series = 0;
  for (int t = 0; t < 25; ++t) {
    const CoeffSeries a = random_series(64, 0.15);
    const CoeffSeries b = revert(a);
    const CoeffSeries id = CoeffSeries::identity(64);
    worst_series = std::max({worst_series, max_abs_diff(compose(a, b), id), max_abs_diff(compose(b, a), id)});
    const CoeffSeries c = random_series(64, 0.5), d = random_series(64, 0.5);
    worst_series = std::max(worst_series, max_abs_diff(compose(compose(c, d), a), compose(c, compose(d, a))));
  }
  o.note(fmt("series identities %.1e", worst_series));
  o.require(worst_series <= 1e-9, "series identities");

  std::uniform_int_distribution<int> pick(1, 10);
  int bad = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(13), y(13), e(13);
    for (std::size_t n = 1; n <= 12; ++n) {
      x[n] = u(g);
      y[n] = u(g);
      e[n] = u(g);
    }
    const RemainderBounds r = taylor_remainder_check(CoeffSeries(x), CoeffSeries(y), CoeffSeries(e),
                                                     static_cast<std::size_t>(pick(g)));
    const double slack = 1e-9 * (1.0 + r.first_order_rhs + r.second_order_rhs);
    bad += r.first_order_lhs > r.first_order_rhs + slack || r.second_order_lhs > r.second_order_rhs + slack;
  }
  o.note(fmt("remainder inequalities violated %d/100", bad));
  o.require(bad == 0, "remainder inequalities");

  double worst_norm = 0;
  const std::vector<SizeDistribution> sizes = {SizeDistribution(Geometric{0.25}), SizeDistribution(Geometric{0.7}),
                                               SizeDistribution(DiscretePareto{1.5}),
                                               SizeDistribution(Pmf(1, random_pmf(g, 9)))};
  for (const auto& d : sizes) {
    for (double q : {0.3, 0.7}) {
      const Pmf p = sampled_size_pmf(d, q, 400);
      double total = p.tail_mass;
      for (std::int64_t s = 0; s <= p.max_support(); ++s) total += p(s);
      worst_norm = std::max(worst_norm, std::abs(total - 1));
    }
  }
  o.note(fmt("pmf normalization %.1e", worst_norm));
  o.require(worst_norm <= 1e-12, "pmf normalization");

  const double band = oracle::dkw(1e6, 0.999);
  const ModelSpec geo = geometric(0.25, 0.6);
  const ModelSpec par{SizeDistribution(DiscretePareto{1.5}), GapDistribution(Exponential{1.0}), 0.7};
  const double gap_geo = cdf_gap(simulate_dataset(geo, 1000000, kSeed), sampled_size_pmf(geo.size, geo.q, 200));
  const double gap_par = cdf_gap(simulate_dataset(par, 1000000, kSeed + 1), sampled_size_pmf(par.size, par.q, 2000));
  o.note(fmt("DKW: geometric %.2e, Pareto %.2e, band %.2e", gap_geo, gap_par, band));
  o.require(gap_geo < band && gap_par < band, "DKW agreement");

  const double alpha = 1.5, q = 0.7;
  const double c = 1.0 / (alpha * riemann_zeta(alpha + 1));
  const std::int64_t extra[] = {50, 100, 200, 400};
  const HeavyTailReport r = heavy_tail_diagnostics(SizeDistribution(DiscretePareto{alpha}), alpha, c, q, 1000, 2, extra);
  auto at = [&](const std::vector<double>& v, std::int64_t k) {
    for (std::size_t j = 0; j < r.index.size(); ++j) {
      if (r.index[j] == k) return v[j];
    }
    return std::nan("");
  };
  const double dur = at(r.duration_ratio, 400) / at(r.duration_ratio, 200);
  const double mix = at(r.mix_ratio, 100) / at(r.mix_ratio, 50);
  const double mix_c = at(r.mix_ratio, 100) / r.mix_limit;
  o.note(fmt("heavy tail: C ratio 400/200 %.3f, A ratio 100/50 %.3f, A/limit %.3f", dur, mix, mix_c));
  o.require(std::abs(dur - 1) <= 0.10, "C_m asymptote");
  o.require(std::abs(mix - 1) <= 0.15 && std::abs(mix_c - 1) <= 0.15, "A_{2,m} asymptote");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"round trip", round_trip},
      {"f_W reproduction, geometric", fig2_reproduction},
      {"explosive regime, Pareto", fig3_regime},
      {"interval coverage", fig4_intervals},
      {"decompounding", fig5_decompounding},
      {"conditioning width ordering", fig6_conditioning},
      {"closed forms", closed_forms},
      {"property suites", properties},
  };
  std::set<int> only;
  for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[k].second();
    } catch (const std::exception& e) {
      out.pass = false;
      out.note(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  %d. %s [%.0f s]: %s\n", out.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(), secs,
                out.detail.c_str());
    std::fflush(stdout);
    failures += !out.pass;
  }
  return failures == 0 ? 0 : 1;
}
