#include "renewal/size_inversion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "renewal/error.hpp"
#include "renewal/forward.hpp"
#include "renewal/special.hpp"

namespace renewal {

namespace {

void check_q(double q) {
  if (!(q > 0.0 && q < 1.0)) throw Error(Errc::InvalidArgument, "q must lie in (0,1)");
}

// Sum in decreasing magnitude with compensation.
double ordered_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end(),
            [](double a, double b) { return std::abs(a) > std::abs(b); });
  CompensatedSum s;
  for (double t : terms) s.add(t);
  return s.value();
}

// Signed coefficient of x_s in S(x)_w.
double s_coeff(std::int64_t s, std::int64_t w, double lq, double l1q) {
  const double mag = std::exp(log_binomial(s, w) + static_cast<double>(s - w) * l1q -
                              static_cast<double>(s) * lq);
  return ((s - w) % 2 == 0) ? mag : -mag;
}

// Coefficient matrix coef[w-1][s] of S restricted to w = 1..l, s = 0..s_max.
std::vector<std::vector<double>> s_matrix(std::int64_t l, std::int64_t s_max, double q) {
  const double lq = std::log(q);
  const double l1q = std::log1p(-q);
  std::vector<std::vector<double>> m(static_cast<std::size_t>(l),
                                     std::vector<double>(static_cast<std::size_t>(s_max + 1), 0.0));
  for (std::int64_t w = 1; w <= l; ++w) {
    for (std::int64_t s = w; s <= s_max; ++s) {
      m[static_cast<std::size_t>(w - 1)][static_cast<std::size_t>(s)] = s_coeff(s, w, lq, l1q);
    }
  }
  return m;
}

double risk_term_log(std::int64_t s, std::int64_t w, double lq, double l1q) {
  const double lb = log_binomial(s, w);
  return 2.0 * lb + 2.0 * static_cast<double>(s - w) * l1q - 2.0 * static_cast<double>(s) * lq;
}

RegimeReport classify(std::vector<std::pair<std::int64_t, double>> r_values,
                      std::vector<std::pair<std::int64_t, double>> variance, double q,
                      const RegimeThresholds& th) {
  RegimeReport rep;
  rep.r_values = std::move(r_values);
  rep.variance = std::move(variance);
  bool infinite = false;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (const auto& [w, r] : rep.r_values) {
    if (std::isinf(r)) {
      infinite = true;
      continue;
    }
    if (!(r > 0.0)) continue;
    const double x = static_cast<double>(w);
    const double y = std::log(r);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (infinite) {
    rep.growth_rate = std::numeric_limits<double>::infinity();
    rep.classification = Regime::Explosive;
    return rep;
  }
  if (n < 2) {
    rep.classification = Regime::Inconclusive;
    return rep;
  }
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  rep.growth_rate = denom > 0 ? (static_cast<double>(n) * sxy - sx * sy) / denom : 0.0;
  double first = 0.0, largest = 0.0;
  for (const auto& [w, r] : rep.r_values) {
    if (!(r > 0.0)) continue;
    if (first == 0.0) first = r;
    largest = std::max(largest, r);
  }
  if (rep.growth_rate > th.explosive_fraction * std::log(1.0 / q)) {
    rep.classification = Regime::Explosive;
  } else if (rep.growth_rate <= 0.0 && largest / first < th.stable_ratio) {
    rep.classification = Regime::Stable;
  } else {
    rep.classification = Regime::Inconclusive;
  }
  return rep;
}

}  // namespace

std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::Stable: return "stable";
    case Regime::Explosive: return "explosive";
    case Regime::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

Pmf empirical_sampled_pmf(const SampledDataset& ds) {
  if (ds.records.empty()) throw Error(Errc::InvalidArgument, "empty dataset");
  std::int64_t s_max = 0;
  for (const auto& r : ds.records) s_max = std::max(s_max, r.sampled_count);
  std::vector<double> counts(static_cast<std::size_t>(s_max + 1), 0.0);
  for (const auto& r : ds.records) counts[static_cast<std::size_t>(r.sampled_count)] += 1.0;
  const double n = static_cast<double>(ds.records.size());
  for (double& c : counts) c /= n;
  return Pmf(0, std::move(counts), 0.0);
}

SignedSeq invert_S(const Pmf& x, double q, std::int64_t w_max) {
  check_q(q);
  if (x.tail_mass > 0.0) {
    throw Error(Errc::InfiniteSupport, "S needs a finitely supported input");
  }
  if (w_max < 1) throw Error(Errc::InvalidArgument, "w_max must be >= 1");
  const double lq = std::log(q);
  const double l1q = std::log1p(-q);
  SignedSeq out;
  out.values.assign(static_cast<std::size_t>(w_max), 0.0);
  std::vector<double> terms;
  for (std::int64_t w = 1; w <= w_max; ++w) {
    terms.clear();
    for (std::int64_t s = std::max<std::int64_t>(w, x.min_support); s <= x.max_support(); ++s) {
      const double xs = x(s);
      if (xs != 0.0) terms.push_back(s_coeff(s, w, lq, l1q) * xs);
    }
    out.values[static_cast<std::size_t>(w - 1)] = ordered_sum(terms);
  }
  return out;
}

void validate_path(const ContinuationPath& path, double q) {
  check_q(q);
  const auto& z = path.nodes;
  if (z.size() < 2) throw Error(Errc::InvalidPath, "path needs at least two nodes");
  if (std::abs(z.front() - (1.0 - q)) > 1e-12) {
    throw Error(Errc::InvalidPath, "path must start at 1-q");
  }
  if (z.back() != 0.0) throw Error(Errc::InvalidPath, "path must end at 0");
  for (std::size_t k = 1; k < z.size(); ++k) {
    if (!(z[k] < z[k - 1])) {
      throw Error(Errc::InvalidPath, "path is not strictly decreasing at node " +
                                         std::to_string(k));
    }
    if (!(std::abs(z[k] - z[k - 1]) < 1.0 - z[k - 1])) {
      throw Error(Errc::InvalidPath, "node " + std::to_string(k) +
                                         " leaves the convergence disk of its predecessor");
    }
  }
}

ContinuationPath build_path(double q, const PathRule& rule) {
  check_q(q);
  if (!(rule.factor > 0.0 && rule.factor < 1.0) || !(rule.threshold > 0.0 && rule.threshold < 0.5) ||
      !(rule.disk_margin > 0.0 && rule.disk_margin < 1.0)) {
    throw Error(Errc::InvalidArgument, "invalid path rule");
  }
  ContinuationPath p;
  double z = 1.0 - q;
  p.nodes.push_back(z);
  while (z > rule.threshold + 1e-15) {
    z = std::max(z * rule.factor, z - rule.disk_margin * (1.0 - z));
    p.nodes.push_back(z);
  }
  p.nodes.push_back(0.0);
  validate_path(p, q);
  return p;
}

SignedSeq continuation_invert(const Pmf& x, double q, const ContinuationPath& path,
                              std::int64_t w_max, std::size_t per_stage_trunc) {
  validate_path(path, q);
  if (x.tail_mass > 0.0) {
    throw Error(Errc::InfiniteSupport, "staged inversion needs a finitely supported input");
  }
  std::size_t len = static_cast<std::size_t>(x.max_support() + 1);
  if (per_stage_trunc > 0) len = std::min(len, per_stage_trunc);
  std::vector<double> t(len);
  const double lq = std::log(q);
  for (std::size_t i = 0; i < len; ++i) {
    const double xi = x(static_cast<std::int64_t>(i));
    t[i] = xi == 0.0 ? 0.0 : xi * std::exp(-static_cast<double>(i) * lq);
  }
  std::vector<double> next(len), terms;
  for (std::size_t k = 1; k < path.nodes.size(); ++k) {
    const double d = path.nodes[k] - path.nodes[k - 1];
    const double ld = std::log(std::abs(d));
    for (std::size_t n = 0; n < len; ++n) {
      terms.clear();
      for (std::size_t i = n; i < len; ++i) {
        if (t[i] == 0.0) continue;
        const auto gap = static_cast<std::int64_t>(i - n);
        double c = std::exp(log_binomial(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n)) +
                            static_cast<double>(gap) * ld);
        if (gap % 2 == 1 && d < 0.0) c = -c;
        terms.push_back(c * t[i]);
      }
      next[n] = ordered_sum(terms);
    }
    t.swap(next);
  }
  SignedSeq out;
  out.values.assign(static_cast<std::size_t>(w_max), 0.0);
  for (std::int64_t w = 1; w <= w_max && static_cast<std::size_t>(w) < len; ++w) {
    out.values[static_cast<std::size_t>(w - 1)] = t[static_cast<std::size_t>(w)];
  }
  return out;
}

double risk_R(const Pmf& f_wq, double q, std::int64_t w) {
  check_q(q);
  if (w < 0) return 0.0;
  const double lq = std::log(q);
  const double l1q = std::log1p(-q);
  std::vector<double> terms;
  for (std::int64_t s = std::max<std::int64_t>(w, f_wq.min_support); s <= f_wq.max_support(); ++s) {
    const double f = f_wq(s);
    if (f > 0.0) terms.push_back(std::exp(risk_term_log(s, w, lq, l1q)) * f);
  }
  return ordered_sum(terms);
}

double risk_R(const SizeDistribution& f_w, double q, std::int64_t w) {
  check_q(q);
  const double lq = std::log(q);
  const double l1q = std::log1p(-q);
  CompensatedSum sum;
  double prev = -1.0;
  int rising = 0;
  int small = 0;
  const std::int64_t bound = f_w.max_support();
  for (std::int64_t s = std::max<std::int64_t>(w, 0); s <= bound && s < 1000000; ++s) {
    const double f = sampled_size_mass(f_w, q, s);
    const double t = f > 0.0 ? std::exp(risk_term_log(s, w, lq, l1q)) * f : 0.0;
    if (std::isinf(t)) return std::numeric_limits<double>::infinity();
    sum.add(t);
    if (prev >= 0.0 && t > prev) {
      if (++rising >= kSumPatience) return std::numeric_limits<double>::infinity();
    } else {
      rising = 0;
    }
    prev = t;
    const double v = sum.value();
    if (v > 0.0 && t <= kSumRelTol * v) {
      if (++small >= kSumPatience) break;
    } else {
      small = 0;
    }
  }
  return sum.value();
}

double normal_abs_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidArgument, "alpha must lie in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 * (1.0 + alpha));
}

Interval normal_ci(const SignedSeq& f_hat_w, const Pmf& f_hat_wq, double q, std::int64_t w,
                   double alpha, std::size_t n) {
  if (n == 0) throw Error(Errc::InvalidArgument, "N must be >= 1");
  const double f = f_hat_w.at(w);
  const double var = std::max(0.0, risk_R(f_hat_wq, q, w) - f * f);
  const double half = normal_abs_quantile(alpha) * std::sqrt(var / static_cast<double>(n));
  return {f - half, f + half};
}

double bootstrap_sup_ci(const SampledDataset& ds, std::int64_t l, std::size_t b,
                        double alpha, std::uint64_t seed) {
  check_q(ds.q);
  if (l < 1) throw Error(Errc::InvalidArgument, "l must be >= 1");
  if (b < 100) throw Error(Errc::InvalidArgument, "bootstrap needs B >= 100");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidArgument, "alpha must lie in (0,1)");
  const std::size_t n = ds.records.size();
  if (n == 0) throw Error(Errc::InvalidArgument, "empty dataset");
  std::vector<std::int64_t> counts(n);
  for (std::size_t k = 0; k < n; ++k) counts[k] = ds.records[k].sampled_count;
  std::sort(counts.begin(), counts.end());
  const std::int64_t s_max = counts.back();
  const auto coef = s_matrix(l, s_max, ds.q);

  const auto apply_s = [&](const std::vector<double>& f, std::vector<double>& out) {
    std::vector<double> terms;
    for (std::int64_t w = 1; w <= l; ++w) {
      terms.clear();
      const auto& row = coef[static_cast<std::size_t>(w - 1)];
      for (std::int64_t s = w; s <= s_max; ++s) {
        const double v = f[static_cast<std::size_t>(s)];
        if (v != 0.0) terms.push_back(row[static_cast<std::size_t>(s)] * v);
      }
      out[static_cast<std::size_t>(w - 1)] = ordered_sum(terms);
    }
  };

  std::vector<double> f(static_cast<std::size_t>(s_max + 1), 0.0);
  for (std::int64_t c : counts) f[static_cast<std::size_t>(c)] += 1.0;
  for (double& v : f) v /= static_cast<double>(n);
  std::vector<double> base(static_cast<std::size_t>(l)), star(static_cast<std::size_t>(l));
  apply_s(f, base);

  std::vector<double> stats(b);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (std::size_t r = 0; r < b; ++r) {
    Engine rng = make_stream(seed, r);
    std::fill(f.begin(), f.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      f[static_cast<std::size_t>(counts[uniform_index(rng, n)])] += 1.0;
    }
    for (double& v : f) v /= static_cast<double>(n);
    apply_s(f, star);
    double dev = 0.0;
    for (std::size_t w = 0; w < star.size(); ++w) dev = std::max(dev, std::abs(star[w] - base[w]));
    stats[r] = root_n * dev;
  }
  std::sort(stats.begin(), stats.end());
  const auto rank = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(b)));
  return stats[std::clamp<std::size_t>(rank, 1, b) - 1];
}

RegimeReport classify_regime(const Pmf& f_hat_wq, double q, std::span<const std::int64_t> w_probe,
                             const RegimeThresholds& th) {
  if (w_probe.empty()) throw Error(Errc::InvalidArgument, "w_probe must be nonempty");
  const std::int64_t w_top = *std::max_element(w_probe.begin(), w_probe.end());
  const SignedSeq f_hat = invert_S(f_hat_wq, q, std::max<std::int64_t>(w_top, 1));
  std::vector<std::pair<std::int64_t, double>> r, v;
  for (std::int64_t w : w_probe) {
    const double rw = risk_R(f_hat_wq, q, w);
    r.emplace_back(w, rw);
    v.emplace_back(w, rw - f_hat.at(w) * f_hat.at(w));
  }
  return classify(std::move(r), std::move(v), q, th);
}

RegimeReport classify_regime(const SizeDistribution& f_w, double q,
                             std::span<const std::int64_t> w_probe, const RegimeThresholds& th) {
  if (w_probe.empty()) throw Error(Errc::InvalidArgument, "w_probe must be nonempty");
  std::vector<std::pair<std::int64_t, double>> r, v;
  for (std::int64_t w : w_probe) {
    const double rw = risk_R(f_w, q, w);
    const double fw = f_w.pmf(w);
    r.emplace_back(w, rw);
    v.emplace_back(w, rw - fw * fw);
  }
  return classify(std::move(r), std::move(v), q, th);
}

SignedSeq project_simplex(const SignedSeq& f) {
  std::vector<double> u = f.values;
  if (u.empty()) return f;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  SignedSeq out = f;
  for (double& x : out.values) x = std::max(0.0, x - theta);
  return out;
}

FwEstimate estimate_fw(const SampledDataset& ds, std::int64_t w_max, double alpha) {
  const Pmf f_wq = empirical_sampled_pmf(ds);
  if (w_max < 1) w_max = std::max<std::int64_t>(f_wq.max_support(), 1);
  FwEstimate e;
  e.f_hat = invert_S(f_wq, ds.q, w_max);
  const double n = static_cast<double>(ds.records.size());
  for (std::int64_t w = 1; w <= w_max; ++w) {
    const double r = risk_R(f_wq, ds.q, w);
    const double f = e.f_hat.at(w);
    e.r_hat.push_back(r);
    e.var_hat.push_back(std::max(0.0, r - f * f) / n);
    e.ci.push_back(normal_ci(e.f_hat, f_wq, ds.q, w, alpha, ds.records.size()));
  }
  return e;
}

}  // namespace renewal
