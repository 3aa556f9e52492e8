#include "renewal/forward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "renewal/error.hpp"
#include "renewal/special.hpp"

namespace renewal {

namespace {

constexpr std::int64_t kMaxTerms = 50000000;

// sum_{w=start}^{stop} term(w), where stop is f's support bound. Unbounded
// supports stop early by the relative-size rule.
template <class Term>
double support_sum(const SizeDistribution& f, std::int64_t start, Term term) {
  const std::int64_t bound = f.max_support();
  const bool early = bound == kUnbounded;
  CompensatedSum sum;
  int small = 0;
  for (std::int64_t w = std::max<std::int64_t>(start, 1); w <= bound; ++w) {
    if (w - start > kMaxTerms) break;
    const double t = term(w);
    sum.add(t);
    if (!early) continue;
    const double s = std::abs(sum.value());
    if (s > 0.0 && std::abs(t) <= kSumRelTol * s) {
      if (++small >= kSumPatience) break;
    } else {
      small = 0;
    }
  }
  return sum.value();
}

// P(Bin(n, q) >= k).
double binom_upper(std::int64_t n, double q, std::int64_t k) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  return boost::math::ibeta(static_cast<double>(k), static_cast<double>(n - k + 1), q);
}

// P(Bin(n, q) <= k).
double binom_lower(std::int64_t n, double q, std::int64_t k) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  return boost::math::ibetac(static_cast<double>(k + 1), static_cast<double>(n - k), q);
}

void check_q(double q) {
  if (!(q > 0.0 && q < 1.0)) throw Error(Errc::InvalidArgument, "q must lie in (0,1)");
}

double conditioning_mass(const Pmf& f_wq, std::int64_t s) {
  const double mass = f_wq(s);
  if (!(mass > 0.0)) {
    throw Error(Errc::ZeroConditioningMass,
                "no sampled-size mass at s=" + std::to_string(s));
  }
  return mass;
}

// sum_{w >= s+m-1} f(w) C(w-m, s-1) (1-q)^{w-m-s+1}; A_{s,m} is this times
// q^s (1-q)^{m-1} / f_Wq(s).
double mix_scaled(const SizeDistribution& f, double q, std::int64_t s, std::int64_t m) {
  const double l1q = std::log1p(-q);
  return support_sum(f, s + m - 1, [&](std::int64_t w) {
    const double p = f.pmf(w);
    if (p == 0.0) return 0.0;
    return p * std::exp(log_binomial(w - m, s - 1) + static_cast<double>(w - m - s + 1) * l1q);
  });
}

// sum_{w >= m+1} f(w) (w-m) (1-q)^{w-m-1}.
double duration_scaled(const SizeDistribution& f, double q, std::int64_t m) {
  const double l1q = std::log1p(-q);
  return support_sum(f, m + 1, [&](std::int64_t w) {
    const double p = f.pmf(w);
    if (p == 0.0) return 0.0;
    return p * static_cast<double>(w - m) * std::exp(static_cast<double>(w - m - 1) * l1q);
  });
}

void check_shortfall(const CoeffSeries& a, const char* what) {
  CompensatedSum s;
  for (std::size_t m = 1; m <= a.order(); ++m) s.add(a[m]);
  const double shortfall = 1.0 - s.value();
  if (shortfall >= kMixTailTol) {
    throw Error(Errc::TailTooHeavy, std::string(what) + " truncation leaves mass " +
                                        std::to_string(shortfall) +
                                        "; increase the order");
  }
}

}  // namespace

double sampled_size_mass(const SizeDistribution& f_w, double q, std::int64_t s) {
  check_q(q);
  if (s < 0) return 0.0;
  const double lq = std::log(q);
  const double l1q = std::log1p(-q);
  return support_sum(f_w, std::max<std::int64_t>(s, 1), [&](std::int64_t w) {
    const double p = f_w.pmf(w);
    if (p == 0.0) return 0.0;
    return p * std::exp(log_binomial(w, s) + static_cast<double>(s) * lq +
                        static_cast<double>(w - s) * l1q);
  });
}

double sampled_size_survival(const SizeDistribution& f_w, double q, std::int64_t s) {
  check_q(q);
  if (s <= 0) return 1.0;
  const double lq = std::log(q);
  const double l1q = std::log1p(-q);
  // The s-th kept renewal sits at position j with negative binomial weight.
  return support_sum(f_w, s, [&](std::int64_t j) {
    const double surv = f_w.survival(j);
    if (surv <= 0.0) return 0.0;
    return surv * std::exp(log_binomial(j - 1, s - 1) + static_cast<double>(s) * lq +
                           static_cast<double>(j - s) * l1q);
  });
}

Pmf sampled_size_pmf(const SizeDistribution& f_w, double q, std::int64_t s_max) {
  check_q(q);
  if (s_max < 1) throw Error(Errc::InvalidArgument, "s_max must be >= 1");
  std::vector<double> p(static_cast<std::size_t>(s_max + 1));
  CompensatedSum total;
  for (std::int64_t s = 0; s <= s_max; ++s) {
    p[static_cast<std::size_t>(s)] = sampled_size_mass(f_w, q, s);
    total.add(p[static_cast<std::size_t>(s)]);
  }
  double tail = 0.0;
  if (f_w.max_support() > s_max) tail = std::max(0.0, 1.0 - total.value());
  return Pmf(0, std::move(p), tail);
}

CoeffSeries gap_mix_coeffs(const SizeDistribution& f_w, const Pmf& f_wq, double q,
                           std::int64_t s, std::size_t m_max) {
  check_q(q);
  if (s < 2) throw Error(Errc::InvalidArgument, "gap mixing needs s >= 2");
  const double mass = conditioning_mass(f_wq, s);
  const double scale = std::pow(q, static_cast<double>(s)) / mass;
  const double l1q = std::log1p(-q);
  CoeffSeries a(m_max);
  for (std::size_t m = 1; m <= m_max; ++m) {
    const auto mm = static_cast<std::int64_t>(m);
    a[m] = scale * std::exp(static_cast<double>(mm - 1) * l1q) * mix_scaled(f_w, q, s, mm);
  }
  check_shortfall(a, "A_s");
  return a;
}

CoeffSeries gap_mix_coeffs_geq(const SizeDistribution& f_w, double q, std::int64_t s,
                               std::size_t m_max) {
  check_q(q);
  if (s < 2) throw Error(Errc::InvalidArgument, "gap mixing needs s >= 2");
  const double at_least = sampled_size_survival(f_w, q, s);
  if (!(at_least > 0.0)) {
    throw Error(Errc::ZeroConditioningMass, "P(W_q >= s) is zero");
  }
  const bool finite = f_w.max_support() != kUnbounded;
  const double l1q = std::log1p(-q);
  CoeffSeries a(m_max);
  for (std::size_t m = 1; m <= m_max; ++m) {
    const auto mm = static_cast<std::int64_t>(m);
    double inner = 0.0;
    if (finite) {
      inner = support_sum(f_w, mm + s - 1, [&](std::int64_t w) {
        const double p = f_w.pmf(w);
        return p == 0.0 ? 0.0 : p * binom_upper(w - mm, q, s - 1);
      });
    } else {
      // Heavy tails: P(W >= m+s-1) minus a geometrically decaying correction.
      const double correction = support_sum(f_w, mm + s - 1, [&](std::int64_t w) {
        const double p = f_w.pmf(w);
        return p == 0.0 ? 0.0 : p * binom_lower(w - mm, q, s - 2);
      });
      inner = f_w.survival(mm + s - 1) - correction;
    }
    a[m] = q * std::exp(static_cast<double>(mm - 1) * l1q) * inner / at_least;
  }
  check_shortfall(a, "A_s+");
  return a;
}

CoeffSeries gap_mix_coeffs_finite(std::span<const double> f, double f_wq_s, double q,
                                  std::int64_t s, std::size_t m_max) {
  check_q(q);
  if (s < 2) throw Error(Errc::InvalidArgument, "gap mixing needs s >= 2");
  if (f_wq_s == 0.0) {
    throw Error(Errc::ZeroConditioningMass,
                "no sampled-size mass at s=" + std::to_string(s));
  }
  const double lq = std::log(q);
  const double l1q = std::log1p(-q);
  const auto w_max = static_cast<std::int64_t>(f.size());
  CoeffSeries a(m_max);
  for (std::size_t m = 1; m <= m_max; ++m) {
    const auto mm = static_cast<std::int64_t>(m);
    CompensatedSum sum;
    for (std::int64_t w = s + mm - 1; w <= w_max; ++w) {
      const double v = f[static_cast<std::size_t>(w - 1)];
      if (v == 0.0) continue;
      sum.add(v * std::exp(log_binomial(w - mm, s - 1) + static_cast<double>(s) * lq +
                           static_cast<double>(w - s) * l1q));
    }
    a[m] = sum.value() / f_wq_s;
  }
  return a;
}

double JointGapCoeffs::at(std::span<const int> ms) const {
  if (static_cast<int>(ms.size()) != n) {
    throw Error(Errc::InvalidArgument, "composition length does not match n");
  }
  std::int64_t total = 0;
  for (int m : ms) {
    if (m < 1) throw Error(Errc::InvalidArgument, "gap spans must be >= 1");
    total += m;
  }
  return total < static_cast<std::int64_t>(by_total.size())
             ? by_total[static_cast<std::size_t>(total)]
             : 0.0;
}

JointGapCoeffs joint_gap_coeffs(const SizeDistribution& f_w, const Pmf& f_wq, double q,
                                std::int64_t s, int n, std::int64_t m_total_max) {
  check_q(q);
  if (n < 1 || n + 1 > s) throw Error(Errc::InvalidArgument, "joint gaps need 1 <= n < s");
  if (m_total_max < n) throw Error(Errc::InvalidArgument, "m_total_max must be >= n");
  const double mass = conditioning_mass(f_wq, s);
  const double lq = std::log(q);
  const double l1q = std::log1p(-q);
  JointGapCoeffs out;
  out.n = n;
  out.by_total.assign(static_cast<std::size_t>(m_total_max + 1), 0.0);
  CompensatedSum covered;
  for (std::int64_t m = n; m <= m_total_max; ++m) {
    const double inner = support_sum(f_w, s + m - n, [&](std::int64_t w) {
      const double p = f_w.pmf(w);
      if (p == 0.0) return 0.0;
      return p * std::exp(log_binomial(w - m, s - n) +
                          static_cast<double>(w - m - s + n) * l1q);
    });
    const double b = std::exp(static_cast<double>(s) * lq +
                              static_cast<double>(m - n) * l1q) * inner / mass;
    out.by_total[static_cast<std::size_t>(m)] = b;
    covered.add(binomial(m - 1, n - 1) * b);
  }
  out.shortfall = 1.0 - covered.value();
  if (out.shortfall >= kMixTailTol) {
    throw Error(Errc::TailTooHeavy, "B_s truncation leaves mass " +
                                        std::to_string(out.shortfall));
  }
  return out;
}

CoeffSeries duration_coeffs(const SizeDistribution& f_w, double q, std::size_t m_max) {
  check_q(q);
  const double at_least_two = sampled_size_survival(f_w, q, 2);
  if (!(at_least_two > 0.0)) {
    throw Error(Errc::ZeroConditioningMass, "P(W_q >= 2) is zero");
  }
  CoeffSeries c(m_max);
  for (std::size_t m = 1; m <= m_max; ++m) {
    c[m] = q * q * duration_scaled(f_w, q, static_cast<std::int64_t>(m)) / at_least_two;
  }
  return c;
}

GridCdf conditional_gap_cdf(const GridCdf& f_d, const CoeffSeries& a_s, double trunc_tol) {
  CompensatedSum used;
  std::size_t n_stop = a_s.order();
  for (std::size_t m = 1; m <= a_s.order(); ++m) {
    used.add(a_s[m]);
    if (1.0 - used.value() < trunc_tol) {
      n_stop = m;
      break;
    }
  }
  return compound_sum(f_d, a_s, n_stop);
}

HeavyTailReport heavy_tail_diagnostics(const SizeDistribution& f_w, double alpha, double c,
                                       double q, std::int64_t w_max, std::int64_t s,
                                       std::span<const std::int64_t> extra) {
  check_q(q);
  if (!(alpha > 0.0) || !(c > 0.0)) {
    throw Error(Errc::InvalidArgument, "heavy-tail diagnostics need alpha > 0, c > 0");
  }
  HeavyTailReport r;
  for (int k = 0;; ++k) {
    const auto w = static_cast<std::int64_t>(std::llround(10.0 * std::pow(10.0, k / 8.0)));
    if (w > w_max) break;
    r.index.push_back(w);
  }
  r.index.insert(r.index.end(), extra.begin(), extra.end());
  std::sort(r.index.begin(), r.index.end());
  r.index.erase(std::unique(r.index.begin(), r.index.end()), r.index.end());

  const double at_least_two = sampled_size_survival(f_w, q, 2);
  const double mass_s = sampled_size_mass(f_w, q, s);
  r.survival_limit = std::pow(q, alpha) * c;
  r.duration_limit = c * alpha / at_least_two;
  r.mix_limit = c * alpha / ((1.0 - q) * mass_s);
  for (std::int64_t w : r.index) {
    const double wd = static_cast<double>(w);
    r.survival_ratio.push_back(sampled_size_survival(f_w, q, w + 1) * std::pow(wd, alpha));
    r.duration_ratio.push_back(q * q * duration_scaled(f_w, q, w) / at_least_two *
                               std::pow(wd, alpha + 1.0));
    // A_{s,m} / (1-q)^m = q^s mix_scaled / ((1-q) f_Wq(s)).
    r.mix_ratio.push_back(std::pow(q, static_cast<double>(s)) * mix_scaled(f_w, q, s, w) /
                          ((1.0 - q) * mass_s) * std::pow(wd, alpha + 1.0));
  }
  return r;
}

}  // namespace renewal
