#include "renewal/special.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <vector>

#include <boost/math/special_functions/zeta.hpp>

#include "renewal/error.hpp"

namespace renewal {

namespace {

constexpr std::int64_t kTableSize = 1 << 16;

const std::vector<double>& log_factorial_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kTableSize);
    t[0] = 0.0;
    for (std::int64_t n = 1; n < kTableSize; ++n) {
      t[n] = t[n - 1] + std::log(static_cast<double>(n));
    }
    return t;
  }();
  return table;
}

// B_{2j} / (2j)! for j = 1..8.
constexpr std::array<double, 8> kBernoulliOverFactorial = {
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
};

}  // namespace

double log_factorial(std::int64_t n) {
  if (n < 0) return std::numeric_limits<double>::quiet_NaN();
  if (n < kTableSize) return log_factorial_table()[static_cast<std::size_t>(n)];
  return std::lgamma(static_cast<double>(n) + 1.0);
}

double log_binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  if (n < 50) {
    // Exact in double for these sizes.
    double r = 1.0;
    const std::int64_t kk = std::min(k, n - k);
    for (std::int64_t j = 1; j <= kk; ++j) {
      r = r * static_cast<double>(n - kk + j) / static_cast<double>(j);
    }
    return std::round(r);
  }
  return std::exp(log_binomial(n, k));
}

double riemann_zeta(double s) {
  if (!(s > 1.0)) throw Error(Errc::InvalidArgument, "zeta needs s > 1");
  return boost::math::zeta(s);
}

double hurwitz_zeta(double s, double a) {
  if (!(s > 1.0) || !(a > 0.0)) {
    throw Error(Errc::InvalidArgument, "hurwitz_zeta needs s > 1 and a > 0");
  }
  constexpr double kShift = 20.0;
  const int direct = a >= kShift ? 0 : static_cast<int>(std::ceil(kShift - a));
  CompensatedSum head;
  for (int k = 0; k < direct; ++k) head.add(std::pow(a + k, -s));
  const double x = a + direct;
  double tail = std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);
  // Rising factorial s (s+1) ... (s+2j-2) times x^{-s-2j+1}.
  double factor = s * std::pow(x, -s - 1.0);
  for (std::size_t j = 0; j < kBernoulliOverFactorial.size(); ++j) {
    tail += kBernoulliOverFactorial[j] * factor;
    const double p = static_cast<double>(2 * j + 1);
    factor *= (s + p) * (s + p + 1.0) / (x * x);
  }
  return head.value() + tail;
}

double polylog(double s, double x) {
  if (!(std::abs(x) < 1.0)) throw Error(Errc::InvalidArgument, "polylog needs |x| < 1");
  CompensatedSum sum;
  double xk = 1.0;
  for (long k = 1; k < 100000000; ++k) {
    xk *= x;
    const double term = xk * std::pow(static_cast<double>(k), -s);
    sum.add(term);
    // Successive ratios approach |x|; bound the rest by a geometric series
    // once the polynomial factor is no longer growing.
    const double growth = std::pow(static_cast<double>(k + 1) / k, -s);
    const double ratio = std::abs(x) * std::max(growth, 1.0);
    if (ratio < 1.0) {
      const double rest = std::abs(term) * ratio / (1.0 - ratio);
      if (rest < 1e-16 * std::abs(sum.value()) || rest < 1e-300) break;
    }
  }
  return sum.value();
}

}  // namespace renewal
