#pragma once

#include <cmath>
#include <cstdint>

namespace renewal {

/// log n! (table lookup for small n, lgamma beyond).
double log_factorial(std::int64_t n);

/// log C(n, k); -inf when k < 0 or k > n.
double log_binomial(std::int64_t n, std::int64_t k);

/// C(n, k) as a double (may overflow to inf for huge n).
double binomial(std::int64_t n, std::int64_t k);

/// Riemann zeta for s > 1.
double riemann_zeta(double s);

/// Hurwitz zeta sum_{k>=0} (k + a)^{-s} for s > 1, a > 0, via Euler-Maclaurin.
double hurwitz_zeta(double s, double a);

/// Polylogarithm Li_s(x) = sum_{k>=1} x^k / k^s for |x| < 1, any real s.
/// Summation stops once a geometric bound on the remainder falls below 1e-16
/// relative (1e-300 absolute).
double polylog(double s, double x);

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace renewal
