#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace renewal {

/// Truncated formal power series sum_{n=0}^{M} coeffs[n] z^n.
///
/// The order M is explicit and every operation truncates its result to the
/// smaller of its operands' orders instead of failing on a mismatch.
class CoeffSeries {
 public:
  static constexpr std::size_t kDefaultOrder = 64;

  /// Zero series of the given order.
  explicit CoeffSeries(std::size_t order = kDefaultOrder);
  /// Throws Errc::InvalidArgument on an empty list or a non-finite entry.
  explicit CoeffSeries(std::vector<double> coeffs);
  CoeffSeries(std::initializer_list<double> coeffs);

  /// The series z truncated to `order`.
  static CoeffSeries identity(std::size_t order = kDefaultOrder);

  std::size_t order() const noexcept { return coeffs_.size() - 1; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }

  double operator[](std::size_t n) const noexcept { return coeffs_[n]; }
  double& operator[](std::size_t n) noexcept { return coeffs_[n]; }

  /// Coefficient n, or 0 beyond the truncation order.
  double at(std::size_t n) const noexcept {
    return n < coeffs_.size() ? coeffs_[n] : 0.0;
  }

  /// Copy truncated or zero-padded to `order`.
  CoeffSeries resized(std::size_t order) const;

  /// Evaluates the truncated polynomial at x (Horner).
  double evaluate(double x) const noexcept;

  CoeffSeries operator+(const CoeffSeries& o) const;
  CoeffSeries operator-(const CoeffSeries& o) const;
  CoeffSeries operator*(double k) const;

  bool operator==(const CoeffSeries&) const = default;

 private:
  std::vector<double> coeffs_;
};

/// Cauchy product truncated to min(order a, order b).
CoeffSeries convolve(const CoeffSeries& a, const CoeffSeries& b);

/// G_outer(G_inner(z)). Requires inner[0] == 0, else NonzeroConstantTerm.
CoeffSeries compose(const CoeffSeries& outer, const CoeffSeries& inner);

/// k-th derivative; the result has order M - k. Throws OrderTooSmall if k > M.
CoeffSeries derivative(const CoeffSeries& a, std::size_t k);

inline constexpr double kDefaultRevertEps = 1e-12;

/// Compositional inverse b with a(b(z)) = b(a(z)) = z, solved coefficient by
/// coefficient. Throws NotRevertible if a[0] != 0 or |a[1]| < eps.
CoeffSeries revert(const CoeffSeries& a, double eps = kDefaultRevertEps);

/// Entrywise absolute value (the majorant series sum |a_n| z^n).
CoeffSeries abs_series(const CoeffSeries& a);

/// Both sides of the first- and second-order remainder bounds for
/// compositions of series with zero constant term, at coefficient n:
///
///   |(x∘(y+e) - x∘y)_n|               <= ((x+' ∘ (y+ + e+)) * e+)_n
///   |(x∘(y+e) - x∘y - (x'∘y)*e)_n|    <= 1/2 ((x+'' ∘ (y+ + e+)) * e+ * e+)_n
///
/// where + denotes abs_series and ' differentiation.
struct RemainderBounds {
  double first_order_lhs;
  double first_order_rhs;
  double second_order_lhs;
  double second_order_rhs;
};

RemainderBounds taylor_remainder_check(const CoeffSeries& x,
                                       const CoeffSeries& y,
                                       const CoeffSeries& eps, std::size_t n);

/// max_n |a[n] - b[n]| over the common order.
double max_abs_diff(const CoeffSeries& a, const CoeffSeries& b);

}  // namespace renewal
