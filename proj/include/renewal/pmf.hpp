#pragma once

#include <cstdint>
#include <vector>

namespace renewal {

/// Probability mass function on {min_support, ..., max_support} with the mass
/// beyond max_support kept in tail_mass.
struct Pmf {
  int min_support = 0;
  std::vector<double> probs;
  double tail_mass = 0.0;

  Pmf() = default;
  /// Throws InvalidArgument on negative/non-finite entries, a min_support
  /// other than 0 or 1, or a total outside 1 +- 1e-9.
  Pmf(int min_support, std::vector<double> probs, double tail_mass = 0.0);

  /// Point mass at k (k >= min_support).
  static Pmf point_mass(int k, int min_support = 1);

  /// Largest index that carries an explicit entry.
  std::int64_t max_support() const noexcept {
    return min_support + static_cast<std::int64_t>(probs.size()) - 1;
  }

  /// f(k); 0 outside the explicit range.
  double operator()(std::int64_t k) const noexcept {
    const std::int64_t i = k - min_support;
    return (i >= 0 && i < static_cast<std::int64_t>(probs.size()))
               ? probs[static_cast<std::size_t>(i)]
               : 0.0;
  }

  /// Sum of the explicit entries plus tail_mass.
  double total() const noexcept;

  /// P(X >= k), counting tail_mass as lying above max_support.
  double survival(std::int64_t k) const noexcept;
};

inline constexpr double kPmfNormTol = 1e-9;

}  // namespace renewal
