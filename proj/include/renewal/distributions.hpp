#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "renewal/grid_cdf.hpp"
#include "renewal/pmf.hpp"
#include "renewal/rng.hpp"

namespace renewal {

/// f_W(w) = c^{w-1} (1 - c), w >= 1.
struct Geometric {
  double c;
};

/// f_W(w) = w^{-alpha-1} / zeta(alpha + 1), w >= 1.
struct DiscretePareto {
  double alpha;
};

inline constexpr std::int64_t kUnbounded = std::numeric_limits<std::int64_t>::max();

/// Distribution of the number of renewals W >= 1.
class SizeDistribution {
 public:
  using Kind = std::variant<Geometric, DiscretePareto, Pmf>;

  SizeDistribution(Geometric g);
  SizeDistribution(DiscretePareto p);
  /// An explicit pmf must put no mass on 0.
  SizeDistribution(Pmf p);

  const Kind& kind() const noexcept { return kind_; }

  double pmf(std::int64_t w) const;
  /// P(W >= w).
  double survival(std::int64_t w) const;
  /// Largest w with positive mass, or kUnbounded.
  std::int64_t max_support() const noexcept;

  std::int64_t sample(Engine& e) const;

  /// Explicit pmf on 1..w_max with the remaining mass as tail_mass.
  Pmf truncated(std::int64_t w_max) const;

  std::string describe() const;

 private:
  Kind kind_;
  double zeta_ = 0.0;                               // Pareto normalizer
  std::shared_ptr<const std::vector<double>> cdf_;  // explicit pmf sampling table
};

/// D ~ Exponential(rate).
struct Exponential {
  double rate;
};

/// Distribution of the inter-renewal time D > 0.
class GapDistribution {
 public:
  using Kind = std::variant<Exponential, GridCdf>;

  GapDistribution(Exponential e);
  /// A genuine CDF on its grid with F(t_max) = 1; sampled by inverting the
  /// piecewise-linear interpolant.
  GapDistribution(GridCdf f);

  const Kind& kind() const noexcept { return kind_; }

  double cdf(double t) const;
  double sample(Engine& e) const;
  /// The CDF on `g` (exact for Exponential, interpolated otherwise).
  GridCdf on_grid(Grid g) const;
  std::string describe() const;

 private:
  Kind kind_;
};

struct ModelSpec {
  SizeDistribution size;
  GapDistribution gap;
  double q;

  /// Throws InvalidArgument unless 0 < q < 1.
  void validate() const;
};

}  // namespace renewal
