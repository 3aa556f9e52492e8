#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "renewal/series.hpp"

namespace renewal {

/// Uniform grid: points 0, step, 2 step, ..., t_max.
struct Grid {
  double t_max = 5.0;
  double step = 0.005;

  /// Number of grid points; throws InvalidArgument unless step divides t_max.
  std::size_t points() const;
};

/// Function sampled on a uniform grid over [0, t_max]. Genuine CDFs are
/// nondecreasing; estimates may not be and are never coerced.
struct GridCdf {
  Grid grid;
  std::vector<double> values;

  GridCdf() = default;
  GridCdf(Grid g, std::vector<double> v);

  static GridCdf from_function(Grid g, const std::function<double(double)>& f);
  static GridCdf zeros(Grid g);

  std::size_t size() const noexcept { return values.size(); }
  double t(std::size_t i) const noexcept { return static_cast<double>(i) * grid.step; }

  /// Right-continuous step lookup at t (the value at the last grid point <= t).
  double value_at(double t) const noexcept;
};

/// Discretized Stieltjes convolution
///   (F*G)(t_i) = F(t_i) G(0) + sum_{j=1..i} F(t_i - u_j) dG_j,
/// where u_j is the midpoint of cell j, dG_j = G(t_j) - G(t_{j-1}), and
/// F(t_i - u_j) is the average of F at the two neighbouring grid points.
/// Mass beyond t_max is dropped. Grids must match.
GridCdf stieltjes_convolve(const GridCdf& f, const GridCdf& g);

/// F^{*n}, n >= 1, by repeated convolution with F.
GridCdf convolve_power(const GridCdf& f, std::size_t n);

/// F^{*1}, ..., F^{*n_max} as in convolve_power. Uses FFT products when
/// F(0) = 0 and the grid is large, direct convolution otherwise.
std::vector<GridCdf> convolution_powers(const GridCdf& f, std::size_t n_max);

/// sum_{n=1}^{n_max} coeffs[n] F^{*n}.
GridCdf compound_sum(const GridCdf& f, const CoeffSeries& coeffs, std::size_t n_max);

/// max_i |F_i - G_i| over grid points with t_i <= t_limit.
double sup_distance(const GridCdf& f, const GridCdf& g, double t_limit);

/// Number of grid steps where the value decreases by more than tol.
std::size_t monotonicity_violations(const GridCdf& f, double tol = 1e-12);

/// Least-squares nondecreasing fit (pool adjacent violators) clipped to
/// [0, 1]. A post-hoc projection, not part of the raw estimator.
GridCdf isotonic_projection(const GridCdf& f);

}  // namespace renewal
