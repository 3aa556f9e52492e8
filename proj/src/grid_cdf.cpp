#include "renewal/grid_cdf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include <fftw3.h>

#include "renewal/error.hpp"

namespace renewal {

namespace {

void require_same_grid(const GridCdf& a, const GridCdf& b) {
  if (a.size() != b.size() || a.grid.step != b.grid.step) {
    throw Error(Errc::InvalidArgument, "grids do not match");
  }
}

struct FftBuffer {
  explicit FftBuffer(int n)
      : real(fftw_alloc_real(static_cast<std::size_t>(n))),
        spec(fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1))) {}
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;
  ~FftBuffer() {
    fftw_free(real);
    fftw_free(spec);
  }
  double* real;
  fftw_complex* spec;
};

struct FftPlans {
  fftw_plan forward;
  fftw_plan backward;
};

// FFTW planning is not thread-safe; execution with the new-array interface is,
// on buffers from fftw_alloc (same alignment as the planning buffers).
const FftPlans& plans_for(int n) {
  static std::mutex mu;
  static std::map<int, FftPlans> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  FftBuffer b(n);
  // Not FFTW_MEASURE: timing-based plan choice changes rounding from run to run.
  FftPlans p{fftw_plan_dft_r2c_1d(n, b.real, b.spec, FFTW_ESTIMATE),
             fftw_plan_dft_c2r_1d(n, b.spec, b.real, FFTW_ESTIMATE)};
  return cache.emplace(n, p).first->second;
}

int fft_size(std::size_t len) {
  int n = 1;
  while (n < static_cast<int>(2 * len)) n <<= 1;
  return n;
}

// Truncated products mod x^len against a fixed multiplier.
class TruncatedMultiplier {
 public:
  TruncatedMultiplier(const std::vector<double>& multiplier, std::size_t len)
      : len_(len), n_(fft_size(len)), plans_(&plans_for(n_)), buf_(n_), mult_(n_) {
    std::fill_n(buf_.real, n_, 0.0);
    std::copy_n(multiplier.begin(), std::min(len, multiplier.size()), buf_.real);
    fftw_execute_dft_r2c(plans_->forward, buf_.real, mult_.spec);
  }

  // x <- (x * multiplier) mod x^len
  void apply(std::vector<double>& x) {
    std::copy_n(x.begin(), len_, buf_.real);
    std::fill(buf_.real + len_, buf_.real + n_, 0.0);
    fftw_execute_dft_r2c(plans_->forward, buf_.real, buf_.spec);
    for (int k = 0; k <= n_ / 2; ++k) {
      const double re = buf_.spec[k][0] * mult_.spec[k][0] - buf_.spec[k][1] * mult_.spec[k][1];
      const double im = buf_.spec[k][0] * mult_.spec[k][1] + buf_.spec[k][1] * mult_.spec[k][0];
      buf_.spec[k][0] = re;
      buf_.spec[k][1] = im;
    }
    fftw_execute_dft_c2r(plans_->backward, buf_.spec, buf_.real);
    const double scale = 1.0 / n_;
    for (std::size_t i = 0; i < len_; ++i) x[i] = buf_.real[i] * scale;
  }

 private:
  std::size_t len_;
  int n_;
  const FftPlans* plans_;
  FftBuffer buf_;
  FftBuffer mult_;
};

}  // namespace

std::size_t Grid::points() const {
  if (!(t_max > 0.0) || !(step > 0.0)) {
    throw Error(Errc::InvalidArgument, "grid needs t_max > 0 and step > 0");
  }
  const double cells = std::round(t_max / step);
  if (cells < 1.0 || std::abs(cells * step - t_max) > 1e-9 * t_max) {
    throw Error(Errc::InvalidArgument, "grid step must divide t_max");
  }
  return static_cast<std::size_t>(cells) + 1;
}

GridCdf::GridCdf(Grid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.points()) {
    throw Error(Errc::InvalidArgument, "grid values do not match the grid");
  }
}

GridCdf GridCdf::from_function(Grid g, const std::function<double(double)>& f) {
  std::vector<double> v(g.points());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(static_cast<double>(i) * g.step);
  return GridCdf(g, std::move(v));
}

GridCdf GridCdf::zeros(Grid g) { return GridCdf(g, std::vector<double>(g.points(), 0.0)); }

double GridCdf::value_at(double t) const noexcept {
  if (t < 0.0) return 0.0;
  const double pos = std::floor(t / grid.step + 1e-9);
  const auto i = std::min(static_cast<std::size_t>(pos), values.size() - 1);
  return values[i];
}

GridCdf stieltjes_convolve(const GridCdf& f, const GridCdf& g) {
  require_same_grid(f, g);
  const std::size_t len = f.size();
  std::vector<double> dg(len, 0.0);
  for (std::size_t j = 1; j < len; ++j) dg[j] = g.values[j] - g.values[j - 1];
  std::vector<double> out(len, 0.0);
  for (std::size_t i = 0; i < len; ++i) {
    double acc = f.values[i] * g.values[0];
    for (std::size_t j = 1; j <= i; ++j) {
      acc += 0.5 * (f.values[i - j] + f.values[i - j + 1]) * dg[j];
    }
    out[i] = acc;
  }
  return GridCdf(f.grid, std::move(out));
}

GridCdf convolve_power(const GridCdf& f, std::size_t n) {
  if (n == 0) throw Error(Errc::InvalidArgument, "convolution power must be >= 1");
  GridCdf out = f;
  for (std::size_t k = 1; k < n; ++k) out = stieltjes_convolve(out, f);
  return out;
}

std::vector<GridCdf> convolution_powers(const GridCdf& f, std::size_t n_max) {
  std::vector<GridCdf> out;
  if (n_max == 0) return out;
  out.reserve(n_max);
  out.push_back(f);
  const std::size_t len = f.size();
  if (f.values[0] != 0.0 || len < 64) {
    for (std::size_t n = 2; n <= n_max; ++n) out.push_back(stieltjes_convolve(out.back(), f));
    return out;
  }
  // With F(0) = 0 the midpoint rule is the product F(x) u(x) of generating
  // functions, where u_k = (F_{k+1} - F_{k-1}) / 2, so F^{*n} = F^{*(n-1)} u.
  // Each power is formed separately: FFT rounding is relative to the size of
  // the power itself, which stays accurate even when the powers get tiny.
  std::vector<double> u(len, 0.0);
  for (std::size_t k = 0; k + 1 < len; ++k) {
    u[k] = 0.5 * (f.values[k + 1] - (k > 0 ? f.values[k - 1] : 0.0));
  }
  TruncatedMultiplier by_u(u, len);
  std::vector<double> p = f.values;
  for (std::size_t n = 2; n <= n_max; ++n) {
    by_u.apply(p);
    out.emplace_back(f.grid, p);
  }
  return out;
}

GridCdf compound_sum(const GridCdf& f, const CoeffSeries& coeffs, std::size_t n_max) {
  n_max = std::min(n_max, coeffs.order());
  GridCdf out = GridCdf::zeros(f.grid);
  const auto powers = convolution_powers(f, n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double a = coeffs[n];
    if (a == 0.0) continue;
    const auto& p = powers[n - 1].values;
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += a * p[i];
  }
  return out;
}

double sup_distance(const GridCdf& f, const GridCdf& g, double t_limit) {
  require_same_grid(f, g);
  double d = 0.0;
  for (std::size_t i = 0; i < f.size() && f.t(i) <= t_limit + 1e-12; ++i) {
    d = std::max(d, std::abs(f.values[i] - g.values[i]));
  }
  return d;
}

std::size_t monotonicity_violations(const GridCdf& f, double tol) {
  std::size_t count = 0;
  for (std::size_t i = 1; i < f.size(); ++i) {
    if (f.values[i] < f.values[i - 1] - tol) ++count;
  }
  return count;
}

GridCdf isotonic_projection(const GridCdf& f) {
  struct Block {
    double mean;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (double v : f.values) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      a.mean = (a.mean * a.count + b.mean * b.count) / static_cast<double>(a.count + b.count);
      a.count += b.count;
    }
  }
  std::vector<double> out;
  out.reserve(f.size());
  for (const Block& b : blocks) out.insert(out.end(), b.count, std::clamp(b.mean, 0.0, 1.0));
  return GridCdf(f.grid, std::move(out));
}

}  // namespace renewal
