#include "renewal/series.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "renewal/error.hpp"

namespace renewal {

namespace {

void check_finite(const std::vector<double>& c) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!std::isfinite(c[i])) {
      throw Error(Errc::InvalidArgument,
                  "series coefficient " + std::to_string(i) + " is not finite");
    }
  }
}

void require_zero_constant(const CoeffSeries& s, const char* what) {
  if (std::abs(s[0]) > 0.0) {
    throw Error(Errc::NonzeroConstantTerm,
                std::string(what) + " must have a zero constant term");
  }
}

}  // namespace

CoeffSeries::CoeffSeries(std::size_t order) : coeffs_(order + 1, 0.0) {}

CoeffSeries::CoeffSeries(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) {
    throw Error(Errc::InvalidArgument, "series needs at least one coefficient");
  }
  check_finite(coeffs_);
}

CoeffSeries::CoeffSeries(std::initializer_list<double> coeffs)
    : CoeffSeries(std::vector<double>(coeffs)) {}

CoeffSeries CoeffSeries::identity(std::size_t order) {
  CoeffSeries s(std::max<std::size_t>(order, 1));
  s[1] = 1.0;
  return s;
}

CoeffSeries CoeffSeries::resized(std::size_t order) const {
  CoeffSeries out(order);
  const std::size_t n = std::min(order, this->order());
  std::copy_n(coeffs_.begin(), n + 1, out.coeffs_.begin());
  return out;
}

double CoeffSeries::evaluate(double x) const noexcept {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

CoeffSeries CoeffSeries::operator+(const CoeffSeries& o) const {
  CoeffSeries out(std::min(order(), o.order()));
  for (std::size_t n = 0; n <= out.order(); ++n) out[n] = coeffs_[n] + o[n];
  return out;
}

CoeffSeries CoeffSeries::operator-(const CoeffSeries& o) const {
  CoeffSeries out(std::min(order(), o.order()));
  for (std::size_t n = 0; n <= out.order(); ++n) out[n] = coeffs_[n] - o[n];
  return out;
}

CoeffSeries CoeffSeries::operator*(double k) const {
  CoeffSeries out(*this);
  for (auto& c : out.coeffs_) c *= k;
  return out;
}

CoeffSeries convolve(const CoeffSeries& a, const CoeffSeries& b) {
  const std::size_t m = std::min(a.order(), b.order());
  CoeffSeries out(m);
  for (std::size_t i = 0; i <= m; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; i + j <= m; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

CoeffSeries compose(const CoeffSeries& outer, const CoeffSeries& inner) {
  require_zero_constant(inner, "inner series");
  const std::size_t m = std::min(outer.order(), inner.order());
  const CoeffSeries in = inner.resized(m);
  // Horner: ((o_M * g + o_{M-1}) * g + ...) + o_0, truncated at every step.
  CoeffSeries acc(m);
  acc[0] = outer[m];
  for (std::size_t k = m; k-- > 0;) {
    acc = convolve(acc, in);
    acc[0] += outer[k];
  }
  return acc;
}

CoeffSeries derivative(const CoeffSeries& a, std::size_t k) {
  if (k == 0) throw Error(Errc::InvalidArgument, "derivative order must be >= 1");
  if (k > a.order()) {
    throw Error(Errc::OrderTooSmall, "derivative order " + std::to_string(k) +
                                         " exceeds series order " +
                                         std::to_string(a.order()));
  }
  CoeffSeries out(a.order() - k);
  for (std::size_t n = k; n <= a.order(); ++n) {
    double falling = 1.0;
    for (std::size_t j = 0; j < k; ++j) falling *= static_cast<double>(n - j);
    out[n - k] = a[n] * falling;
  }
  return out;
}

CoeffSeries revert(const CoeffSeries& a, double eps) {
  if (a[0] != 0.0) {
    throw Error(Errc::NotRevertible, "constant term must be zero");
  }
  const std::size_t m = a.order();
  if (m < 1 || std::abs(a[1]) < eps) {
    throw Error(Errc::NotRevertible, "linear coefficient is (numerically) zero");
  }
  // powers[k][j] = [z^j] b(z)^k. Coefficient j of b^k (k >= 2) only involves
  // b_1..b_{j-1}, so each new b_n follows from columns that are already known.
  std::vector<std::vector<double>> powers(m + 1, std::vector<double>(m + 1, 0.0));
  CoeffSeries b(m);
  b[1] = 1.0 / a[1];
  powers[1][1] = b[1];
  for (std::size_t n = 2; n <= m; ++n) {
    double rest = 0.0;
    for (std::size_t k = 2; k <= n; ++k) {
      double c = 0.0;
      for (std::size_t i = 1; i + (k - 1) <= n; ++i) c += b[i] * powers[k - 1][n - i];
      powers[k][n] = c;
      rest += a[k] * c;
    }
    b[n] = -rest / a[1];
    powers[1][n] = b[n];
  }
  return b;
}

CoeffSeries abs_series(const CoeffSeries& a) {
  CoeffSeries out(a.order());
  for (std::size_t n = 0; n <= a.order(); ++n) out[n] = std::abs(a[n]);
  return out;
}

RemainderBounds taylor_remainder_check(const CoeffSeries& x,
                                       const CoeffSeries& y,
                                       const CoeffSeries& eps, std::size_t n) {
  require_zero_constant(x, "x");
  require_zero_constant(y, "y");
  require_zero_constant(eps, "eps");
  const std::size_t common = std::min({x.order(), y.order(), eps.order()});
  if (n > common) {
    throw Error(Errc::OrderTooSmall, "coefficient index beyond common order");
  }
  // Coefficient n depends only on entries up to n, so work at order n + 2 to
  // leave room for the two derivatives.
  const std::size_t m = n + 2;
  const CoeffSeries xs = x.resized(n).resized(m);
  const CoeffSeries ys = y.resized(n).resized(m);
  const CoeffSeries es = eps.resized(n).resized(m);

  const CoeffSeries shifted = compose(xs, ys + es);
  const CoeffSeries base = compose(xs, ys);
  const CoeffSeries diff = shifted - base;

  const CoeffSeries xa = abs_series(xs);
  const CoeffSeries majorant_inner = abs_series(ys) + abs_series(es);
  const CoeffSeries ea = abs_series(es);

  const CoeffSeries d1 = derivative(xs, 1);
  const CoeffSeries linear = convolve(compose(d1, ys.resized(d1.order())), es);
  const CoeffSeries rhs1 =
      convolve(compose(derivative(xa, 1), majorant_inner.resized(m - 1)), ea);
  const CoeffSeries rhs2 = convolve(
      convolve(compose(derivative(xa, 2), majorant_inner.resized(m - 2)), ea), ea);

  RemainderBounds r{};
  r.first_order_lhs = std::abs(diff[n]);
  r.first_order_rhs = rhs1[n];
  r.second_order_lhs = std::abs(diff[n] - linear[n]);
  r.second_order_rhs = 0.5 * rhs2[n];
  return r;
}

double max_abs_diff(const CoeffSeries& a, const CoeffSeries& b) {
  const std::size_t m = std::min(a.order(), b.order());
  double d = 0.0;
  for (std::size_t n = 0; n <= m; ++n) d = std::max(d, std::abs(a[n] - b[n]));
  return d;
}

}  // namespace renewal
