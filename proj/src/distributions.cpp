#include "renewal/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "renewal/error.hpp"
#include "renewal/special.hpp"

namespace renewal {

namespace {

constexpr std::int64_t kParetoTable = 1000000;

// S[k-1] = P(W >= k) for k = 1..kParetoTable+1.
std::shared_ptr<const std::vector<double>> pareto_survival_table(double alpha) {
  static std::mutex mu;
  static std::map<double, std::shared_ptr<const std::vector<double>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(alpha);
  if (it != cache.end()) return it->second;
  const double s = alpha + 1.0;
  const double z = riemann_zeta(s);
  auto table = std::make_shared<std::vector<double>>(kParetoTable + 1);
  auto& t = *table;
  t[kParetoTable] = hurwitz_zeta(s, static_cast<double>(kParetoTable + 1)) / z;
  for (std::int64_t k = kParetoTable; k >= 1; --k) {
    t[k - 1] = t[k] + std::pow(static_cast<double>(k), -s) / z;
  }
  t[0] = 1.0;
  cache.emplace(alpha, table);
  return table;
}

std::int64_t pareto_tail_sample(double alpha, double zeta, double u) {
  // Largest k > kParetoTable with P(W >= k) >= u.
  const auto surv = [&](std::int64_t k) {
    return hurwitz_zeta(alpha + 1.0, static_cast<double>(k)) / zeta;
  };
  std::int64_t lo = kParetoTable + 1;  // surv(lo) >= u
  std::int64_t hi = lo * 2;
  while (surv(hi) >= u) {
    lo = hi;
    if (hi > kUnbounded / 4) return hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (surv(mid) >= u ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

SizeDistribution::SizeDistribution(Geometric g) : kind_(g) {
  if (!(g.c > 0.0 && g.c < 1.0)) {
    throw Error(Errc::InvalidArgument, "geometric parameter c must lie in (0,1)");
  }
}

SizeDistribution::SizeDistribution(DiscretePareto p) : kind_(p) {
  if (!(p.alpha > 0.0) || !std::isfinite(p.alpha)) {
    throw Error(Errc::InvalidArgument, "Pareto alpha must be > 0");
  }
  zeta_ = riemann_zeta(p.alpha + 1.0);
}

SizeDistribution::SizeDistribution(Pmf p) : kind_(std::move(p)) {
  const Pmf& f = std::get<Pmf>(kind_);
  if (f(0) > 0.0) throw Error(Errc::InvalidArgument, "size pmf puts mass on 0");
  auto cdf = std::make_shared<std::vector<double>>();
  double acc = 0.0;
  for (std::int64_t w = 1; w <= f.max_support(); ++w) {
    acc += f(w);
    cdf->push_back(acc);
  }
  cdf_ = std::move(cdf);
}

double SizeDistribution::pmf(std::int64_t w) const {
  if (w < 1) return 0.0;
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Geometric>) {
          return std::pow(d.c, static_cast<double>(w - 1)) * (1.0 - d.c);
        } else if constexpr (std::is_same_v<T, DiscretePareto>) {
          return std::pow(static_cast<double>(w), -d.alpha - 1.0) / zeta_;
        } else {
          return d(w);
        }
      },
      kind_);
}

double SizeDistribution::survival(std::int64_t w) const {
  if (w <= 1) return 1.0;
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Geometric>) {
          return std::pow(d.c, static_cast<double>(w - 1));
        } else if constexpr (std::is_same_v<T, DiscretePareto>) {
          return hurwitz_zeta(d.alpha + 1.0, static_cast<double>(w)) / zeta_;
        } else {
          return d.survival(w);
        }
      },
      kind_);
}

std::int64_t SizeDistribution::max_support() const noexcept {
  if (const Pmf* p = std::get_if<Pmf>(&kind_)) {
    return p->tail_mass > 0.0 ? kUnbounded : p->max_support();
  }
  return kUnbounded;
}

std::int64_t SizeDistribution::sample(Engine& e) const {
  const double u = uniform_open(e);
  return std::visit(
      [&](const auto& d) -> std::int64_t {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Geometric>) {
          return 1 + static_cast<std::int64_t>(std::floor(std::log(u) / std::log(d.c)));
        } else if constexpr (std::is_same_v<T, DiscretePareto>) {
          const auto table = pareto_survival_table(d.alpha);
          const auto& t = *table;
          if (u <= t.back()) return pareto_tail_sample(d.alpha, zeta_, u);
          // First position with P(W >= k) < u; the sample is the one before.
          const auto it = std::partition_point(t.begin(), t.end(),
                                               [&](double v) { return v >= u; });
          return static_cast<std::int64_t>(it - t.begin());
        } else {
          if (d.tail_mass > 1e-12) {
            throw Error(Errc::InvalidArgument, "cannot sample a pmf with tail mass");
          }
          const auto& c = *cdf_;
          const auto it = std::lower_bound(c.begin(), c.end(), u);
          if (it == c.end()) return d.max_support();
          return static_cast<std::int64_t>(it - c.begin()) + 1;
        }
      },
      kind_);
}

Pmf SizeDistribution::truncated(std::int64_t w_max) const {
  if (w_max < 1) throw Error(Errc::InvalidArgument, "w_max must be >= 1");
  std::vector<double> p(static_cast<std::size_t>(w_max));
  for (std::int64_t w = 1; w <= w_max; ++w) p[static_cast<std::size_t>(w - 1)] = pmf(w);
  const double tail = std::max(0.0, survival(w_max + 1));
  // Renormalize rounding so the Pmf invariant holds exactly.
  double total = tail;
  for (double v : p) total += v;
  for (double& v : p) v /= total;
  return Pmf(1, std::move(p), tail / total);
}

std::string SizeDistribution::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Geometric>) {
          os << "geometric:" << d.c;
        } else if constexpr (std::is_same_v<T, DiscretePareto>) {
          os << "pareto:" << d.alpha;
        } else {
          os << "pmf:";
          for (std::int64_t w = 1; w <= d.max_support(); ++w) {
            os << (w > 1 ? "," : "") << d(w);
          }
        }
      },
      kind_);
  return os.str();
}

GapDistribution::GapDistribution(Exponential e) : kind_(e) {
  if (!(e.rate > 0.0) || !std::isfinite(e.rate)) {
    throw Error(Errc::InvalidArgument, "exponential rate must be > 0");
  }
}

GapDistribution::GapDistribution(GridCdf f) : kind_(std::move(f)) {
  const GridCdf& g = std::get<GridCdf>(kind_);
  if (g.values.empty() || g.values.front() < 0.0 ||
      monotonicity_violations(g, 0.0) > 0 || std::abs(g.values.back() - 1.0) > 1e-6) {
    throw Error(Errc::InvalidArgument, "gap CDF must be nondecreasing from >= 0 to 1");
  }
}

double GapDistribution::cdf(double t) const {
  if (t <= 0.0) return 0.0;
  if (const auto* e = std::get_if<Exponential>(&kind_)) return -std::expm1(-e->rate * t);
  const GridCdf& g = std::get<GridCdf>(kind_);
  const double pos = t / g.grid.step;
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= g.size()) return g.values.back();
  const double frac = pos - static_cast<double>(i);
  return g.values[i] + frac * (g.values[i + 1] - g.values[i]);
}

double GapDistribution::sample(Engine& e) const {
  const double u = uniform_open(e);
  if (const auto* x = std::get_if<Exponential>(&kind_)) return -std::log(u) / x->rate;
  const GridCdf& g = std::get<GridCdf>(kind_);
  const auto it = std::lower_bound(g.values.begin(), g.values.end(), u);
  if (it == g.values.end()) return g.grid.t_max;
  const auto i = static_cast<std::size_t>(it - g.values.begin());
  if (i == 0) return 0.5 * g.grid.step * u / g.values[0];
  const double lo = g.values[i - 1];
  const double frac = (u - lo) / (g.values[i] - lo);
  return g.t(i - 1) + frac * g.grid.step;
}

GridCdf GapDistribution::on_grid(Grid g) const {
  return GridCdf::from_function(g, [&](double t) { return cdf(t); });
}

std::string GapDistribution::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (const auto* e = std::get_if<Exponential>(&kind_)) {
    os << "exp:" << e->rate;
  } else {
    const GridCdf& g = std::get<GridCdf>(kind_);
    os << "grid:" << g.grid.t_max << ":" << g.grid.step;
  }
  return os.str();
}

void ModelSpec::validate() const {
  if (!(q > 0.0 && q < 1.0)) {
    throw Error(Errc::InvalidArgument, "sampling probability q must lie in (0,1)");
  }
}

}  // namespace renewal
