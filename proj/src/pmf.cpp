#include "renewal/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "renewal/error.hpp"
#include "renewal/special.hpp"

namespace renewal {

Pmf::Pmf(int min_support_, std::vector<double> probs_, double tail_mass_)
    : min_support(min_support_), probs(std::move(probs_)), tail_mass(tail_mass_) {
  if (min_support != 0 && min_support != 1) {
    throw Error(Errc::InvalidArgument, "pmf support must start at 0 or 1");
  }
  if (!(tail_mass >= 0.0) || !std::isfinite(tail_mass)) {
    throw Error(Errc::InvalidArgument, "tail mass must be finite and >= 0");
  }
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0) || !std::isfinite(probs[i])) {
      throw Error(Errc::InvalidArgument,
                  "pmf entry " + std::to_string(i + min_support) + " is invalid");
    }
  }
  const double t = total();
  if (std::abs(t - 1.0) > kPmfNormTol) {
    throw Error(Errc::InvalidArgument,
                "pmf total " + std::to_string(t) + " is not 1");
  }
}

Pmf Pmf::point_mass(int k, int min_support) {
  if (k < min_support) throw Error(Errc::InvalidArgument, "point mass below support");
  std::vector<double> p(static_cast<std::size_t>(k - min_support + 1), 0.0);
  p.back() = 1.0;
  return Pmf(min_support, std::move(p));
}

double Pmf::total() const noexcept {
  CompensatedSum s;
  for (double p : probs) s.add(p);
  s.add(tail_mass);
  return s.value();
}

double Pmf::survival(std::int64_t k) const noexcept {
  if (k > max_support()) return tail_mass;
  CompensatedSum s;
  s.add(tail_mass);
  for (std::int64_t j = max_support(); j >= std::max<std::int64_t>(k, min_support); --j) {
    s.add((*this)(j));
  }
  return s.value();
}

}  // namespace renewal
