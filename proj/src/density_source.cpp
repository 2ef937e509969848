#include "jitter/density_source.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jitter {

double
DensitySource::density(std::span<const double> point) const
{
  std::vector<std::size_t> all(dim());
  std::iota(all.begin(), all.end(), std::size_t{ 0 });
  return density(point, all);
}

std::vector<double>
integer_kink_hints(double lo, double hi, double gamma1, double gamma2)
{
  std::vector<double> out;
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
    return out;
  const auto first = static_cast<long>(std::floor(lo)) - 1;
  const auto last = static_cast<long>(std::ceil(hi)) + 1;
  for (long k = first; k <= last; ++k) {
    const auto kd = static_cast<double>(k);
    for (double x : { kd - gamma2, kd - gamma1, kd, kd + gamma1, kd + gamma2 }) {
      if (x >= lo && x <= hi)
        out.push_back(x);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

} // namespace jitter
