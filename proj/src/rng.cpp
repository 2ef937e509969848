#include "jitter/rng.hpp"

#include <cmath>
#include <numbers>

namespace jitter {

double
RandomStream::normal()
{
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace jitter
