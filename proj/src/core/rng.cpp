#include "reprobench/rng.hpp"

#include <cmath>
#include <numbers>

namespace reprobench {

double CounterRng::next_gaussian() noexcept {
  const double u1 = next_open_closed();
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace reprobench
