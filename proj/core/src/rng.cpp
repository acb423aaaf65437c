#include "condensate/rng.hpp"

#include <cmath>
#include <numbers>

namespace condensate {

double Stream::normal() noexcept {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

double Stream::exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

double truncated_normal_lower(Stream& rng, double lower) noexcept {
  if (lower <= 0.0) {
    while (true) {
      const double z = rng.normal();
      if (z >= lower) return z;
    }
  }
  const double rate = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
  while (true) {
    const double z = lower + rng.exponential(rate);
    const double delta = z - rate;
    if (rng.uniform() <= std::exp(-0.5 * delta * delta)) return z;
  }
}

}  // namespace condensate
