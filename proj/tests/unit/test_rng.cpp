#include <doctest.h>

#include <cmath>
#include <set>

#include "condensate/rng.hpp"

using namespace condensate;

TEST_CASE("streams are deterministic and addressable by counter") {
  Stream a = Stream::substream(42, 7);
  Stream b = Stream::substream(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Stream c(a.key());
  CHECK(c.next_u64() == mix64(a.key() + Stream::kGolden));
}

TEST_CASE("substreams and splits differ") {
  std::set<std::uint64_t> keys;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    for (std::uint64_t i = 0; i < 256; ++i) keys.insert(Stream::substream(seed, i).key());
  }
  CHECK(keys.size() == 8 * 256);
  const Stream s = Stream::substream(1, 1);
  CHECK(s.split(1).key() != s.split(2).key());
  CHECK(s.split(1).key() != s.key());
}

TEST_CASE("uniform and normal moments") {
  Stream rng = Stream::substream(3, 0);
  const int n = 200000;
  double su = 0.0;
  double sn = 0.0;
  double sn2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK_MESSAGE((u > 0.0 && u < 1.0), "uniform out of range");
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(std::abs(su / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(sn / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(sn2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("truncated normal tail sampler") {
  Stream rng = Stream::substream(5, 0);
  const int n = 100000;

  // Lower bound 3: oracle mean phi(3) / Q(3) from erfc, variance 1 + a m - m^2.
  {
    const double a = 3.0;
    const double density = std::exp(-0.5 * a * a) / std::sqrt(2.0 * M_PI);
    const double tail = 0.5 * std::erfc(a / std::sqrt(2.0));
    const double mean = density / tail;
    const double var = 1.0 + a * mean - mean * mean;
    double s = 0.0;
    double lo = 1e300;
    for (int i = 0; i < n; ++i) {
      const double z = truncated_normal_lower(rng, a);
      s += z;
      lo = std::min(lo, z);
    }
    CHECK(lo >= a);
    CHECK(std::abs(s / n - mean) < 4.0 * std::sqrt(var / n));
  }
  // Far tail: asymptotic series of the inverse Mills ratio, a + 1/a - 2/a^3.
  {
    const double a = 50.0;
    const double mean = a + 1.0 / a - 2.0 / (a * a * a);
    const double var = 1.0 / (a * a);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double z = truncated_normal_lower(rng, a);
      REQUIRE(z >= a);
      s += z;
    }
    CHECK(std::abs(s / n - mean) < 4.0 * std::sqrt(var / n));
  }
}
