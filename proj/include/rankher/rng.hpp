#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rankher {

// Named deterministic random streams. One master seed derives independent
// streams ("env", "action-noise", "her", "replay", "init", ...) so that two
// runs sharing a master seed see identical environment draws even when the
// algorithm arms consume their own streams differently.
//
// All floating-point draws are synthesized from raw mt19937_64 output here
// rather than through std::*_distribution, so the byte stream depends only on
// the seed, not on the standard library version.
class RngStream {
 public:
  explicit RngStream(std::uint64_t raw_seed) : gen_(raw_seed) {}

  RngStream(std::uint64_t master_seed, std::string_view stream_name)
      : gen_(derive_seed(master_seed, stream_name)) {}

  // in [0, 1)
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller, no cached second value.
  double gaussian(double mean, double stddev) {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // in [0, n), unbiased via rejection
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  std::uint64_t raw() { return gen_(); }

  static std::uint64_t derive_seed(std::uint64_t master, std::string_view name) {
    // FNV-1a over the stream name, then splitmix64-style finalization.
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : name) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (h | 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace rankher
