#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace souschef::rng {

// 64-bit FNV-1a. Used wherever a hash must be identical across platforms
// and standard-library versions (std::hash gives no such guarantee).
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// mt19937_64 has a standardized output sequence, but the std <random>
// distributions do not. This wrapper draws raw engine words and maps them
// itself so seeded runs reproduce bit-for-bit everywhere.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform index in [0, n). n must be > 0.
  std::size_t next_index(std::size_t n) {
    return static_cast<std::size_t>(next_double() * static_cast<double>(n)) % n;
  }

  // Standard normal via Box-Muller on the deterministic uniforms.
  double next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace souschef::rng
