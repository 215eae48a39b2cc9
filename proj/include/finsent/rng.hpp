#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Deterministic hashing and pseudo-randomness. Everything here is fixed
// bit-for-bit across platforms and standard libraries; std::hash and the
// stdlib distributions are implementation-defined and must not leak into
// any output the pipeline promises to reproduce byte-identically.

namespace finsent {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Finalizer of the splitmix64 generator; a bijection on 64-bit values.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Injective per-index seed derivation: i * kGolden is a bijection mod 2^64
// (kGolden is odd) and splitmix64 is a bijection, so distinct indices give
// distinct seeds for any fixed base.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base + (index + 1) * kGolden);
}

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t seed = 0xCBF29CE484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

// Counter-based generator: the n-th draw is splitmix64(key + n*kGolden),
// so a stream is a pure function of its key.
class DetRng {
 public:
  explicit DetRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return splitmix64(key_ + (counter_++) * kGolden); }

  // Uniform in [0, bound). Rejection-free modulo is fine here: bounds are
  // tiny (dataset sizes), bias is < 2^-40.
  std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [lo, hi).
  double next_double(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Fisher-Yates; deterministic for a given key and call sequence.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace finsent
