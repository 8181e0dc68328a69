#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace vlcot {

// Deterministic RNG used everywhere seeds appear. All distributions are
// hand-rolled on top of splitmix64 so streams are identical across
// platforms and standard-library versions (std::uniform_*_distribution and
// std::shuffle are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). n must be > 0. Multiply-shift; bias is O(n / 2^64).
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Uniform double in [0, 1), 53 bits of precision.
  double uniform_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi).
  double uniform_double(double lo, double hi) { return lo + (hi - lo) * uniform_double(); }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// FNV-1a over bytes, used for content-derived ids and per-record seed derivation.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Per-record seed: hash(global_seed, key) so parallel schedules cannot
// influence any sampled value.
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view key) {
  std::uint64_t h = fnv1a64(key);
  h ^= global_seed + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  // one splitmix64 round to decorrelate nearby seeds
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view key,
                                 std::uint64_t index) {
  return derive_seed(global_seed ^ (index * 0xd1342543de82ef95ULL + 1), key);
}

}  // namespace vlcot
