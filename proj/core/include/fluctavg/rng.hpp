#pragma once

#include <cstdint>
#include <limits>

namespace fluctavg {

// Counter-based generator used for all sampling. Every matrix entry owns an
// independent stream keyed by (seed, tag, round, i, j), so a single row can be
// redrawn later without touching the rest of the matrix and without storing
// any generator state.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  SplitMix64 mix(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
  return mix();
}

// Stream key for entry (i, j) of a sample; `tag` separates base draws from
// resampling rounds, `round` enumerates redraws.
inline std::uint64_t entry_stream(std::uint64_t seed, std::uint64_t tag,
                                  std::uint64_t round, std::uint64_t i,
                                  std::uint64_t j) {
  std::uint64_t h = seed;
  h = hash_combine(h, tag);
  h = hash_combine(h, round);
  h = hash_combine(h, i);
  h = hash_combine(h, j);
  return h;
}

}  // namespace fluctavg
