#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace batchqa {

// xoshiro256** seeded through SplitMix64. The output stream is fully
// specified by the seed, independent of platform and standard library, so
// groups and manifests are reproducible across builds and ports.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent substream derived from a base seed and a list of tags
  // (e.g. group size, hashed transcript id).
  static Rng for_stream(std::uint64_t seed,
                        std::initializer_list<std::uint64_t> tags);

  // Raw state, for reproducing published reference vectors.
  static Rng from_state(const std::array<std::uint64_t, 4>& state);

  std::uint64_t next();

  // Uniform integer in [0, bound). bound must be > 0. Rejection sampling, no
  // modulo bias.
  std::uint64_t below(std::uint64_t bound);

  // Uniform integer in [lo, hi], lo <= hi.
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  // Uniform double in [0, 1) with 53 bits of precision.
  double unit();

  bool bernoulli(double p) { return unit() < p; }

  // k distinct indices from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  Rng() = default;

  std::array<std::uint64_t, 4> state_{};
};

std::uint64_t splitmix64(std::uint64_t x);

// 64-bit FNV-1a; used for stream tags and content keys.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace batchqa
