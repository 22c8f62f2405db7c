#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>
#include <vector>

namespace ppcate {

// Counter-based 64-bit generator (splitmix64). The output stream is a pure
// function of the seed, so runs are reproducible across platforms and the
// distributional protocol below can be re-implemented in other languages:
//
//   u64:        s += 0x9E3779B97F4A7C15; z = mix(s)        (splitmix64 step)
//   uniform01:  top 53 bits of u64, scaled by 2^-53        -> [0, 1)
//   uniform:    a + u * (b - a)
//   normal:     Box-Muller, exactly two uniforms per draw:
//               sqrt(-2 ln(1-u1)) * cos(2 pi u2)
//   bernoulli:  uniform01() < p
//   uniform_int(m): floor(uniform01() * m)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + uniform01() * (b - a); }

  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform01() < p; }

  // In [0, bound). Negligible bias for bound far below 2^53.
  int uniform_int(int bound) {
    const int v = static_cast<int>(uniform01() * static_cast<double>(bound));
    return v >= bound ? bound - 1 : v;
  }

  // n uniform draws from [0, n), i.e. a bootstrap resample of row indices.
  std::vector<int> sample_with_replacement(int n, int count) {
    std::vector<int> idx(static_cast<std::size_t>(count));
    for (auto& v : idx) v = uniform_int(n);
    return idx;
  }

  // Fisher-Yates.
  void shuffle(std::vector<int>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      const int j = uniform_int(i + 1);
      std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
    }
  }

 private:
  std::uint64_t state_;
};

// One splitmix64 step (increment + finalizer). Bijective on uint64.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Labeled sub-seed derivation: every consumer of randomness hashes a label
// (e.g. "bootstrap", "cv-prune") and an index into the master seed, so
// adding a new randomized stage never perturbs existing streams.
//
// Each component passes through a full mix64 round before the next is folded
// in; combining by bare xor/add instead would let nearby (master, index)
// pairs alias each other (e.g. master 1 / index 5 vs master 2 / index 4).
//
//   seed = mix64(mix64(mix64(master) ^ fnv1a(label)) ^ index)
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t index = 0) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a over the label bytes
  for (const char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  std::uint64_t z = mix64(master);
  z = mix64(z ^ h);
  z = mix64(z ^ index);
  return z;
}

}  // namespace ppcate
