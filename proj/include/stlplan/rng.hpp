#pragma once

// Deterministic keyed randomness. Every draw site builds its key from the run
// seed plus a purpose tag and the loop indices that identify the draw, so two
// agents that have diverged in local bookkeeping still read identical values
// for shared draws, and no stream can desync. Doubles come from the raw engine
// output via the usual (x >> 11) * 2^-53 mapping; uniform_real_distribution is
// implementation-defined and would break byte-level reproducibility.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace stlplan {

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class RngKey {
public:
  explicit RngKey(std::uint64_t seed) : h_(splitmix64(seed ^ 0x5b4c6f21d3a9e8f7ull)) {}

  RngKey with(std::uint64_t v) const {
    RngKey k = *this;
    k.h_ = splitmix64(k.h_ ^ v);
    return k;
  }
  RngKey with(std::string_view tag) const {
    RngKey k = *this;
    for (unsigned char c : tag) k.h_ = splitmix64(k.h_ ^ c);
    return k;
  }
  std::uint64_t value() const { return h_; }

private:
  std::uint64_t h_;
};

class Rng {
public:
  explicit Rng(const RngKey& key) : eng_(key.value()) {}

  double u01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  // Uniform point in a box; lo/hi must have equal sizes.
  std::vector<double> box(std::span<const double> lo, std::span<const double> hi) {
    std::vector<double> p(lo.size());
    for (size_t i = 0; i < lo.size(); ++i) p[i] = uniform(lo[i], hi[i]);
    return p;
  }

  // Index in [0, n).
  size_t pick(size_t n) { return static_cast<size_t>(u01() * static_cast<double>(n)) % n; }

private:
  std::mt19937_64 eng_;
};

}  // namespace stlplan
