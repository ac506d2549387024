#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "poaw/digest.hpp"

namespace poaw {

// xoshiro256** seeded through splitmix64. The standard library engines are
// portable but its distributions are not, so bounded draws are done here.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) { seed_from(seed); }

  explicit DetRng(const Digest& seed) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | seed[static_cast<std::size_t>(i)];
    std::uint64_t w = 0;
    for (int i = 8; i < 16; ++i) w = (w << 8) | seed[static_cast<std::size_t>(i)];
    seed_from(v ^ (w * 0x9E3779B97F4A7C15ULL));
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in [0, n); n must be > 0
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // uniform double in [0, 1) with 53 bits
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

  std::int64_t range_i64(std::int64_t lo, std::int64_t hi) {  // inclusive
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // k distinct values from [0, n), order as drawn (partial Fisher-Yates)
  std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n, std::size_t k) {
    std::vector<std::uint64_t> out;
    out.reserve(k);
    std::unordered_map<std::uint64_t, std::uint64_t> displaced;
    for (std::size_t i = 0; i < k; ++i) {
      std::uint64_t top = n - i;
      std::uint64_t j = below(top);
      auto jt = displaced.find(j);
      std::uint64_t pick = (jt == displaced.end()) ? j : jt->second;
      std::uint64_t last = top - 1;
      auto lt = displaced.find(last);
      displaced[j] = (lt == displaced.end()) ? last : lt->second;
      out.push_back(pick);
    }
    return out;
  }

  DetRng fork(std::uint64_t tag) {
    return DetRng(next() ^ (tag * 0xBF58476D1CE4E5B9ULL) ^ 0x94D049BB133111EBULL);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  void seed_from(std::uint64_t s) {
    for (auto& lane : s_) {
      s += 0x9E3779B97F4A7C15ULL;
      std::uint64_t z = s;
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
      lane = z ^ (z >> 31);
    }
  }

  std::uint64_t s_[4];
};

}  // namespace poaw
