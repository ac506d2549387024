#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

namespace poaw {

// Currency and vstakes are held in integer atoms. 1 coin = 10^8 atoms.
using Amount = std::int64_t;
using PublicId = std::uint32_t;
using TxId = std::uint64_t;
using TaskId = std::uint64_t;
using Height = std::uint64_t;

constexpr Amount kAtomsPerCoin = 100'000'000;

// Protocol fractions carried as exact parts-per-billion so percentage
// application is reproducible integer arithmetic, never raw doubles.
struct Fraction {
  std::int64_t num = 0;
  static constexpr std::int64_t kDen = 1'000'000'000;

  bool operator==(const Fraction&) const = default;

  static Fraction from_double(double f) {
    return Fraction{static_cast<std::int64_t>(std::llround(f * static_cast<double>(kDen)))};
  }
  double as_double() const { return static_cast<double>(num) / static_cast<double>(kDen); }
};

inline Amount floor_frac(Amount a, Fraction f) {
  __int128 p = static_cast<__int128>(a) * f.num;
  __int128 q = p / Fraction::kDen;
  if (p % Fraction::kDen != 0 && ((p < 0) != (Fraction::kDen < 0))) --q;
  return static_cast<Amount>(q);
}

// round half away from zero
inline Amount round_frac(Amount a, Fraction f) {
  __int128 p = static_cast<__int128>(a) * f.num;
  __int128 half = Fraction::kDen / 2;
  __int128 q = (p >= 0) ? (p + half) / Fraction::kDen : (p - half) / Fraction::kDen;
  return static_cast<Amount>(q);
}

// Equal split with the remainder assigned to the smallest id.
inline std::map<PublicId, Amount> split_equal(Amount total, const std::vector<PublicId>& ids) {
  std::map<PublicId, Amount> out;
  if (ids.empty() || total <= 0) return out;
  Amount per = total / static_cast<Amount>(ids.size());
  Amount rem = total - per * static_cast<Amount>(ids.size());
  PublicId smallest = ids.front();
  for (PublicId id : ids) {
    if (id < smallest) smallest = id;
    out[id] += per;
  }
  out[smallest] += rem;
  return out;
}

// Proportional split by integer weight, floored, remainder to the smallest id
// among recipients with positive weight. Sum of payouts equals total exactly.
inline std::map<PublicId, Amount> split_proportional(Amount total,
                                                     const std::map<PublicId, Amount>& weights) {
  std::map<PublicId, Amount> out;
  __int128 wsum = 0;
  for (const auto& [id, w] : weights) wsum += w;
  if (wsum <= 0 || total <= 0) return out;
  Amount paid = 0;
  PublicId smallest_positive = 0;
  bool have = false;
  for (const auto& [id, w] : weights) {
    if (w <= 0) continue;
    if (!have || id < smallest_positive) {
      smallest_positive = id;
      have = true;
    }
    Amount share = static_cast<Amount>(static_cast<__int128>(total) * w / wsum);
    out[id] = share;
    paid += share;
  }
  if (have && paid < total) out[smallest_positive] += total - paid;
  return out;
}

}  // namespace poaw
