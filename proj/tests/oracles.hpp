#pragma once

// Independent reference implementations used to check the library. These
// deliberately avoid the code paths they verify.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "poaw/competition.hpp"
#include "poaw/pools.hpp"
#include "poaw/task.hpp"

namespace oracle {

// 0/1 knapsack by dynamic programming over weight.
inline poaw::Amount knapsack_best(const std::vector<poaw::KnapsackItem>& items,
                                  poaw::Amount capacity) {
  std::vector<poaw::Amount> best(static_cast<std::size_t>(capacity) + 1, 0);
  for (const auto& it : items) {
    for (poaw::Amount w = capacity; w >= it.weight; --w)
      best[static_cast<std::size_t>(w)] =
          std::max(best[static_cast<std::size_t>(w)],
                   best[static_cast<std::size_t>(w - it.weight)] + it.value);
  }
  return best[static_cast<std::size_t>(capacity)];
}

// Max clique by recursive branch and bound.
inline void clique_rec(const poaw::MaxCliqueSpec& g, std::uint64_t candidates,
                       std::uint32_t size, std::uint32_t& best) {
  if (size + static_cast<std::uint32_t>(__builtin_popcountll(candidates)) <= best) return;
  if (candidates == 0) {
    best = std::max(best, size);
    return;
  }
  std::uint64_t rest = candidates;
  while (rest) {
    std::uint32_t v = static_cast<std::uint32_t>(__builtin_ctzll(rest));
    rest &= rest - 1;
    if (size + static_cast<std::uint32_t>(__builtin_popcountll(candidates)) <= best) return;
    clique_rec(g, candidates & g.adjacency[v] & ~((1ULL << (v + 1)) - 1), size + 1, best);
    candidates &= ~(1ULL << v);
  }
}

inline std::uint32_t clique_best(const poaw::MaxCliqueSpec& g) {
  std::uint32_t best = 0;
  std::uint64_t all = g.vertices == 64 ? ~0ULL : ((1ULL << g.vertices) - 1);
  clique_rec(g, all, 0, best);
  return best;
}

// Phase from first principles: explicit interval arithmetic.
inline poaw::Phase phase_interval(poaw::Height stored, std::uint64_t nb_freeze,
                                  std::uint64_t nb_compete, std::uint64_t nb_validate,
                                  poaw::Height h) {
  if (h < stored) return poaw::Phase::Store;
  if (h >= stored && h < stored + nb_freeze) return poaw::Phase::Freeze;
  if (h >= stored + nb_freeze && h < stored + nb_freeze + nb_compete)
    return poaw::Phase::Compete;
  if (h >= stored + nb_freeze + nb_compete &&
      h < stored + nb_freeze + nb_compete + nb_validate)
    return poaw::Phase::Validate;
  return poaw::Phase::Seal;
}

// Reference winner: argbest score over consensus-valid solves, earliest block
// first, all equal-score solves of that block win.
struct WinnerOracleEntry {
  poaw::TxId tx = 0;
  poaw::Height height = 0;
  double score = 0.0;
  bool consensus_valid = false;
};

inline std::vector<poaw::TxId> winner_oracle(poaw::Objective obj,
                                             const std::vector<WinnerOracleEntry>& entries) {
  const WinnerOracleEntry* best = nullptr;
  for (const auto& e : entries) {
    if (!e.consensus_valid) continue;
    if (best == nullptr) {
      best = &e;
      continue;
    }
    bool better = obj == poaw::Objective::Maximize ? e.score > best->score + 1e-12
                                                   : e.score < best->score - 1e-12;
    bool equal = std::llround(e.score * 1e9) == std::llround(best->score * 1e9);
    if (better || (equal && e.height < best->height)) best = &e;
  }
  std::vector<poaw::TxId> winners;
  if (best == nullptr) return winners;
  for (const auto& e : entries) {
    if (!e.consensus_valid || e.height != best->height) continue;
    if (std::llround(e.score * 1e9) != std::llround(best->score * 1e9)) continue;
    winners.push_back(e.tx);
  }
  return winners;
}

// The weight-allocation pass written from the algorithm text: per-block
// weights are winning-solve counts, each win contributes its share to the
// distributable sum, block k receives floor(|w_k| * sum / W_t), and the
// rounding remainder lands on the earliest weighted block.
inline std::map<poaw::Height, poaw::Amount> allocation_oracle(
    const std::vector<poaw::BlockWins>& blocks, poaw::Amount carry) {
  poaw::Amount sum = carry;
  long double total_weight = 0;
  for (const auto& b : blocks) {
    for (poaw::Amount s : b.win_shares) sum += s;
    total_weight += static_cast<long double>(b.win_shares.size());
  }
  std::map<poaw::Height, poaw::Amount> out;
  if (total_weight == 0) return out;
  std::vector<poaw::Height> heights;
  for (const auto& b : blocks)
    if (!b.win_shares.empty()) heights.push_back(b.height);
  std::sort(heights.begin(), heights.end());
  poaw::Amount paid = 0;
  for (const auto& b : blocks) {
    if (b.win_shares.empty()) continue;
    poaw::Amount profit = static_cast<poaw::Amount>(
        (static_cast<__int128>(b.win_shares.size()) * sum) /
        static_cast<__int128>(static_cast<poaw::Amount>(total_weight)));
    out[b.height] += profit;
    paid += profit;
  }
  if (paid < sum) out[heights.front()] += sum - paid;
  return out;
}

// Upper chi-square quantile via the Wilson-Hilferty transform.
inline double chi2_quantile(double df, double z_upper) {
  double a = 2.0 / (9.0 * df);
  double v = 1.0 - a + z_upper * std::sqrt(a);
  return df * v * v * v;
}

constexpr double kZ99 = 2.326347874040841;  // standard normal 0.99 quantile

}  // namespace oracle
