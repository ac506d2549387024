#include "poaw/pools.hpp"

#include <algorithm>

namespace poaw {

AllocationResult main_chain_weight_allocation(const std::vector<BlockWins>& blocks,
                                              Amount released_carry) {
  AllocationResult result;
  Amount sum = released_carry;
  Amount total_weight = 0;
  for (const BlockWins& b : blocks) {
    for (Amount s : b.win_shares) sum += s;
    total_weight += static_cast<Amount>(b.win_shares.size());
  }
  if (total_weight == 0) return result;

  std::vector<const BlockWins*> ordered;
  ordered.reserve(blocks.size());
  for (const BlockWins& b : blocks) ordered.push_back(&b);
  std::sort(ordered.begin(), ordered.end(),
            [](const BlockWins* a, const BlockWins* b) { return a->height < b->height; });

  Amount paid = 0;
  const BlockWins* earliest_weighted = nullptr;
  for (const BlockWins* b : ordered) {
    Amount w = static_cast<Amount>(b->win_shares.size());
    if (w == 0) continue;
    if (earliest_weighted == nullptr) earliest_weighted = b;
    Amount profit = static_cast<Amount>(static_cast<__int128>(w) * sum / total_weight);
    result.profits_by_block[b->height] += profit;
    paid += profit;
  }
  if (paid < sum && earliest_weighted != nullptr) {
    result.profits_by_block[earliest_weighted->height] += sum - paid;
    paid = sum;
  }
  result.paid = paid;
  return result;
}

Amount derive_sm_pool(Amount storage_payment_to_pow, Fraction p_sm_pool) {
  return floor_frac(storage_payment_to_pow, p_sm_pool);
}

Amount PoolLedger::main_balance() const {
  Amount b = main_available;
  for (const auto& c : main_credits)
    if (!c.counted) b += c.credit;
  return b;
}

Amount PoolLedger::storage_balance() const {
  Amount b = storage_available;
  for (const auto& e : storage_pending) b += e.amount;
  return b;
}

void PoolLedger::credit_main(TaskId task, Amount amount, Height payable_after, std::uint32_t n_w,
                             std::vector<std::pair<Height, TxId>> win_positions) {
  main_credits.push_back(
      SealedTaskCredit{task, amount, payable_after, n_w, std::move(win_positions), false});
}

void PoolLedger::credit_storage(TaskId task, Amount amount, Height payable_after) {
  storage_pending.push_back(PoolEntry{amount, payable_after, task});
}

WindowReport PoolLedger::close_window(Height end_height, const ProtocolParams& params) {
  WindowReport report;
  report.window_start = window_start;
  report.window_end = end_height;

  // ---- pool 1: main chain ----
  // The carry released this window is whatever was cleared earlier but not
  // distributed (held halves and rounding dust).
  const Amount released_carry = main_available;
  std::map<Height, std::vector<Amount>> shares_by_block;
  for (SealedTaskCredit& c : main_credits) {
    if (c.counted || c.payable_after > end_height) continue;
    c.counted = true;
    main_available += c.credit;
    Amount half = floor_frac(c.credit, params.pf_half_frac());
    Amount per_win = half / static_cast<Amount>(c.n_w);
    for (const auto& [h, tx] : c.win_positions) shares_by_block[h].push_back(per_win);
  }
  std::vector<BlockWins> blocks;
  for (auto& [h, shares] : shares_by_block) {
    auto it = signer_by_height.find(h);
    PublicId signer = (it != signer_by_height.end()) ? it->second : 0;
    blocks.push_back(BlockWins{h, signer, std::move(shares)});
  }
  AllocationResult alloc = main_chain_weight_allocation(blocks, released_carry);
  if (alloc.paid > 0) {
    main_available -= alloc.paid;
    for (const BlockWins& b : blocks) {
      auto pit = alloc.profits_by_block.find(b.height);
      if (pit == alloc.profits_by_block.end() || pit->second == 0) continue;
      report.payouts.push_back(PoolPayout{b.signer, pit->second, 1});
    }
    report.main_paid = alloc.paid;
  }

  // ---- pool 2: storage ----
  for (auto it = storage_pending.begin(); it != storage_pending.end();) {
    if (it->payable_after <= end_height) {
      storage_available += it->amount;
      it = storage_pending.erase(it);
    } else {
      ++it;
    }
  }
  if (!service_units.empty() && storage_available > 0) {
    auto payouts = split_proportional(storage_available, service_units);
    for (const auto& [id, amt] : payouts) {
      if (amt == 0) continue;
      report.payouts.push_back(PoolPayout{id, amt, 2});
      report.storage_paid += amt;
    }
    storage_available -= report.storage_paid;
  }

  // ---- pool 3: storage-main interaction ----
  if (!storage_tx_counts.empty() && sm_available > 0) {
    auto payouts = split_proportional(sm_available, storage_tx_counts);
    for (const auto& [id, amt] : payouts) {
      if (amt == 0) continue;
      report.payouts.push_back(PoolPayout{id, amt, 3});
      report.sm_paid += amt;
    }
    sm_available -= report.sm_paid;
  }

  std::erase_if(main_credits, [](const SealedTaskCredit& c) { return c.counted; });
  service_units.clear();
  storage_tx_counts.clear();
  window_start = end_height + 1;
  return report;
}

}  // namespace poaw
