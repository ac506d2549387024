#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "poaw/money.hpp"
#include "poaw/params.hpp"

namespace poaw {

struct PoolEntry {
  Amount amount = 0;
  Height payable_after = 0;
  TaskId task = 0;

  bool operator==(const PoolEntry&) const = default;
};

// Main-chain pool bookkeeping for one sealed competition. The credit clears
// at payable_after; its wins are counted into the first window that closes
// at or after that point.
struct SealedTaskCredit {
  TaskId task = 0;
  Amount credit = 0;
  Height payable_after = 0;
  std::uint32_t n_w = 1;
  std::vector<std::pair<Height, TxId>> win_positions;
  bool counted = false;

  bool operator==(const SealedTaskCredit&) const = default;
};

struct WorkRecord {
  Height height = 0;
  PublicId signer = 0;
  std::vector<TxId> winning_solve_refs;
  std::map<PublicId, Amount> storage_service_units;

  bool operator==(const WorkRecord&) const = default;
};

// Input to the weight-allocation pass: one entry per block that has wins
// countable in this window (including deferred wins from earlier blocks).
struct BlockWins {
  Height height = 0;
  PublicId signer = 0;
  std::vector<Amount> win_shares;
};

struct AllocationResult {
  std::map<Height, Amount> profits_by_block;
  Amount paid = 0;
};

// Per-block weight = number of winning solves in the block; every block is
// paid floor(|w_k| * sum / W_t) where sum covers the per-win shares plus the
// released carry, and the rounding remainder goes to the earliest weighted
// block. paid == sum exactly whenever W_t > 0.
AllocationResult main_chain_weight_allocation(const std::vector<BlockWins>& blocks,
                                              Amount released_carry);

// floor(p_sm_pool * payment): the pool-3 cut of a storage-to-PoW payment.
Amount derive_sm_pool(Amount storage_payment_to_pow, Fraction p_sm_pool);

struct PoolPayout {
  PublicId recipient = 0;
  Amount amount = 0;
  std::uint8_t pool = 0;  // 1 main, 2 storage, 3 storage-main

  bool operator==(const PoolPayout&) const = default;
};

struct WindowReport {
  Height window_start = 0;
  Height window_end = 0;
  std::vector<PoolPayout> payouts;
  Amount main_paid = 0;
  Amount storage_paid = 0;
  Amount sm_paid = 0;
};

struct PoolLedger {
  // pool 1
  std::vector<SealedTaskCredit> main_credits;
  Amount main_available = 0;  // cleared but undistributed (held halves, dust)
  // pool 2
  std::vector<PoolEntry> storage_pending;
  Amount storage_available = 0;
  // pool 3
  Amount sm_available = 0;

  Height window_start = 0;

  // current-window work evidence
  std::map<PublicId, Amount> service_units;      // storage miner -> units
  std::map<PublicId, Amount> storage_tx_counts;  // signer -> storage txs included
  std::map<Height, PublicId> signer_by_height;

  bool operator==(const PoolLedger&) const = default;

  Amount main_balance() const;
  Amount storage_balance() const;
  Amount total_balance() const { return main_balance() + storage_balance() + sm_available; }

  void credit_main(TaskId task, Amount amount, Height payable_after, std::uint32_t n_w,
                   std::vector<std::pair<Height, TxId>> win_positions);
  void credit_storage(TaskId task, Amount amount, Height payable_after);
  void credit_sm(Amount amount) { sm_available += amount; }

  void note_block(Height height, PublicId signer) { signer_by_height[height] = signer; }
  void note_service_units(PublicId miner, Amount units) { service_units[miner] += units; }
  void note_storage_tx(PublicId signer) { storage_tx_counts[signer] += 1; }

  // Closes the window [window_start, end_height] and computes the payouts of
  // all three pools. Undistributable funds carry over.
  WindowReport close_window(Height end_height, const ProtocolParams& params);
};

}  // namespace poaw
