#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "poaw/money.hpp"

namespace poaw {

// Protocol parameter registry. Two presets ship: full-scale defaults that
// mirror the reference hybrid chain (ticket pool 40960, 256-block maturity,
// 142-day expiry) and a desk-scale preset used by the simulator.
struct ProtocolParams {
  // incentive factors
  double r = 1.1;           // PoS profit factor, applies to the money part of a ticket
  double p_vstake = 0.25;   // fraction of the winner's earned fee minted as vstakes
  double p_pool_main = 0.10;
  double p_pool_storage = 0.05;
  double p_validation = 0.0;  // promised-fee share paid to dTMN validators at seal
  double p_sm_pool = 0.10;    // cut of storage-tx fees paid to PoW miners, into pool 3
  double pf_half = 0.5;       // per-win distributable share of the main-chain PF credit
  double epsilon_pos = 0.01;

  // pool distribution
  std::uint64_t b_distr = 32;       // distribution window length in blocks
  std::uint64_t pf_delay_blocks = 4;  // promised-fee minimum delay b

  // competition phases
  std::uint64_t nb_freeze = 2;
  std::uint64_t nb_compete = 4;
  std::uint64_t nb_validate = 2;

  // storage market
  std::uint32_t r_s = 5;  // minimal dTMN replica count
  std::uint64_t timeout_publish = 8;
  std::uint64_t timeout_freeze = 64;
  std::uint64_t timeout_retrieve = 8;
  std::uint64_t ping_timeout = 4;
  std::uint32_t default_chunks = 12;
  std::uint64_t shard_index_space = 100'000;

  // tickets
  std::uint64_t ticket_maturity = 8;
  std::uint32_t ticket_quota_per_block = 20;
  std::uint64_t ticket_pool_target = 1024;
  std::uint64_t ticket_expiry_blocks = 613;
  std::uint64_t settlement_delay = 8;
  Amount base_ticket_price = 1'000'000;
  double price_exponent_k = 1.0;
  std::uint32_t votes_per_block = 5;
  std::uint32_t vote_majority = 3;

  // chain
  Amount coinbase_amount = 50 * kAtomsPerCoin;
  std::uint32_t block_tx_capacity = 256;
  std::uint64_t blocks_per_day = 288;

  double p_pools() const { return p_pool_main + p_pool_storage; }

  Fraction r_frac() const { return Fraction::from_double(r); }
  Fraction p_vstake_frac() const { return Fraction::from_double(p_vstake); }
  Fraction p_pool_main_frac() const { return Fraction::from_double(p_pool_main); }
  Fraction p_pool_storage_frac() const { return Fraction::from_double(p_pool_storage); }
  Fraction p_validation_frac() const { return Fraction::from_double(p_validation); }
  Fraction p_sm_pool_frac() const { return Fraction::from_double(p_sm_pool); }
  Fraction pf_half_frac() const { return Fraction::from_double(pf_half); }

  std::uint32_t dtmn_failure_threshold() const { return r_s / 2 + 1; }

  // empty on success, otherwise the offending field
  std::optional<std::string> validate() const;

  static ProtocolParams sim_scaled();
  static ProtocolParams full_scale();
};

}  // namespace poaw
