#include "poaw/params.hpp"

namespace poaw {

std::optional<std::string> ProtocolParams::validate() const {
  auto frac_ok = [](double f) { return f >= 0.0 && f <= 1.0; };
  if (r <= 1.0) return "r";
  if (!frac_ok(p_vstake)) return "p_vstake";
  if (!frac_ok(p_pool_main)) return "p_pool_main";
  if (!frac_ok(p_pool_storage)) return "p_pool_storage";
  if (!frac_ok(p_validation)) return "p_validation";
  if (!frac_ok(p_sm_pool)) return "p_sm_pool";
  if (p_pools() + p_validation > 1.0) return "p_pools";
  if (pf_half != 0.5 && pf_half != 1.0) return "pf_half";
  if (epsilon_pos < 0.0) return "epsilon_pos";
  if (b_distr == 0) return "b_distr";
  if (r_s == 0) return "r_s";
  if (votes_per_block == 0 || vote_majority == 0 || vote_majority > votes_per_block)
    return "vote_majority";
  if (ticket_pool_target < votes_per_block) return "ticket_pool_target";
  if (base_ticket_price <= 0) return "base_ticket_price";
  if (price_exponent_k <= 0.0) return "price_exponent_k";
  if (coinbase_amount < 0) return "coinbase_amount";
  if (block_tx_capacity == 0) return "block_tx_capacity";
  if (shard_index_space == 0) return "shard_index_space";
  return std::nullopt;
}

ProtocolParams ProtocolParams::sim_scaled() { return ProtocolParams{}; }

ProtocolParams ProtocolParams::full_scale() {
  ProtocolParams p;
  p.ticket_maturity = 256;
  p.ticket_pool_target = 40'960;
  p.ticket_expiry_blocks = 142 * p.blocks_per_day;
  p.settlement_delay = 256;
  p.b_distr = 288;
  p.timeout_publish = 64;
  p.timeout_freeze = 1024;
  p.timeout_retrieve = 288;
  p.nb_freeze = 16;
  p.nb_compete = 64;
  p.nb_validate = 16;
  return p;
}

}  // namespace poaw
