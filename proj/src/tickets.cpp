#include "poaw/tickets.hpp"

#include <algorithm>
#include <cmath>

#include "poaw/rng.hpp"

namespace poaw {

void TicketSystem::remove_live(std::uint64_t id) {
  auto it = std::lower_bound(live_ids.begin(), live_ids.end(), id);
  if (it != live_ids.end() && *it == id) live_ids.erase(it);
}

void TicketSystem::begin_block(Height height) {
  purchased_this_block = 0;
  auto it = maturing.find(height);
  if (it == maturing.end()) return;
  for (std::uint64_t id : it->second) {
    Ticket& t = tickets.at(id);
    if (t.state != TicketState::Immature) continue;
    t.state = TicketState::Live;
    live_ids.insert(std::lower_bound(live_ids.begin(), live_ids.end(), id), id);
  }
  maturing.erase(it);
}

Amount compute_ticket_price(std::size_t live_count, const ProtocolParams& params) {
  Amount price;
  if (params.price_exponent_k == 1.0) {
    price = static_cast<Amount>(static_cast<__int128>(params.base_ticket_price) *
                                static_cast<Amount>(live_count) /
                                static_cast<Amount>(params.ticket_pool_target));
  } else {
    double ratio = static_cast<double>(live_count) /
                   static_cast<double>(params.ticket_pool_target);
    price = static_cast<Amount>(std::floor(static_cast<double>(params.base_ticket_price) *
                                           std::pow(ratio, params.price_exponent_k)));
  }
  return std::max<Amount>(price, 1);
}

std::variant<std::uint64_t, PurchaseError> purchase_ticket(TicketSystem& sys,
                                                           Amount buyer_currency,
                                                           Amount buyer_vstakes, PublicId buyer,
                                                           Amount y, Amount x, Height height,
                                                           const ProtocolParams& params) {
  if (sys.purchased_this_block >= params.ticket_quota_per_block)
    return PurchaseError::QuotaExceeded;
  if (x > y || x < 0) return PurchaseError::InsufficientVstakes;
  if (buyer_currency < y - x) return PurchaseError::InsufficientFunds;
  if (buyer_vstakes < x) return PurchaseError::InsufficientVstakes;

  Ticket t;
  t.id = sys.next_ticket_id++;
  t.owner = buyer;
  t.y = y;
  t.x = x;
  t.purchase_height = height;
  t.pool_entry_height = height + params.ticket_maturity;
  t.state = TicketState::Immature;
  sys.maturing[t.pool_entry_height].push_back(t.id);
  sys.tickets.emplace(t.id, t);
  sys.purchased_this_block++;
  return t.id;
}

std::variant<std::vector<std::uint64_t>, SelectError> select_voters(
    const Digest& header_seed, const TicketSystem& sys, const ProtocolParams& params) {
  const std::size_t k = params.votes_per_block;
  if (sys.live_ids.size() < k) return SelectError::PoolTooSmall;
  DetRng rng(header_seed);
  auto picks = rng.sample_without_replacement(sys.live_ids.size(), k);
  std::vector<std::uint64_t> out;
  out.reserve(k);
  for (std::uint64_t idx : picks) out.push_back(sys.live_ids[idx]);
  return out;
}

TicketSettlement settle_ticket(const Ticket& t, bool voted, const ProtocolParams& params) {
  TicketSettlement s;
  s.ticket_id = t.id;
  s.owner = t.owner;
  s.y = t.y;
  s.x = t.x;
  s.voted = voted;
  const Amount money = t.y - t.x;
  s.unlocked = money;
  if (voted) {
    const Amount money_reward = round_frac(money, params.r_frac());
    s.currency_payout = t.x + money_reward;
    s.minted_conversion = t.x;
    s.minted_profit = money_reward - money;
  } else {
    s.currency_payout = money;
    s.vstake_refund = t.x;
  }
  return s;
}

std::vector<std::uint64_t> tickets_to_expire(const TicketSystem& sys, Height height,
                                             const ProtocolParams& params) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t id : sys.live_ids) {
    const Ticket& t = sys.tickets.at(id);
    if (height >= t.pool_entry_height &&
        height - t.pool_entry_height >= params.ticket_expiry_blocks) {
      out.push_back(id);
    }
  }
  return out;
}

std::map<PublicId, Amount> mint_vstakes(Amount fee_base, Fraction p_vstake,
                                        const std::vector<PublicId>& winners) {
  if (winners.empty()) return {};
  return split_equal(floor_frac(fee_base, p_vstake), winners);
}

}  // namespace poaw
