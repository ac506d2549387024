#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "poaw/digest.hpp"
#include "poaw/money.hpp"
#include "poaw/params.hpp"

namespace poaw {

enum class TicketState : std::uint8_t { Immature, Live, Voted, Expired, Settled };

// A lottery ticket of price y where x of it was paid in burned vstakes.
// The vstake portion earns factor exactly 1; only y-x earns r.
struct Ticket {
  std::uint64_t id = 0;
  PublicId owner = 0;
  Amount y = 0;
  Amount x = 0;
  Height purchase_height = 0;
  Height pool_entry_height = 0;
  TicketState state = TicketState::Immature;
  Height voted_height = 0;

  bool operator==(const Ticket&) const = default;
};

struct TicketSettlement {
  std::uint64_t ticket_id = 0;
  PublicId owner = 0;
  Amount y = 0;
  Amount x = 0;
  bool voted = false;
  Amount currency_payout = 0;   // total currency delivered to the owner
  Amount vstake_refund = 0;     // expired tickets get their vstakes back
  Amount unlocked = 0;          // the y-x that was locked at purchase
  Amount minted_conversion = 0; // vstake face value returning as currency
  Amount minted_profit = 0;     // PoS reward on the money portion

  bool operator==(const TicketSettlement&) const = default;
};

struct TicketSystem {
  std::map<std::uint64_t, Ticket> tickets;
  std::vector<std::uint64_t> live_ids;  // ascending ticket id
  std::map<Height, std::vector<std::uint64_t>> maturing;  // entry height -> ids
  std::map<Height, std::vector<TicketSettlement>> pending_payouts;
  std::uint64_t next_ticket_id = 1;
  std::uint32_t purchased_this_block = 0;

  bool operator==(const TicketSystem&) const = default;

  std::size_t live_count() const { return live_ids.size(); }
  void remove_live(std::uint64_t id);

  // Matures tickets whose entry height arrived and resets the per-block
  // purchase quota. Call once at the start of every block.
  void begin_block(Height height);
};

// Proportional price controller: base * (live/target)^k, floored at 1 atom.
Amount compute_ticket_price(std::size_t live_count, const ProtocolParams& params);

enum class PurchaseError : std::uint8_t {
  InsufficientFunds,
  InsufficientVstakes,
  QuotaExceeded,
};

// Validates and records a purchase. The caller moves the funds: y-x currency
// into the ticket lock and x vstakes burned.
std::variant<std::uint64_t, PurchaseError> purchase_ticket(TicketSystem& sys,
                                                           Amount buyer_currency,
                                                           Amount buyer_vstakes, PublicId buyer,
                                                           Amount y, Amount x, Height height,
                                                           const ProtocolParams& params);

enum class SelectError : std::uint8_t { PoolTooSmall };

// Deterministic sampling without replacement seeded by the block header seed.
std::variant<std::vector<std::uint64_t>, SelectError> select_voters(
    const Digest& header_seed, const TicketSystem& sys, const ProtocolParams& params);

// Settlement arithmetic. voted: x + round(r*(y-x)); expired: y-x currency
// plus the x vstakes back.
TicketSettlement settle_ticket(const Ticket& t, bool voted, const ProtocolParams& params);

// All live tickets whose pool age reached the expiry window.
std::vector<std::uint64_t> tickets_to_expire(const TicketSystem& sys, Height height,
                                             const ProtocolParams& params);

// Seal-time minting: floor(p_vstake * fee_base) split per winner with the
// remainder to the smallest winner id. Empty when there are no winners.
std::map<PublicId, Amount> mint_vstakes(Amount fee_base, Fraction p_vstake,
                                        const std::vector<PublicId>& winners);

}  // namespace poaw
