#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "poaw/competition.hpp"
#include "poaw/money.hpp"
#include "poaw/params.hpp"
#include "poaw/pools.hpp"
#include "poaw/storage.hpp"
#include "poaw/tickets.hpp"
#include "poaw/tx.hpp"

namespace poaw {

enum class FlowTag : std::uint8_t {
  PaymentIn,
  PaymentOut,
  FeePaid,
  FeeEarned,
  Coinbase,
  TicketLock,
  TicketPayout,
  TicketRefund,
  VstakeBurn,
  VstakeMint,
  VstakeRefund,
  EscrowIn,
  EscrowRefund,
  WinnerFee,
  PoolMain,
  PoolStorage,
  PoolSm,
  ValidationShare,
  StorageDirect,
  ChannelDeposit,
  ChannelRelease,
};

// Signed balance movement; positive credits, negative debits. Vstake flows
// are tagged by the three vstake tags, everything else is currency.
struct Flow {
  PublicId who = 0;
  Amount amount = 0;
  FlowTag tag{};
};

struct SealEvent {
  TaskId task = 0;
  bool success = false;
  std::string failure_reason;
  std::vector<PublicId> winners;
  double winning_score = 0.0;
  Amount winner_total = 0;
  std::map<PublicId, Amount> winner_payments;
  std::map<PublicId, Amount> vstakes_minted;
  std::vector<std::pair<Height, TxId>> win_positions;
};

struct ApplyEvents {
  std::vector<Flow> flows;
  std::vector<TicketSettlement> settlements_created;
  std::vector<TicketSettlement> settlements_delivered;
  std::vector<SealEvent> seals;
  std::vector<WindowReport> windows;
  std::vector<std::pair<TaskId, std::string>> aborted_tasks;
  std::vector<TxId> winning_solves;
};

struct DeferredPayment {
  PublicId recipient = 0;
  Amount amount = 0;
  FlowTag tag = FlowTag::ValidationShare;

  bool operator==(const DeferredPayment&) const = default;
};

struct LedgerState {
  std::map<PublicId, Amount> balances;
  std::map<PublicId, Amount> vstakes;
  TicketSystem tickets;
  PoolLedger pools;
  std::map<TaskId, CompetitionState> competitions;
  StorageState storage;
  std::map<TaskId, Amount> escrow;
  std::map<Height, std::vector<DeferredPayment>> deferred;

  Height height = 0;  // last applied block
  TxId next_tx_id = 1;

  // exact supply accounting, integer atoms
  Amount initial_supply = 0;
  Amount minted_coinbase = 0;
  Amount minted_pos_profit = 0;
  Amount minted_vstake_conversion = 0;
  Amount vstake_minted_total = 0;
  Amount vstake_burned_total = 0;
  Amount vstake_refunded_total = 0;

  bool operator==(const LedgerState&) const = default;

  Amount balance(PublicId id) const;
  Amount vstake_balance(PublicId id) const;

  Amount locked_ticket_total() const;
  Amount pending_payout_total() const;
  Amount escrow_total() const;
  Amount channel_total() const;
  Amount deferred_total() const;
};

LedgerState make_genesis_state(const std::map<PublicId, Amount>& initial_balances);

struct ConservationReport {
  bool ok = false;
  Amount currency_held = 0;
  Amount currency_expected = 0;
  Amount vstakes_held = 0;
  Amount vstakes_expected = 0;
  std::string detail;
};

// Currency: balances + every locked bucket + pool balances must equal the
// initial supply plus all mints. Vstakes: balances equal minted - burned +
// refunded. Exact integer equality.
ConservationReport check_conservation(const LedgerState& state);

void credit(LedgerState& state, ApplyEvents& ev, PublicId who, Amount amount, FlowTag tag);
// returns false when the balance would go negative
bool debit(LedgerState& state, ApplyEvents& ev, PublicId who, Amount amount, FlowTag tag);

// Start-of-block housekeeping: ticket maturation and quota reset, payout and
// deferred-payment release, ticket expiry, bid timeouts, dTMN liveness. The
// order is fixed; all effects land before any transaction of the block.
void begin_block_sweep(LedgerState& state, Height h, const ProtocolParams& params,
                       ApplyEvents& ev);

// Single-transaction application; returns an error string when illegal.
std::optional<std::string> apply_transaction(LedgerState& state, const Transaction& tx,
                                             PublicId block_signer, Height h,
                                             const ProtocolParams& params, ApplyEvents& ev);

// Vote-side settlement of a selected ticket (voted or missed).
void settle_selected_ticket(LedgerState& state, std::uint64_t ticket_id, bool voted, Height h,
                            const ProtocolParams& params, ApplyEvents& ev);

// Opens a micro-payment channel, locking the payer's deposit.
std::optional<std::uint64_t> open_channel(LedgerState& state, ApplyEvents& ev, PublicId payer,
                                          PublicId payee, Amount deposit);

// Aborts a competition (dTMN failure or timeout): refunds the fee_solve
// escrow and guarantees no promised fees ever accrue for the task.
void abort_competition(LedgerState& state, TaskId task, const std::string& why, Height h,
                       ApplyEvents& ev);

}  // namespace poaw
