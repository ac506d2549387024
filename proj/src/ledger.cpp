#include "poaw/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace poaw {

Amount LedgerState::balance(PublicId id) const {
  auto it = balances.find(id);
  return it == balances.end() ? 0 : it->second;
}

Amount LedgerState::vstake_balance(PublicId id) const {
  auto it = vstakes.find(id);
  return it == vstakes.end() ? 0 : it->second;
}

Amount LedgerState::locked_ticket_total() const {
  Amount total = 0;
  for (const auto& [id, t] : tickets.tickets) {
    if (t.state == TicketState::Immature || t.state == TicketState::Live)
      total += t.y - t.x;
  }
  return total;
}

Amount LedgerState::pending_payout_total() const {
  Amount total = 0;
  for (const auto& [h, list] : tickets.pending_payouts)
    for (const auto& s : list) total += s.currency_payout;
  return total;
}

Amount LedgerState::escrow_total() const {
  Amount total = 0;
  for (const auto& [task, amt] : escrow) total += amt;
  return total;
}

Amount LedgerState::channel_total() const {
  Amount total = 0;
  for (const auto& [id, ch] : storage.channels)
    if (ch.status == ChannelStatus::Open) total += ch.deposit;
  return total;
}

Amount LedgerState::deferred_total() const {
  Amount total = 0;
  for (const auto& [h, list] : deferred)
    for (const auto& d : list) total += d.amount;
  return total;
}

LedgerState make_genesis_state(const std::map<PublicId, Amount>& initial_balances) {
  LedgerState state;
  state.balances = initial_balances;
  for (const auto& [id, amt] : initial_balances) state.initial_supply += amt;
  return state;
}

ConservationReport check_conservation(const LedgerState& state) {
  ConservationReport r;
  Amount balances = 0;
  for (const auto& [id, b] : state.balances) {
    balances += b;
    if (b < 0) {
      r.detail = "negative balance";
      return r;
    }
  }
  r.currency_held = balances + state.locked_ticket_total() + state.pending_payout_total() +
                    state.escrow_total() + state.channel_total() + state.deferred_total() +
                    state.pools.total_balance();
  r.currency_expected = state.initial_supply + state.minted_coinbase +
                        state.minted_pos_profit + state.minted_vstake_conversion;

  Amount vstakes = 0;
  for (const auto& [id, v] : state.vstakes) {
    vstakes += v;
    if (v < 0) {
      r.detail = "negative vstake balance";
      return r;
    }
  }
  r.vstakes_held = vstakes;
  r.vstakes_expected =
      state.vstake_minted_total - state.vstake_burned_total + state.vstake_refunded_total;

  r.ok = (r.currency_held == r.currency_expected) && (r.vstakes_held == r.vstakes_expected);
  if (!r.ok && r.detail.empty()) {
    std::ostringstream os;
    os << "currency " << r.currency_held << " vs " << r.currency_expected << ", vstakes "
       << r.vstakes_held << " vs " << r.vstakes_expected;
    r.detail = os.str();
  }
  return r;
}

void credit(LedgerState& state, ApplyEvents& ev, PublicId who, Amount amount, FlowTag tag) {
  if (amount == 0) return;
  state.balances[who] += amount;
  ev.flows.push_back(Flow{who, amount, tag});
}

bool debit(LedgerState& state, ApplyEvents& ev, PublicId who, Amount amount, FlowTag tag) {
  if (amount == 0) return true;
  auto it = state.balances.find(who);
  if (it == state.balances.end() || it->second < amount) return false;
  it->second -= amount;
  ev.flows.push_back(Flow{who, -amount, tag});
  return true;
}

static void credit_vstakes(LedgerState& state, ApplyEvents& ev, PublicId who, Amount amount,
                           FlowTag tag) {
  if (amount == 0) return;
  state.vstakes[who] += amount;
  ev.flows.push_back(Flow{who, amount, tag});
}

void abort_competition(LedgerState& state, TaskId task, const std::string& why, Height h,
                       ApplyEvents& ev) {
  auto it = state.competitions.find(task);
  if (it == state.competitions.end()) return;
  CompetitionState& comp = it->second;
  if (comp.outcome != CompetitionOutcome::Open) return;
  comp.outcome = CompetitionOutcome::Failed;
  comp.resolved_height = h;
  auto esc = state.escrow.find(task);
  if (esc != state.escrow.end()) {
    credit(state, ev, comp.client, esc->second, FlowTag::EscrowRefund);
    state.escrow.erase(esc);
  }
  for (auto& bid : state.storage.book.bids)
    if (bid.task == task) bid.matched = true;  // never matchable again
  ev.aborted_tasks.emplace_back(task, why);
}

void begin_block_sweep(LedgerState& state, Height h, const ProtocolParams& params,
                       ApplyEvents& ev) {
  // 1. ticket maturation + per-block purchase quota
  state.tickets.begin_block(h);

  // 2. voted-ticket payouts whose settlement delay elapsed
  if (auto it = state.tickets.pending_payouts.find(h); it != state.tickets.pending_payouts.end()) {
    for (const TicketSettlement& s : it->second) {
      credit(state, ev, s.owner, s.currency_payout, FlowTag::TicketPayout);
      ev.settlements_delivered.push_back(s);
      state.tickets.tickets.at(s.ticket_id).state = TicketState::Settled;
    }
    state.tickets.pending_payouts.erase(it);
  }

  // 3. deferred protocol payments (validation shares held through retention)
  if (auto it = state.deferred.find(h); it != state.deferred.end()) {
    for (const DeferredPayment& d : it->second) credit(state, ev, d.recipient, d.amount, d.tag);
    state.deferred.erase(it);
  }

  // 4. ticket expiry
  for (std::uint64_t id : tickets_to_expire(state.tickets, h, params)) {
    Ticket& t = state.tickets.tickets.at(id);
    TicketSettlement s = settle_ticket(t, false, params);
    state.tickets.remove_live(id);
    t.state = TicketState::Settled;
    credit(state, ev, s.owner, s.currency_payout, FlowTag::TicketRefund);
    credit_vstakes(state, ev, s.owner, s.vstake_refund, FlowTag::VstakeRefund);
    state.vstake_refunded_total += s.vstake_refund;
    ev.settlements_created.push_back(s);
  }

  // 5. bid timeouts: refund escrow of unmatched publishes
  for (BidOrder& bid : state.storage.book.bids) {
    if (bid.matched || !bid_expired(bid, h, params)) continue;
    bid.matched = true;
    auto esc = state.escrow.find(bid.task);
    if (esc != state.escrow.end()) {
      credit(state, ev, bid.client, esc->second, FlowTag::EscrowRefund);
      state.escrow.erase(esc);
    }
    auto comp = state.competitions.find(bid.task);
    if (comp != state.competitions.end() && !comp->second.opened)
      comp->second.outcome = CompetitionOutcome::Failed;
    ev.aborted_tasks.emplace_back(bid.task, "bid_expired");
  }

  // 6. dTMN liveness
  for (auto& [dtmn_id, dtmn] : state.storage.dtmns) {
    if (dtmn.status != DtmnStatus::Active && dtmn.status != DtmnStatus::Forming) continue;
    prune_members(dtmn, h, params);
    if (dtmn.status == DtmnStatus::Failed) {
      abort_competition(state, dtmn.task, "dtmn_failed", h, ev);
    }
  }

  // 7. retire long-settled market state so per-block scans stay flat
  if (h % 64 == 0) {
    const Height grace = params.timeout_retrieve + params.timeout_publish + 64;
    std::erase_if(state.storage.book.bids, [&](const BidOrder& b) {
      return b.matched && h > b.placed + grace;
    });
    std::erase_if(state.storage.book.asks, [&](const AskOrder& a) {
      return h > a.placed + grace;
    });
    for (auto it = state.storage.dtmns.begin(); it != state.storage.dtmns.end();) {
      const Dtmn& d = it->second;
      bool finished = d.status == DtmnStatus::Done || d.status == DtmnStatus::Failed;
      Height anchor = d.sealed_height != 0 ? d.sealed_height : d.formed_height;
      if (finished && h > anchor + grace) {
        state.storage.dtmn_by_task.erase(d.task);
        it = state.storage.dtmns.erase(it);
      } else {
        ++it;
      }
    }
    std::erase_if(state.storage.channels, [](const auto& kv) {
      return kv.second.status == ChannelStatus::Claimed;
    });
    const Height comp_grace = params.b_distr * 2 + grace;
    std::erase_if(state.competitions, [&](const auto& kv) {
      const CompetitionState& c = kv.second;
      return c.outcome != CompetitionOutcome::Open && c.resolved_height != 0 &&
             h > c.resolved_height + comp_grace;
    });
    const Height ticket_grace = params.ticket_maturity + params.ticket_expiry_blocks +
                                params.settlement_delay + grace;
    std::erase_if(state.tickets.tickets, [&](const auto& kv) {
      return kv.second.state == TicketState::Settled && h > kv.second.purchase_height + ticket_grace;
    });
  }
}

void settle_selected_ticket(LedgerState& state, std::uint64_t ticket_id, bool voted, Height h,
                            const ProtocolParams& params, ApplyEvents& ev) {
  Ticket& t = state.tickets.tickets.at(ticket_id);
  state.tickets.remove_live(ticket_id);
  TicketSettlement s = settle_ticket(t, voted, params);
  ev.settlements_created.push_back(s);
  if (voted) {
    t.state = TicketState::Voted;
    t.voted_height = h;
    state.minted_pos_profit += s.minted_profit;
    state.minted_vstake_conversion += s.minted_conversion;
    state.tickets.pending_payouts[h + params.settlement_delay].push_back(s);
  } else {
    // missed vote: treated like expiry, funds return at once
    t.state = TicketState::Settled;
    credit(state, ev, s.owner, s.currency_payout, FlowTag::TicketRefund);
    credit_vstakes(state, ev, s.owner, s.vstake_refund, FlowTag::VstakeRefund);
    state.vstake_refunded_total += s.vstake_refund;
  }
}

std::optional<std::uint64_t> open_channel(LedgerState& state, ApplyEvents& ev, PublicId payer,
                                          PublicId payee, Amount deposit) {
  if (deposit <= 0) return std::nullopt;
  if (!debit(state, ev, payer, deposit, FlowTag::ChannelDeposit)) return std::nullopt;
  Channel ch;
  ch.id = state.storage.next_channel_id++;
  ch.party_a = payer;
  ch.party_b = payee;
  ch.deposit = deposit;
  ch.balance_a = deposit;
  ch.balance_b = 0;
  state.storage.channels.emplace(ch.id, ch);
  return ch.id;
}

// ---- per-kind transaction application ----

static std::optional<std::string> apply_payment(LedgerState& state, const PaymentPayload& p,
                                                ApplyEvents& ev) {
  if (p.amount < 0) return "negative amount";
  if (state.balance(p.from) < p.amount) return "insufficient funds";
  debit(state, ev, p.from, p.amount, FlowTag::PaymentOut);
  credit(state, ev, p.to, p.amount, FlowTag::PaymentIn);
  return std::nullopt;
}

static std::optional<std::string> apply_ticket_purchase(LedgerState& state,
                                                        const TicketPurchasePayload& p, Height h,
                                                        const ProtocolParams& params,
                                                        ApplyEvents& ev) {
  auto res = purchase_ticket(state.tickets, state.balance(p.buyer), state.vstake_balance(p.buyer),
                             p.buyer, p.y, p.x, h, params);
  if (const auto* err = std::get_if<PurchaseError>(&res)) {
    switch (*err) {
      case PurchaseError::InsufficientFunds: return "insufficient_funds";
      case PurchaseError::InsufficientVstakes: return "insufficient_vstakes";
      case PurchaseError::QuotaExceeded: return "block_ticket_quota_exceeded";
    }
  }
  debit(state, ev, p.buyer, p.y - p.x, FlowTag::TicketLock);
  if (p.x > 0) {
    state.vstakes[p.buyer] -= p.x;
    state.vstake_burned_total += p.x;
    ev.flows.push_back(Flow{p.buyer, -p.x, FlowTag::VstakeBurn});
  }
  return std::nullopt;
}

static std::optional<std::string> apply_publish(LedgerState& state, const Transaction& tx,
                                                const PublishPayload& p, Height h,
                                                ApplyEvents& ev) {
  if (p.fee_sub <= 0) return "fee_sub must be positive";
  if (p.fee_solve < 0) return "negative fee_solve";
  if (p.pf_solve.pools_total().num > Fraction::kDen) return "pf fractions exceed 1";
  Amount total = p.fee_sub + p.fee_solve;
  if (state.balance(p.client) < total) return "insufficient funds for escrow";
  debit(state, ev, p.client, total, FlowTag::EscrowIn);
  state.escrow[tx.id] += total;

  CompetitionState comp;
  comp.id = tx.id;
  comp.task = p.slim_task;
  comp.fee_solve = p.fee_solve;
  comp.fee_sub = p.fee_sub;
  comp.schedule = p.pf_solve;
  comp.client = p.client;
  comp.publish_tx = tx.id;
  state.competitions.emplace(tx.id, comp);

  // the publish acts as the in-chain bid request of the storage market
  state.storage.book.bids.push_back(BidOrder{tx.id, tx.id, p.client, p.fee_sub, p.fee_solve, h});
  return std::nullopt;
}

static std::optional<std::string> apply_bid(LedgerState& state, const Transaction& tx,
                                            const BidTxPayload& p, Height h) {
  (void)tx;
  (void)h;
  auto comp = state.competitions.find(p.task);
  if (comp == state.competitions.end()) return "unknown task";
  if (state.storage.book.find_bid(p.task) == nullptr) return "no publish-derived bid";
  return std::nullopt;
}

static std::optional<std::string> apply_ask(LedgerState& state, const Transaction& tx,
                                            const AskTxPayload& p, Height h) {
  auto comp = state.competitions.find(p.task);
  if (comp == state.competitions.end()) return "unknown task";
  const BidOrder* bid = state.storage.book.find_bid(p.task);
  if (bid == nullptr || bid->matched) return "no open bid";
  state.storage.book.asks.push_back(AskOrder{tx.id, p.task, p.miner, h, false});
  return std::nullopt;
}

static std::optional<std::string> apply_deal(LedgerState& state, const Transaction& tx,
                                             const DealTxPayload& p, Height h,
                                             const ProtocolParams& params) {
  auto comp_it = state.competitions.find(p.task);
  if (comp_it == state.competitions.end()) return "unknown task";
  BidOrder* bid = state.storage.book.find_bid(p.task);
  if (bid == nullptr || bid->matched) return "no open bid";
  if (bid_expired(*bid, h, params)) return "expired_bid";

  std::vector<AskOrder*> asks;
  for (AskOrder& a : state.storage.book.asks)
    if (a.task == p.task && !a.consumed) asks.push_back(&a);
  auto res = match_deal(*bid, asks, h, params);
  if (const auto* err = std::get_if<MatchError>(&res)) {
    switch (*err) {
      case MatchError::NotEnoughAsks: return "not_enough_asks";
      case MatchError::LockedResourcesExpired: return "locked_resources_expired";
      case MatchError::ExpiredBid: return "expired_bid";
    }
  }
  DealOrder deal = std::get<DealOrder>(res);
  deal.deal_tx = tx.id;
  if (!p.members.empty() && p.members != deal.members) return "member set mismatch";
  bid->matched = true;
  state.storage.book.deals.push_back(deal);

  Dtmn dtmn;
  dtmn.id = state.storage.next_dtmn_id++;
  dtmn.task = p.task;
  dtmn.members = deal.members;
  dtmn.formed_height = h;
  dtmn.status = DtmnStatus::Forming;
  for (PublicId m : dtmn.members) dtmn.last_ping[m] = h;
  state.storage.dtmn_by_task[p.task] = dtmn.id;
  state.storage.dtmns.emplace(dtmn.id, dtmn);
  return std::nullopt;
}

static std::optional<std::string> apply_stored(LedgerState& state, const StoredPayload& p,
                                               Height h, const ProtocolParams& params,
                                               ApplyEvents& ev) {
  auto comp_it = state.competitions.find(p.task);
  if (comp_it == state.competitions.end()) return "unknown task";
  CompetitionState& comp = comp_it->second;
  if (comp.opened) return "already stored";
  if (p.members.size() < params.r_s) return "not enough members";

  Dtmn* dtmn = state.storage.dtmn_for_task(p.task);
  if (dtmn == nullptr || dtmn->status != DtmnStatus::Forming) return "no forming dtmn";
  if (dtmn->members != p.members) return "member set mismatch";

  dtmn->status = DtmnStatus::Active;
  for (PublicId m : dtmn->members) dtmn->replica[m] = true;

  comp.opened = true;
  comp.stored_height = h;
  comp.nb_freeze = params.nb_freeze;
  comp.nb_compete = params.nb_compete;
  comp.nb_validate = params.nb_validate;

  // fee_sub is paid to the dTMN directly, not through the pools
  auto esc = state.escrow.find(p.task);
  if (esc == state.escrow.end() || esc->second < comp.fee_sub) return "escrow missing fee_sub";
  esc->second -= comp.fee_sub;
  for (const auto& [member, amt] : split_equal(comp.fee_sub, dtmn->members))
    credit(state, ev, member, amt, FlowTag::StorageDirect);
  return std::nullopt;
}

static std::optional<std::string> apply_solve(LedgerState& state, const Transaction& tx,
                                              const SolveTxPayload& p, Height h) {
  auto comp_it = state.competitions.find(p.publish_ref);
  if (comp_it == state.competitions.end()) return "unknown_competition";
  CompetitionState& comp = comp_it->second;
  if (comp.outcome != CompetitionOutcome::Open) return "competition closed";
  AdmitVerdict v = check_solve_admission(comp, p.commitment, p.declared_score, h);
  if (v != AdmitVerdict::Accepted) return admit_verdict_name(v);
  comp.admitted.push_back(
      AdmittedSolve{tx.id, p.miner, p.commitment, p.declared_score, h, p.storage_source});
  return std::nullopt;
}

static std::optional<std::string> apply_validate(LedgerState& state, const ValidateTxPayload& p,
                                                 Height h) {
  auto comp_it = state.competitions.find(p.task);
  if (comp_it == state.competitions.end()) return "unknown task";
  CompetitionState& comp = comp_it->second;
  if (comp.outcome != CompetitionOutcome::Open) return "competition closed";
  if (phase_of(comp, h) != Phase::Validate) return "not_in_validate_phase";
  const Dtmn* dtmn = state.storage.dtmn_for_task(p.task);
  if (dtmn != nullptr && dtmn->status == DtmnStatus::Failed) return "dtmn_failed";
  if (comp.validate_posted) return "validate already posted";
  comp.vote_commitments = p.encrypted_votes;
  comp.validate_posted = true;
  return std::nullopt;
}

static std::optional<std::string> apply_seal(LedgerState& state, const Transaction& tx,
                                             const SealTxPayload& p, Height h,
                                             const ProtocolParams& params, ApplyEvents& ev) {
  auto comp_it = state.competitions.find(p.task);
  if (comp_it == state.competitions.end()) return "unknown task";
  CompetitionState& comp = comp_it->second;
  if (comp.outcome != CompetitionOutcome::Open) return "competition closed";
  if (!comp.validate_posted) return "validate not posted";
  if (phase_of(comp, h) != Phase::Seal) return "not in seal phase";

  Dtmn* dtmn = state.storage.dtmn_for_task(p.task);
  if (dtmn == nullptr) return "no dtmn";

  SealEvent event;
  event.task = p.task;

  SealDecision decision;
  if (dtmn->status == DtmnStatus::Failed) {
    decision.success = false;
    decision.failure_reason = "no_consensus";
  } else {
    decision = seal_competition(comp, dtmn->members, p.keys);
  }

  if (!decision.success) {
    comp.outcome = CompetitionOutcome::Failed;
    comp.resolved_height = h;
    event.success = false;
    event.failure_reason = decision.failure_reason;
    auto esc = state.escrow.find(p.task);
    if (esc != state.escrow.end()) {
      credit(state, ev, comp.client, esc->second, FlowTag::EscrowRefund);
      state.escrow.erase(esc);
    }
    if (dtmn->status != DtmnStatus::Failed) dtmn->status = DtmnStatus::Done;
    ev.seals.push_back(std::move(event));
    ev.aborted_tasks.emplace_back(p.task, decision.failure_reason);
    return std::nullopt;  // a failed seal is still a legal transaction
  }

  comp.outcome = CompetitionOutcome::Sealed;
  comp.resolved_height = h;
  comp.winning_solves = decision.winning_solves;
  comp.winners = decision.winners;
  comp.winning_score = decision.winning_score;
  dtmn->status = DtmnStatus::Done;
  dtmn->sealed_height = h;

  auto esc = state.escrow.find(p.task);
  if (esc == state.escrow.end() || esc->second < comp.fee_solve) return "escrow missing";
  state.escrow.erase(esc);

  const Amount main_credit = floor_frac(comp.fee_solve, comp.schedule.main_chain.p);
  const Amount storage_credit = floor_frac(comp.fee_solve, comp.schedule.storage.p);
  const Amount validation_total = floor_frac(comp.fee_solve, comp.schedule.validation.p);
  const Amount winner_total = comp.fee_solve - main_credit - storage_credit - validation_total;

  // winners are paid the non-promised remainder of fee_solve immediately
  for (const auto& [who, amt] : split_equal(winner_total, decision.winners)) {
    credit(state, ev, who, amt, FlowTag::WinnerFee);
    event.winner_payments[who] = amt;
  }

  // vstakes mint against the earned amount: p_vstake applies to what the
  // winners actually received
  for (const auto& [who, amt] : mint_vstakes(winner_total, params.p_vstake_frac(),
                                             decision.winners)) {
    credit_vstakes(state, ev, who, amt, FlowTag::VstakeMint);
    state.vstake_minted_total += amt;
    event.vstakes_minted[who] = amt;
  }

  // promised fees accrue only on success
  std::vector<std::pair<Height, TxId>> positions;
  for (TxId solve_id : decision.winning_solves) {
    for (const AdmittedSolve& s : comp.admitted)
      if (s.tx_id == solve_id) positions.emplace_back(s.height, s.tx_id);
    ev.winning_solves.push_back(solve_id);
  }
  if (main_credit > 0) {
    state.pools.credit_main(p.task, main_credit, h + comp.schedule.main_chain.min_delay_blocks,
                            static_cast<std::uint32_t>(decision.winners.size()), positions);
  }
  if (storage_credit > 0) {
    // the dTMN is paid only after the client's retrieval window
    Height payable = h + std::max(comp.schedule.storage.min_delay_blocks, params.timeout_retrieve);
    state.pools.credit_storage(p.task, storage_credit, payable);
  }
  if (validation_total > 0) {
    Height payable = h + std::max(comp.schedule.validation.min_delay_blocks,
                                  params.timeout_retrieve);
    for (const auto& [who, amt] : split_equal(validation_total, decision.verified_voters))
      state.deferred[payable].push_back(DeferredPayment{who, amt, FlowTag::ValidationShare});
  }

  event.success = true;
  event.winners = decision.winners;
  event.winning_score = decision.winning_score;
  event.winner_total = winner_total;
  event.win_positions = positions;
  ev.seals.push_back(std::move(event));
  return std::nullopt;
}

static std::optional<std::string> apply_claim(LedgerState& state,
                                              const MicropaymentClaimPayload& p,
                                              ApplyEvents& ev) {
  auto it = state.storage.channels.find(p.channel_id);
  if (it == state.storage.channels.end()) return "unknown channel";
  Channel& ch = it->second;
  if (ch.status == ChannelStatus::Claimed) return "channel already claimed";
  if (ch.party_a != p.party_a || ch.party_b != p.party_b) return "party mismatch";
  if (ch.balance_a != p.balance_a || ch.balance_b != p.balance_b || ch.seq != p.seq)
    return "stale channel state";
  auto res = claim_channel(ch);
  if (std::holds_alternative<ChannelError>(res)) return "channel already claimed";
  const ChannelClaim& claim = std::get<ChannelClaim>(res);
  credit(state, ev, claim.party_a, claim.balance_a, FlowTag::ChannelRelease);
  credit(state, ev, claim.party_b, claim.balance_b, FlowTag::ChannelRelease);
  // the payee's receipts are the proven service units of the window
  if (claim.balance_b > 0) state.pools.note_service_units(claim.party_b, claim.balance_b);
  return std::nullopt;
}

static PublicId fee_payer(const Transaction& tx) {
  switch (tx.kind()) {
    case TxKind::Payment: return tx.as<PaymentPayload>()->from;
    case TxKind::TicketPurchase: return tx.as<TicketPurchasePayload>()->buyer;
    case TxKind::Vote: return tx.as<VotePayload>()->voter;
    case TxKind::Publish: return tx.as<PublishPayload>()->client;
    case TxKind::Bid: return tx.as<BidTxPayload>()->client;
    case TxKind::Ask: return tx.as<AskTxPayload>()->miner;
    case TxKind::Solve: return tx.as<SolveTxPayload>()->miner;
    case TxKind::MicropaymentClaim: return tx.as<MicropaymentClaimPayload>()->party_b;
    case TxKind::Deal: return tx.as<DealTxPayload>()->members.empty()
                                  ? 0
                                  : tx.as<DealTxPayload>()->members.front();
    default: return 0;
  }
}

std::optional<std::string> apply_transaction(LedgerState& state, const Transaction& tx,
                                             PublicId block_signer, Height h,
                                             const ProtocolParams& params, ApplyEvents& ev) {
  // transaction fee first: payer must cover it on top of payload amounts
  if (tx.fee_tr < 0) return "negative fee";
  if (tx.fee_tr > 0) {
    PublicId payer = fee_payer(tx);
    if (!debit(state, ev, payer, tx.fee_tr, FlowTag::FeePaid)) return "cannot pay fee";
    Amount sm_cut = 0;
    if (is_storage_tx(tx.kind())) {
      sm_cut = derive_sm_pool(tx.fee_tr, params.p_sm_pool_frac());
      state.pools.credit_sm(sm_cut);
    }
    credit(state, ev, block_signer, tx.fee_tr - sm_cut, FlowTag::FeeEarned);
  }

  std::optional<std::string> err;
  switch (tx.kind()) {
    case TxKind::Payment: err = apply_payment(state, *tx.as<PaymentPayload>(), ev); break;
    case TxKind::TicketPurchase:
      err = apply_ticket_purchase(state, *tx.as<TicketPurchasePayload>(), h, params, ev);
      break;
    case TxKind::Vote: err = "votes travel in the block vote section"; break;
    case TxKind::CoinbaseMint: err = "coinbase is block-level"; break;
    case TxKind::Publish: err = apply_publish(state, tx, *tx.as<PublishPayload>(), h, ev); break;
    case TxKind::Stored:
      err = apply_stored(state, *tx.as<StoredPayload>(), h, params, ev);
      break;
    case TxKind::Solve: err = apply_solve(state, tx, *tx.as<SolveTxPayload>(), h); break;
    case TxKind::Validate: err = apply_validate(state, *tx.as<ValidateTxPayload>(), h); break;
    case TxKind::Seal: err = apply_seal(state, tx, *tx.as<SealTxPayload>(), h, params, ev); break;
    case TxKind::Bid: err = apply_bid(state, tx, *tx.as<BidTxPayload>(), h); break;
    case TxKind::Ask: err = apply_ask(state, tx, *tx.as<AskTxPayload>(), h); break;
    case TxKind::Deal: err = apply_deal(state, tx, *tx.as<DealTxPayload>(), h, params); break;
    case TxKind::MicropaymentClaim:
      err = apply_claim(state, *tx.as<MicropaymentClaimPayload>(), ev);
      break;
    case TxKind::PoolDistribution: err = "distribution is block-level"; break;
  }
  if (!err && is_storage_tx(tx.kind())) state.pools.note_storage_tx(block_signer);
  return err;
}

}  // namespace poaw
