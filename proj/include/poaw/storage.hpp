#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "poaw/digest.hpp"
#include "poaw/money.hpp"
#include "poaw/params.hpp"

namespace poaw {

enum class DtmnStatus : std::uint8_t { Forming, Active, Failed, Done };

// The storage miners bound to one task by the multi-signature deal. They
// store the data, answer retrievals, validate solutions and seal the
// competition. Falls below floor(r_s/2)+1 live members -> failed.
struct Dtmn {
  std::uint32_t id = 0;
  TaskId task = 0;
  std::vector<PublicId> members;  // formation order
  std::map<PublicId, bool> replica;
  std::map<PublicId, Height> last_ping;
  std::set<PublicId> pruned;
  DtmnStatus status = DtmnStatus::Forming;
  Height formed_height = 0;
  Height sealed_height = 0;

  bool operator==(const Dtmn&) const = default;

  std::vector<PublicId> live_members() const;
  std::size_t live_count() const { return members.size() - pruned.size(); }
};

void record_ping(Dtmn& dtmn, PublicId member, Height height);

// Prunes members silent for more than ping_timeout blocks and downgrades the
// status once live membership drops below the failure threshold.
std::vector<PublicId> prune_members(Dtmn& dtmn, Height height, const ProtocolParams& params);

bool dtmn_meets_threshold(const Dtmn& dtmn, const ProtocolParams& params);

// ---- storage market ----

struct BidOrder {
  TxId bid_tx = 0;
  TaskId task = 0;
  PublicId client = 0;
  Amount fee_sub = 0;
  Amount fee_solve = 0;
  Height placed = 0;
  bool matched = false;

  bool operator==(const BidOrder&) const = default;
};

struct AskOrder {
  TxId ask_tx = 0;
  TaskId task = 0;
  PublicId miner = 0;
  Height placed = 0;
  bool consumed = false;

  bool operator==(const AskOrder&) const = default;
};

struct DealOrder {
  TxId deal_tx = 0;
  TaskId task = 0;
  TxId bid = 0;
  std::vector<TxId> asks;
  std::vector<PublicId> members;
  Height height = 0;

  bool operator==(const DealOrder&) const = default;
};

struct OrderBook {
  std::vector<BidOrder> bids;
  std::vector<AskOrder> asks;
  std::vector<DealOrder> deals;

  bool operator==(const OrderBook&) const = default;

  BidOrder* find_bid(TaskId task);
  const BidOrder* find_bid(TaskId task) const;
};

inline bool bid_expired(const BidOrder& bid, Height height, const ProtocolParams& params) {
  return height >= bid.placed + params.timeout_publish;
}

// An asker locks resources for timeout_publish + T_bid - T_ask, i.e. until
// the bid itself expires.
inline bool ask_lock_expired(const AskOrder& ask, const BidOrder& bid, Height height,
                             const ProtocolParams& params) {
  (void)ask;
  return bid_expired(bid, height, params);
}

enum class MatchError : std::uint8_t { NotEnoughAsks, LockedResourcesExpired, ExpiredBid };

// Matches a bid with the first r_s eligible asks, forming the deal and the
// dTMN membership (ledger order).
std::variant<DealOrder, MatchError> match_deal(const BidOrder& bid,
                                               const std::vector<AskOrder*>& asks, Height height,
                                               const ProtocolParams& params);

// ---- chunk exchange ----

struct ChunkExchangeResult {
  std::uint32_t rounds = 0;
  bool complete = false;  // every alive member holds the full payload
  std::map<PublicId, Amount> chunks_sent;
  std::vector<PublicId> completed_members;
};

// Synchronous rounds, one upload and any number of parallel downloads per
// member per round, rarest chunk first. members[0] seeds the full copy.
// Completes within ceil(log2(members)) + n_chunks rounds.
ChunkExchangeResult chunk_exchange(
    const std::vector<PublicId>& members, std::uint32_t n_chunks,
    const std::function<bool(PublicId, std::uint32_t)>& alive = nullptr);

// ---- micro-payment channels ----

enum class ChannelStatus : std::uint8_t { Open, Claimed };

struct Channel {
  std::uint64_t id = 0;
  PublicId party_a = 0;  // payer (deposit owner)
  PublicId party_b = 0;  // payee (storage miner)
  Amount deposit = 0;
  Amount balance_a = 0;
  Amount balance_b = 0;
  std::uint64_t seq = 0;
  ChannelStatus status = ChannelStatus::Open;

  bool operator==(const Channel&) const = default;
};

struct ChannelSig {
  PublicId signer = 0;
  Digest digest{};
};

Digest channel_state_digest(std::uint64_t channel_id, Amount balance_a, Amount balance_b,
                            std::uint64_t seq);
ChannelSig sign_channel_state(PublicId signer, std::uint64_t channel_id, Amount balance_a,
                              Amount balance_b, std::uint64_t seq);

enum class ChannelError : std::uint8_t { StaleSeq, BadSignature, BadBalance, AlreadyClaimed };

// Applies an off-chain balance shift of `delta` from a to b at sequence
// `new_seq`; both parties must have signed the resulting state.
std::optional<ChannelError> channel_update(Channel& ch, Amount delta, std::uint64_t new_seq,
                                           const ChannelSig& sig_a, const ChannelSig& sig_b);

struct ChannelClaim {
  std::uint64_t channel_id = 0;
  PublicId party_a = 0;
  PublicId party_b = 0;
  Amount balance_a = 0;
  Amount balance_b = 0;
  std::uint64_t seq = 0;
};

// Closes the channel; only the final balance goes on-chain.
std::variant<ChannelClaim, ChannelError> claim_channel(Channel& ch);

// ---- replication audit (challenge-response stand-in) ----

Digest replication_challenge_response(std::span<const std::uint8_t> data, std::uint64_t challenge);
bool verify_replication_proof(const Digest& data_digest_unused,
                              std::span<const std::uint8_t> data, std::uint64_t challenge,
                              const Digest& response);

struct StorageState {
  OrderBook book;
  std::map<std::uint32_t, Dtmn> dtmns;
  std::map<TaskId, std::uint32_t> dtmn_by_task;
  std::map<std::uint64_t, Channel> channels;
  std::uint32_t next_dtmn_id = 1;
  std::uint64_t next_channel_id = 1;

  bool operator==(const StorageState&) const = default;

  Dtmn* dtmn_for_task(TaskId task);
  const Dtmn* dtmn_for_task(TaskId task) const;
};

}  // namespace poaw
