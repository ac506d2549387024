#pragma once

#include <cstdint>
#include <map>
#include <variant>
#include <vector>

#include "poaw/commitment.hpp"
#include "poaw/competition.hpp"
#include "poaw/money.hpp"
#include "poaw/storage.hpp"
#include "poaw/task.hpp"

namespace poaw {

enum class TxKind : std::uint8_t {
  Payment,
  TicketPurchase,
  Vote,
  CoinbaseMint,
  Publish,
  Stored,
  Solve,
  Validate,
  Seal,
  Bid,
  Ask,
  Deal,
  MicropaymentClaim,
  PoolDistribution,
};

const char* tx_kind_name(TxKind k);

struct PaymentPayload {
  PublicId from = 0;
  PublicId to = 0;
  Amount amount = 0;
};

struct TicketPurchasePayload {
  PublicId buyer = 0;
  Amount y = 0;
  Amount x = 0;
};

struct VotePayload {
  std::uint64_t ticket_id = 0;
  PublicId voter = 0;
  Digest approves{};  // digest of the block being approved
  bool approve = true;
};

struct CoinbaseMintPayload {
  PublicId miner = 0;
  Amount amount = 0;
};

// The client's task announcement; escrows fee_sub + fee_solve and acts as
// the in-chain bid request of the storage market.
struct PublishPayload {
  SlimTask slim_task;
  Amount fee_sub = 0;
  Amount fee_solve = 0;
  PfSchedule pf_solve;
  PublicId client = 0;
};

struct StoredPayload {
  TaskId task = 0;  // == id of the Publish transaction
  TxId publish_ref = 0;
  PublicId client = 0;
  std::vector<PublicId> members;  // the dTMN, multi-signed
};

struct SolveTxPayload {
  PublicId miner = 0;
  Commitment commitment;
  double declared_score = 0.0;
  TxId publish_ref = 0;
  PublicId storage_source = 0;
};

struct ValidateTxPayload {
  TaskId task = 0;
  std::map<PublicId, Digest> encrypted_votes;  // E_dTMN
};

struct SealTxPayload {
  TaskId task = 0;
  std::map<PublicId, VoteEnvelope> keys;  // D_dTMN
};

struct BidTxPayload {
  TaskId task = 0;
  PublicId client = 0;
  TxId publish_ref = 0;
};

struct AskTxPayload {
  TaskId task = 0;
  PublicId miner = 0;
};

struct DealTxPayload {
  TaskId task = 0;
  TxId bid_ref = 0;
  std::vector<TxId> ask_refs;
  std::vector<PublicId> members;
};

struct MicropaymentClaimPayload {
  TaskId task = 0;
  std::uint64_t channel_id = 0;
  PublicId party_a = 0;
  PublicId party_b = 0;
  Amount balance_a = 0;
  Amount balance_b = 0;
  std::uint64_t seq = 0;
};

struct PoolDistributionPayload {
  std::uint8_t pool = 0;  // 1 main, 2 storage, 3 storage-main
  PublicId recipient = 0;
  Amount amount = 0;
  Height window_start = 0;
};

using TxPayload =
    std::variant<PaymentPayload, TicketPurchasePayload, VotePayload, CoinbaseMintPayload,
                 PublishPayload, StoredPayload, SolveTxPayload, ValidateTxPayload, SealTxPayload,
                 BidTxPayload, AskTxPayload, DealTxPayload, MicropaymentClaimPayload,
                 PoolDistributionPayload>;

struct Transaction {
  TxId id = 0;
  Amount fee_tr = 0;
  TxPayload payload;

  TxKind kind() const { return static_cast<TxKind>(payload.index()); }

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&payload);
  }
};

// Storage-market transactions feed the storage-main interaction pool with a
// cut of their fees.
inline bool is_storage_tx(TxKind k) {
  return k == TxKind::Bid || k == TxKind::Ask || k == TxKind::Deal ||
         k == TxKind::MicropaymentClaim;
}

inline bool is_competition_tx(TxKind k) {
  return k == TxKind::Publish || k == TxKind::Stored || k == TxKind::Solve ||
         k == TxKind::Validate || k == TxKind::Seal || k == TxKind::Bid || k == TxKind::Ask ||
         k == TxKind::Deal || k == TxKind::MicropaymentClaim;
}

}  // namespace poaw
