#include "poaw/tx.hpp"

namespace poaw {

const char* tx_kind_name(TxKind k) {
  switch (k) {
    case TxKind::Payment: return "payment";
    case TxKind::TicketPurchase: return "ticket_purchase";
    case TxKind::Vote: return "vote";
    case TxKind::CoinbaseMint: return "coinbase_mint";
    case TxKind::Publish: return "publish";
    case TxKind::Stored: return "stored";
    case TxKind::Solve: return "solve";
    case TxKind::Validate: return "validate";
    case TxKind::Seal: return "seal";
    case TxKind::Bid: return "bid";
    case TxKind::Ask: return "ask";
    case TxKind::Deal: return "deal";
    case TxKind::MicropaymentClaim: return "micropayment_claim";
    case TxKind::PoolDistribution: return "pool_distribution";
  }
  return "?";
}

}  // namespace poaw
