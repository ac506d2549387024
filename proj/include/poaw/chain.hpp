#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poaw/digest.hpp"
#include "poaw/ledger.hpp"
#include "poaw/params.hpp"
#include "poaw/tx.hpp"

namespace poaw {

struct PowProof {
  std::uint64_t nonce = 0;
  Digest digest{};

  bool operator==(const PowProof&) const = default;
};

struct Block {
  Height height = 0;
  Digest parent_digest{};
  PublicId signer = 0;
  std::uint64_t tick = 0;        // simulation time the block was found
  std::uint64_t target = 0;      // difficulty target the proof met
  PowProof pow;
  Digest header_seed{};          // lottery seed, derived from the proof digest
  std::vector<Transaction> votes;  // at most votes_per_block Vote transactions
  std::vector<Transaction> txs;
};

// Digest of everything the nonce commits to.
Digest block_work_root(const Block& block);
Digest make_header_seed(const Digest& pow_digest);

// Brute-force nonce search; digest64(root||nonce) must fall below target.
std::optional<PowProof> solve_pow(const Digest& work_root, std::uint64_t target,
                                  std::uint64_t max_attempts = UINT64_MAX);
bool verify_pow(const Digest& work_root, const PowProof& proof, std::uint64_t target);

// Multiplicative controller on the observed mean block interval, clamped to
// [old/4, old*4].
std::uint64_t adjust_difficulty(std::uint64_t old_target,
                                std::span<const std::uint64_t> block_ticks,
                                std::uint64_t target_interval);

Block make_genesis();

enum class BlockReject : std::uint8_t {
  None,
  BadPow,
  InsufficientVotes,
  IllegalTx,
};

struct BlockVerdict {
  bool accepted = false;
  BlockReject reject = BlockReject::None;
  TxId offending_tx = 0;
  std::string reason;

  static BlockVerdict accept() { return BlockVerdict{true, BlockReject::None, 0, ""}; }
};

// Full block application: header checks, vote settlement, coinbase, every
// transaction, and the distribution-window boundary. Mutates state only on
// a fully legal block when `commit` is true.
BlockVerdict apply_block(LedgerState& state, const Block& block, const Block& parent,
                         const ProtocolParams& params, ApplyEvents& ev);

// Validation without mutation (runs the application against a scratch copy).
BlockVerdict validate_block(const LedgerState& state, const Block& block, const Block& parent,
                            const ProtocolParams& params);

struct Chain {
  std::vector<Block> blocks;  // [0] is genesis

  const Block& tip() const { return blocks.back(); }
};

struct ChainScore {
  std::uint64_t approvals = 0;
  unsigned __int128 work = 0;
  Digest tip_digest{};
};

ChainScore score_chain(const Chain& chain, const ProtocolParams& params);

// PoW proposes, PoS approves: the chain with the most PoS-approved blocks
// wins; ties fall back to accumulated work, then to the smaller tip digest.
std::size_t fork_choice(std::span<const Chain> chains, const ProtocolParams& params);

// Line-delimited records, one block per line, stable field order.
void dump_chain(std::ostream& os, const Chain& chain);
Chain restore_chain(std::istream& is);  // throws std::runtime_error on malformed input

}  // namespace poaw
