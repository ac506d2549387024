#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "poaw/commitment.hpp"
#include "poaw/money.hpp"
#include "poaw/params.hpp"
#include "poaw/task.hpp"

namespace poaw {

// A promised fee <o, p, b>: fraction p of the trigger payment o, payable at
// least b blocks after the trigger, and only if the competition succeeds.
struct PromisedFee {
  Fraction p{};
  std::uint64_t min_delay_blocks = 0;

  bool operator==(const PromisedFee&) const = default;
};

struct PfSchedule {
  PromisedFee main_chain;
  PromisedFee storage;
  PromisedFee validation;

  Fraction pools_total() const {
    return Fraction{main_chain.p.num + storage.p.num + validation.p.num};
  }
  static PfSchedule from_params(const ProtocolParams& p) {
    return PfSchedule{{p.p_pool_main_frac(), p.pf_delay_blocks},
                      {p.p_pool_storage_frac(), p.pf_delay_blocks},
                      {p.p_validation_frac(), p.pf_delay_blocks}};
  }

  bool operator==(const PfSchedule&) const = default;
};

enum class Phase : std::uint8_t { Store, Freeze, Compete, Validate, Seal };

const char* phase_name(Phase p);

struct AdmittedSolve {
  TxId tx_id = 0;
  PublicId miner = 0;
  Commitment commitment;
  double declared_score = 0.0;
  Height height = 0;  // inclusion height
  PublicId storage_source = 0;

  bool operator==(const AdmittedSolve&) const = default;
};

// One member's vote list: the solve tx ids it validated, ascending.
using VoteList = std::vector<TxId>;

// Kept off-chain by each member between Validate and Seal.
struct VoteEnvelope {
  std::uint64_t key = 0;
  VoteList votes;

  bool operator==(const VoteEnvelope&) const = default;
};

Digest seal_vote_commitment(PublicId member, const VoteEnvelope& env);

enum class CompetitionOutcome : std::uint8_t { Open, Sealed, Failed };

struct CompetitionState {
  TaskId id = 0;
  SlimTask task;
  Amount fee_solve = 0;
  Amount fee_sub = 0;
  PfSchedule schedule;
  PublicId client = 0;
  TxId publish_tx = 0;

  Height stored_height = 0;
  std::uint64_t nb_freeze = 0;
  std::uint64_t nb_compete = 0;
  std::uint64_t nb_validate = 0;
  bool opened = false;  // set once the Stored transaction is in-chain

  std::vector<AdmittedSolve> admitted;  // ledger order

  // Validate transaction content: per-member keyed-digest commitments.
  std::map<PublicId, Digest> vote_commitments;
  bool validate_posted = false;

  CompetitionOutcome outcome = CompetitionOutcome::Open;
  Height resolved_height = 0;
  std::vector<TxId> winning_solves;
  std::vector<PublicId> winners;
  double winning_score = 0.0;

  bool operator==(const CompetitionState&) const = default;

  Height compete_start() const { return stored_height + nb_freeze; }
  Height validate_start() const { return compete_start() + nb_compete; }
  Height seal_start() const { return validate_start() + nb_validate; }
};

Phase phase_of(const CompetitionState& comp, Height height);

enum class AdmitVerdict : std::uint8_t {
  Accepted,
  Frozen,
  WrongPhase,
  MalformedCommitment,
  UnknownCompetition,
};

const char* admit_verdict_name(AdmitVerdict v);

// Phase and shape checks only; appending to comp.admitted is the caller's
// (ledger's) job so the admitted list stays in ledger order.
AdmitVerdict check_solve_admission(const CompetitionState& comp, const Commitment& commitment,
                                   double declared_score, Height height);

enum class ValidateError : std::uint8_t { DtmnFailed, NotInValidatePhase };

struct ValidationResult {
  std::map<PublicId, Digest> commitments;     // goes in-chain
  std::map<PublicId, VoteEnvelope> envelopes;  // retained by members for the seal
};

// Every live member independently replays the reveals: a solve is validated
// when its reveal matches the commitment and the recomputed score equals the
// declared score. Vote lists are committed under per-member keys so members
// cannot copy the current majority.
std::variant<ValidationResult, ValidateError> validate_solutions(
    const CompetitionState& comp, const std::vector<PublicId>& live_members,
    const std::map<TxId, Reveal>& revealed, Height height, DetRng& key_rng);

struct SealDecision {
  bool success = false;
  std::string failure_reason;            // "no_consensus" | "no_valid_solves"
  std::vector<TxId> winning_solves;      // earliest block, best score
  std::vector<PublicId> winners;         // miners of those solves (deduplicated, sorted)
  double winning_score = 0.0;
  std::vector<PublicId> verified_voters;  // members whose envelopes opened correctly
};

// Opens envelopes against the in-chain commitments, forms the consensus
// (majority of formation members per solve) and picks the winner(s): best
// score under the task objective, earliest block first; several solves win
// only on an exact tie in the same block.
SealDecision seal_competition(const CompetitionState& comp,
                              const std::vector<PublicId>& formation_members,
                              const std::map<PublicId, VoteEnvelope>& keys);

}  // namespace poaw
