#include "poaw/competition.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace poaw {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Store: return "store";
    case Phase::Freeze: return "freeze";
    case Phase::Compete: return "compete";
    case Phase::Validate: return "validate";
    case Phase::Seal: return "seal";
  }
  return "?";
}

const char* admit_verdict_name(AdmitVerdict v) {
  switch (v) {
    case AdmitVerdict::Accepted: return "accepted";
    case AdmitVerdict::Frozen: return "frozen";
    case AdmitVerdict::WrongPhase: return "wrong_phase";
    case AdmitVerdict::MalformedCommitment: return "malformed_commitment";
    case AdmitVerdict::UnknownCompetition: return "unknown_competition";
  }
  return "?";
}

Phase phase_of(const CompetitionState& comp, Height height) {
  if (height < comp.stored_height) return Phase::Store;
  if (height < comp.compete_start()) return Phase::Freeze;
  if (height < comp.validate_start()) return Phase::Compete;
  if (height < comp.seal_start()) return Phase::Validate;
  return Phase::Seal;
}

AdmitVerdict check_solve_admission(const CompetitionState& comp, const Commitment& commitment,
                                   double declared_score, Height height) {
  if (!comp.opened) return AdmitVerdict::UnknownCompetition;
  Phase ph = phase_of(comp, height);
  if (ph == Phase::Freeze) return AdmitVerdict::Frozen;
  if (ph != Phase::Compete) return AdmitVerdict::WrongPhase;
  if (!std::isfinite(declared_score)) return AdmitVerdict::MalformedCommitment;
  if (const auto* sc = std::get_if<ShardCommit>(&commitment.form)) {
    if (sc->n_shards == 0) return AdmitVerdict::MalformedCommitment;
  }
  return AdmitVerdict::Accepted;
}

Digest seal_vote_commitment(PublicId member, const VoteEnvelope& env) {
  DigestWriter w;
  w.u64(env.key).u32(member).u64(env.votes.size());
  for (TxId id : env.votes) w.u64(id);
  return w.finalize();
}

std::variant<ValidationResult, ValidateError> validate_solutions(
    const CompetitionState& comp, const std::vector<PublicId>& live_members,
    const std::map<TxId, Reveal>& revealed, Height height, DetRng& key_rng) {
  if (live_members.empty()) return ValidateError::DtmnFailed;
  if (phase_of(comp, height) != Phase::Validate) return ValidateError::NotInValidatePhase;

  // All honest members derive the same list; a solve with no reveal, a broken
  // commitment, or a score mismatch is irrelevant.
  VoteList valid;
  for (const AdmittedSolve& solve : comp.admitted) {
    auto it = revealed.find(solve.tx_id);
    if (it == revealed.end()) continue;
    if (!commitment_matches(solve.commitment, it->second)) continue;
    ScoreOutcome sc = score_solution(comp.task, it->second.solution);
    if (!sc.ok()) continue;
    if (!scores_equal(sc.value, solve.declared_score)) continue;
    valid.push_back(solve.tx_id);
  }
  std::sort(valid.begin(), valid.end());

  ValidationResult result;
  for (PublicId member : live_members) {
    VoteEnvelope env{key_rng.next(), valid};
    result.commitments[member] = seal_vote_commitment(member, env);
    result.envelopes[member] = std::move(env);
  }
  return result;
}

SealDecision seal_competition(const CompetitionState& comp,
                              const std::vector<PublicId>& formation_members,
                              const std::map<PublicId, VoteEnvelope>& keys) {
  SealDecision out;

  const std::size_t majority = formation_members.size() / 2 + 1;
  std::map<TxId, std::size_t> approvals;
  for (PublicId member : formation_members) {
    auto commit_it = comp.vote_commitments.find(member);
    auto key_it = keys.find(member);
    if (commit_it == comp.vote_commitments.end() || key_it == keys.end()) continue;
    if (seal_vote_commitment(member, key_it->second) != commit_it->second) continue;
    out.verified_voters.push_back(member);
    for (TxId id : key_it->second.votes) approvals[id]++;
  }

  if (out.verified_voters.size() < majority) {
    out.failure_reason = "no_consensus";
    return out;
  }

  // Consensus-valid solves, scanned in ledger order.
  const AdmittedSolve* best = nullptr;
  for (const AdmittedSolve& solve : comp.admitted) {
    auto it = approvals.find(solve.tx_id);
    if (it == approvals.end() || it->second < majority) continue;
    if (best == nullptr || score_better(comp.task.objective, solve.declared_score,
                                        best->declared_score)) {
      best = &solve;
    }
  }
  if (best == nullptr) {
    out.failure_reason = "no_valid_solves";
    return out;
  }

  // Several solves win only when they tie exactly in the best solve's block.
  std::set<PublicId> winner_ids;
  for (const AdmittedSolve& solve : comp.admitted) {
    if (solve.height != best->height) continue;
    if (!scores_equal(solve.declared_score, best->declared_score)) continue;
    auto it = approvals.find(solve.tx_id);
    if (it == approvals.end() || it->second < majority) continue;
    out.winning_solves.push_back(solve.tx_id);
    winner_ids.insert(solve.miner);
  }
  out.winners.assign(winner_ids.begin(), winner_ids.end());
  out.winning_score = best->declared_score;
  out.success = true;
  return out;
}

}  // namespace poaw
