#pragma once

#include <cstdint>

#include "poaw/params.hpp"
#include "poaw/sim.hpp"

namespace poaw {

// O(1) adversary vs. a pure-PoS control agent with equal capital. The
// adversary publishes tasks whose optimum it already knows and wins them
// back after the freeze.
struct O1Report {
  double adversary_factor = 0.0;   // realized (winner fee + vstakes) / fee_solve
  double pos_factor = 0.0;         // realized ticket payback factor
  double analytic_adversary = 0.0;
  double analytic_pos = 0.0;
  std::uint64_t adversary_cycles = 0;
  std::uint64_t pos_cycles = 0;
  double win_rate = 0.0;  // share of own sealed tasks the adversary won
  bool dominance = false; // PoS beats the adversary, realized
  Metrics metrics;
};

O1Report run_o1_attack(const ProtocolParams& params, std::uint64_t horizon, std::uint64_t seed,
                       double task_rate = 1.0, Amount fee_solve = 1'000'000,
                       bool honest_rival = false);

struct SSAReport {
  Amount ssa_fees_paid = 0;
  Amount ssa_winnings = 0;       // winner fees + vstakes at face value
  Amount ssa_retrieval_cost = 0;
  Amount net = 0;
  std::uint64_t sealed = 0;
  std::uint64_t honest_wins = 0;
  std::uint64_t ssa_wins = 0;
  double honest_win_rate = 0.0;
  Metrics metrics;
};

SSAReport run_ssa_attack(const ProtocolParams& params, std::uint64_t horizon, std::uint64_t seed,
                         double spam_rate, Amount spam_fee, bool honest_present = true,
                         Amount ssa_budget = 1'000'000'000);

// Private-fork 51% attempt: the adversary mines a conflicting chain with
// hash share h and controls stake share s of the ticket pool; success when
// fork_choice picks its chain within the horizon.
struct ForkReport {
  std::uint32_t trials = 0;
  std::uint32_t successes = 0;
  double success_rate = 0.0;
};

ForkReport run_fork_attack(const ProtocolParams& params, double hash_share, double stake_share,
                           std::uint32_t trials, std::uint64_t horizon, std::uint64_t seed);

// Selfish mining with and without the PoS-approval fork rule. Under PoS
// approval a withheld block never collects votes, so released private
// chains lose to the approved public chain.
struct WithholdReport {
  double hash_share = 0.0;
  bool pos_approval = false;
  std::uint64_t adversary_blocks = 0;
  std::uint64_t honest_blocks = 0;
  double relative_revenue = 0.0;
};

WithholdReport run_withhold_attack(double hash_share, bool pos_approval, std::uint64_t rounds,
                                   std::uint64_t seed, double gamma = 0.5);

struct CollusionReport {
  std::uint64_t sealed = 0;
  std::uint64_t honest_wins = 0;
  std::uint64_t defector_wins = 0;
  std::uint64_t cartel_wins = 0;
  double honest_win_rate = 0.0;
  Metrics metrics;
};

CollusionReport run_collusion(const ProtocolParams& params, std::uint32_t colluders,
                              bool with_honest, bool with_defector, std::uint64_t horizon,
                              std::uint64_t seed);

}  // namespace poaw
