#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "poaw/chain.hpp"
#include "poaw/ledger.hpp"
#include "poaw/params.hpp"

namespace poaw {

enum class AgentKind : std::uint8_t {
  HonestSolver,
  HashMiner,
  PoSMiner,
  StorageMiner,
  O1Adversary,
  SSAAdversary,
  ForkAdversary,
  WithholdAdversary,
  Colluder,
};

const char* agent_kind_name(AgentKind k);
std::optional<AgentKind> agent_kind_from_name(const std::string& name);

struct AgentStrategy {
  AgentKind kind = AgentKind::HashMiner;
  double hash_share = 0.0;        // share of the PoW block lottery
  std::uint32_t attempts_per_block = 0;  // solver effort
  Amount initial_balance = 0;
  Amount stake_budget = 0;        // PoS: funds earmarked for tickets
  double spam_rate = 0.0;         // SSA: solves per competition per block
  Amount solve_fee = 0;           // fee_tr attached to solve transactions
  std::uint32_t group_id = 0;     // collusion group
  bool defector = false;          // colluder that actually solves
  double task_rate = 0.0;         // O(1): own tasks published per block
  double failure_rate = 0.0;      // storage: per-block chance to go silent
  Height fail_at = 0;             // storage: deterministic failure height (0 = never)
  bool use_vstakes = true;        // spend earned vstakes on tickets
};

struct TaskStreamSpec {
  double rate = 0.0;  // expected client tasks per block
  std::string kind = "knapsack";  // knapsack | max_clique | mixed
  std::uint32_t size = 10;        // items or vertices
  Amount fee_solve = 1'000'000;
  Amount fee_sub = 10;
  std::uint32_t data_bytes = 64;
  std::uint32_t difficulty_lo = 8;    // attempts-to-optimum range
  std::uint32_t difficulty_hi = 64;
};

enum class AssemblyStrategy : std::uint8_t {
  FeeScorePriority,  // default: prefer improving scores, then fees
  ExcludeSolves,     // ablation for the equilibrium check
};

struct SimConfig {
  ProtocolParams protocol;
  std::vector<AgentStrategy> agents;
  std::uint64_t horizon = 1000;
  std::uint64_t seed = 1;
  TaskStreamSpec task_stream;
  AssemblyStrategy assembly = AssemblyStrategy::FeeScorePriority;
  std::uint32_t invariant_every = 256;  // conservation cadence (0 = end only)
  bool collect_chain = false;           // retain the block sequence in Metrics

  std::optional<std::string> validate() const;  // offending key on error
};

struct AgentMetrics {
  PublicId id = 0;
  AgentKind kind{};
  Amount initial_balance = 0;
  Amount final_balance = 0;
  Amount income_total = 0;  // sum of positive currency flows
  Amount spend_total = 0;   // sum of negative currency flows
  Amount vstakes_earned = 0;
  Amount vstakes_spent = 0;
  Amount final_vstakes = 0;
  std::uint64_t blocks_signed = 0;
  std::uint64_t competitions_won = 0;
  std::uint64_t solves_submitted = 0;
  std::uint64_t tickets_bought = 0;
  std::uint64_t tickets_voted = 0;
  std::uint64_t tickets_missed = 0;
  Amount ticket_stake_total = 0;   // sum of y over settled tickets
  Amount ticket_return_total = 0;  // currency payouts plus vstake refunds at face
  std::uint64_t own_tasks_published = 0;
  std::uint64_t own_tasks_sealed = 0;
  std::uint64_t own_tasks_won = 0;
  Amount own_task_fee_solve = 0;   // fee_solve across own sealed tasks
  Amount own_task_return = 0;      // winner fees + vstakes minted back
  Amount fees_paid = 0;
  std::map<FlowTag, Amount> flow_by_tag;

  bool operator==(const AgentMetrics&) const = default;

  double realized_ticket_factor() const {
    return ticket_stake_total > 0
               ? static_cast<double>(ticket_return_total) / static_cast<double>(ticket_stake_total)
               : 0.0;
  }
  double realized_o1_factor() const {
    return own_task_fee_solve > 0
               ? static_cast<double>(own_task_return) / static_cast<double>(own_task_fee_solve)
               : 0.0;
  }
};

struct Metrics {
  std::vector<AgentMetrics> agents;
  std::uint64_t blocks = 0;
  std::uint64_t competitions_started = 0;
  std::uint64_t competitions_sealed = 0;
  std::uint64_t competitions_failed = 0;
  std::map<std::string, std::uint64_t> tx_counts;
  Amount pool_main_paid = 0;
  Amount pool_storage_paid = 0;
  Amount pool_sm_paid = 0;
  std::uint64_t tickets_expired_total = 0;
  std::uint64_t tickets_voted_total = 0;
  double mean_live_pool = 0.0;   // averaged after burn-in
  std::uint64_t pool_samples = 0;
  std::uint64_t min_live_pool = 0;
  std::uint64_t max_live_pool = 0;
  Height burn_in_height = 0;
  std::uint64_t post_burnin_voted = 0;    // settlements of tickets bought after burn-in
  std::uint64_t post_burnin_expired = 0;
  bool invariant_violation = false;
  std::string invariant_detail;
  std::uint64_t lone_dtmn_flags = 0;  // dishonest-dTMN single-node reports
  std::vector<Block> chain_blocks;          // only when collect_chain
  std::map<PublicId, Amount> genesis_balances;
  LedgerState final_state;                  // only when collect_chain

  bool operator==(const Metrics&) const = default;

  const AgentMetrics* find_agent(PublicId id) const;
  const AgentMetrics* first_of(AgentKind kind) const;
};

// Deterministic block-by-block scenario execution; a pure function of the
// config (seed included).
Metrics run_scenario(const SimConfig& config);

// The synthetic client that feeds the task stream.
constexpr PublicId kClientId = 1;
// Agents are numbered from here in config order.
constexpr PublicId kFirstAgentId = 101;

}  // namespace poaw
