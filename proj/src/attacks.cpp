#include "poaw/attacks.hpp"

#include <algorithm>

#include "poaw/chain.hpp"
#include "poaw/econ.hpp"
#include "poaw/rng.hpp"

namespace poaw {

static AgentStrategy storage_agent(Amount balance = 10'000'000) {
  AgentStrategy s;
  s.kind = AgentKind::StorageMiner;
  s.initial_balance = balance;
  return s;
}

static AgentStrategy hash_agent(double share) {
  AgentStrategy s;
  s.kind = AgentKind::HashMiner;
  s.hash_share = share;
  s.initial_balance = 1'000'000;
  return s;
}

O1Report run_o1_attack(const ProtocolParams& params, std::uint64_t horizon, std::uint64_t seed,
                       double task_rate, Amount fee_solve, bool honest_rival) {
  SimConfig cfg;
  cfg.protocol = params;
  cfg.horizon = horizon;
  cfg.seed = seed;
  cfg.task_stream.rate = 0.0;  // only the adversary publishes
  cfg.task_stream.kind = "knapsack";
  cfg.task_stream.size = 8;
  cfg.task_stream.fee_solve = fee_solve;
  cfg.task_stream.fee_sub = 1;
  cfg.task_stream.data_bytes = 16;
  cfg.task_stream.difficulty_lo = 8;
  cfg.task_stream.difficulty_hi = 32;

  AgentStrategy adversary;
  adversary.kind = AgentKind::O1Adversary;
  adversary.task_rate = task_rate;
  adversary.initial_balance = 4'000'000'000;
  adversary.solve_fee = 0;
  adversary.use_vstakes = false;  // vstakes counted at face value, never spent
  cfg.agents.push_back(adversary);

  AgentStrategy control;
  control.kind = AgentKind::PoSMiner;
  control.stake_budget = 1;  // opt in to the ticket demand rotation
  control.use_vstakes = false;
  control.initial_balance =
      static_cast<Amount>(params.ticket_pool_target + 5 * params.ticket_maturity + 64) *
      params.base_ticket_price * 2;
  cfg.agents.push_back(control);

  cfg.agents.push_back(hash_agent(1.0));
  for (std::uint32_t i = 0; i < params.r_s; ++i) cfg.agents.push_back(storage_agent());

  if (honest_rival) {
    AgentStrategy rival;
    rival.kind = AgentKind::HonestSolver;
    rival.attempts_per_block = 64;
    rival.initial_balance = 10'000'000;
    rival.solve_fee = 10;
    cfg.agents.push_back(rival);
    cfg.protocol.block_tx_capacity = 24;  // tight blocks make fee priority bite
  }

  O1Report report;
  report.metrics = run_scenario(cfg);
  const AgentMetrics* adv = report.metrics.first_of(AgentKind::O1Adversary);
  const AgentMetrics* pos = report.metrics.first_of(AgentKind::PoSMiner);
  report.adversary_factor = adv->realized_o1_factor();
  report.pos_factor = pos->realized_ticket_factor();
  report.analytic_adversary = o1_adversary_factor(params.p_vstake, params.p_pools());
  report.analytic_pos = expected_pos_factor(params.r);
  report.adversary_cycles = adv->own_tasks_sealed;
  report.pos_cycles = pos->tickets_voted + pos->tickets_missed;
  report.win_rate = adv->own_tasks_sealed > 0
                        ? static_cast<double>(adv->own_tasks_won) /
                              static_cast<double>(adv->own_tasks_sealed)
                        : 0.0;
  report.dominance = report.pos_factor > report.adversary_factor;
  return report;
}

SSAReport run_ssa_attack(const ProtocolParams& params, std::uint64_t horizon, std::uint64_t seed,
                         double spam_rate, Amount spam_fee, bool honest_present,
                         Amount ssa_budget) {
  SimConfig cfg;
  cfg.protocol = params;
  cfg.horizon = horizon;
  cfg.seed = seed;
  cfg.task_stream.rate = 0.5;
  cfg.task_stream.kind = "knapsack";
  cfg.task_stream.size = 10;
  cfg.task_stream.fee_solve = 1'000'000;
  cfg.task_stream.fee_sub = 10;
  cfg.task_stream.difficulty_lo = 8;
  cfg.task_stream.difficulty_hi = 48;

  AgentStrategy ssa;
  ssa.kind = AgentKind::SSAAdversary;
  ssa.spam_rate = spam_rate;
  ssa.solve_fee = spam_fee;
  ssa.initial_balance = ssa_budget;
  cfg.agents.push_back(ssa);

  if (honest_present) {
    AgentStrategy honest;
    honest.kind = AgentKind::HonestSolver;
    honest.attempts_per_block = 32;
    honest.initial_balance = 10'000'000;
    honest.solve_fee = 1;
    cfg.agents.push_back(honest);
  }

  cfg.agents.push_back(hash_agent(1.0));
  for (std::uint32_t i = 0; i < params.r_s; ++i) cfg.agents.push_back(storage_agent());

  SSAReport report;
  report.metrics = run_scenario(cfg);
  const AgentMetrics* ssa_m = report.metrics.first_of(AgentKind::SSAAdversary);
  report.ssa_fees_paid = ssa_m->fees_paid;
  Amount winner_income = 0;
  if (auto it = ssa_m->flow_by_tag.find(FlowTag::WinnerFee); it != ssa_m->flow_by_tag.end())
    winner_income = it->second;
  Amount vstake_income = 0;
  if (auto it = ssa_m->flow_by_tag.find(FlowTag::VstakeMint); it != ssa_m->flow_by_tag.end())
    vstake_income = it->second;
  Amount deposits = 0, releases = 0;
  if (auto it = ssa_m->flow_by_tag.find(FlowTag::ChannelDeposit); it != ssa_m->flow_by_tag.end())
    deposits = -it->second;
  if (auto it = ssa_m->flow_by_tag.find(FlowTag::ChannelRelease); it != ssa_m->flow_by_tag.end())
    releases = it->second;
  report.ssa_retrieval_cost = deposits - releases;
  report.ssa_winnings = winner_income + vstake_income;
  report.net = report.ssa_winnings - report.ssa_fees_paid - report.ssa_retrieval_cost;
  report.sealed = report.metrics.competitions_sealed;
  report.ssa_wins = ssa_m->competitions_won;
  if (honest_present) {
    const AgentMetrics* honest_m = report.metrics.first_of(AgentKind::HonestSolver);
    report.honest_wins = honest_m->competitions_won;
    report.honest_win_rate = report.sealed > 0 ? static_cast<double>(report.honest_wins) /
                                                     static_cast<double>(report.sealed)
                                               : 0.0;
  }
  return report;
}

// ---- fork attack ----

static Block extend_chain(Chain& chain, std::uint32_t approvals_present,
                          const ProtocolParams& params, TxId& next_id) {
  const Block& parent = chain.tip();
  Block b;
  b.height = parent.height + 1;
  b.parent_digest = parent.pow.digest;
  b.signer = 0;
  b.tick = b.height;
  b.target = static_cast<std::uint64_t>(1) << 63;
  for (std::uint32_t i = 0; i < approvals_present; ++i) {
    Transaction vote;
    vote.id = next_id++;
    vote.payload = VotePayload{next_id, 0, parent.pow.digest, true};
    b.votes.push_back(std::move(vote));
  }
  (void)params;
  Digest root = block_work_root(b);
  b.pow = *solve_pow(root, b.target);
  b.header_seed = make_header_seed(b.pow.digest);
  chain.blocks.push_back(std::move(b));
  return chain.tip();
}

static std::uint32_t ballots_for(DetRng& rng, double owner_share, std::uint32_t votes_per_block) {
  std::uint32_t count = 0;
  for (std::uint32_t i = 0; i < votes_per_block; ++i)
    if (rng.chance(owner_share)) ++count;
  return count;
}

ForkReport run_fork_attack(const ProtocolParams& params, double hash_share, double stake_share,
                           std::uint32_t trials, std::uint64_t horizon, std::uint64_t seed) {
  ForkReport report;
  report.trials = trials;
  DetRng master(seed);
  for (std::uint32_t t = 0; t < trials; ++t) {
    DetRng rng = master.fork(t + 1);
    Chain honest, adversary;
    honest.blocks.push_back(make_genesis());
    adversary.blocks.push_back(make_genesis());
    TxId next_id = 1;
    bool success = false;
    for (std::uint64_t step = 0; step < horizon && !success; ++step) {
      if (rng.chance(hash_share)) {
        // the adversary mines privately; only its own tickets vote there
        std::uint32_t k = ballots_for(rng, stake_share, params.votes_per_block);
        extend_chain(adversary, k, params, next_id);
      } else {
        // honest network extends the public chain; adversary tickets abstain
        std::uint32_t k = ballots_for(rng, 1.0 - stake_share, params.votes_per_block);
        extend_chain(honest, k, params, next_id);
      }
      if (adversary.blocks.size() > 1) {
        Chain chains[2] = {honest, adversary};
        if (fork_choice(std::span<const Chain>(chains, 2), params) == 1) success = true;
      }
    }
    if (success) report.successes++;
  }
  report.success_rate =
      trials > 0 ? static_cast<double>(report.successes) / static_cast<double>(trials) : 0.0;
  return report;
}

// ---- block withholding ----

WithholdReport run_withhold_attack(double hash_share, bool pos_approval, std::uint64_t rounds,
                                   std::uint64_t seed, double gamma) {
  WithholdReport report;
  report.hash_share = hash_share;
  report.pos_approval = pos_approval;
  DetRng rng(seed);

  std::uint64_t adversary_revenue = 0;
  std::uint64_t honest_revenue = 0;
  std::uint64_t private_lead = 0;

  for (std::uint64_t i = 0; i < rounds; ++i) {
    bool adversary_found = rng.chance(hash_share);
    if (adversary_found) {
      ++private_lead;
      continue;
    }
    // honest network finds a block
    if (private_lead == 0) {
      ++honest_revenue;
    } else if (private_lead == 1) {
      // the adversary publishes its withheld block and races
      if (pos_approval) {
        // voters already approved the public block at this height; the
        // late block never collects a majority
        ++honest_revenue;
      } else {
        double roll = rng.unit();
        if (roll < hash_share) {
          // adversary extends its own raced block first
          adversary_revenue += 2;
        } else if (roll < hash_share + (1.0 - hash_share) * gamma) {
          adversary_revenue += 1;
          honest_revenue += 1;
        } else {
          honest_revenue += 2;
        }
      }
      private_lead = 0;
    } else if (private_lead == 2) {
      if (pos_approval) {
        honest_revenue += 2;  // both private blocks orphan against approvals
      } else {
        adversary_revenue += 2;
      }
      private_lead = 0;
    } else {
      if (pos_approval) {
        ++honest_revenue;
        // the private chain is already doomed; count its blocks as orphaned
        // once the adversary finally abandons it
        if (private_lead > 0) --private_lead;
      } else {
        ++adversary_revenue;  // the adversary reveals one block, stays ahead
        --private_lead;
      }
    }
  }
  if (!pos_approval && private_lead >= 2) adversary_revenue += private_lead;

  report.adversary_blocks = adversary_revenue;
  report.honest_blocks = honest_revenue;
  std::uint64_t total = adversary_revenue + honest_revenue;
  report.relative_revenue =
      total > 0 ? static_cast<double>(adversary_revenue) / static_cast<double>(total) : 0.0;
  return report;
}

CollusionReport run_collusion(const ProtocolParams& params, std::uint32_t colluders,
                              bool with_honest, bool with_defector, std::uint64_t horizon,
                              std::uint64_t seed) {
  SimConfig cfg;
  cfg.protocol = params;
  cfg.horizon = horizon;
  cfg.seed = seed;
  cfg.task_stream.rate = 0.5;
  cfg.task_stream.kind = "knapsack";
  cfg.task_stream.size = 10;
  cfg.task_stream.fee_solve = 1'000'000;
  cfg.task_stream.fee_sub = 10;
  cfg.task_stream.difficulty_lo = 8;
  cfg.task_stream.difficulty_hi = 48;

  for (std::uint32_t i = 0; i < colluders; ++i) {
    AgentStrategy c;
    c.kind = AgentKind::Colluder;
    c.group_id = 1;
    c.defector = with_defector && i == 0;
    c.attempts_per_block = 32;
    c.initial_balance = 10'000'000;
    c.solve_fee = 1;
    cfg.agents.push_back(c);
  }
  if (with_honest) {
    AgentStrategy honest;
    honest.kind = AgentKind::HonestSolver;
    honest.attempts_per_block = 32;
    honest.initial_balance = 10'000'000;
    honest.solve_fee = 1;
    cfg.agents.push_back(honest);
  }
  cfg.agents.push_back(hash_agent(1.0));
  for (std::uint32_t i = 0; i < params.r_s; ++i) cfg.agents.push_back(storage_agent());

  CollusionReport report;
  report.metrics = run_scenario(cfg);
  report.sealed = report.metrics.competitions_sealed;
  for (const AgentMetrics& a : report.metrics.agents) {
    if (a.kind == AgentKind::HonestSolver) report.honest_wins += a.competitions_won;
    if (a.kind == AgentKind::Colluder) {
      const AgentStrategy& strat = cfg.agents.at(a.id - kFirstAgentId);
      if (strat.defector)
        report.defector_wins += a.competitions_won;
      else
        report.cartel_wins += a.competitions_won;
    }
  }
  report.honest_win_rate = report.sealed > 0 ? static_cast<double>(report.honest_wins) /
                                                   static_cast<double>(report.sealed)
                                             : 0.0;
  return report;
}

}  // namespace poaw
