#include "poaw/sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "poaw/rng.hpp"

namespace poaw {

const char* agent_kind_name(AgentKind k) {
  switch (k) {
    case AgentKind::HonestSolver: return "HonestSolver";
    case AgentKind::HashMiner: return "HashMiner";
    case AgentKind::PoSMiner: return "PoSMiner";
    case AgentKind::StorageMiner: return "StorageMiner";
    case AgentKind::O1Adversary: return "O1Adversary";
    case AgentKind::SSAAdversary: return "SSAAdversary";
    case AgentKind::ForkAdversary: return "ForkAdversary";
    case AgentKind::WithholdAdversary: return "WithholdAdversary";
    case AgentKind::Colluder: return "Colluder";
  }
  return "?";
}

std::optional<AgentKind> agent_kind_from_name(const std::string& name) {
  for (int k = 0; k <= static_cast<int>(AgentKind::Colluder); ++k) {
    AgentKind kind = static_cast<AgentKind>(k);
    if (name == agent_kind_name(kind)) return kind;
  }
  return std::nullopt;
}

std::optional<std::string> SimConfig::validate() const {
  if (auto bad = protocol.validate()) return "protocol." + *bad;
  if (horizon == 0) return "horizon";
  if (horizon < protocol.b_distr) return "horizon";
  if (agents.empty()) return "agents";
  double hash_total = 0.0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const AgentStrategy& a = agents[i];
    if (a.hash_share < 0.0 || a.hash_share > 1.0)
      return "agents[" + std::to_string(i) + "].hash_share";
    if (a.initial_balance < 0) return "agents[" + std::to_string(i) + "].initial_balance";
    if (a.spam_rate < 0.0) return "agents[" + std::to_string(i) + "].spam_rate";
    if (a.task_rate < 0.0) return "agents[" + std::to_string(i) + "].task_rate";
    if (a.failure_rate < 0.0 || a.failure_rate > 1.0)
      return "agents[" + std::to_string(i) + "].failure_rate";
    hash_total += a.hash_share;
  }
  if (hash_total <= 0.0) return "agents: no hash power";
  if (hash_total > 1.0 + 1e-9) return "agents: hash shares exceed 1";
  if (task_stream.rate < 0.0) return "task_stream.rate";
  if (task_stream.kind != "knapsack" && task_stream.kind != "max_clique" &&
      task_stream.kind != "mixed")
    return "task_stream.kind";
  if (task_stream.size < 2 || task_stream.size > 20) return "task_stream.size";
  if (task_stream.fee_solve < 0 || task_stream.fee_sub <= 0) return "task_stream.fee_solve";
  if (task_stream.difficulty_lo == 0 || task_stream.difficulty_hi < task_stream.difficulty_lo)
    return "task_stream.difficulty_lo";
  return std::nullopt;
}

const AgentMetrics* Metrics::find_agent(PublicId id) const {
  for (const auto& a : agents)
    if (a.id == id) return &a;
  return nullptr;
}

const AgentMetrics* Metrics::first_of(AgentKind kind) const {
  for (const auto& a : agents)
    if (a.kind == kind) return &a;
  return nullptr;
}

namespace {

struct SolverProgress {
  std::uint64_t attempts = 0;
  bool has_best = false;
  double best = 0.0;
  std::string best_candidate;
  bool submitted = false;
  double last_submitted = 0.0;
};

struct EngineTask {
  TaskId id = 0;
  ComputationalTask full;
  SlimTask slim;
  double optimum_score = 0.0;
  std::string optimum_encoded;
  std::uint64_t difficulty = 1;
  PublicId publisher = 0;
  bool o1 = false;
  Amount fee_solve = 0;
  bool stored = false;
  bool deal_emitted = false;
  Height stored_height = 0;
  std::vector<PublicId> members;
  std::map<Digest, Reveal> reveals;  // commitment digest -> reveal
  std::map<PublicId, VoteEnvelope> envelopes;
  bool validate_emitted = false;
  bool seal_emitted = false;
  bool claims_emitted = false;
  std::set<PublicId> asked;
  std::map<PublicId, std::uint64_t> channels;  // solver -> retrieval channel
  bool has_chain_best = false;
  double chain_best = 0.0;
  std::map<PublicId, SolverProgress> progress;
};

struct PendingTx {
  TxPayload payload;
  Amount fee = 0;
  std::uint64_t seq = 0;
  bool improves = false;  // solve priority input
};

struct AgentRuntime {
  AgentStrategy strategy;
  PublicId id = 0;
  DetRng rng{0};
  bool storage_failed = false;
};

constexpr Amount kDefaultTxFee = 10;
constexpr Amount kRetrievalDeposit = 100;
constexpr Amount kRetrievalPrice = 10;

class SimEngine {
 public:
  explicit SimEngine(const SimConfig& config)
      : cfg_(config),
        params_(config.protocol),
        master_(config.seed),
        task_rng_(master_.fork(1)),
        lottery_rng_(master_.fork(2)),
        dtmn_rng_(master_.fork(3)) {
    for (std::size_t i = 0; i < cfg_.agents.size(); ++i) {
      AgentRuntime rt;
      rt.strategy = cfg_.agents[i];
      rt.id = kFirstAgentId + static_cast<PublicId>(i);
      rt.rng = master_.fork(1000 + i);
      agents_.push_back(std::move(rt));
    }
    std::map<PublicId, Amount> balances;
    balances[kClientId] = client_budget();
    for (const auto& a : agents_) balances[a.id] = a.strategy.initial_balance;
    state_ = make_genesis_state(balances);
    metrics_.genesis_balances = balances;
    chain_.blocks.push_back(make_genesis());

    metrics_.agents.resize(agents_.size());
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      metrics_.agents[i].id = agents_[i].id;
      metrics_.agents[i].kind = agents_[i].strategy.kind;
      metrics_.agents[i].initial_balance = agents_[i].strategy.initial_balance;
    }
    metrics_.burn_in_height = burn_in();
    metrics_.min_live_pool = UINT64_MAX;
  }

  Metrics run() {
    for (Height h = 1; h <= cfg_.horizon; ++h) {
      step(h);
      if (metrics_.invariant_violation) break;
      if (cfg_.invariant_every != 0 && h % cfg_.invariant_every == 0) check_invariants();
    }
    check_invariants();
    finalize();
    return std::move(metrics_);
  }

 private:
  Amount client_budget() const {
    double expected_tasks = cfg_.task_stream.rate * static_cast<double>(cfg_.horizon) + 16.0;
    double per_task =
        static_cast<double>(cfg_.task_stream.fee_solve + cfg_.task_stream.fee_sub + 64);
    double budget = expected_tasks * per_task;
    return static_cast<Amount>(std::min(budget, 2.0e15)) + 1'000'000;
  }

  Height burn_in() const {
    return params_.ticket_pool_target /
               std::max<std::uint64_t>(1, params_.ticket_quota_per_block) * 2 +
           params_.ticket_maturity * 4 + 64;
  }

  AgentRuntime* find_runtime(PublicId id) {
    if (id < kFirstAgentId || id >= kFirstAgentId + agents_.size()) return nullptr;
    return &agents_[id - kFirstAgentId];
  }

  AgentMetrics& agent_metrics(PublicId id) { return metrics_.agents.at(id - kFirstAgentId); }

  bool is_agent(PublicId id) const {
    return id >= kFirstAgentId && id < kFirstAgentId + agents_.size();
  }

  // Spending committed earlier in this block's mempool, so agents never
  // promise more than they hold.
  bool reserve(PublicId id, Amount currency, Amount vstakes = 0) {
    if (state_.balance(id) - planned_[id] < currency) return false;
    if (vstakes > 0 && state_.vstake_balance(id) - planned_vstakes_[id] < vstakes) return false;
    planned_[id] += currency;
    if (vstakes > 0) planned_vstakes_[id] += vstakes;
    return true;
  }

  // ---- task generation ----

  ComputationalTask generate_task(DetRng& rng) {
    ComputationalTask task;
    task.objective = Objective::Maximize;
    std::string kind = cfg_.task_stream.kind;
    if (kind == "mixed") kind = rng.chance(0.5) ? "knapsack" : "max_clique";
    const std::uint32_t n = cfg_.task_stream.size;
    if (kind == "knapsack") {
      KnapsackSpec spec;
      Amount total_w = 0;
      for (std::uint32_t i = 0; i < n; ++i) {
        Amount v = rng.range_i64(1, 100);
        Amount w = rng.range_i64(1, 100);
        spec.items.push_back({v, w});
        total_w += w;
      }
      spec.capacity = std::max<Amount>(1, total_w / 2);
      task.scoring = spec;
    } else {
      MaxCliqueSpec spec;
      spec.vertices = n;
      spec.adjacency.assign(n, 0);
      for (std::uint32_t a = 0; a < n; ++a)
        for (std::uint32_t b = a + 1; b < n; ++b)
          if (rng.chance(0.5)) spec.add_edge(a, b);
      task.scoring = spec;
    }
    task.data.resize(cfg_.task_stream.data_bytes);
    for (auto& byte : task.data) byte = static_cast<std::uint8_t>(rng.below(256));
    return task;
  }

  void publish_task(PublicId publisher, bool o1, DetRng& rng) {
    EngineTask et;
    et.full = generate_task(rng);
    et.slim = make_slim(et.full);
    ExactSolution best = exact_best(et.slim);
    et.optimum_score = best.score;
    et.optimum_encoded = encode_candidate(best.candidate);
    et.difficulty =
        cfg_.task_stream.difficulty_lo +
        rng.below(cfg_.task_stream.difficulty_hi - cfg_.task_stream.difficulty_lo + 1);
    et.publisher = publisher;
    et.o1 = o1;
    et.fee_solve = cfg_.task_stream.fee_solve;

    PublishPayload p;
    p.slim_task = et.slim;
    p.fee_sub = cfg_.task_stream.fee_sub;
    p.fee_solve = et.fee_solve;
    p.pf_solve = PfSchedule::from_params(params_);
    p.client = publisher;
    mempool_.push_back(PendingTx{p, 0, seq_++});
    pending_tasks_.push_back(std::move(et));
  }

  std::string random_candidate(const SlimTask& task, DetRng& rng) {
    std::vector<std::uint32_t> picks;
    if (const auto* ks = std::get_if<KnapsackSpec>(&task.scoring)) {
      std::vector<std::uint32_t> order(ks->items.size());
      for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);
      Amount weight = 0;
      for (std::uint32_t idx : order) {
        if (weight + ks->items[idx].weight > ks->capacity) continue;
        weight += ks->items[idx].weight;
        picks.push_back(idx);
        if (rng.chance(0.25)) break;  // stops early: deliberately imperfect search
      }
    } else {
      const auto& cs = std::get<MaxCliqueSpec>(task.scoring);
      std::vector<std::uint32_t> order(cs.vertices);
      for (std::uint32_t i = 0; i < cs.vertices; ++i) order[i] = i;
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);
      for (std::uint32_t v : order) {
        bool ok = true;
        for (std::uint32_t u : picks)
          if (!cs.has_edge(u, v)) ok = false;
        if (ok) picks.push_back(v);
        if (picks.size() > 1 && rng.chance(0.2)) break;
      }
    }
    std::sort(picks.begin(), picks.end());
    return encode_candidate(picks);
  }

  // A knowingly suboptimal candidate: a feasible selection with its last
  // element removed, which is strictly below the optimum on these task kinds.
  std::string suboptimal_candidate(const SlimTask& task, DetRng& rng) {
    std::string enc = random_candidate(task, rng);
    auto picks = parse_candidate(as_bytes(enc));
    if (!picks || picks->empty()) return std::string();
    picks->pop_back();
    return encode_candidate(*picks);
  }

  static std::span<const std::uint8_t> as_bytes(const std::string& s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
  }

  void submit_solve(EngineTask& task, PublicId miner, const std::string& candidate, double score,
                    Amount fee, bool improves, DetRng& rng) {
    std::uint64_t nonce = rng.next();
    Commitment commit = make_hash_commit(as_bytes(candidate), nonce);
    const Digest commit_digest = std::get<HashCommit>(commit.form).digest;
    Reveal reveal;
    reveal.solution.assign(candidate.begin(), candidate.end());
    reveal.nonce = nonce;
    task.reveals[commit_digest] = std::move(reveal);

    SolveTxPayload p;
    p.miner = miner;
    p.commitment = commit;
    p.declared_score = score;
    p.publish_ref = task.id;
    p.storage_source = task.members.empty() ? 0 : task.members.front();
    mempool_.push_back(PendingTx{p, fee, seq_++, improves});
  }

  void ensure_retrieval_channel(EngineTask& task, PublicId solver, ApplyEvents& ev) {
    if (task.channels.contains(solver) || task.members.empty()) return;
    if (!reserve(solver, kRetrievalDeposit)) return;
    PublicId source = task.members[solver % task.members.size()];
    auto ch = open_channel(state_, ev, solver, source, kRetrievalDeposit);
    planned_[solver] -= kRetrievalDeposit;  // spent for real, not just planned
    if (!ch) return;
    task.channels[solver] = *ch;
    Channel& channel = state_.storage.channels.at(*ch);
    Amount new_a = channel.balance_a - kRetrievalPrice;
    Amount new_b = channel.balance_b + kRetrievalPrice;
    ChannelSig sa = sign_channel_state(channel.party_a, channel.id, new_a, new_b, channel.seq + 1);
    ChannelSig sb = sign_channel_state(channel.party_b, channel.id, new_a, new_b, channel.seq + 1);
    channel_update(channel, kRetrievalPrice, channel.seq + 1, sa, sb);
  }

  // Whether the task's dTMN survives this block's liveness sweep.
  bool dtmn_healthy(TaskId task, Height h) {
    const Dtmn* dtmn = state_.storage.dtmn_for_task(task);
    if (dtmn == nullptr) return false;
    if (dtmn->status == DtmnStatus::Failed) return false;
    Dtmn scratch = *dtmn;
    prune_members(scratch, h, params_);
    return scratch.status != DtmnStatus::Failed;
  }

  // ---- per-block agent actions ----

  void agent_actions(Height h, ApplyEvents& pre_ev) {
    // storage failure injection + keepalive pings, before anyone else relies
    // on dTMN health
    for (auto& agent : agents_) {
      if (agent.strategy.kind != AgentKind::StorageMiner) continue;
      if (agent.strategy.fail_at != 0 && h >= agent.strategy.fail_at)
        agent.storage_failed = true;
      if (!agent.storage_failed && agent.strategy.failure_rate > 0.0 &&
          agent.rng.chance(agent.strategy.failure_rate))
        agent.storage_failed = true;
    }
    for (auto& [dtmn_id, dtmn] : state_.storage.dtmns) {
      if (dtmn.status != DtmnStatus::Active && dtmn.status != DtmnStatus::Forming) continue;
      for (PublicId m : dtmn.live_members()) {
        AgentRuntime* rt = find_runtime(m);
        if (rt != nullptr && !rt->storage_failed) record_ping(dtmn, m, h);
      }
    }

    // client task stream
    if (cfg_.task_stream.rate > 0.0) {
      double expected = cfg_.task_stream.rate;
      std::uint32_t count = static_cast<std::uint32_t>(expected);
      if (task_rng_.chance(expected - count)) ++count;
      for (std::uint32_t i = 0; i < count; ++i) {
        if (!reserve(kClientId, cfg_.task_stream.fee_solve + cfg_.task_stream.fee_sub)) break;
        publish_task(kClientId, false, task_rng_);
      }
    }

    // adversarial task publication
    for (auto& agent : agents_) {
      if (agent.strategy.kind != AgentKind::O1Adversary) continue;
      double rate = agent.strategy.task_rate;
      std::uint32_t count = static_cast<std::uint32_t>(rate);
      if (agent.rng.chance(rate - count)) ++count;
      for (std::uint32_t i = 0; i < count; ++i) {
        if (!reserve(agent.id, cfg_.task_stream.fee_solve + cfg_.task_stream.fee_sub)) break;
        publish_task(agent.id, true, agent.rng);
      }
    }

    // ticket demand: keep the pool at target accounting for in-flight tickets
    {
      const Amount desired = static_cast<Amount>(params_.ticket_pool_target) +
                             static_cast<Amount>(params_.votes_per_block) *
                                 static_cast<Amount>(params_.ticket_maturity + 1);
      Amount in_system = static_cast<Amount>(state_.tickets.live_count());
      for (const auto& [eh, ids] : state_.tickets.maturing)
        in_system += static_cast<Amount>(ids.size());
      Amount to_buy = std::clamp<Amount>(desired - in_system, 0,
                                         static_cast<Amount>(params_.ticket_quota_per_block));

      std::vector<AgentRuntime*> stakers;
      for (auto& a : agents_)
        if (a.strategy.stake_budget > 0) stakers.push_back(&a);

      if (!stakers.empty() && to_buy > 0) {
        Amount price = compute_ticket_price(state_.tickets.live_count(), params_);
        for (Amount i = 0; i < to_buy; ++i) {
          AgentRuntime* buyer = stakers[static_cast<std::size_t>(i) % stakers.size()];
          Amount x = 0;
          if (buyer->strategy.use_vstakes)
            x = std::min<Amount>(
                state_.vstake_balance(buyer->id) - planned_vstakes_[buyer->id], price);
          if (x < 0) x = 0;
          if (!reserve(buyer->id, price - x, x)) continue;
          mempool_.push_back(PendingTx{TicketPurchasePayload{buyer->id, price, x}, 0, seq_++});
        }
      }
    }

    // storage miners ask on open bids
    for (auto& agent : agents_) {
      if (agent.strategy.kind != AgentKind::StorageMiner || agent.storage_failed) continue;
      for (auto& [task_id, et] : tasks_) {
        if (et.stored || et.asked.contains(agent.id)) continue;
        const BidOrder* bid = state_.storage.book.find_bid(task_id);
        if (bid == nullptr || bid->matched || bid_expired(*bid, h, params_)) continue;
        if (!reserve(agent.id, kDefaultTxFee)) continue;
        et.asked.insert(agent.id);
        mempool_.push_back(PendingTx{AskTxPayload{task_id, agent.id}, kDefaultTxFee, seq_++});
      }
    }

    // deal matching: enough live asks -> Deal + Stored in one block
    for (auto& [task_id, et] : tasks_) {
      if (et.stored || et.deal_emitted) continue;
      const BidOrder* bid = state_.storage.book.find_bid(task_id);
      if (bid == nullptr || bid->matched || bid_expired(*bid, h, params_)) continue;
      std::vector<const AskOrder*> open_asks;
      for (const AskOrder& a : state_.storage.book.asks)
        if (a.task == task_id && !a.consumed) open_asks.push_back(&a);
      if (open_asks.size() < params_.r_s) continue;
      DealTxPayload deal;
      deal.task = task_id;
      deal.bid_ref = bid->bid_tx;
      std::vector<PublicId> members;
      for (std::size_t i = 0; i < params_.r_s; ++i) {
        deal.ask_refs.push_back(open_asks[i]->ask_tx);
        members.push_back(open_asks[i]->miner);
      }
      if (!reserve(members.front(), kDefaultTxFee)) continue;
      deal.members = members;
      et.deal_emitted = true;
      mempool_.push_back(PendingTx{deal, kDefaultTxFee, seq_++});
      StoredPayload stored;
      stored.task = task_id;
      stored.publish_ref = task_id;
      stored.client = et.publisher;
      stored.members = members;
      mempool_.push_back(PendingTx{stored, 0, seq_++});
    }

    // solving
    for (auto& agent : agents_) {
      AgentKind k = agent.strategy.kind;
      bool solver = k == AgentKind::HonestSolver || k == AgentKind::O1Adversary ||
                    k == AgentKind::SSAAdversary || k == AgentKind::Colluder;
      if (!solver) continue;
      for (TaskId task_id : active_tasks_) {
        EngineTask& et = tasks_.at(task_id);
        if (!et.stored) continue;
        auto comp_it = state_.competitions.find(task_id);
        if (comp_it == state_.competitions.end()) continue;
        if (comp_it->second.outcome != CompetitionOutcome::Open) continue;
        Phase ph = phase_of(comp_it->second, h);
        if (ph != Phase::Freeze && ph != Phase::Compete) continue;
        if (!dtmn_healthy(task_id, h)) continue;
        act_on_task(agent, et, ph, pre_ev);
      }
    }

    // dTMN duties: validation and sealing
    for (TaskId task_id : active_tasks_) {
      EngineTask& et = tasks_.at(task_id);
      if (!et.stored) continue;
      auto comp_it = state_.competitions.find(task_id);
      if (comp_it == state_.competitions.end()) continue;
      CompetitionState& comp = comp_it->second;
      if (comp.outcome != CompetitionOutcome::Open) continue;
      if (!dtmn_healthy(task_id, h)) continue;
      const Dtmn* dtmn = state_.storage.dtmn_for_task(task_id);

      Phase ph = phase_of(comp, h);
      if (ph == Phase::Validate && !et.validate_emitted) {
        std::vector<PublicId> alive;
        for (PublicId m : dtmn->live_members()) {
          AgentRuntime* rt = find_runtime(m);
          if (rt == nullptr || !rt->storage_failed) alive.push_back(m);
        }
        std::map<TxId, Reveal> reveals;
        for (const AdmittedSolve& s : comp.admitted) {
          if (const auto* hc = std::get_if<HashCommit>(&s.commitment.form)) {
            auto it = et.reveals.find(hc->digest);
            if (it != et.reveals.end()) reveals[s.tx_id] = it->second;
          }
        }
        auto res = validate_solutions(comp, alive, reveals, h, dtmn_rng_);
        if (auto* ok = std::get_if<ValidationResult>(&res)) {
          et.envelopes = ok->envelopes;
          ValidateTxPayload p;
          p.task = task_id;
          p.encrypted_votes = ok->commitments;
          mempool_.push_back(PendingTx{p, 0, seq_++});
          et.validate_emitted = true;
        }
      }
      if (ph == Phase::Seal && comp.validate_posted && !et.seal_emitted) {
        SealTxPayload p;
        p.task = task_id;
        for (const auto& [m, env] : et.envelopes) {
          AgentRuntime* rt = find_runtime(m);
          if (rt != nullptr && rt->storage_failed) continue;  // failed members never reveal
          p.keys[m] = env;
        }
        mempool_.push_back(PendingTx{p, 0, seq_++});
        et.seal_emitted = true;
      }
    }

    // channel claims for finished tasks
    for (TaskId task_id : finished_tasks_pending_claims_) {
      auto it = tasks_.find(task_id);
      if (it == tasks_.end()) continue;
      EngineTask& et = it->second;
      if (et.claims_emitted) continue;
      et.claims_emitted = true;
      for (const auto& [solver, channel_id] : et.channels) {
        auto cit = state_.storage.channels.find(channel_id);
        if (cit == state_.storage.channels.end()) continue;
        const Channel& ch = cit->second;
        if (ch.status != ChannelStatus::Open) continue;
        if (!reserve(ch.party_b, kDefaultTxFee)) continue;
        MicropaymentClaimPayload p;
        p.task = task_id;
        p.channel_id = ch.id;
        p.party_a = ch.party_a;
        p.party_b = ch.party_b;
        p.balance_a = ch.balance_a;
        p.balance_b = ch.balance_b;
        p.seq = ch.seq;
        mempool_.push_back(PendingTx{p, kDefaultTxFee, seq_++});
      }
    }
    finished_tasks_pending_claims_.clear();
  }

  void act_on_task(AgentRuntime& agent, EngineTask& et, Phase phase, ApplyEvents& pre_ev) {
    const AgentKind k = agent.strategy.kind;
    SolverProgress& prog = et.progress[agent.id];
    const bool may_submit = phase == Phase::Compete;

    if (k == AgentKind::O1Adversary) {
      // submits its own precomputed optimum the moment the freeze lifts
      if (!may_submit || et.publisher != agent.id || prog.submitted) return;
      if (!reserve(agent.id, agent.strategy.solve_fee)) return;
      prog.submitted = true;
      prog.last_submitted = et.optimum_score;
      submit_solve(et, agent.id, et.optimum_encoded, et.optimum_score, agent.strategy.solve_fee,
                   true, agent.rng);
      return;
    }

    if (k == AgentKind::SSAAdversary) {
      if (!may_submit) return;
      double rate = agent.strategy.spam_rate;
      std::uint32_t count = static_cast<std::uint32_t>(rate);
      if (agent.rng.chance(rate - count)) ++count;
      for (std::uint32_t i = 0; i < count; ++i) {
        ensure_retrieval_channel(et, agent.id, pre_ev);
        std::string candidate = suboptimal_candidate(et.slim, agent.rng);
        ScoreOutcome sc = score_solution(et.slim, as_bytes(candidate));
        if (!sc.ok()) continue;
        if (!reserve(agent.id, agent.strategy.solve_fee)) break;
        bool improves = !et.has_chain_best ||
                        score_better(et.slim.objective, sc.value, et.chain_best);
        submit_solve(et, agent.id, candidate, sc.value, agent.strategy.solve_fee, improves,
                     agent.rng);
      }
      return;
    }

    bool honest_work = k == AgentKind::HonestSolver ||
                       (k == AgentKind::Colluder && agent.strategy.defector);
    ensure_retrieval_channel(et, agent.id, pre_ev);

    if (!honest_work) {
      // colluding cartel: one knowingly random solution per task, no work
      if (!may_submit || prog.submitted) return;
      std::string candidate = suboptimal_candidate(et.slim, agent.rng);
      ScoreOutcome sc = score_solution(et.slim, as_bytes(candidate));
      if (!sc.ok()) return;
      if (!reserve(agent.id, agent.strategy.solve_fee)) return;
      prog.submitted = true;
      prog.last_submitted = sc.value;
      submit_solve(et, agent.id, candidate, sc.value, agent.strategy.solve_fee, false, agent.rng);
      return;
    }

    for (std::uint32_t a = 0; a < agent.strategy.attempts_per_block; ++a) {
      prog.attempts++;
      std::string candidate;
      double score;
      if (prog.attempts >= et.difficulty) {
        candidate = et.optimum_encoded;
        score = et.optimum_score;
      } else {
        candidate = random_candidate(et.slim, agent.rng);
        ScoreOutcome sc = score_solution(et.slim, as_bytes(candidate));
        if (!sc.ok()) continue;
        score = sc.value;
      }
      if (!prog.has_best || score_better(et.slim.objective, score, prog.best)) {
        prog.has_best = true;
        prog.best = score;
        prog.best_candidate = candidate;
      }
      if (prog.attempts >= et.difficulty) break;
    }

    if (!prog.has_best || !may_submit) return;
    bool beats_chain =
        !et.has_chain_best || score_better(et.slim.objective, prog.best, et.chain_best);
    bool beats_own =
        !prog.submitted || score_better(et.slim.objective, prog.best, prog.last_submitted);
    if (beats_chain && beats_own && reserve(agent.id, agent.strategy.solve_fee)) {
      prog.submitted = true;
      prog.last_submitted = prog.best;
      submit_solve(et, agent.id, prog.best_candidate, prog.best, agent.strategy.solve_fee, true,
                   agent.rng);
    }
  }

  // ---- block assembly ----

  PublicId pick_signer() {
    double total = 0.0;
    for (const auto& a : agents_) total += a.strategy.hash_share;
    double roll = lottery_rng_.unit() * total;
    double acc = 0.0;
    for (const auto& a : agents_) {
      acc += a.strategy.hash_share;
      if (a.strategy.hash_share > 0.0 && roll < acc) return a.id;
    }
    for (auto it = agents_.rbegin(); it != agents_.rend(); ++it)
      if (it->strategy.hash_share > 0.0) return it->id;
    return agents_.back().id;
  }

  Block assemble_block(Height h, PublicId signer, std::uint64_t pow_target) {
    Block block;
    block.height = h;
    block.parent_digest = chain_.tip().pow.digest;
    block.signer = signer;
    block.tick = h;
    block.target = pow_target;

    TxId next_id = state_.next_tx_id;

    // votes approving the parent
    if (state_.tickets.live_count() >= params_.votes_per_block) {
      auto sel = select_voters(chain_.tip().header_seed, state_.tickets, params_);
      for (std::uint64_t ticket_id : std::get<std::vector<std::uint64_t>>(sel)) {
        const Ticket& t = state_.tickets.tickets.at(ticket_id);
        Transaction vote;
        vote.id = next_id++;
        vote.fee_tr = 0;
        vote.payload = VotePayload{ticket_id, t.owner, block.parent_digest, true};
        block.votes.push_back(std::move(vote));
      }
    }

    // coinbase
    {
      Transaction cb;
      cb.id = next_id++;
      cb.payload = CoinbaseMintPayload{signer, params_.coinbase_amount};
      block.txs.push_back(std::move(cb));
    }

    // distribution-window payouts (preview; apply_block recomputes)
    if (h > 0 && h % params_.b_distr == 0) {
      PoolLedger preview = state_.pools;
      Height win_start = preview.window_start;
      WindowReport report = preview.close_window(h - 1, params_);
      for (const PoolPayout& p : report.payouts) {
        Transaction tx;
        tx.id = next_id++;
        tx.payload = PoolDistributionPayload{p.pool, p.recipient, p.amount, win_start};
        block.txs.push_back(std::move(tx));
      }
    }

    // mempool selection
    std::vector<const PendingTx*> purchases, protocol_txs, solves, payments;
    for (const PendingTx& p : mempool_) {
      switch (static_cast<TxKind>(p.payload.index())) {
        case TxKind::TicketPurchase: purchases.push_back(&p); break;
        case TxKind::Solve: solves.push_back(&p); break;
        case TxKind::Payment: payments.push_back(&p); break;
        default: protocol_txs.push_back(&p); break;
      }
    }
    auto by_fee = [](const PendingTx* a, const PendingTx* b) {
      if (a->fee != b->fee) return a->fee > b->fee;
      return a->seq < b->seq;
    };
    std::sort(purchases.begin(), purchases.end(), by_fee);
    if (purchases.size() > params_.ticket_quota_per_block)
      purchases.resize(params_.ticket_quota_per_block);
    std::sort(solves.begin(), solves.end(), [](const PendingTx* a, const PendingTx* b) {
      if (a->improves != b->improves) return a->improves;
      if (a->fee != b->fee) return a->fee > b->fee;
      return a->seq < b->seq;
    });

    std::size_t capacity = params_.block_tx_capacity;
    auto take = [&](const std::vector<const PendingTx*>& list) {
      for (const PendingTx* p : list) {
        if (block.txs.size() >= capacity) break;
        Transaction tx;
        tx.id = next_id++;
        tx.fee_tr = p->fee;
        tx.payload = p->payload;
        block.txs.push_back(std::move(tx));
      }
    };
    take(purchases);
    take(protocol_txs);
    if (cfg_.assembly != AssemblyStrategy::ExcludeSolves) take(solves);
    take(payments);

    Digest root = block_work_root(block);
    auto proof = solve_pow(root, pow_target);
    block.pow = *proof;
    block.header_seed = make_header_seed(block.pow.digest);
    return block;
  }

  // ---- post-apply bookkeeping ----

  void digest_block(const Block& block, const ApplyEvents& ev) {
    metrics_.blocks++;
    if (is_agent(block.signer)) agent_metrics(block.signer).blocks_signed++;
    metrics_.tx_counts["vote"] += block.votes.size();
    for (const Transaction& t : block.txs) metrics_.tx_counts[tx_kind_name(t.kind())]++;

    for (const Transaction& t : block.txs) {
      if (t.kind() == TxKind::Publish) {
        const auto* p = t.as<PublishPayload>();
        for (auto it = pending_tasks_.begin(); it != pending_tasks_.end(); ++it) {
          if (it->slim != p->slim_task) continue;
          EngineTask et = std::move(*it);
          pending_tasks_.erase(it);
          et.id = t.id;
          active_tasks_.insert(t.id);
          if (is_agent(p->client)) agent_metrics(p->client).own_tasks_published++;
          tasks_.emplace(t.id, std::move(et));
          metrics_.competitions_started++;
          break;
        }
      } else if (t.kind() == TxKind::Stored) {
        const auto* p = t.as<StoredPayload>();
        auto it = tasks_.find(p->task);
        if (it != tasks_.end()) {
          it->second.stored = true;
          it->second.stored_height = block.height;
          it->second.members = p->members;
        }
      } else if (t.kind() == TxKind::Solve) {
        const auto* p = t.as<SolveTxPayload>();
        auto it = tasks_.find(p->publish_ref);
        if (it != tasks_.end()) {
          EngineTask& et = it->second;
          if (!et.has_chain_best ||
              score_better(et.slim.objective, p->declared_score, et.chain_best)) {
            et.has_chain_best = true;
            et.chain_best = p->declared_score;
          }
        }
        if (is_agent(p->miner)) agent_metrics(p->miner).solves_submitted++;
      } else if (t.kind() == TxKind::TicketPurchase) {
        const auto* p = t.as<TicketPurchasePayload>();
        if (is_agent(p->buyer)) agent_metrics(p->buyer).tickets_bought++;
      }
    }

    for (const Flow& f : ev.flows) {
      if (!is_agent(f.who)) continue;
      AgentMetrics& m = agent_metrics(f.who);
      m.flow_by_tag[f.tag] += f.amount;
      bool vstake_flow = f.tag == FlowTag::VstakeMint || f.tag == FlowTag::VstakeBurn ||
                         f.tag == FlowTag::VstakeRefund;
      if (vstake_flow) {
        if (f.amount > 0)
          m.vstakes_earned += f.amount;
        else
          m.vstakes_spent += -f.amount;
      } else if (f.amount > 0) {
        m.income_total += f.amount;
      } else {
        m.spend_total += -f.amount;
      }
      if (f.tag == FlowTag::FeePaid) m.fees_paid += -f.amount;
    }

    for (const TicketSettlement& s : ev.settlements_created) {
      metrics_.tickets_voted_total += s.voted ? 1 : 0;
      metrics_.tickets_expired_total += s.voted ? 0 : 1;
      Height bought = state_.tickets.tickets.at(s.ticket_id).purchase_height;
      if (bought >= metrics_.burn_in_height) {
        if (s.voted)
          metrics_.post_burnin_voted++;
        else
          metrics_.post_burnin_expired++;
      }
      if (is_agent(s.owner)) {
        AgentMetrics& m = agent_metrics(s.owner);
        if (s.voted)
          m.tickets_voted++;
        else
          m.tickets_missed++;
        m.ticket_stake_total += s.y;
        m.ticket_return_total += s.currency_payout + s.vstake_refund;
      }
    }

    for (const SealEvent& seal : ev.seals) {
      auto it = tasks_.find(seal.task);
      if (seal.success) {
        metrics_.competitions_sealed++;
        for (PublicId w : seal.winners)
          if (is_agent(w)) agent_metrics(w).competitions_won++;
        if (it != tasks_.end() && is_agent(it->second.publisher)) {
          AgentMetrics& m = agent_metrics(it->second.publisher);
          m.own_tasks_sealed++;
          m.own_task_fee_solve += it->second.fee_solve;
          bool publisher_won = false;
          for (PublicId w : seal.winners)
            if (w == it->second.publisher) publisher_won = true;
          if (publisher_won) {
            m.own_tasks_won++;
            auto wp = seal.winner_payments.find(it->second.publisher);
            if (wp != seal.winner_payments.end()) m.own_task_return += wp->second;
            auto vm = seal.vstakes_minted.find(it->second.publisher);
            if (vm != seal.vstakes_minted.end()) m.own_task_return += vm->second;
          }
        }
      } else {
        metrics_.competitions_failed++;
      }
      if (it != tasks_.end()) finished_tasks_pending_claims_.push_back(seal.task);
      active_tasks_.erase(seal.task);
    }

    for (const auto& [task, why] : ev.aborted_tasks) {
      if (why == "bid_expired" || why == "dtmn_failed") {
        if (active_tasks_.erase(task) > 0) metrics_.competitions_failed++;
        auto it = tasks_.find(task);
        if (it != tasks_.end()) finished_tasks_pending_claims_.push_back(task);
      }
    }

    for (const WindowReport& w : ev.windows) {
      metrics_.pool_main_paid += w.main_paid;
      metrics_.pool_storage_paid += w.storage_paid;
      metrics_.pool_sm_paid += w.sm_paid;
    }

    if (block.height >= metrics_.burn_in_height) {
      std::uint64_t live = state_.tickets.live_count();
      metrics_.mean_live_pool += static_cast<double>(live);
      metrics_.pool_samples++;
      metrics_.min_live_pool = std::min(metrics_.min_live_pool, live);
      metrics_.max_live_pool = std::max(metrics_.max_live_pool, live);
    }
  }

  void prune_engine_state(Height h) {
    if (h % 64 != 0) return;
    for (auto it = tasks_.begin(); it != tasks_.end();) {
      bool active = active_tasks_.contains(it->first);
      if (!active && it->second.claims_emitted)
        it = tasks_.erase(it);
      else
        ++it;
    }
  }

  void step(Height h) {
    ApplyEvents pre_ev;  // channel-opening flows happen during agent actions
    mempool_.clear();
    planned_.clear();
    planned_vstakes_.clear();
    agent_actions(h, pre_ev);

    PublicId signer = pick_signer();
    const std::uint64_t pow_target = static_cast<std::uint64_t>(1) << 63;
    Block block = assemble_block(h, signer, pow_target);

    ApplyEvents ev = std::move(pre_ev);
    BlockVerdict verdict = apply_block(state_, block, chain_.tip(), params_, ev);
    if (!verdict.accepted)
      throw std::logic_error("engine produced an illegal block at height " + std::to_string(h) +
                             ": " + verdict.reason);
    if (cfg_.collect_chain) metrics_.chain_blocks.push_back(block);
    chain_.blocks.push_back(std::move(block));
    if (chain_.blocks.size() > 3)
      chain_.blocks.erase(chain_.blocks.begin() + 1);  // genesis + recent context

    digest_block(chain_.tip(), ev);
    prune_engine_state(h);
  }

  void check_invariants() {
    ConservationReport rep = check_conservation(state_);
    if (!rep.ok) {
      metrics_.invariant_violation = true;
      metrics_.invariant_detail = rep.detail;
    }
  }

  void finalize() {
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      metrics_.agents[i].final_balance = state_.balance(agents_[i].id);
      metrics_.agents[i].final_vstakes = state_.vstake_balance(agents_[i].id);
    }
    if (metrics_.pool_samples > 0)
      metrics_.mean_live_pool /= static_cast<double>(metrics_.pool_samples);
    if (metrics_.min_live_pool == UINT64_MAX) metrics_.min_live_pool = 0;
    if (cfg_.collect_chain) metrics_.final_state = state_;
  }

  SimConfig cfg_;
  ProtocolParams params_;
  DetRng master_;
  DetRng task_rng_;
  DetRng lottery_rng_;
  DetRng dtmn_rng_;
  std::vector<AgentRuntime> agents_;
  LedgerState state_;
  Chain chain_;
  Metrics metrics_;

  std::uint64_t seq_ = 0;
  std::vector<PendingTx> mempool_;
  std::map<PublicId, Amount> planned_;
  std::map<PublicId, Amount> planned_vstakes_;
  std::vector<EngineTask> pending_tasks_;  // published but not yet in-chain
  std::map<TaskId, EngineTask> tasks_;
  std::set<TaskId> active_tasks_;
  std::vector<TaskId> finished_tasks_pending_claims_;
};

}  // namespace

Metrics run_scenario(const SimConfig& config) {
  if (auto bad = config.validate())
    throw std::invalid_argument("invalid scenario config: " + *bad);
  SimEngine engine(config);
  return engine.run();
}

}  // namespace poaw
