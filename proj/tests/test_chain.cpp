#include <doctest.h>

#include <sstream>

#include "poaw/chain.hpp"
#include "poaw/rng.hpp"
#include "poaw/sim.hpp"

using namespace poaw;

namespace {

constexpr std::uint64_t kEasyTarget = ~static_cast<std::uint64_t>(0);

ProtocolParams chain_params() {
  ProtocolParams p = ProtocolParams::sim_scaled();
  p.ticket_pool_target = 16;
  p.ticket_maturity = 2;
  return p;
}

// a ledger with `n` live tickets owned by `owner`
LedgerState state_with_pool(std::size_t n, PublicId owner, const ProtocolParams& p) {
  LedgerState state = make_genesis_state({{owner, 100'000'000}});
  ApplyEvents ev;
  for (std::size_t i = 0; i < n; ++i) {
    state.tickets.begin_block(0);
    auto r = purchase_ticket(state.tickets, state.balance(owner), 0, owner, 100, 0, 0, p);
    REQUIRE(std::holds_alternative<std::uint64_t>(r));
    debit(state, ev, owner, 100, FlowTag::TicketLock);
  }
  for (Height h = 0; h <= p.ticket_maturity; ++h) state.tickets.begin_block(h);
  return state;
}

struct BlockPlan {
  std::vector<Transaction> txs;
  std::size_t votes_present = 5;   // how many of the selected five vote
  bool votes_approve = true;
};

Block build_block(const LedgerState& state, const Block& parent, PublicId signer,
                  const ProtocolParams& p, BlockPlan plan) {
  Block b;
  b.height = parent.height + 1;
  b.parent_digest = parent.pow.digest;
  b.signer = signer;
  b.tick = b.height;
  b.target = kEasyTarget;

  TxId next_id = state.next_tx_id;
  if (state.tickets.live_count() >= p.votes_per_block) {
    auto sel = select_voters(parent.header_seed, state.tickets, p);
    auto& ids = std::get<std::vector<std::uint64_t>>(sel);
    for (std::size_t i = 0; i < ids.size() && i < plan.votes_present; ++i) {
      const Ticket& t = state.tickets.tickets.at(ids[i]);
      Transaction vote;
      vote.id = next_id++;
      vote.payload = VotePayload{ids[i], t.owner, b.parent_digest, plan.votes_approve};
      b.votes.push_back(std::move(vote));
    }
  }
  Transaction cb;
  cb.id = next_id++;
  cb.payload = CoinbaseMintPayload{signer, p.coinbase_amount};
  b.txs.push_back(std::move(cb));
  for (Transaction tx : plan.txs) {
    tx.id = next_id++;
    b.txs.push_back(std::move(tx));
  }
  b.pow = *solve_pow(block_work_root(b), b.target);
  b.header_seed = make_header_seed(b.pow.digest);
  return b;
}

}  // namespace

TEST_CASE("pow solve and verify round trip") {
  DetRng rng(3);
  for (int t = 0; t < 50; ++t) {
    Digest root = DigestWriter{}.u64(rng.next()).finalize();
    std::uint64_t target = 1ULL << (40 + rng.below(24));
    auto proof = solve_pow(root, target);
    REQUIRE(proof.has_value());
    CHECK(verify_pow(root, *proof, target));
    CHECK_FALSE(verify_pow(root, PowProof{proof->nonce + 1, proof->digest}, target));
  }
}

TEST_CASE("maximal target succeeds on the first attempt") {
  Digest root = sha256(std::string_view("header"));
  auto proof = solve_pow(root, kEasyTarget);
  REQUIRE(proof.has_value());
  CHECK(proof->nonce == 0);
}

TEST_CASE("a 2^60 target takes about 16 attempts on average") {
  DetRng rng(9);
  const std::uint64_t target = 1ULL << 60;
  const int runs = 10000;
  double total_attempts = 0;
  for (int i = 0; i < runs; ++i) {
    Digest root = DigestWriter{}.u64(rng.next()).finalize();
    auto proof = solve_pow(root, target);
    REQUIRE(proof.has_value());
    total_attempts += static_cast<double>(proof->nonce + 1);
  }
  double mean = total_attempts / runs;
  CHECK(mean > 16.0 * 0.8);
  CHECK(mean < 16.0 * 1.2);
}

TEST_CASE("bounded search can report not found") {
  Digest root = sha256(std::string_view("h"));
  CHECK_FALSE(solve_pow(root, 1, 4).has_value());
}

TEST_CASE("difficulty controller") {
  // observed interval equal to the target leaves the target unchanged
  std::vector<std::uint64_t> ticks{0, 10, 20, 30, 40};
  CHECK(adjust_difficulty(1ULL << 50, ticks, 10) == 1ULL << 50);

  // twice the target interval doubles the target (easier)
  std::vector<std::uint64_t> slow{0, 20, 40, 60, 80};
  CHECK(adjust_difficulty(1ULL << 50, slow, 10) == 1ULL << 51);

  // clamped to a factor of four per adjustment
  std::vector<std::uint64_t> crawl{0, 1000, 2000};
  CHECK(adjust_difficulty(1ULL << 50, crawl, 10) == 1ULL << 52);
  std::vector<std::uint64_t> blaze{0, 1, 2};
  CHECK(adjust_difficulty(1ULL << 50, blaze, 10) == 1ULL << 48);

  CHECK(adjust_difficulty(123, std::vector<std::uint64_t>{5}, 10) == 123);
}

TEST_CASE("difficulty converges to the target interval over a long run") {
  // one hash attempt per tick against the current target; retarget every
  // 16 blocks; expect the mean interval near 20 ticks after burn-in
  const std::uint64_t target_interval = 20;
  std::uint64_t target = 1ULL << 55;  // far too hard at one attempt per tick
  DetRng rng(77);
  std::uint64_t tick = 0;
  std::vector<std::uint64_t> window;
  std::uint64_t blocks = 0;
  double post_burnin_ticks = 0;
  std::uint64_t post_burnin_blocks = 0;
  const std::uint64_t total_blocks = 10000;
  while (blocks < total_blocks) {
    ++tick;
    // one attempt: success probability target / 2^64
    if (rng.next() < target) {
      ++blocks;
      window.push_back(tick);
      if (blocks > 2000) {
        ++post_burnin_blocks;
      }
      if (window.size() == 17) {  // 16 intervals
        target = adjust_difficulty(target, window, target_interval);
        window.clear();
        window.push_back(tick);
      }
    }
  }
  // measure the mean interval over the last 8000 blocks
  post_burnin_ticks = static_cast<double>(tick);
  double mean_interval = 0;
  {
    // rerun with the converged behavior measured directly
    DetRng rng2(78);
    std::uint64_t t2 = 0, b2 = 0, first_tick = 0;
    std::vector<std::uint64_t> win;
    std::uint64_t tgt = target;
    while (b2 < 5000) {
      ++t2;
      if (rng2.next() < tgt) {
        ++b2;
        if (b2 == 1000) first_tick = t2;
        win.push_back(t2);
        if (win.size() == 17) {
          tgt = adjust_difficulty(tgt, win, target_interval);
          win.clear();
          win.push_back(t2);
        }
      }
    }
    mean_interval = static_cast<double>(t2 - first_tick) / 4000.0;
  }
  CHECK(mean_interval > target_interval * 0.9);
  CHECK(mean_interval < target_interval * 1.1);
  (void)post_burnin_ticks;
  (void)post_burnin_blocks;
}

TEST_CASE("block validation: vote majority boundary") {
  ProtocolParams p = chain_params();
  LedgerState state = state_with_pool(16, 1, p);
  Block genesis = make_genesis();

  Block three = build_block(state, genesis, 1, p, BlockPlan{{}, 3, true});
  CHECK(validate_block(state, three, genesis, p).accepted);

  Block two = build_block(state, genesis, 1, p, BlockPlan{{}, 2, true});
  BlockVerdict v = validate_block(state, two, genesis, p);
  CHECK_FALSE(v.accepted);
  CHECK(v.reject == BlockReject::InsufficientVotes);

  // five votes present but only two approving is still insufficient
  Block disapprove = build_block(state, genesis, 1, p, BlockPlan{{}, 5, false});
  CHECK(validate_block(state, disapprove, genesis, p).reject == BlockReject::InsufficientVotes);
}

TEST_CASE("block validation: bad pow and tampering") {
  ProtocolParams p = chain_params();
  LedgerState state = state_with_pool(16, 1, p);
  Block genesis = make_genesis();
  Block good = build_block(state, genesis, 1, p, BlockPlan{});
  REQUIRE(validate_block(state, good, genesis, p).accepted);

  Block bad_nonce = good;
  bad_nonce.pow.nonce ^= 1;
  CHECK(validate_block(state, bad_nonce, genesis, p).reject == BlockReject::BadPow);

  Block hard = good;
  hard.target = 1;  // declared difficulty its proof cannot meet
  hard.pow = *solve_pow(block_work_root(good), kEasyTarget);
  CHECK_FALSE(validate_block(state, hard, genesis, p).accepted);

  Block bad_seed = good;
  bad_seed.header_seed = sha256(std::string_view("forged"));
  CHECK(validate_block(state, bad_seed, genesis, p).reject == BlockReject::BadPow);

  Block bad_coinbase = good;
  bad_coinbase.txs[0].payload = CoinbaseMintPayload{1, p.coinbase_amount + 1};
  bad_coinbase.pow = *solve_pow(block_work_root(bad_coinbase), kEasyTarget);
  bad_coinbase.header_seed = make_header_seed(bad_coinbase.pow.digest);
  CHECK(validate_block(state, bad_coinbase, genesis, p).reject == BlockReject::IllegalTx);
}

TEST_CASE("block validation: solve in freeze is an illegal transaction") {
  ProtocolParams p = chain_params();
  LedgerState state = state_with_pool(16, 1, p);
  state.balances[9] = 10'000'000;

  // a competition stored at height 1 whose freeze covers the next blocks
  CompetitionState comp;
  comp.id = 500;
  comp.task.objective = Objective::Maximize;
  comp.task.scoring = KnapsackSpec{{{10, 5}}, 5};
  comp.task.data_digest = sha256(std::string_view(""));
  comp.opened = true;
  comp.stored_height = 1;
  comp.nb_freeze = 6;
  comp.nb_compete = 4;
  comp.nb_validate = 2;
  comp.fee_solve = 1000;
  comp.client = 9;
  state.competitions.emplace(500, comp);

  Transaction solve;
  solve.payload = SolveTxPayload{9, make_hash_commit({}, 1), 1.0, 500, 0};
  Block genesis = make_genesis();
  Block b = build_block(state, genesis, 1, p, BlockPlan{{solve}});
  BlockVerdict v = validate_block(state, b, genesis, p);
  CHECK_FALSE(v.accepted);
  CHECK(v.reject == BlockReject::IllegalTx);
  CHECK(v.reason.find("frozen") != std::string::npos);
}

TEST_CASE("fork choice prefers PoS-approved chains over longer unapproved ones") {
  ProtocolParams p = chain_params();
  TxId next_id = 1;

  auto extend = [&](Chain& chain, std::uint32_t approvals) {
    const Block& parent = chain.tip();
    Block b;
    b.height = parent.height + 1;
    b.parent_digest = parent.pow.digest;
    b.signer = 1;
    b.tick = b.height;
    b.target = kEasyTarget;
    for (std::uint32_t i = 0; i < approvals; ++i) {
      Transaction vote;
      vote.id = next_id++;
      vote.payload = VotePayload{next_id, 1, parent.pow.digest, true};
      b.votes.push_back(std::move(vote));
    }
    b.pow = *solve_pow(block_work_root(b), b.target);
    b.header_seed = make_header_seed(b.pow.digest);
    chain.blocks.push_back(std::move(b));
  };

  Chain approved, unapproved;
  approved.blocks.push_back(make_genesis());
  unapproved.blocks.push_back(make_genesis());
  for (int i = 0; i < 5; ++i) extend(approved, p.vote_majority);
  for (int i = 0; i < 8; ++i) extend(unapproved, 0);

  Chain chains[2] = {approved, unapproved};
  CHECK(fork_choice(std::span<const Chain>(chains, 2), p) == 0);
  Chain swapped[2] = {unapproved, approved};
  CHECK(fork_choice(std::span<const Chain>(swapped, 2), p) == 1);

  // identical single chain: trivially chosen
  Chain only[1] = {approved};
  CHECK(fork_choice(std::span<const Chain>(only, 1), p) == 0);

  // equal approvals and work: the smaller tip digest wins
  Chain a, b;
  a.blocks.push_back(make_genesis());
  b.blocks.push_back(make_genesis());
  extend(a, p.vote_majority);
  extend(b, p.vote_majority);
  while (score_chain(a, p).work != score_chain(b, p).work) break;  // same target: equal work
  Chain pair[2] = {a, b};
  std::size_t pick = fork_choice(std::span<const Chain>(pair, 2), p);
  const Chain& winner = pair[pick];
  const Chain& loser = pair[1 - pick];
  CHECK(winner.tip().pow.digest < loser.tip().pow.digest);

  // determinism: a pure function of its inputs
  CHECK(fork_choice(std::span<const Chain>(pair, 2), p) == pick);
}

TEST_CASE("fork choice falls back to accumulated work") {
  ProtocolParams p = chain_params();
  // no votes anywhere: the heavier chain wins
  auto extend_with_target = [&](Chain& chain, std::uint64_t target) {
    const Block& parent = chain.tip();
    Block b;
    b.height = parent.height + 1;
    b.parent_digest = parent.pow.digest;
    b.signer = 1;
    b.tick = b.height;
    b.target = target;
    b.pow = *solve_pow(block_work_root(b), target);
    b.header_seed = make_header_seed(b.pow.digest);
    chain.blocks.push_back(std::move(b));
  };
  Chain light, heavy;
  light.blocks.push_back(make_genesis());
  heavy.blocks.push_back(make_genesis());
  extend_with_target(light, kEasyTarget);
  extend_with_target(light, kEasyTarget);
  extend_with_target(heavy, 1ULL << 58);  // one block of much more work
  Chain chains[2] = {light, heavy};
  CHECK(fork_choice(std::span<const Chain>(chains, 2), p) == 1);
}

TEST_CASE("chain dump and restore round trip") {
  SimConfig cfg;
  cfg.protocol = ProtocolParams::sim_scaled();
  cfg.protocol.ticket_pool_target = 32;
  cfg.protocol.ticket_maturity = 2;
  cfg.protocol.ticket_expiry_blocks = 60;
  cfg.horizon = 64;
  cfg.seed = 3;
  cfg.collect_chain = true;
  cfg.task_stream.rate = 0.5;
  cfg.task_stream.size = 6;
  cfg.task_stream.fee_solve = 100000;
  cfg.task_stream.fee_sub = 10;
  AgentStrategy hash;
  hash.kind = AgentKind::HashMiner;
  hash.hash_share = 1.0;
  hash.initial_balance = 1'000'000;
  cfg.agents.push_back(hash);
  AgentStrategy pos;
  pos.kind = AgentKind::PoSMiner;
  pos.stake_budget = 1;
  pos.initial_balance = 100'000'000;
  cfg.agents.push_back(pos);
  AgentStrategy solver;
  solver.kind = AgentKind::HonestSolver;
  solver.attempts_per_block = 16;
  solver.initial_balance = 1'000'000;
  solver.solve_fee = 1;
  cfg.agents.push_back(solver);
  for (int i = 0; i < 5; ++i) {
    AgentStrategy st;
    st.kind = AgentKind::StorageMiner;
    st.initial_balance = 1'000'000;
    cfg.agents.push_back(st);
  }
  Metrics m = run_scenario(cfg);
  REQUIRE_FALSE(m.invariant_violation);
  REQUIRE(m.chain_blocks.size() == 64);

  Chain chain;
  chain.blocks.push_back(make_genesis());
  for (const Block& b : m.chain_blocks) chain.blocks.push_back(b);

  std::stringstream dump1;
  dump_chain(dump1, chain);
  Chain restored = restore_chain(dump1);
  REQUIRE(restored.blocks.size() == chain.blocks.size());
  std::stringstream dump2;
  dump_chain(dump2, restored);
  CHECK(dump1.str() == dump2.str());  // bit-identical after a round trip

  std::stringstream broken("{\"height\": oops");
  CHECK_THROWS(restore_chain(broken));
}

TEST_CASE("replaying a dumped chain reproduces the ledger exactly") {
  SimConfig cfg;
  cfg.protocol = ProtocolParams::sim_scaled();
  cfg.protocol.ticket_pool_target = 32;
  cfg.protocol.ticket_maturity = 2;
  cfg.protocol.ticket_expiry_blocks = 60;
  cfg.horizon = 48;
  cfg.seed = 5;
  cfg.collect_chain = true;
  cfg.task_stream.rate = 0.4;
  cfg.task_stream.size = 6;
  cfg.task_stream.fee_solve = 100000;
  cfg.task_stream.fee_sub = 10;
  AgentStrategy hash;
  hash.kind = AgentKind::HashMiner;
  hash.hash_share = 1.0;
  hash.initial_balance = 1'000'000;
  cfg.agents.push_back(hash);
  AgentStrategy pos;
  pos.kind = AgentKind::PoSMiner;
  pos.stake_budget = 1;
  pos.initial_balance = 100'000'000;
  cfg.agents.push_back(pos);
  AgentStrategy solver;
  solver.kind = AgentKind::HonestSolver;
  solver.attempts_per_block = 16;
  solver.initial_balance = 1'000'000;
  solver.solve_fee = 1;
  cfg.agents.push_back(solver);
  for (int i = 0; i < 5; ++i) {
    AgentStrategy st;
    st.kind = AgentKind::StorageMiner;
    st.initial_balance = 1'000'000;
    cfg.agents.push_back(st);
  }
  Metrics m = run_scenario(cfg);
  REQUIRE_FALSE(m.invariant_violation);
  REQUIRE(m.chain_blocks.size() == 48);

  // round-trip the block sequence through the dump format first
  Chain chain;
  chain.blocks.push_back(make_genesis());
  for (const Block& b : m.chain_blocks) chain.blocks.push_back(b);
  std::stringstream dump;
  dump_chain(dump, chain);
  Chain restored = restore_chain(dump);

  auto replay = [&]() {
    LedgerState state = make_genesis_state(m.genesis_balances);
    for (std::size_t i = 1; i < restored.blocks.size(); ++i) {
      ApplyEvents ev;
      BlockVerdict v =
          apply_block(state, restored.blocks[i], restored.blocks[i - 1], cfg.protocol, ev);
      REQUIRE(v.accepted);
    }
    return state;
  };
  LedgerState replay1 = replay();
  LedgerState replay2 = replay();
  CHECK(replay1 == replay2);          // bit-identical replays
  CHECK(replay1 == m.final_state);    // and identical to the live run
  CHECK(check_conservation(replay1).ok);
}
