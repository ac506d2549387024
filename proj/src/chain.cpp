#include "poaw/chain.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace poaw {

using ordered_json = nlohmann::ordered_json;

Digest block_work_root(const Block& block) {
  DigestWriter w;
  w.u64(block.height).digest(block.parent_digest).u32(block.signer).u64(block.tick).u64(
      block.target);
  w.u64(block.votes.size());
  for (const Transaction& v : block.votes)
    w.u64(v.id).u8(static_cast<std::uint8_t>(v.kind())).i64(v.fee_tr);
  w.u64(block.txs.size());
  for (const Transaction& t : block.txs)
    w.u64(t.id).u8(static_cast<std::uint8_t>(t.kind())).i64(t.fee_tr);
  return w.finalize();
}

Digest make_header_seed(const Digest& pow_digest) {
  return DigestWriter{}.digest(pow_digest).str("seed").finalize();
}

static Digest pow_digest_for(const Digest& work_root, std::uint64_t nonce) {
  return DigestWriter{}.digest(work_root).u64(nonce).finalize();
}

bool verify_pow(const Digest& work_root, const PowProof& proof, std::uint64_t target) {
  Digest d = pow_digest_for(work_root, proof.nonce);
  return d == proof.digest && digest_prefix64(d) < target;
}

std::optional<PowProof> solve_pow(const Digest& work_root, std::uint64_t target,
                                  std::uint64_t max_attempts) {
  for (std::uint64_t nonce = 0; nonce < max_attempts; ++nonce) {
    Digest d = pow_digest_for(work_root, nonce);
    if (digest_prefix64(d) < target) return PowProof{nonce, d};
  }
  return std::nullopt;
}

std::uint64_t adjust_difficulty(std::uint64_t old_target,
                                std::span<const std::uint64_t> block_ticks,
                                std::uint64_t target_interval) {
  if (block_ticks.size() < 2 || target_interval == 0) return old_target;
  const std::uint64_t span = block_ticks.back() - block_ticks.front();
  const std::uint64_t n = block_ticks.size() - 1;
  unsigned __int128 scaled =
      static_cast<unsigned __int128>(old_target) * span / (n * target_interval);
  unsigned __int128 lo = old_target / 4;
  unsigned __int128 hi = static_cast<unsigned __int128>(old_target) * 4;
  if (scaled < lo) scaled = lo;
  if (scaled > hi) scaled = hi;
  if (scaled < 1) scaled = 1;
  const unsigned __int128 max64 = ~static_cast<std::uint64_t>(0);
  if (scaled > max64) scaled = max64;
  return static_cast<std::uint64_t>(scaled);
}

Block make_genesis() {
  Block g;
  g.height = 0;
  g.target = ~static_cast<std::uint64_t>(0);
  g.pow.nonce = 0;
  g.pow.digest = sha256(std::string_view("poaw genesis"));
  g.header_seed = make_header_seed(g.pow.digest);
  return g;
}

static std::uint64_t work_for_target(std::uint64_t target) {
  if (target == 0) return 0;
  return (~target) / (target + 1) + 1;
}

ChainScore score_chain(const Chain& chain, const ProtocolParams& params) {
  ChainScore s;
  s.tip_digest = chain.blocks.back().pow.digest;
  for (std::size_t i = 0; i + 1 < chain.blocks.size(); ++i) {
    const Block& child = chain.blocks[i + 1];
    const Digest& parent_digest = chain.blocks[i].pow.digest;
    std::uint32_t approvals = 0;
    for (const Transaction& v : child.votes) {
      const auto* vote = v.as<VotePayload>();
      if (vote != nullptr && vote->approve && vote->approves == parent_digest) ++approvals;
    }
    if (approvals >= params.vote_majority) ++s.approvals;
  }
  for (std::size_t i = 1; i < chain.blocks.size(); ++i)
    s.work += work_for_target(chain.blocks[i].target);
  return s;
}

std::size_t fork_choice(std::span<const Chain> chains, const ProtocolParams& params) {
  std::size_t best = 0;
  ChainScore best_score;
  for (std::size_t i = 0; i < chains.size(); ++i) {
    ChainScore s = score_chain(chains[i], params);
    if (i == 0) {
      best_score = s;
      continue;
    }
    bool better = false;
    if (s.approvals != best_score.approvals) {
      better = s.approvals > best_score.approvals;
    } else if (s.work != best_score.work) {
      better = s.work > best_score.work;
    } else {
      better = s.tip_digest < best_score.tip_digest;
    }
    if (better) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

static BlockVerdict reject(BlockReject why, TxId tx, std::string reason) {
  return BlockVerdict{false, why, tx, std::move(reason)};
}

BlockVerdict apply_block(LedgerState& state, const Block& block, const Block& parent,
                         const ProtocolParams& params, ApplyEvents& ev) {
  const Height h = block.height;
  if (h != parent.height + 1) return reject(BlockReject::IllegalTx, 0, "bad height");
  if (block.parent_digest != parent.pow.digest)
    return reject(BlockReject::IllegalTx, 0, "bad parent");
  if (!verify_pow(block_work_root(block), block.pow, block.target))
    return reject(BlockReject::BadPow, 0, "bad_pow");
  if (block.header_seed != make_header_seed(block.pow.digest))
    return reject(BlockReject::BadPow, 0, "bad header seed");
  if (block.votes.size() > params.votes_per_block)
    return reject(BlockReject::IllegalTx, 0, "too many votes");

  // Tickets selected by the parent's seed, over the pool as the parent left
  // it. Until the pool can fill a ballot the chain runs PoW-only.
  std::vector<std::uint64_t> selected;
  if (state.tickets.live_count() >= params.votes_per_block) {
    auto sel = select_voters(parent.header_seed, state.tickets, params);
    selected = std::get<std::vector<std::uint64_t>>(sel);
  }

  std::uint32_t approvals = 0;
  std::set<std::uint64_t> voted_tickets;
  for (const Transaction& v : block.votes) {
    const auto* vote = v.as<VotePayload>();
    if (vote == nullptr) return reject(BlockReject::IllegalTx, v.id, "non-vote in vote section");
    if (std::find(selected.begin(), selected.end(), vote->ticket_id) == selected.end())
      return reject(BlockReject::IllegalTx, v.id, "vote from unselected ticket");
    if (!voted_tickets.insert(vote->ticket_id).second)
      return reject(BlockReject::IllegalTx, v.id, "duplicate vote");
    const Ticket& t = state.tickets.tickets.at(vote->ticket_id);
    if (t.owner != vote->voter)
      return reject(BlockReject::IllegalTx, v.id, "vote signer is not the ticket owner");
    if (vote->approves != block.parent_digest)
      return reject(BlockReject::IllegalTx, v.id, "vote approves a different block");
    if (vote->approve) ++approvals;
  }
  if (!selected.empty() && approvals < params.vote_majority)
    return reject(BlockReject::InsufficientVotes, 0, "insufficient_votes");

  // every selected ticket leaves the pool: voted if its ballot arrived,
  // missed (refunded) otherwise
  for (std::uint64_t ticket_id : selected)
    settle_selected_ticket(state, ticket_id, voted_tickets.contains(ticket_id), h, params, ev);

  begin_block_sweep(state, h, params, ev);

  // distribution-window boundary: the first block of a window carries the
  // payouts of the window that just closed
  std::vector<PoolPayout> expected_payouts;
  Height closed_window_start = 0;
  std::size_t next_payout = 0;
  if (h > 0 && h % params.b_distr == 0) {
    closed_window_start = state.pools.window_start;
    WindowReport report = state.pools.close_window(h - 1, params);
    expected_payouts = report.payouts;
    ev.windows.push_back(std::move(report));
  }

  // exactly one coinbase
  const Transaction* coinbase = nullptr;
  for (const Transaction& t : block.txs) {
    if (t.kind() != TxKind::CoinbaseMint) continue;
    if (coinbase != nullptr) return reject(BlockReject::IllegalTx, t.id, "duplicate coinbase");
    coinbase = &t;
  }
  if (coinbase == nullptr) return reject(BlockReject::IllegalTx, 0, "missing coinbase");
  const auto* mint = coinbase->as<CoinbaseMintPayload>();
  if (mint->miner != block.signer || mint->amount != params.coinbase_amount)
    return reject(BlockReject::IllegalTx, coinbase->id, "bad coinbase");
  state.minted_coinbase += mint->amount;
  credit(state, ev, mint->miner, mint->amount, FlowTag::Coinbase);

  for (const Transaction& t : block.txs) {
    state.next_tx_id = std::max(state.next_tx_id, t.id + 1);
    switch (t.kind()) {
      case TxKind::CoinbaseMint:
        break;  // handled above
      case TxKind::Vote:
        return reject(BlockReject::IllegalTx, t.id, "vote outside vote section");
      case TxKind::PoolDistribution: {
        const auto* d = t.as<PoolDistributionPayload>();
        if (next_payout >= expected_payouts.size())
          return reject(BlockReject::IllegalTx, t.id, "unexpected distribution");
        const PoolPayout& exp = expected_payouts[next_payout];
        if (d->recipient != exp.recipient || d->amount != exp.amount || d->pool != exp.pool ||
            d->window_start != closed_window_start)
          return reject(BlockReject::IllegalTx, t.id, "distribution mismatch");
        FlowTag tag = d->pool == 1 ? FlowTag::PoolMain
                                   : (d->pool == 2 ? FlowTag::PoolStorage : FlowTag::PoolSm);
        credit(state, ev, d->recipient, d->amount, tag);
        ++next_payout;
        break;
      }
      default: {
        auto err = apply_transaction(state, t, block.signer, h, params, ev);
        if (err) return reject(BlockReject::IllegalTx, t.id, "illegal_tx: " + *err);
      }
    }
  }
  if (next_payout != expected_payouts.size())
    return reject(BlockReject::IllegalTx, 0, "missing distribution transactions");

  for (const Transaction& v : block.votes) state.next_tx_id = std::max(state.next_tx_id, v.id + 1);
  state.pools.note_block(h, block.signer);
  state.height = h;
  return BlockVerdict::accept();
}

BlockVerdict validate_block(const LedgerState& state, const Block& block, const Block& parent,
                            const ProtocolParams& params) {
  LedgerState scratch = state;
  ApplyEvents ev;
  return apply_block(scratch, block, parent, params, ev);
}

// ---- dump / restore ----

static ordered_json digest_json(const Digest& d) { return to_hex(d); }

static Digest digest_from_json(const ordered_json& j) {
  Digest d{};
  if (!parse_hex_digest(j.get<std::string>(), d)) throw std::runtime_error("bad digest hex");
  return d;
}

static ordered_json slim_task_json(const SlimTask& t) {
  ordered_json j;
  j["objective"] = t.objective == Objective::Maximize ? "max" : "min";
  if (const auto* ks = std::get_if<KnapsackSpec>(&t.scoring)) {
    j["kind"] = "knapsack";
    ordered_json items = ordered_json::array();
    for (const auto& it : ks->items) items.push_back({it.value, it.weight});
    j["items"] = items;
    j["capacity"] = ks->capacity;
  } else {
    const auto& cs = std::get<MaxCliqueSpec>(t.scoring);
    j["kind"] = "max_clique";
    j["vertices"] = cs.vertices;
    j["adjacency"] = cs.adjacency;
  }
  j["data_digest"] = digest_json(t.data_digest);
  return j;
}

static SlimTask slim_task_from_json(const ordered_json& j) {
  SlimTask t;
  t.objective = j.at("objective").get<std::string>() == "max" ? Objective::Maximize
                                                              : Objective::Minimize;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "knapsack") {
    KnapsackSpec ks;
    for (const auto& item : j.at("items")) ks.items.push_back({item[0], item[1]});
    ks.capacity = j.at("capacity").get<Amount>();
    t.scoring = ks;
  } else {
    MaxCliqueSpec cs;
    cs.vertices = j.at("vertices").get<std::uint32_t>();
    cs.adjacency = j.at("adjacency").get<std::vector<std::uint64_t>>();
    t.scoring = cs;
  }
  t.data_digest = digest_from_json(j.at("data_digest"));
  return t;
}

static ordered_json pf_json(const PfSchedule& s) {
  return ordered_json{{"main", s.main_chain.p.num},
                      {"main_b", s.main_chain.min_delay_blocks},
                      {"storage", s.storage.p.num},
                      {"storage_b", s.storage.min_delay_blocks},
                      {"validation", s.validation.p.num},
                      {"validation_b", s.validation.min_delay_blocks}};
}

static PfSchedule pf_from_json(const ordered_json& j) {
  PfSchedule s;
  s.main_chain = {Fraction{j.at("main").get<std::int64_t>()}, j.at("main_b").get<Height>()};
  s.storage = {Fraction{j.at("storage").get<std::int64_t>()}, j.at("storage_b").get<Height>()};
  s.validation = {Fraction{j.at("validation").get<std::int64_t>()},
                  j.at("validation_b").get<Height>()};
  return s;
}

static ordered_json commitment_json(const Commitment& c) {
  if (const auto* hc = std::get_if<HashCommit>(&c.form))
    return ordered_json{{"type", "hash"}, {"digest", digest_json(hc->digest)}};
  const auto& sc = std::get<ShardCommit>(c.form);
  return ordered_json{
      {"type", "shard"}, {"digest", digest_json(sc.assembled_digest)}, {"n", sc.n_shards}};
}

static Commitment commitment_from_json(const ordered_json& j) {
  if (j.at("type").get<std::string>() == "hash")
    return Commitment{HashCommit{digest_from_json(j.at("digest"))}};
  return Commitment{
      ShardCommit{digest_from_json(j.at("digest")), j.at("n").get<std::uint32_t>()}};
}

static ordered_json tx_json(const Transaction& tx) {
  ordered_json j;
  j["id"] = tx.id;
  j["kind"] = tx_kind_name(tx.kind());
  j["fee"] = tx.fee_tr;
  switch (tx.kind()) {
    case TxKind::Payment: {
      const auto* p = tx.as<PaymentPayload>();
      j["from"] = p->from;
      j["to"] = p->to;
      j["amount"] = p->amount;
      break;
    }
    case TxKind::TicketPurchase: {
      const auto* p = tx.as<TicketPurchasePayload>();
      j["buyer"] = p->buyer;
      j["y"] = p->y;
      j["x"] = p->x;
      break;
    }
    case TxKind::Vote: {
      const auto* p = tx.as<VotePayload>();
      j["ticket"] = p->ticket_id;
      j["voter"] = p->voter;
      j["approves"] = digest_json(p->approves);
      j["approve"] = p->approve;
      break;
    }
    case TxKind::CoinbaseMint: {
      const auto* p = tx.as<CoinbaseMintPayload>();
      j["miner"] = p->miner;
      j["amount"] = p->amount;
      break;
    }
    case TxKind::Publish: {
      const auto* p = tx.as<PublishPayload>();
      j["task"] = slim_task_json(p->slim_task);
      j["fee_sub"] = p->fee_sub;
      j["fee_solve"] = p->fee_solve;
      j["pf"] = pf_json(p->pf_solve);
      j["client"] = p->client;
      break;
    }
    case TxKind::Stored: {
      const auto* p = tx.as<StoredPayload>();
      j["task"] = p->task;
      j["publish_ref"] = p->publish_ref;
      j["client"] = p->client;
      j["members"] = p->members;
      break;
    }
    case TxKind::Solve: {
      const auto* p = tx.as<SolveTxPayload>();
      j["miner"] = p->miner;
      j["commitment"] = commitment_json(p->commitment);
      j["score"] = p->declared_score;
      j["publish_ref"] = p->publish_ref;
      j["storage_source"] = p->storage_source;
      break;
    }
    case TxKind::Validate: {
      const auto* p = tx.as<ValidateTxPayload>();
      j["task"] = p->task;
      ordered_json votes = ordered_json::array();
      for (const auto& [member, digest] : p->encrypted_votes)
        votes.push_back({member, digest_json(digest)});
      j["encrypted"] = votes;
      break;
    }
    case TxKind::Seal: {
      const auto* p = tx.as<SealTxPayload>();
      j["task"] = p->task;
      ordered_json keys = ordered_json::array();
      for (const auto& [member, env] : p->keys)
        keys.push_back({member, env.key, env.votes});
      j["keys"] = keys;
      break;
    }
    case TxKind::Bid: {
      const auto* p = tx.as<BidTxPayload>();
      j["task"] = p->task;
      j["client"] = p->client;
      j["publish_ref"] = p->publish_ref;
      break;
    }
    case TxKind::Ask: {
      const auto* p = tx.as<AskTxPayload>();
      j["task"] = p->task;
      j["miner"] = p->miner;
      break;
    }
    case TxKind::Deal: {
      const auto* p = tx.as<DealTxPayload>();
      j["task"] = p->task;
      j["bid_ref"] = p->bid_ref;
      j["ask_refs"] = p->ask_refs;
      j["members"] = p->members;
      break;
    }
    case TxKind::MicropaymentClaim: {
      const auto* p = tx.as<MicropaymentClaimPayload>();
      j["task"] = p->task;
      j["channel"] = p->channel_id;
      j["party_a"] = p->party_a;
      j["party_b"] = p->party_b;
      j["balance_a"] = p->balance_a;
      j["balance_b"] = p->balance_b;
      j["seq"] = p->seq;
      break;
    }
    case TxKind::PoolDistribution: {
      const auto* p = tx.as<PoolDistributionPayload>();
      j["pool"] = p->pool;
      j["recipient"] = p->recipient;
      j["amount"] = p->amount;
      j["window_start"] = p->window_start;
      break;
    }
  }
  return j;
}

static Transaction tx_from_json(const ordered_json& j) {
  Transaction tx;
  tx.id = j.at("id").get<TxId>();
  tx.fee_tr = j.at("fee").get<Amount>();
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "payment") {
    tx.payload = PaymentPayload{j.at("from").get<PublicId>(), j.at("to").get<PublicId>(),
                                j.at("amount").get<Amount>()};
  } else if (kind == "ticket_purchase") {
    tx.payload = TicketPurchasePayload{j.at("buyer").get<PublicId>(), j.at("y").get<Amount>(),
                                       j.at("x").get<Amount>()};
  } else if (kind == "vote") {
    tx.payload = VotePayload{j.at("ticket").get<std::uint64_t>(), j.at("voter").get<PublicId>(),
                             digest_from_json(j.at("approves")), j.at("approve").get<bool>()};
  } else if (kind == "coinbase_mint") {
    tx.payload =
        CoinbaseMintPayload{j.at("miner").get<PublicId>(), j.at("amount").get<Amount>()};
  } else if (kind == "publish") {
    PublishPayload p;
    p.slim_task = slim_task_from_json(j.at("task"));
    p.fee_sub = j.at("fee_sub").get<Amount>();
    p.fee_solve = j.at("fee_solve").get<Amount>();
    p.pf_solve = pf_from_json(j.at("pf"));
    p.client = j.at("client").get<PublicId>();
    tx.payload = p;
  } else if (kind == "stored") {
    StoredPayload p;
    p.task = j.at("task").get<TaskId>();
    p.publish_ref = j.at("publish_ref").get<TxId>();
    p.client = j.at("client").get<PublicId>();
    p.members = j.at("members").get<std::vector<PublicId>>();
    tx.payload = p;
  } else if (kind == "solve") {
    SolveTxPayload p;
    p.miner = j.at("miner").get<PublicId>();
    p.commitment = commitment_from_json(j.at("commitment"));
    p.declared_score = j.at("score").get<double>();
    p.publish_ref = j.at("publish_ref").get<TxId>();
    p.storage_source = j.at("storage_source").get<PublicId>();
    tx.payload = p;
  } else if (kind == "validate") {
    ValidateTxPayload p;
    p.task = j.at("task").get<TaskId>();
    for (const auto& entry : j.at("encrypted"))
      p.encrypted_votes[entry[0].get<PublicId>()] = digest_from_json(entry[1]);
    tx.payload = p;
  } else if (kind == "seal") {
    SealTxPayload p;
    p.task = j.at("task").get<TaskId>();
    for (const auto& entry : j.at("keys")) {
      VoteEnvelope env;
      env.key = entry[1].get<std::uint64_t>();
      env.votes = entry[2].get<VoteList>();
      p.keys[entry[0].get<PublicId>()] = env;
    }
    tx.payload = p;
  } else if (kind == "bid") {
    tx.payload = BidTxPayload{j.at("task").get<TaskId>(), j.at("client").get<PublicId>(),
                              j.at("publish_ref").get<TxId>()};
  } else if (kind == "ask") {
    tx.payload = AskTxPayload{j.at("task").get<TaskId>(), j.at("miner").get<PublicId>()};
  } else if (kind == "deal") {
    DealTxPayload p;
    p.task = j.at("task").get<TaskId>();
    p.bid_ref = j.at("bid_ref").get<TxId>();
    p.ask_refs = j.at("ask_refs").get<std::vector<TxId>>();
    p.members = j.at("members").get<std::vector<PublicId>>();
    tx.payload = p;
  } else if (kind == "micropayment_claim") {
    MicropaymentClaimPayload p;
    p.task = j.at("task").get<TaskId>();
    p.channel_id = j.at("channel").get<std::uint64_t>();
    p.party_a = j.at("party_a").get<PublicId>();
    p.party_b = j.at("party_b").get<PublicId>();
    p.balance_a = j.at("balance_a").get<Amount>();
    p.balance_b = j.at("balance_b").get<Amount>();
    p.seq = j.at("seq").get<std::uint64_t>();
    tx.payload = p;
  } else if (kind == "pool_distribution") {
    tx.payload = PoolDistributionPayload{j.at("pool").get<std::uint8_t>(),
                                         j.at("recipient").get<PublicId>(),
                                         j.at("amount").get<Amount>(),
                                         j.at("window_start").get<Height>()};
  } else {
    throw std::runtime_error("unknown tx kind: " + kind);
  }
  return tx;
}

void dump_chain(std::ostream& os, const Chain& chain) {
  for (const Block& b : chain.blocks) {
    ordered_json j;
    j["height"] = b.height;
    j["parent"] = digest_json(b.parent_digest);
    j["signer"] = b.signer;
    j["tick"] = b.tick;
    j["target"] = b.target;
    j["nonce"] = b.pow.nonce;
    j["pow"] = digest_json(b.pow.digest);
    j["seed"] = digest_json(b.header_seed);
    ordered_json votes = ordered_json::array();
    for (const Transaction& v : b.votes) votes.push_back(tx_json(v));
    j["votes"] = votes;
    ordered_json txs = ordered_json::array();
    for (const Transaction& t : b.txs) txs.push_back(tx_json(t));
    j["txs"] = txs;
    os << j.dump() << "\n";
  }
}

Chain restore_chain(std::istream& is) {
  Chain chain;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    ordered_json j = ordered_json::parse(line);
    Block b;
    b.height = j.at("height").get<Height>();
    b.parent_digest = digest_from_json(j.at("parent"));
    b.signer = j.at("signer").get<PublicId>();
    b.tick = j.at("tick").get<std::uint64_t>();
    b.target = j.at("target").get<std::uint64_t>();
    b.pow.nonce = j.at("nonce").get<std::uint64_t>();
    b.pow.digest = digest_from_json(j.at("pow"));
    b.header_seed = digest_from_json(j.at("seed"));
    for (const auto& v : j.at("votes")) b.votes.push_back(tx_from_json(v));
    for (const auto& t : j.at("txs")) b.txs.push_back(tx_from_json(t));
    chain.blocks.push_back(std::move(b));
  }
  if (chain.blocks.empty()) throw std::runtime_error("empty chain dump");
  return chain;
}

}  // namespace poaw
