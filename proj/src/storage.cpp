#include "poaw/storage.hpp"

#include <algorithm>

namespace poaw {

std::vector<PublicId> Dtmn::live_members() const {
  std::vector<PublicId> out;
  for (PublicId m : members)
    if (!pruned.contains(m)) out.push_back(m);
  return out;
}

void record_ping(Dtmn& dtmn, PublicId member, Height height) {
  if (dtmn.pruned.contains(member)) return;
  dtmn.last_ping[member] = height;
}

bool dtmn_meets_threshold(const Dtmn& dtmn, const ProtocolParams& params) {
  return dtmn.live_count() >= params.dtmn_failure_threshold();
}

std::vector<PublicId> prune_members(Dtmn& dtmn, Height height, const ProtocolParams& params) {
  std::vector<PublicId> pruned_now;
  if (dtmn.status == DtmnStatus::Failed || dtmn.status == DtmnStatus::Done) return pruned_now;
  for (PublicId m : dtmn.members) {
    if (dtmn.pruned.contains(m)) continue;
    auto it = dtmn.last_ping.find(m);
    Height last = (it != dtmn.last_ping.end()) ? it->second : dtmn.formed_height;
    if (height > last && height - last > params.ping_timeout) {
      dtmn.pruned.insert(m);
      pruned_now.push_back(m);
    }
  }
  if (!dtmn_meets_threshold(dtmn, params)) dtmn.status = DtmnStatus::Failed;
  return pruned_now;
}

Dtmn* StorageState::dtmn_for_task(TaskId task) {
  auto it = dtmn_by_task.find(task);
  if (it == dtmn_by_task.end()) return nullptr;
  auto dit = dtmns.find(it->second);
  return dit == dtmns.end() ? nullptr : &dit->second;
}

const Dtmn* StorageState::dtmn_for_task(TaskId task) const {
  return const_cast<StorageState*>(this)->dtmn_for_task(task);
}

BidOrder* OrderBook::find_bid(TaskId task) {
  for (auto& b : bids)
    if (b.task == task) return &b;
  return nullptr;
}

const BidOrder* OrderBook::find_bid(TaskId task) const {
  for (const auto& b : bids)
    if (b.task == task) return &b;
  return nullptr;
}

std::variant<DealOrder, MatchError> match_deal(const BidOrder& bid,
                                               const std::vector<AskOrder*>& asks, Height height,
                                               const ProtocolParams& params) {
  if (bid_expired(bid, height, params)) return MatchError::ExpiredBid;
  std::vector<AskOrder*> eligible;
  for (AskOrder* a : asks) {
    if (a->consumed || a->task != bid.task) continue;
    if (ask_lock_expired(*a, bid, height, params)) return MatchError::LockedResourcesExpired;
    eligible.push_back(a);
  }
  if (eligible.size() < params.r_s) return MatchError::NotEnoughAsks;

  DealOrder deal;
  deal.task = bid.task;
  deal.bid = bid.bid_tx;
  deal.height = height;
  for (std::size_t i = 0; i < params.r_s; ++i) {
    eligible[i]->consumed = true;
    deal.asks.push_back(eligible[i]->ask_tx);
    deal.members.push_back(eligible[i]->miner);
  }
  return deal;
}

// Synchronous rounds: every member uploads at most one chunk per round and
// may download several in parallel. Rarer chunks claim their holders first,
// and each transfer goes to the least-stocked receiver counting what is
// already in flight this round. This finishes an m-member, C-chunk exchange
// within ceil(log2 m) + C rounds.
ChunkExchangeResult chunk_exchange(const std::vector<PublicId>& members, std::uint32_t n_chunks,
                                   const std::function<bool(PublicId, std::uint32_t)>& alive) {
  ChunkExchangeResult result;
  if (members.empty() || n_chunks == 0) return result;

  auto is_alive = [&](PublicId m, std::uint32_t round) { return !alive || alive(m, round); };

  std::map<PublicId, std::set<std::uint32_t>> held;
  for (std::uint32_t c = 0; c < n_chunks; ++c) held[members[0]].insert(c);
  for (std::size_t i = 1; i < members.size(); ++i) held[members[i]] = {};

  const std::uint32_t max_rounds =
      n_chunks * static_cast<std::uint32_t>(members.size()) + 64;  // stall guard

  std::uint32_t round = 0;
  while (round < max_rounds) {
    std::vector<PublicId> living;
    for (PublicId m : members)
      if (is_alive(m, round)) living.push_back(m);
    if (living.empty()) break;

    bool all_complete = true;
    for (PublicId m : living)
      if (held[m].size() != n_chunks) all_complete = false;
    if (all_complete) break;

    std::map<std::uint32_t, std::uint32_t> holder_count;
    for (PublicId m : living)
      for (std::uint32_t c : held[m]) holder_count[c]++;

    std::vector<std::uint32_t> chunk_order;
    for (std::uint32_t c = 0; c < n_chunks; ++c)
      if (holder_count[c] > 0) chunk_order.push_back(c);
    std::sort(chunk_order.begin(), chunk_order.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (holder_count[a] != holder_count[b]) return holder_count[a] < holder_count[b];
      return a < b;
    });

    std::set<PublicId> busy_senders;
    std::map<PublicId, std::set<std::uint32_t>> pending;
    std::vector<std::tuple<PublicId, PublicId, std::uint32_t>> transfers;
    for (std::uint32_t c : chunk_order) {
      for (PublicId s : living) {
        if (busy_senders.contains(s) || !held[s].contains(c)) continue;
        PublicId best_recv = 0;
        std::size_t best_load = SIZE_MAX;
        for (PublicId r : living) {
          if (held[r].contains(c) || pending[r].contains(c)) continue;
          std::size_t load = held[r].size() + pending[r].size();
          if (load < best_load || (load == best_load && r < best_recv)) {
            best_load = load;
            best_recv = r;
          }
        }
        if (best_load == SIZE_MAX) break;  // everyone alive has this chunk coming
        busy_senders.insert(s);
        pending[best_recv].insert(c);
        transfers.emplace_back(s, best_recv, c);
      }
    }
    if (transfers.empty()) break;  // no progress possible among survivors

    for (const auto& [from, to, chunk] : transfers) {
      held[to].insert(chunk);
      result.chunks_sent[from] += 1;
    }
    ++round;
  }

  result.rounds = round;
  result.complete = true;
  for (PublicId m : members) {
    bool live_now = is_alive(m, round);
    if (live_now && held[m].size() == n_chunks) result.completed_members.push_back(m);
    if (live_now && held[m].size() != n_chunks) result.complete = false;
  }
  return result;
}

Digest channel_state_digest(std::uint64_t channel_id, Amount balance_a, Amount balance_b,
                            std::uint64_t seq) {
  return DigestWriter{}
      .u64(channel_id)
      .i64(balance_a)
      .i64(balance_b)
      .u64(seq)
      .finalize();
}

ChannelSig sign_channel_state(PublicId signer, std::uint64_t channel_id, Amount balance_a,
                              Amount balance_b, std::uint64_t seq) {
  Digest state = channel_state_digest(channel_id, balance_a, balance_b, seq);
  // simulated signature: (public id, digest of id || state)
  return ChannelSig{signer, DigestWriter{}.u32(signer).digest(state).finalize()};
}

std::optional<ChannelError> channel_update(Channel& ch, Amount delta, std::uint64_t new_seq,
                                           const ChannelSig& sig_a, const ChannelSig& sig_b) {
  if (ch.status == ChannelStatus::Claimed) return ChannelError::AlreadyClaimed;
  if (new_seq <= ch.seq) return ChannelError::StaleSeq;
  Amount new_a = ch.balance_a - delta;
  Amount new_b = ch.balance_b + delta;
  if (new_a < 0 || new_b < 0) return ChannelError::BadBalance;
  ChannelSig expect_a = sign_channel_state(ch.party_a, ch.id, new_a, new_b, new_seq);
  ChannelSig expect_b = sign_channel_state(ch.party_b, ch.id, new_a, new_b, new_seq);
  if (sig_a.signer != ch.party_a || sig_a.digest != expect_a.digest)
    return ChannelError::BadSignature;
  if (sig_b.signer != ch.party_b || sig_b.digest != expect_b.digest)
    return ChannelError::BadSignature;
  ch.balance_a = new_a;
  ch.balance_b = new_b;
  ch.seq = new_seq;
  return std::nullopt;
}

std::variant<ChannelClaim, ChannelError> claim_channel(Channel& ch) {
  if (ch.status == ChannelStatus::Claimed) return ChannelError::AlreadyClaimed;
  ch.status = ChannelStatus::Claimed;
  return ChannelClaim{ch.id, ch.party_a, ch.party_b, ch.balance_a, ch.balance_b, ch.seq};
}

Digest replication_challenge_response(std::span<const std::uint8_t> data,
                                      std::uint64_t challenge) {
  return DigestWriter{}.bytes(data).u64(challenge).finalize();
}

bool verify_replication_proof(const Digest&, std::span<const std::uint8_t> data,
                              std::uint64_t challenge, const Digest& response) {
  return replication_challenge_response(data, challenge) == response;
}

}  // namespace poaw
