#include <doctest.h>

#include <set>

#include "poaw/rng.hpp"
#include "poaw/storage.hpp"

using namespace poaw;

namespace {

Dtmn make_dtmn(std::uint32_t members, Height formed = 10) {
  Dtmn d;
  d.id = 1;
  d.task = 1;
  d.status = DtmnStatus::Active;
  d.formed_height = formed;
  for (PublicId m = 1; m <= members; ++m) {
    d.members.push_back(m);
    d.last_ping[m] = formed;
    d.replica[m] = true;
  }
  return d;
}

}  // namespace

TEST_CASE("dtmn failure threshold ladder") {
  ProtocolParams p = ProtocolParams::sim_scaled();

  p.r_s = 5;  // threshold floor(5/2)+1 = 3
  Dtmn d5 = make_dtmn(5);
  d5.pruned = {4, 5};
  CHECK(dtmn_meets_threshold(d5, p));  // 3 live is still active
  d5.pruned = {3, 4, 5};
  CHECK_FALSE(dtmn_meets_threshold(d5, p));  // 2 live has failed

  p.r_s = 7;  // threshold floor(7/2)+1 = 4
  Dtmn d7 = make_dtmn(7);
  d7.pruned = {5, 6, 7};
  CHECK(dtmn_meets_threshold(d7, p));  // 4 live still active
  d7.pruned = {4, 5, 6, 7};
  CHECK_FALSE(dtmn_meets_threshold(d7, p));
}

TEST_CASE("pruning silent members") {
  ProtocolParams p = ProtocolParams::sim_scaled();
  p.r_s = 5;
  p.ping_timeout = 4;
  Dtmn d = make_dtmn(5, 10);

  // member 5 falls silent after height 20, the rest keep pinging
  for (PublicId m = 1; m <= 5; ++m) record_ping(d, m, 20);
  for (Height h = 21; h <= 20 + p.ping_timeout; ++h) {
    for (PublicId m = 1; m <= 4; ++m) record_ping(d, m, h);
    CHECK(prune_members(d, h, p).empty());  // up to the timeout: kept
  }
  for (PublicId m = 1; m <= 4; ++m) record_ping(d, m, 25);
  auto pruned = prune_members(d, 25, p);
  REQUIRE(pruned.size() == 1);
  CHECK(pruned[0] == 5);
  CHECK(d.status == DtmnStatus::Active);

  // one more silence leaves three live members: still active
  for (Height h = 26; h <= 30; ++h)
    for (PublicId m = 1; m <= 3; ++m) record_ping(d, m, h);
  auto pruned2 = prune_members(d, 30, p);
  CHECK(pruned2.size() == 1);
  CHECK(d.live_count() == 3);
  CHECK(d.status == DtmnStatus::Active);

  // dropping to two live members fails the dtmn
  for (Height h = 31; h <= 35; ++h)
    for (PublicId m = 1; m <= 2; ++m) record_ping(d, m, h);
  auto pruned3 = prune_members(d, 35, p);
  CHECK(pruned3.size() == 1);
  CHECK(d.status == DtmnStatus::Failed);
}

TEST_CASE("bid expiry boundary") {
  ProtocolParams p = ProtocolParams::sim_scaled();
  BidOrder bid{1, 1, 9, 10, 1000, 50, false};
  CHECK_FALSE(bid_expired(bid, 50 + p.timeout_publish - 1, p));
  CHECK(bid_expired(bid, 50 + p.timeout_publish, p));
}

TEST_CASE("deal matching thresholds") {
  ProtocolParams p = ProtocolParams::sim_scaled();
  p.r_s = 5;
  BidOrder bid{1, 7, 9, 10, 1000, 50, false};

  std::vector<AskOrder> asks;
  for (TxId i = 0; i < 5; ++i) asks.push_back(AskOrder{100 + i, 7, static_cast<PublicId>(20 + i), 51, false});
  std::vector<AskOrder*> ask_ptrs;
  for (auto& a : asks) ask_ptrs.push_back(&a);

  auto ok = match_deal(bid, ask_ptrs, 52, p);
  REQUIRE(std::holds_alternative<DealOrder>(ok));
  const DealOrder& deal = std::get<DealOrder>(ok);
  CHECK(deal.members == std::vector<PublicId>{20, 21, 22, 23, 24});
  CHECK(deal.asks.size() == 5);
  for (const auto& a : asks) CHECK(a.consumed);

  // four asks are not enough
  std::vector<AskOrder> four;
  for (TxId i = 0; i < 4; ++i) four.push_back(AskOrder{200 + i, 7, static_cast<PublicId>(30 + i), 51, false});
  std::vector<AskOrder*> four_ptrs;
  for (auto& a : four) four_ptrs.push_back(&a);
  auto not_enough = match_deal(bid, four_ptrs, 52, p);
  CHECK(std::get<MatchError>(not_enough) == MatchError::NotEnoughAsks);

  // an expired bid cannot be matched
  auto expired = match_deal(bid, four_ptrs, 50 + p.timeout_publish, p);
  CHECK(std::get<MatchError>(expired) == MatchError::ExpiredBid);
}

TEST_CASE("chunk exchange: single member completes immediately") {
  auto r = chunk_exchange({7}, 12);
  CHECK(r.complete);
  CHECK(r.rounds == 0);
}

TEST_CASE("chunk exchange: 7 members 12 chunks within the round bound") {
  std::vector<PublicId> members{1, 2, 3, 4, 5, 6, 7};
  auto r = chunk_exchange(members, 12);
  CHECK(r.complete);
  CHECK(r.completed_members.size() == 7);
  // ceil(log2(7)) + 12 = 15
  CHECK(r.rounds <= 15);
  // the seed uploads most of the traffic but not everything
  CHECK(r.chunks_sent.at(1) >= 12);
}

TEST_CASE("chunk exchange bound over random sizes") {
  DetRng rng(44);
  for (int t = 0; t < 100; ++t) {
    std::uint32_t m = 2 + static_cast<std::uint32_t>(rng.below(9));
    std::uint32_t chunks = 1 + static_cast<std::uint32_t>(rng.below(24));
    std::vector<PublicId> members;
    for (PublicId i = 1; i <= m; ++i) members.push_back(i);
    auto r = chunk_exchange(members, chunks);
    CHECK(r.complete);
    std::uint32_t bound = chunks;
    std::uint32_t log2m = 0;
    while ((1u << log2m) < m) ++log2m;
    bound += log2m;
    CHECK(r.rounds <= bound);
  }
}

TEST_CASE("chunk exchange survives member failure above threshold") {
  std::vector<PublicId> members{1, 2, 3, 4, 5, 6, 7};
  // member 3 dies after round 4
  auto alive = [](PublicId m, std::uint32_t round) { return !(m == 3 && round >= 4); };
  auto r = chunk_exchange(members, 12, alive);
  CHECK(r.complete);  // survivors finish
  for (PublicId m : r.completed_members) CHECK(m != 3);
  CHECK(r.completed_members.size() == 6);
}

TEST_CASE("micropayment channel updates and claim") {
  Channel ch;
  ch.id = 5;
  ch.party_a = 1;
  ch.party_b = 2;
  ch.deposit = 100;
  ch.balance_a = 100;
  ch.balance_b = 0;

  for (int i = 1; i <= 3; ++i) {
    Amount na = ch.balance_a - 10, nb = ch.balance_b + 10;
    ChannelSig sa = sign_channel_state(1, ch.id, na, nb, ch.seq + 1);
    ChannelSig sb = sign_channel_state(2, ch.id, na, nb, ch.seq + 1);
    CHECK_FALSE(channel_update(ch, 10, ch.seq + 1, sa, sb).has_value());
    CHECK(ch.balance_a + ch.balance_b == ch.deposit);
  }
  CHECK(ch.balance_a == 70);
  CHECK(ch.balance_b == 30);

  // stale sequence replay
  ChannelSig sa = sign_channel_state(1, ch.id, 60, 40, ch.seq);
  ChannelSig sb = sign_channel_state(2, ch.id, 60, 40, ch.seq);
  CHECK(channel_update(ch, 10, ch.seq, sa, sb) == ChannelError::StaleSeq);

  // bad signature (signed for a different balance)
  ChannelSig bad = sign_channel_state(1, ch.id, 0, 100, ch.seq + 1);
  ChannelSig good = sign_channel_state(2, ch.id, 60, 40, ch.seq + 1);
  CHECK(channel_update(ch, 10, ch.seq + 1, bad, good) == ChannelError::BadSignature);

  // overdraw
  ChannelSig oa = sign_channel_state(1, ch.id, -10, 110, ch.seq + 1);
  ChannelSig ob = sign_channel_state(2, ch.id, -10, 110, ch.seq + 1);
  CHECK(channel_update(ch, 80, ch.seq + 1, oa, ob) == ChannelError::BadBalance);

  auto claim = claim_channel(ch);
  REQUIRE(std::holds_alternative<ChannelClaim>(claim));
  CHECK(std::get<ChannelClaim>(claim).balance_a == 70);
  CHECK(std::get<ChannelClaim>(claim).balance_b == 30);
  CHECK(std::get<ChannelError>(claim_channel(ch)) == ChannelError::AlreadyClaimed);
}

TEST_CASE("claim with zero updates returns the deposit to the payer") {
  Channel ch;
  ch.id = 9;
  ch.party_a = 1;
  ch.party_b = 2;
  ch.deposit = 100;
  ch.balance_a = 100;
  auto claim = claim_channel(ch);
  REQUIRE(std::holds_alternative<ChannelClaim>(claim));
  CHECK(std::get<ChannelClaim>(claim).balance_a == 100);
  CHECK(std::get<ChannelClaim>(claim).balance_b == 0);
}

TEST_CASE("replication challenge-response") {
  std::vector<std::uint8_t> data{1, 2, 3, 4, 5};
  Digest proof = replication_challenge_response(data, 77);
  CHECK(verify_replication_proof({}, data, 77, proof));
  CHECK_FALSE(verify_replication_proof({}, data, 78, proof));
  std::vector<std::uint8_t> other{1, 2, 3, 4, 6};
  CHECK_FALSE(verify_replication_proof({}, other, 77, proof));
}
