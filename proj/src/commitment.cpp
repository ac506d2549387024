#include "poaw/commitment.hpp"

#include <algorithm>
#include <stdexcept>

namespace poaw {

Digest solution_commit_digest(std::span<const std::uint8_t> solution, std::uint64_t nonce) {
  return DigestWriter{}.bytes(solution).u64(nonce).finalize();
}

Commitment make_hash_commit(std::span<const std::uint8_t> solution, std::uint64_t nonce) {
  return Commitment{HashCommit{solution_commit_digest(solution, nonce)}};
}

Commitment make_shard_commit(std::span<const std::uint8_t> solution, std::uint32_t n_shards) {
  return Commitment{ShardCommit{sha256(solution), n_shards}};
}

std::variant<ShardSet, ShardError> shard_split(std::span<const std::uint8_t> solution,
                                               std::uint32_t n_shards,
                                               std::uint32_t shards_per_member,
                                               std::span<const PublicId> members, DetRng& rng,
                                               std::uint64_t index_space) {
  if (n_shards == 0 || shards_per_member == 0)
    throw std::invalid_argument("shard_split: zero shard count");
  if (solution.empty()) return ShardError::EmptySolution;
  if (index_space < n_shards) return ShardError::IndexSpaceTooSmall;

  ShardSet set;
  set.index_space = index_space;

  auto draws = rng.sample_without_replacement(index_space, n_shards);
  std::sort(draws.begin(), draws.end());

  const std::size_t len = solution.size();
  const std::size_t base = len / n_shards;
  const std::size_t extra = len % n_shards;
  std::size_t offset = 0;
  for (std::uint32_t i = 0; i < n_shards; ++i) {
    std::size_t sz = base + (i < extra ? 1 : 0);
    Shard s;
    s.random_index = draws[i] + 1;  // indices live in [1, index_space]
    s.payload.assign(solution.begin() + static_cast<std::ptrdiff_t>(offset),
                     solution.begin() + static_cast<std::ptrdiff_t>(offset + sz));
    offset += sz;
    set.shards.push_back(std::move(s));
  }

  // round-robin over the member list in the given order
  for (std::size_t i = 0; i < set.shards.size() && !members.empty(); ++i) {
    set.assignment[members[i % members.size()]].push_back(i);
  }
  return set;
}

std::vector<std::uint8_t> shard_assemble(const ShardSet& set) {
  std::vector<std::size_t> order(set.shards.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return set.shards[a].random_index < set.shards[b].random_index;
  });
  std::vector<std::uint8_t> out;
  for (std::size_t i : order)
    out.insert(out.end(), set.shards[i].payload.begin(), set.shards[i].payload.end());
  return out;
}

bool commitment_matches(const Commitment& commit, const Reveal& reveal) {
  if (const auto* h = std::get_if<HashCommit>(&commit.form)) {
    return solution_commit_digest(reveal.solution, reveal.nonce) == h->digest;
  }
  const auto& s = std::get<ShardCommit>(commit.form);
  return sha256(reveal.solution) == s.assembled_digest;
}

}  // namespace poaw
