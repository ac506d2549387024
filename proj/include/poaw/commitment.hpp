#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <variant>
#include <vector>

#include "poaw/digest.hpp"
#include "poaw/money.hpp"
#include "poaw/rng.hpp"

namespace poaw {

// Hash-based commitment: digest(solution || nonce). Binding and hiding come
// from the digest; the nonce is the blinding value.
struct HashCommit {
  Digest digest{};

  bool operator==(const HashCommit&) const = default;
};

// Shard-based commitment: the solver hands randomly indexed shards to the
// dTMN instead of staying online for a reveal round.
struct ShardCommit {
  Digest assembled_digest{};
  std::uint32_t n_shards = 0;

  bool operator==(const ShardCommit&) const = default;
};

struct Commitment {
  std::variant<HashCommit, ShardCommit> form;

  bool is_hash() const { return std::holds_alternative<HashCommit>(form); }
  bool operator==(const Commitment&) const = default;
};

Digest solution_commit_digest(std::span<const std::uint8_t> solution, std::uint64_t nonce);
Commitment make_hash_commit(std::span<const std::uint8_t> solution, std::uint64_t nonce);

struct Shard {
  std::uint64_t random_index = 0;  // drawn from [1, index_space], all distinct
  std::vector<std::uint8_t> payload;
};

struct ShardSet {
  std::vector<Shard> shards;  // strictly increasing random_index
  std::map<PublicId, std::vector<std::size_t>> assignment;  // member -> shard positions
  std::uint64_t index_space = 0;
};

enum class ShardError : std::uint8_t { EmptySolution, IndexSpaceTooSmall };

std::variant<ShardSet, ShardError> shard_split(std::span<const std::uint8_t> solution,
                                               std::uint32_t n_shards,
                                               std::uint32_t shards_per_member,
                                               std::span<const PublicId> members, DetRng& rng,
                                               std::uint64_t index_space = 100'000);

std::vector<std::uint8_t> shard_assemble(const ShardSet& set);

Commitment make_shard_commit(std::span<const std::uint8_t> solution, std::uint32_t n_shards);

// What a solver discloses at validation time: the plain solution plus the
// nonce for hash commits (assembled shards resolve to the same shape).
struct Reveal {
  std::vector<std::uint8_t> solution;
  std::uint64_t nonce = 0;
};

bool commitment_matches(const Commitment& commit, const Reveal& reveal);

}  // namespace poaw
