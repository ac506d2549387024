#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "poaw/digest.hpp"
#include "poaw/money.hpp"

namespace poaw {

enum class Objective : std::uint8_t { Maximize, Minimize };

struct KnapsackItem {
  Amount value = 0;
  Amount weight = 0;

  bool operator==(const KnapsackItem&) const = default;
};

struct KnapsackSpec {
  std::vector<KnapsackItem> items;
  Amount capacity = 0;

  bool operator==(const KnapsackSpec&) const = default;
};

// Undirected graph, adjacency kept as one bitmask row per vertex.
struct MaxCliqueSpec {
  std::uint32_t vertices = 0;
  std::vector<std::uint64_t> adjacency;

  void add_edge(std::uint32_t a, std::uint32_t b) {
    adjacency[a] |= (1ULL << b);
    adjacency[b] |= (1ULL << a);
  }
  bool has_edge(std::uint32_t a, std::uint32_t b) const {
    return (adjacency[a] >> b) & 1ULL;
  }

  bool operator==(const MaxCliqueSpec&) const = default;
};

using ScoringSpec = std::variant<KnapsackSpec, MaxCliqueSpec>;

struct ComputationalTask {
  Objective objective = Objective::Maximize;
  ScoringSpec scoring;
  std::vector<std::uint8_t> data;  // opaque payload, may be empty

  const char* kind_name() const;
};

// Slim form carried in-chain: the data payload replaced by its digest.
struct SlimTask {
  Objective objective = Objective::Maximize;
  ScoringSpec scoring;
  Digest data_digest{};

  bool operator==(const SlimTask&) const = default;
};

SlimTask make_slim(const ComputationalTask& task);

// Stable byte serialization of a task (fixed field order); the digest of a
// task definition is the digest of these bytes.
std::vector<std::uint8_t> canonical_task_bytes(const SlimTask& task);
Digest task_digest(const SlimTask& task);

// Candidates travel as ASCII comma-separated indices, e.g. "0,2,5".
// Empty bytes denote the empty selection.
std::string encode_candidate(const std::vector<std::uint32_t>& indices);
std::optional<std::vector<std::uint32_t>> parse_candidate(
    std::span<const std::uint8_t> candidate);

enum class ScoreStatus : std::uint8_t { Ok, Infeasible, Malformed };

struct ScoreOutcome {
  ScoreStatus status = ScoreStatus::Malformed;
  double value = 0.0;

  bool ok() const { return status == ScoreStatus::Ok; }
};

ScoreOutcome score_solution(const SlimTask& task, std::span<const std::uint8_t> candidate);

// Declared-vs-recomputed score equality at fixed 1e-9 resolution.
bool scores_equal(double a, double b);

// True when `a` is strictly better than `b` under the objective.
bool score_better(Objective obj, double a, double b);

// Exhaustive optimum for small instances (subset enumeration; guards size).
// Returns the optimal score and one optimal candidate.
struct ExactSolution {
  double score = 0.0;
  std::vector<std::uint32_t> candidate;
};
ExactSolution exact_best(const SlimTask& task);

}  // namespace poaw
