#include "poaw/task.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <stdexcept>

namespace poaw {

const char* ComputationalTask::kind_name() const {
  return std::holds_alternative<KnapsackSpec>(scoring) ? "knapsack" : "max_clique";
}

SlimTask make_slim(const ComputationalTask& task) {
  SlimTask slim;
  slim.objective = task.objective;
  slim.scoring = task.scoring;
  slim.data_digest = sha256(task.data);
  return slim;
}

std::vector<std::uint8_t> canonical_task_bytes(const SlimTask& task) {
  std::vector<std::uint8_t> out;
  auto push_u64 = [&out](std::uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  out.push_back(task.objective == Objective::Maximize ? 0 : 1);
  if (const auto* ks = std::get_if<KnapsackSpec>(&task.scoring)) {
    out.push_back(0x01);
    push_u64(ks->items.size());
    for (const auto& it : ks->items) {
      push_u64(static_cast<std::uint64_t>(it.value));
      push_u64(static_cast<std::uint64_t>(it.weight));
    }
    push_u64(static_cast<std::uint64_t>(ks->capacity));
  } else {
    const auto& cs = std::get<MaxCliqueSpec>(task.scoring);
    out.push_back(0x02);
    push_u64(cs.vertices);
    for (std::uint64_t row : cs.adjacency) push_u64(row);
  }
  out.insert(out.end(), task.data_digest.begin(), task.data_digest.end());
  return out;
}

Digest task_digest(const SlimTask& task) { return sha256(canonical_task_bytes(task)); }

std::string encode_candidate(const std::vector<std::uint32_t>& indices) {
  std::string s;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) s.push_back(',');
    s += std::to_string(indices[i]);
  }
  return s;
}

std::optional<std::vector<std::uint32_t>> parse_candidate(
    std::span<const std::uint8_t> candidate) {
  std::vector<std::uint32_t> out;
  if (candidate.empty()) return out;
  std::uint64_t cur = 0;
  bool have_digit = false;
  for (std::uint8_t c : candidate) {
    if (c >= '0' && c <= '9') {
      cur = cur * 10 + (c - '0');
      if (cur > 0xFFFFFFFFULL) return std::nullopt;
      have_digit = true;
    } else if (c == ',') {
      if (!have_digit) return std::nullopt;
      out.push_back(static_cast<std::uint32_t>(cur));
      cur = 0;
      have_digit = false;
    } else {
      return std::nullopt;
    }
  }
  if (!have_digit) return std::nullopt;
  out.push_back(static_cast<std::uint32_t>(cur));
  return out;
}

static ScoreOutcome score_knapsack(const KnapsackSpec& spec,
                                   const std::vector<std::uint32_t>& picks) {
  std::set<std::uint32_t> seen;
  Amount value = 0, weight = 0;
  for (std::uint32_t idx : picks) {
    if (idx >= spec.items.size()) return {ScoreStatus::Malformed, 0.0};
    if (!seen.insert(idx).second) return {ScoreStatus::Malformed, 0.0};
    value += spec.items[idx].value;
    weight += spec.items[idx].weight;
  }
  if (weight > spec.capacity) return {ScoreStatus::Infeasible, 0.0};
  return {ScoreStatus::Ok, static_cast<double>(value)};
}

static ScoreOutcome score_clique(const MaxCliqueSpec& spec,
                                 const std::vector<std::uint32_t>& picks) {
  std::set<std::uint32_t> seen;
  for (std::uint32_t v : picks) {
    if (v >= spec.vertices) return {ScoreStatus::Malformed, 0.0};
    if (!seen.insert(v).second) return {ScoreStatus::Malformed, 0.0};
  }
  for (std::size_t i = 0; i < picks.size(); ++i)
    for (std::size_t j = i + 1; j < picks.size(); ++j)
      if (!spec.has_edge(picks[i], picks[j])) return {ScoreStatus::Infeasible, 0.0};
  return {ScoreStatus::Ok, static_cast<double>(picks.size())};
}

ScoreOutcome score_solution(const SlimTask& task, std::span<const std::uint8_t> candidate) {
  auto picks = parse_candidate(candidate);
  if (!picks) return {ScoreStatus::Malformed, 0.0};
  if (const auto* ks = std::get_if<KnapsackSpec>(&task.scoring)) return score_knapsack(*ks, *picks);
  return score_clique(std::get<MaxCliqueSpec>(task.scoring), *picks);
}

bool scores_equal(double a, double b) {
  return std::llround(a * 1e9) == std::llround(b * 1e9);
}

bool score_better(Objective obj, double a, double b) {
  if (scores_equal(a, b)) return false;
  return obj == Objective::Maximize ? a > b : a < b;
}

ExactSolution exact_best(const SlimTask& task) {
  std::size_t n = std::holds_alternative<KnapsackSpec>(task.scoring)
                      ? std::get<KnapsackSpec>(task.scoring).items.size()
                      : std::get<MaxCliqueSpec>(task.scoring).vertices;
  if (n > 24) throw std::invalid_argument("exact_best: instance too large");

  std::uint32_t best_mask = 0;
  double best_score = 0.0;  // the empty selection is always feasible, score 0
  auto consider = [&](std::uint32_t mask, double score) {
    if (score_better(task.objective, score, best_score)) {
      best_score = score;
      best_mask = mask;
    }
  };

  if (const auto* ks = std::get_if<KnapsackSpec>(&task.scoring)) {
    for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
      Amount value = 0, weight = 0;
      for (std::uint32_t i = 0; i < n; ++i) {
        if ((mask >> i) & 1U) {
          value += ks->items[i].value;
          weight += ks->items[i].weight;
        }
      }
      if (weight <= ks->capacity) consider(mask, static_cast<double>(value));
    }
  } else {
    const auto& cs = std::get<MaxCliqueSpec>(task.scoring);
    for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
      bool clique = true;
      for (std::uint32_t i = 0; i < n && clique; ++i) {
        if (!((mask >> i) & 1U)) continue;
        // every other selected vertex must be adjacent to i
        std::uint64_t need = static_cast<std::uint64_t>(mask) & ~(1ULL << i);
        if ((cs.adjacency[i] & need) != need) clique = false;
      }
      if (clique) consider(mask, static_cast<double>(std::popcount(mask)));
    }
  }

  ExactSolution best;
  best.score = best_score;
  for (std::uint32_t i = 0; i < n; ++i)
    if ((best_mask >> i) & 1U) best.candidate.push_back(i);
  return best;
}

}  // namespace poaw
