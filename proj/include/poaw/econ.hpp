#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "poaw/params.hpp"

namespace poaw {

// Expected payback factor of a pure PoS ticket: 0.95*r + 0.05
// (95% selected at factor r, 5% expired at face value).
double expected_pos_factor(double r);

// Reward factor of an adversary that wins back its own task:
// (1 + p_vstake) * (1 - p_pools), vstakes counted at face value.
double o1_adversary_factor(double p_vstake, double p_pools);

struct FrontierPoint {
  double p_vstake = 0.0;
  double p_pools = 0.0;
  double factor = 0.0;  // o1 factor at this point, equals the target
};

// Solves (1 + p_vstake)(1 - p_pools) = 0.95r + 0.05 - eps for p_pools over a
// grid of p_vstake values. Empty when the target factor is not above 1.
std::optional<std::vector<FrontierPoint>> solve_param_frontier(double r, double epsilon_pos,
                                                               const std::vector<double>& grid);

struct PayoffReport {
  double pos_factor = 0.0;
  double o1_factor = 0.0;
  bool dominance = false;       // o1 < pos
  double margin = 0.0;          // pos - o1
  bool o1_above_break_even = false;  // honest solver still earns > 100%
};

PayoffReport verify_pos_dominance(const ProtocolParams& params);

// Worst-case centralized-vs-competition income ratio under the saturation
// model: n_m when tasks are scarcer than miners, otherwise 1.
std::uint64_t efficiency_ratio(std::uint64_t n_m, std::uint64_t n_t);

double transfer_time_seconds(double payload_bytes, double rate_bits_per_s);

}  // namespace poaw
