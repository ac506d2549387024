#include "poaw/econ.hpp"

#include <stdexcept>

namespace poaw {

double expected_pos_factor(double r) { return 0.95 * r + 0.05; }

double o1_adversary_factor(double p_vstake, double p_pools) {
  return (1.0 + p_vstake) * (1.0 - p_pools);
}

std::optional<std::vector<FrontierPoint>> solve_param_frontier(double r, double epsilon_pos,
                                                               const std::vector<double>& grid) {
  // target 1 is the break-even boundary and still yields a curve; anything
  // below it would reward the adversary less than holding currency
  const double target = expected_pos_factor(r) - epsilon_pos;
  if (target < 1.0 - 1e-12) return std::nullopt;
  std::vector<FrontierPoint> out;
  for (double pv : grid) {
    if (pv < 0.0 || pv > 1.0) continue;
    double pp = 1.0 - target / (1.0 + pv);
    if (pp < 0.0 || pp > 1.0) continue;
    out.push_back(FrontierPoint{pv, pp, o1_adversary_factor(pv, pp)});
  }
  if (out.empty()) return std::nullopt;
  return out;
}

PayoffReport verify_pos_dominance(const ProtocolParams& params) {
  PayoffReport rep;
  rep.pos_factor = expected_pos_factor(params.r);
  rep.o1_factor = o1_adversary_factor(params.p_vstake, params.p_pools());
  rep.dominance = rep.o1_factor < rep.pos_factor;
  rep.margin = rep.pos_factor - rep.o1_factor;
  rep.o1_above_break_even = rep.o1_factor > 1.0;
  return rep;
}

std::uint64_t efficiency_ratio(std::uint64_t n_m, std::uint64_t n_t) {
  if (n_m == 0 || n_t == 0) throw std::invalid_argument("efficiency_ratio: zero input");
  return n_t < n_m ? n_m : 1;
}

double transfer_time_seconds(double payload_bytes, double rate_bits_per_s) {
  if (rate_bits_per_s <= 0.0) throw std::invalid_argument("transfer rate must be positive");
  return payload_bytes * 8.0 / rate_bits_per_s;
}

}  // namespace poaw
