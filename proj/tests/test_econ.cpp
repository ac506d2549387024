#include <doctest.h>

#include <cmath>

#include "poaw/econ.hpp"
#include "poaw/rng.hpp"

using namespace poaw;

TEST_CASE("expected pos factor") {
  CHECK(expected_pos_factor(1.1) == doctest::Approx(1.095).epsilon(1e-9));
  CHECK(expected_pos_factor(1.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(expected_pos_factor(1.2) == doctest::Approx(1.19).epsilon(1e-9));
}

TEST_CASE("o1 adversary factor") {
  CHECK(o1_adversary_factor(0.25, 0.15) == doctest::Approx(1.0625).epsilon(1e-9));
  CHECK(o1_adversary_factor(0.15, 0.10) == doctest::Approx(1.035).epsilon(1e-9));
  CHECK(o1_adversary_factor(0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("frontier inversion and self-check") {
  auto frontier = solve_param_frontier(1.1, 0.01, {0.25});
  REQUIRE(frontier.has_value());
  REQUIRE(frontier->size() == 1);
  // p_pools = 1 - 1.085 / 1.25 = 0.132
  CHECK(frontier->front().p_pools == doctest::Approx(0.132).epsilon(1e-12));
  CHECK(std::abs(frontier->front().factor - (expected_pos_factor(1.1) - 0.01)) < 1e-12);

  // every emitted point satisfies the constraint to 1e-12
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
  for (double r : {1.06, 1.08, 1.10, 1.12}) {
    auto f = solve_param_frontier(r, 0.01, grid);
    REQUIRE(f.has_value());
    double target = expected_pos_factor(r) - 0.01;
    double prev_pv = -1.0, prev_pp = -1.0;
    for (const auto& p : *f) {
      CHECK(std::abs(o1_adversary_factor(p.p_vstake, p.p_pools) - target) < 1e-12);
      // the curve is monotone: more minting needs more pool taxation
      if (prev_pv >= 0.0) {
        CHECK(p.p_vstake > prev_pv);
        CHECK(p.p_pools > prev_pp);
      }
      prev_pv = p.p_vstake;
      prev_pp = p.p_pools;
    }
  }
}

TEST_CASE("frontier boundary: target of exactly 1 passes through 1 - 1/(1+pv)") {
  double r = 1.1;
  double eps = expected_pos_factor(r) - 1.0;
  auto f = solve_param_frontier(r, eps, {0.0, 0.25, 0.5});
  REQUIRE(f.has_value());
  for (const auto& p : *f)
    CHECK(p.p_pools == doctest::Approx(1.0 - 1.0 / (1.0 + p.p_vstake)).epsilon(1e-12));
}

TEST_CASE("frontier empty when eps is too large") {
  CHECK_FALSE(solve_param_frontier(1.1, 0.2, {0.0, 0.5, 1.0}).has_value());
}

TEST_CASE("o1 factor monotonicity") {
  DetRng rng(11);
  for (int i = 0; i < 1000; ++i) {
    double pv = rng.unit();
    double pp = rng.unit() * 0.99;
    double d = 1e-4 + rng.unit() * 0.01;
    if (pv + d <= 1.0)
      CHECK(o1_adversary_factor(pv + d, pp) > o1_adversary_factor(pv, pp));
    if (pp + d <= 1.0)
      CHECK(o1_adversary_factor(pv, pp + d) < o1_adversary_factor(pv, pp));
  }
}

TEST_CASE("dominance report") {
  ProtocolParams p = ProtocolParams::sim_scaled();
  PayoffReport rep = verify_pos_dominance(p);
  CHECK(rep.dominance);
  CHECK(rep.o1_factor > 1.0);
  CHECK(rep.o1_factor < 1.095 + 1e-12);
  CHECK(rep.o1_above_break_even);

  p.p_vstake = 0.5;
  p.p_pool_main = 0.0;
  p.p_pool_storage = 0.0;
  rep = verify_pos_dominance(p);
  CHECK(rep.o1_factor == doctest::Approx(1.5).epsilon(1e-12));
  CHECK_FALSE(rep.dominance);

  p.p_vstake = 0.25;
  p.p_pool_main = 1.0;
  rep = verify_pos_dominance(p);
  CHECK(rep.o1_factor == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rep.dominance);
}

TEST_CASE("efficiency ratio") {
  CHECK(efficiency_ratio(10, 5) == 10);
  CHECK(efficiency_ratio(10, 10) == 1);
  CHECK(efficiency_ratio(10, 50) == 1);
  CHECK(efficiency_ratio(1, 5) == 1);
  CHECK_THROWS(efficiency_ratio(0, 5));
}

TEST_CASE("transfer time arithmetic") {
  // 100 MB at 24 Mb/s is roughly half a minute
  double dl = transfer_time_seconds(100e6, 24e6);
  CHECK(dl == doctest::Approx(100e6 * 8.0 / 24e6).epsilon(1e-12));
  CHECK(dl > 25.0);
  CHECK(dl < 40.0);
  // uploading at 8 Mb/s takes a couple of minutes
  CHECK(transfer_time_seconds(100e6, 8e6) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(transfer_time_seconds(0.0, 24e6) == doctest::Approx(0.0));
  CHECK_THROWS(transfer_time_seconds(1.0, 0.0));
}
