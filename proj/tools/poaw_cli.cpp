#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "poaw/attacks.hpp"
#include "poaw/econ.hpp"
#include "poaw/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace poaw;

namespace {

int run_simulate(const std::string& config_path, const std::vector<std::string>& overrides,
                 std::uint64_t seed_override, bool has_seed, const std::string& out_dir) {
  std::string text;
  {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot open config " << config_path << "\n";
      return 2;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  std::vector<std::string> all_overrides = overrides;
  if (has_seed) all_overrides.push_back("seed=" + std::to_string(seed_override));

  SimConfig cfg;
  std::string digest;
  try {
    cfg = parse_scenario_text(text, all_overrides);
    digest = scenario_digest_hex(text, all_overrides);
  } catch (const ConfigError& e) {
    std::cerr << "config error at key '" << e.key << "': " << e.what() << "\n";
    return 2;
  }

  fs::create_directories(out_dir);
  cfg.collect_chain = true;
  Metrics metrics = run_scenario(cfg);

  const std::string agents_path = out_dir + "/agents.tsv";
  const std::string run_path = out_dir + "/run.tsv";
  const std::string summary_path = out_dir + "/summary.txt";
  const std::string chain_path = out_dir + "/chain.jsonl";
  const std::string manifest_path = out_dir + "/manifest.json";
  write_agent_metrics_tsv(agents_path, metrics, digest);
  write_run_metrics_tsv(run_path, metrics, digest);
  write_run_summary(summary_path, metrics, digest);
  {
    Chain chain;
    chain.blocks.push_back(make_genesis());
    for (const Block& b : metrics.chain_blocks) chain.blocks.push_back(b);
    std::ofstream chain_out(chain_path);
    chain_out << "# config_digest=" << digest << "\n";
    dump_chain(chain_out, chain);
  }
  write_manifest(manifest_path, "simulate", digest, cfg.seed,
                 {agents_path, run_path, summary_path, chain_path});

  if (metrics.invariant_violation) {
    std::cerr << "invariant violation: " << metrics.invariant_detail << "\n";
    return 1;
  }
  std::cout << "simulated " << metrics.blocks << " blocks, " << metrics.competitions_sealed
            << " competitions sealed; outputs in " << out_dir << "\n";
  return 0;
}

int run_verify_theorem(double r, double p_vstake, double p_pools) {
  double pos = expected_pos_factor(r);
  double o1 = o1_adversary_factor(p_vstake, p_pools);
  std::cout << std::setprecision(10);
  std::cout << "PoS expected factor:  " << pos << "\n";
  std::cout << "O(1) adversary factor: " << o1 << "\n";
  std::cout << "bounds: 1 < " << o1 << " < " << pos << " -> "
            << ((o1 > 1.0 && o1 < pos) ? "holds" : "violated") << "\n";
  std::cout << "dominance: " << (o1 < pos ? "yes" : "no") << "\n";
  return 0;
}

int run_emit_frontier(const std::vector<double>& rs, double eps, std::uint32_t grid_points,
                      const std::string& out_path) {
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) {
      std::cerr << "error: cannot open " << out_path << "\n";
      return 2;
    }
    out = &file;
  }
  *out << "r\tp_vstake\tp_pools\to1_factor\n";
  *out << std::setprecision(12);
  for (double r : rs) {
    std::vector<double> grid;
    for (std::uint32_t i = 0; i < grid_points; ++i)
      grid.push_back(static_cast<double>(i) / static_cast<double>(grid_points - 1));
    auto frontier = solve_param_frontier(r, eps, grid);
    if (!frontier) {
      std::cerr << "empty_frontier: no parameter satisfies the constraint for r=" << r
                << ", eps=" << eps << "\n";
      return 2;
    }
    for (const FrontierPoint& p : *frontier)
      *out << r << '\t' << p.p_vstake << '\t' << p.p_pools << '\t' << p.factor << "\n";
  }
  return 0;
}

int run_attack(const std::string& which, std::uint64_t horizon, std::uint64_t seed,
               std::uint32_t trials, double hash_share, double stake_share, double spam_rate,
               std::int64_t spam_fee, std::uint32_t colluders, bool no_honest, bool defector,
               const std::string& out_dir) {
  ProtocolParams params = ProtocolParams::sim_scaled();
  std::ostringstream report;
  if (which == "o1") {
    O1Report r = run_o1_attack(params, horizon, seed);
    report << "o1 attack: adversary factor " << std::setprecision(8) << r.adversary_factor
           << " (analytic " << r.analytic_adversary << ", " << r.adversary_cycles
           << " cycles), PoS control " << r.pos_factor << " (analytic " << r.analytic_pos << ", "
           << r.pos_cycles << " tickets), dominance " << (r.dominance ? "yes" : "no") << "\n";
    if (r.metrics.invariant_violation) {
      std::cerr << "invariant violation: " << r.metrics.invariant_detail << "\n";
      return 1;
    }
  } else if (which == "ssa") {
    SSAReport r = run_ssa_attack(params, horizon, seed, spam_rate, spam_fee, !no_honest);
    report << "ssa attack: fees paid " << r.ssa_fees_paid << ", winnings " << r.ssa_winnings
           << ", retrieval cost " << r.ssa_retrieval_cost << ", net " << r.net << " ("
           << r.sealed << " sealed, honest win rate " << r.honest_win_rate << ")\n";
    if (r.metrics.invariant_violation) {
      std::cerr << "invariant violation: " << r.metrics.invariant_detail << "\n";
      return 1;
    }
  } else if (which == "fork") {
    ForkReport r = run_fork_attack(params, hash_share, stake_share, trials, horizon, seed);
    report << "fork attack: h=" << hash_share << " s=" << stake_share << " -> success rate "
           << r.success_rate << " (" << r.successes << "/" << r.trials << ")\n";
  } else if (which == "withhold") {
    WithholdReport pos = run_withhold_attack(hash_share, true, horizon, seed);
    WithholdReport pow = run_withhold_attack(hash_share, false, horizon, seed + 1);
    report << "withhold attack at share " << hash_share << ": PoS-approval revenue "
           << pos.relative_revenue << ", PoW-only control " << pow.relative_revenue << "\n";
  } else if (which == "collusion") {
    CollusionReport r = run_collusion(params, colluders, !no_honest, defector, horizon, seed);
    report << "collusion: " << r.sealed << " sealed, honest wins " << r.honest_wins
           << " (rate " << r.honest_win_rate << "), defector wins " << r.defector_wins
           << ", cartel wins " << r.cartel_wins << "\n";
    if (r.metrics.invariant_violation) {
      std::cerr << "invariant violation: " << r.metrics.invariant_detail << "\n";
      return 1;
    }
  } else {
    std::cerr << "unknown attack: " << which << "\n";
    return 2;
  }
  std::cout << report.str();
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream out(out_dir + "/attack_report.txt");
    out << report.str();
  }
  return 0;
}

int run_report(const std::string& run_dir) {
  std::ifstream summary(run_dir + "/summary.txt");
  if (!summary) {
    std::cerr << "error: no summary.txt under " << run_dir << "\n";
    return 2;
  }
  std::cout << summary.rdbuf();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proof-of-accumulated-work simulator and economics analyzer"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run a scenario file");
  std::string config_path, out_dir = "out";
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  simulate->add_option("--config", config_path, "scenario JSON file")->required();
  simulate->add_option("--out", out_dir, "output directory");
  simulate->add_option("--set", overrides, "override dotted.key=value")->take_all();
  auto* seed_opt = simulate->add_option("--seed", seed, "override the scenario seed");

  // verify-theorem
  auto* verify = app.add_subcommand("verify-theorem", "check the PoS dominance bound");
  double r = 1.1, p_vstake = 0.25, p_pools = 0.15;
  verify->add_option("--r", r, "PoS profit factor");
  verify->add_option("--pvstake", p_vstake, "vstake mint fraction");
  verify->add_option("--ppools", p_pools, "promised-fee pools fraction");

  // emit-frontier
  auto* frontier = app.add_subcommand("emit-frontier", "emit (p_vstake, p_pools) curves");
  std::vector<double> rs{1.06, 1.08, 1.10, 1.12};
  double eps = 0.01;
  std::uint32_t grid = 101;
  std::string frontier_out;
  frontier->add_option("--r", rs, "PoS factors, one curve each")->take_all();
  frontier->add_option("--eps", eps, "PoS margin epsilon");
  frontier->add_option("--grid", grid, "grid points over p_vstake in [0,1]")
      ->check(CLI::Range(2u, 2000000u));
  frontier->add_option("--out", frontier_out, "output file (default stdout)");

  // attack
  auto* attack = app.add_subcommand("attack", "run an adversarial experiment");
  std::string which;
  std::uint64_t horizon = 2000, attack_seed = 7;
  std::uint32_t trials = 1000, colluders = 5;
  double hash_share = 0.6, stake_share = 0.1, spam_rate = 4.0;
  std::int64_t spam_fee = 10;
  bool no_honest = false, defector = false;
  std::string attack_out;
  attack->add_option("kind", which, "o1 | ssa | fork | withhold | collusion")->required();
  attack->add_option("--horizon", horizon, "blocks per run");
  attack->add_option("--seed", attack_seed, "rng seed");
  attack->add_option("--trials", trials, "fork trials");
  attack->add_option("--hash-share", hash_share, "adversary hash share");
  attack->add_option("--stake-share", stake_share, "adversary ticket share");
  attack->add_option("--spam-rate", spam_rate, "SSA solves per competition per block");
  attack->add_option("--spam-fee", spam_fee, "SSA fee per solve");
  attack->add_option("--colluders", colluders, "cartel size");
  attack->add_flag("--no-honest", no_honest, "remove the honest solver");
  attack->add_flag("--defector", defector, "one colluder defects");
  attack->add_option("--out", attack_out, "output directory");

  // report
  auto* report = app.add_subcommand("report", "print the summary of a finished run");
  std::string run_dir;
  report->add_option("--run", run_dir, "run output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed())
      return run_simulate(config_path, overrides, seed, seed_opt->count() > 0, out_dir);
    if (verify->parsed()) return run_verify_theorem(r, p_vstake, p_pools);
    if (frontier->parsed()) return run_emit_frontier(rs, eps, grid, frontier_out);
    if (attack->parsed())
      return run_attack(which, horizon, attack_seed, trials, hash_share, stake_share, spam_rate,
                        spam_fee, colluders, no_honest, defector, attack_out);
    if (report->parsed()) return run_report(run_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error at key '" << e.key << "': " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
