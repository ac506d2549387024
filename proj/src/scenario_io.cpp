#include "poaw/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "poaw/digest.hpp"

namespace poaw {

const char* kVersionTag = "poaw-0.1.0";

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

static std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

static json parse_with_position(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // report the line of the parse failure
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError("(syntax)", "config parse error at line " + std::to_string(line) + ": " +
                                      std::string(e.what()));
  }
}

static json parse_override_value(const std::string& raw) {
  try {
    return json::parse(raw);
  } catch (const json::parse_error&) {
    return json(raw);  // bare strings are allowed
  }
}

static void apply_overrides(json& doc, const std::vector<std::string>& overrides) {
  for (const std::string& o : overrides) {
    auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError(o, "override must look like key=value: " + o);
    std::string key = o.substr(0, eq);
    std::string value = o.substr(eq + 1);
    std::string pointer = "/";
    for (char c : key) pointer.push_back(c == '.' ? '/' : c);
    try {
      doc[json::json_pointer(pointer)] = parse_override_value(value);
    } catch (const json::exception& e) {
      throw ConfigError(key, std::string("cannot apply override: ") + e.what());
    }
  }
}

template <typename T>
static void read_field(const json& j, const std::string& scope, const char* name, T& out) {
  if (!j.contains(name)) return;
  try {
    out = j.at(name).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(scope + "." + name, "bad value for " + scope + "." + name);
  }
}

static void parse_protocol(const json& j, ProtocolParams& p) {
  if (j.contains("preset")) {
    std::string preset = j.at("preset").get<std::string>();
    if (preset == "sim_scaled")
      p = ProtocolParams::sim_scaled();
    else if (preset == "full_scale")
      p = ProtocolParams::full_scale();
    else
      throw ConfigError("protocol.preset", "unknown preset: " + preset);
  }
  const std::string scope = "protocol";
  read_field(j, scope, "r", p.r);
  read_field(j, scope, "p_vstake", p.p_vstake);
  read_field(j, scope, "p_pool_main", p.p_pool_main);
  read_field(j, scope, "p_pool_storage", p.p_pool_storage);
  read_field(j, scope, "p_validation", p.p_validation);
  read_field(j, scope, "p_sm_pool", p.p_sm_pool);
  read_field(j, scope, "pf_half", p.pf_half);
  read_field(j, scope, "epsilon_pos", p.epsilon_pos);
  read_field(j, scope, "b_distr", p.b_distr);
  read_field(j, scope, "pf_delay_blocks", p.pf_delay_blocks);
  read_field(j, scope, "nb_freeze", p.nb_freeze);
  read_field(j, scope, "nb_compete", p.nb_compete);
  read_field(j, scope, "nb_validate", p.nb_validate);
  read_field(j, scope, "r_s", p.r_s);
  read_field(j, scope, "timeout_publish", p.timeout_publish);
  read_field(j, scope, "timeout_freeze", p.timeout_freeze);
  read_field(j, scope, "timeout_retrieve", p.timeout_retrieve);
  read_field(j, scope, "ping_timeout", p.ping_timeout);
  read_field(j, scope, "default_chunks", p.default_chunks);
  read_field(j, scope, "shard_index_space", p.shard_index_space);
  read_field(j, scope, "ticket_maturity", p.ticket_maturity);
  read_field(j, scope, "ticket_quota_per_block", p.ticket_quota_per_block);
  read_field(j, scope, "ticket_pool_target", p.ticket_pool_target);
  read_field(j, scope, "ticket_expiry_blocks", p.ticket_expiry_blocks);
  read_field(j, scope, "settlement_delay", p.settlement_delay);
  read_field(j, scope, "base_ticket_price", p.base_ticket_price);
  read_field(j, scope, "price_exponent_k", p.price_exponent_k);
  read_field(j, scope, "votes_per_block", p.votes_per_block);
  read_field(j, scope, "vote_majority", p.vote_majority);
  read_field(j, scope, "coinbase_amount", p.coinbase_amount);
  read_field(j, scope, "block_tx_capacity", p.block_tx_capacity);
  read_field(j, scope, "blocks_per_day", p.blocks_per_day);
}

SimConfig parse_scenario_text(const std::string& text, const std::vector<std::string>& overrides) {
  json doc = parse_with_position(text);
  apply_overrides(doc, overrides);

  SimConfig cfg;
  if (doc.contains("protocol")) parse_protocol(doc.at("protocol"), cfg.protocol);
  read_field(doc, "", "horizon", cfg.horizon);
  read_field(doc, "", "seed", cfg.seed);
  read_field(doc, "", "invariant_every", cfg.invariant_every);

  if (doc.contains("assembly")) {
    std::string a = doc.at("assembly").get<std::string>();
    if (a == "fee_score")
      cfg.assembly = AssemblyStrategy::FeeScorePriority;
    else if (a == "exclude_solves")
      cfg.assembly = AssemblyStrategy::ExcludeSolves;
    else
      throw ConfigError("assembly", "unknown assembly strategy: " + a);
  }

  if (doc.contains("task_stream")) {
    const json& ts = doc.at("task_stream");
    const std::string scope = "task_stream";
    read_field(ts, scope, "rate", cfg.task_stream.rate);
    read_field(ts, scope, "kind", cfg.task_stream.kind);
    read_field(ts, scope, "size", cfg.task_stream.size);
    read_field(ts, scope, "fee_solve", cfg.task_stream.fee_solve);
    read_field(ts, scope, "fee_sub", cfg.task_stream.fee_sub);
    read_field(ts, scope, "data_bytes", cfg.task_stream.data_bytes);
    read_field(ts, scope, "difficulty_lo", cfg.task_stream.difficulty_lo);
    read_field(ts, scope, "difficulty_hi", cfg.task_stream.difficulty_hi);
  }

  if (!doc.contains("agents") || !doc.at("agents").is_array() || doc.at("agents").empty())
    throw ConfigError("agents", "scenario needs a non-empty agents array");
  std::size_t idx = 0;
  for (const json& a : doc.at("agents")) {
    const std::string scope = "agents[" + std::to_string(idx) + "]";
    if (!a.contains("kind")) throw ConfigError(scope + ".kind", "agent kind missing");
    std::string kind_name = a.at("kind").get<std::string>();
    auto kind = agent_kind_from_name(kind_name);
    if (!kind) throw ConfigError(scope + ".kind", "unknown agent kind: " + kind_name);
    AgentStrategy s;
    s.kind = *kind;
    read_field(a, scope, "hash_share", s.hash_share);
    read_field(a, scope, "attempts_per_block", s.attempts_per_block);
    read_field(a, scope, "balance", s.initial_balance);
    read_field(a, scope, "stake_budget", s.stake_budget);
    read_field(a, scope, "spam_rate", s.spam_rate);
    read_field(a, scope, "solve_fee", s.solve_fee);
    read_field(a, scope, "group_id", s.group_id);
    read_field(a, scope, "defector", s.defector);
    read_field(a, scope, "task_rate", s.task_rate);
    read_field(a, scope, "failure_rate", s.failure_rate);
    read_field(a, scope, "fail_at", s.fail_at);
    read_field(a, scope, "use_vstakes", s.use_vstakes);
    cfg.agents.push_back(s);
    ++idx;
  }

  if (auto bad = cfg.validate()) throw ConfigError(*bad, "invalid scenario value: " + *bad);
  return cfg;
}

SimConfig load_scenario_file(const std::string& path, const std::vector<std::string>& overrides) {
  return parse_scenario_text(read_file(path), overrides);
}

std::string scenario_digest_hex(const std::string& text,
                                const std::vector<std::string>& overrides) {
  json doc = parse_with_position(text);
  apply_overrides(doc, overrides);
  return to_hex(sha256(doc.dump()));
}

// ---- task definition files ----

TaskFile load_task_file(const std::string& path) {
  json j = parse_with_position(read_file(path));
  TaskFile f;
  std::string kind = j.at("kind").get<std::string>();
  f.task.objective =
      j.value("objective", std::string("maximize")) == "minimize" ? Objective::Minimize
                                                                  : Objective::Maximize;
  if (kind == "knapsack") {
    KnapsackSpec spec;
    for (const auto& item : j.at("items"))
      spec.items.push_back({item.at(0).get<Amount>(), item.at(1).get<Amount>()});
    spec.capacity = j.at("capacity").get<Amount>();
    f.task.scoring = spec;
  } else if (kind == "max_clique") {
    MaxCliqueSpec spec;
    spec.vertices = j.at("vertices").get<std::uint32_t>();
    spec.adjacency.assign(spec.vertices, 0);
    for (const auto& edge : j.at("edges"))
      spec.add_edge(edge.at(0).get<std::uint32_t>(), edge.at(1).get<std::uint32_t>());
    f.task.scoring = spec;
  } else {
    throw ConfigError("kind", "unknown task kind: " + kind);
  }
  if (j.contains("data_hex")) {
    if (!hex_to_bytes(j.at("data_hex").get<std::string>(), f.task.data))
      throw ConfigError("data_hex", "data_hex is not valid base-16");
  }
  f.fee_sub = j.value("fee_sub", Amount{1});
  f.fee_solve = j.value("fee_solve", Amount{0});
  if (j.contains("pf")) {
    const json& pf = j.at("pf");
    f.schedule.main_chain = {Fraction::from_double(pf.value("main", 0.0)),
                             pf.value("delay", std::uint64_t{0})};
    f.schedule.storage = {Fraction::from_double(pf.value("storage", 0.0)),
                          pf.value("delay", std::uint64_t{0})};
    f.schedule.validation = {Fraction::from_double(pf.value("validation", 0.0)),
                             pf.value("delay", std::uint64_t{0})};
  }
  return f;
}

void write_task_file(const std::string& path, const TaskFile& f) {
  ordered_json j;
  if (const auto* ks = std::get_if<KnapsackSpec>(&f.task.scoring)) {
    j["kind"] = "knapsack";
    j["objective"] = f.task.objective == Objective::Maximize ? "maximize" : "minimize";
    ordered_json items = ordered_json::array();
    for (const auto& it : ks->items) items.push_back({it.value, it.weight});
    j["items"] = items;
    j["capacity"] = ks->capacity;
  } else {
    const auto& cs = std::get<MaxCliqueSpec>(f.task.scoring);
    j["kind"] = "max_clique";
    j["objective"] = f.task.objective == Objective::Maximize ? "maximize" : "minimize";
    j["vertices"] = cs.vertices;
    ordered_json edges = ordered_json::array();
    for (std::uint32_t a = 0; a < cs.vertices; ++a)
      for (std::uint32_t b = a + 1; b < cs.vertices; ++b)
        if (cs.has_edge(a, b)) edges.push_back({a, b});
    j["edges"] = edges;
  }
  j["data_hex"] = bytes_to_hex(f.task.data);
  j["fee_sub"] = f.fee_sub;
  j["fee_solve"] = f.fee_solve;
  j["pf"] = {{"main", f.schedule.main_chain.p.as_double()},
             {"storage", f.schedule.storage.p.as_double()},
             {"validation", f.schedule.validation.p.as_double()},
             {"delay", f.schedule.main_chain.min_delay_blocks}};
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

// ---- outputs ----

void write_agent_metrics_tsv(const std::string& path, const Metrics& m,
                             const std::string& config_digest) {
  std::ofstream out(path);
  out << "# config_digest=" << config_digest << "\n";
  out << "id\tkind\tinitial_balance\tfinal_balance\tincome\tspend\tvstakes_earned\t"
         "vstakes_spent\tfinal_vstakes\tblocks_signed\tcompetitions_won\tsolves\t"
         "tickets_bought\ttickets_voted\ttickets_missed\tticket_factor\to1_factor\tfees_paid\n";
  for (const AgentMetrics& a : m.agents) {
    out << a.id << '\t' << agent_kind_name(a.kind) << '\t' << a.initial_balance << '\t'
        << a.final_balance << '\t' << a.income_total << '\t' << a.spend_total << '\t'
        << a.vstakes_earned << '\t' << a.vstakes_spent << '\t' << a.final_vstakes << '\t'
        << a.blocks_signed << '\t' << a.competitions_won << '\t' << a.solves_submitted << '\t'
        << a.tickets_bought << '\t' << a.tickets_voted << '\t' << a.tickets_missed << '\t'
        << a.realized_ticket_factor() << '\t' << a.realized_o1_factor() << '\t' << a.fees_paid
        << "\n";
  }
}

void write_run_metrics_tsv(const std::string& path, const Metrics& m,
                           const std::string& config_digest) {
  std::ofstream out(path);
  out << "# config_digest=" << config_digest << "\n";
  out << "key\tvalue\n";
  out << "blocks\t" << m.blocks << "\n";
  out << "competitions_started\t" << m.competitions_started << "\n";
  out << "competitions_sealed\t" << m.competitions_sealed << "\n";
  out << "competitions_failed\t" << m.competitions_failed << "\n";
  out << "tickets_voted\t" << m.tickets_voted_total << "\n";
  out << "tickets_expired\t" << m.tickets_expired_total << "\n";
  out << "pool_main_paid\t" << m.pool_main_paid << "\n";
  out << "pool_storage_paid\t" << m.pool_storage_paid << "\n";
  out << "pool_sm_paid\t" << m.pool_sm_paid << "\n";
  out << "mean_live_pool\t" << m.mean_live_pool << "\n";
  out << "min_live_pool\t" << m.min_live_pool << "\n";
  out << "max_live_pool\t" << m.max_live_pool << "\n";
  out << "invariant_violation\t" << (m.invariant_violation ? 1 : 0) << "\n";
  for (const auto& [kind, count] : m.tx_counts) out << "tx_" << kind << "\t" << count << "\n";
}

void write_run_summary(const std::string& path, const Metrics& m,
                       const std::string& config_digest) {
  std::ofstream out(path);
  out << "run summary (config " << config_digest << ")\n";
  out << "blocks: " << m.blocks << "\n";
  out << "competitions: " << m.competitions_started << " started, " << m.competitions_sealed
      << " sealed, " << m.competitions_failed << " failed\n";
  out << "tickets: " << m.tickets_voted_total << " voted, " << m.tickets_expired_total
      << " expired\n";
  if (m.pool_samples > 0)
    out << "live ticket pool after burn-in: mean " << m.mean_live_pool << ", min "
        << m.min_live_pool << ", max " << m.max_live_pool << "\n";
  out << "pool payouts: main " << m.pool_main_paid << ", storage " << m.pool_storage_paid
      << ", storage-main " << m.pool_sm_paid << "\n";
  if (m.invariant_violation) out << "INVARIANT VIOLATION: " << m.invariant_detail << "\n";
  out << "agents:\n";
  for (const AgentMetrics& a : m.agents) {
    out << "  " << a.id << " " << agent_kind_name(a.kind) << ": balance " << a.initial_balance
        << " -> " << a.final_balance << ", vstakes " << a.final_vstakes << ", blocks "
        << a.blocks_signed << ", wins " << a.competitions_won << "\n";
  }
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::string& config_digest, std::uint64_t seed,
                    const std::vector<std::string>& outputs) {
  ordered_json j;
  j["command"] = command;
  j["config_digest"] = config_digest;
  j["seed"] = seed;
  j["version"] = kVersionTag;
  j["outputs"] = outputs;
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

}  // namespace poaw
