#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "poaw/competition.hpp"
#include "poaw/sim.hpp"
#include "poaw/task.hpp"

namespace poaw {

// Configuration problems carry the offending key so the CLI can point at it.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& key_, const std::string& what_)
      : std::runtime_error(what_), key(key_) {}
  std::string key;
};

// Scenario file: JSON with protocol overrides, agents, horizon, seed and the
// task stream. `overrides` are dotted-key=value pairs applied on top.
SimConfig load_scenario_file(const std::string& path, const std::vector<std::string>& overrides);
SimConfig parse_scenario_text(const std::string& text, const std::vector<std::string>& overrides);

// Digest of the fully-resolved configuration (after overrides).
std::string scenario_digest_hex(const std::string& text, const std::vector<std::string>& overrides);

// Task definition file (kind, parameters, base-16 data payload, fees, PF
// schedule); canonical serialization keeps task digests stable.
struct TaskFile {
  ComputationalTask task;
  Amount fee_sub = 0;
  Amount fee_solve = 0;
  PfSchedule schedule;
};

TaskFile load_task_file(const std::string& path);
void write_task_file(const std::string& path, const TaskFile& file);

void write_agent_metrics_tsv(const std::string& path, const Metrics& metrics,
                             const std::string& config_digest);
void write_run_metrics_tsv(const std::string& path, const Metrics& metrics,
                           const std::string& config_digest);
void write_run_summary(const std::string& path, const Metrics& metrics,
                       const std::string& config_digest);
void write_manifest(const std::string& path, const std::string& command,
                    const std::string& config_digest, std::uint64_t seed,
                    const std::vector<std::string>& outputs);

extern const char* kVersionTag;

}  // namespace poaw
