#pragma once

// Run and agent configuration. Files are JSON documents with nested
// sections; every field is optional and missing fields keep the defaults
// below. See docs/config.md for the schema.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "actpc/circuits.hpp"

namespace actpc {

namespace circuits {
void to_json(nlohmann::json& j, const CircuitParams& p);
void from_json(const nlohmann::json& j, CircuitParams& p);
}  // namespace circuits

struct AgentConfig {
  circuits::CircuitParams actor;
  circuits::CircuitParams policy;
  circuits::CircuitParams generator;
  circuits::CircuitParams prior;

  double discount = 0.99;       // gamma_d
  double alpha_ep = 1.0;
  double alpha_in = 1.0;
  bool add_sparse_reward = false;  // also add the environment reward to r_t
  double exploration_sigma = 0.1;  // Gaussian action noise, as a fraction of kappa
  double demo_fraction = 0.25;
  std::size_t batch = 256;      // N_batch, shared by the policy/actor/refresh updates
  std::size_t replay_capacity = 1000000;
  std::size_t demo_capacity = 120000;
  std::size_t actor_capacity = 200000;
  std::size_t memory_window = 7;  // H
  double memory_sigma = 0.1;
  std::uint64_t warmup_steps = 1000;
  int prior_epochs = 5;

  AgentConfig();
};

struct RunConfig {
  std::string env = "point_reacher";
  std::vector<std::uint64_t> seeds{1};
  int episodes = 600;
  int max_len = 0;  // 0: environment default
  double fail_reward = 0.0;
  AgentConfig agent;

  std::string demo_file;
  std::string checkpoint;
  std::string out_dir = "runs";
  int demo_episodes = 300;
  int eval_episodes = 100;
  bool write_steps = true;
  bool snapshot_buffers = false;

  void validate() const;
};

/// Desk-scale defaults: small circuits and batches sized for one CPU core.
RunConfig desk_config();
/// The published hyper-parameter table (two 256-unit layers, batch 256, ...).
RunConfig paper_config();

void to_json(nlohmann::json& j, const AgentConfig& c);
void from_json(const nlohmann::json& j, AgentConfig& c);
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

/// Overlay the fields present in `j` onto `base`.
RunConfig merge_config(RunConfig base, const nlohmann::json& j);
RunConfig load_config(const std::string& path, RunConfig base = desk_config());

/// FNV-1a over the canonical JSON of everything that shapes the agent
/// (environment identity and the agent section).
std::string config_hash(const RunConfig& c);

}  // namespace actpc
