#pragma once

// The full agent: four circuits, their memories and the per-step
// act / observe / reward / store / update / refresh loop.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "actpc/circuits.hpp"
#include "actpc/config.hpp"
#include "actpc/envs.hpp"
#include "actpc/memory.hpp"
#include "actpc/rewards.hpp"

namespace actpc {

using memory::Transition;
using Episode = std::vector<Transition>;

struct StepRecord {
  std::uint64_t t = 0;  // global step, 1-based
  int episode = 0;
  int episode_step = 0;  // 1-based
  Vec<Real> action;
  double sparse_r = 0.0;
  double r_ep = 0.0;
  double r_in = 0.0;
  double r_t = 0.0;
  bool terminal = false;
  bool updated = false;       // false during warm-up
  std::vector<double> tod;    // generator 1/2 |e|^2 per layer
  double tod_total = 0.0;

  bool operator==(const StepRecord&) const = default;
};

struct EpisodeRecord {
  int episode = 0;
  std::uint64_t seed = 0;
  double sparse_return = 0.0;
  double combined_return = 0.0;
  bool success = false;
  double r_ep_mean = 0.0;
  double r_in_mean = 0.0;
  double tod_gen_mean = 0.0;
  int steps = 0;
  bool stored = false;  // accepted by the actor buffer

  bool operator==(const EpisodeRecord&) const = default;
};

struct EpisodeLog {
  std::vector<EpisodeRecord> episodes;
  std::vector<double> sparse_returns() const;
  std::vector<double> successes() const;
};

using StepCallback = std::function<void(const StepRecord&)>;
using EpisodeCallback = std::function<void(const EpisodeRecord&)>;

class Agent {
 public:
  Agent(AgentConfig cfg, envs::EnvSpec spec, std::uint64_t seed);

  /// Attach demonstration episodes: computes their working-memory vectors,
  /// pretrains and freezes the prior (when `pretrain`), labels them with the
  /// prior's instrumental reward, fills the demo buffer and offers each one
  /// to the actor buffer.
  void load_demos(const std::vector<Episode>& episodes, bool pretrain = true);

  /// Resets the environment and working memory. Returns o_0.
  const Vec<Real>& begin_episode(envs::Environment& env, int max_len = 0);
  bool in_episode() const noexcept { return in_episode_; }

  /// One environment step with all updates. Ends the episode (and applies
  /// the actor-buffer filter) on a terminal state or at the length limit.
  StepRecord step(envs::Environment& env);

  EpisodeRecord run_episode(envs::Environment& env, int max_len = 0, const StepCallback& on_step = {});
  EpisodeLog run(envs::Environment& env, int episodes, int max_len = 0, const StepCallback& on_step = {},
                 const EpisodeCallback& on_episode = {});

  /// Ordered names of the operations executed by each step; null disables.
  void set_trace(std::vector<std::string>* trace) noexcept { trace_ = trace; }

  std::uint64_t episode_seed(int episode) const;

  const AgentConfig& config() const noexcept { return cfg_; }
  const envs::EnvSpec& spec() const noexcept { return spec_; }
  std::uint64_t seed() const noexcept { return seed_; }

  circuits::ActorCircuit& actor() noexcept { return actor_; }
  circuits::PolicyCircuit& policy() noexcept { return policy_; }
  circuits::GeneratorCircuit& generator() noexcept { return generator_; }
  circuits::PriorCircuit& prior() noexcept { return prior_; }
  const circuits::ActorCircuit& actor() const noexcept { return actor_; }
  const circuits::PolicyCircuit& policy() const noexcept { return policy_; }
  const circuits::GeneratorCircuit& generator() const noexcept { return generator_; }
  const circuits::PriorCircuit& prior() const noexcept { return prior_; }

  memory::WorkingMemory& working_memory() noexcept { return wm_; }
  const memory::WorkingMemory& working_memory() const noexcept { return wm_; }
  memory::ReplayBuffer& replay() noexcept { return replay_; }
  const memory::ReplayBuffer& replay() const noexcept { return replay_; }
  memory::ReplayBuffer& demos() noexcept { return demos_; }
  const memory::ReplayBuffer& demos() const noexcept { return demos_; }
  memory::ActorBuffer& actor_buffer() noexcept { return actor_buffer_; }
  const memory::ActorBuffer& actor_buffer() const noexcept { return actor_buffer_; }
  rewards::RewardState& reward_state() noexcept { return rewards_; }
  const rewards::RewardState& reward_state() const noexcept { return rewards_; }
  std::mt19937_64& rng() noexcept { return rng_; }
  const std::mt19937_64& rng() const noexcept { return rng_; }

  std::uint64_t steps() const noexcept { return steps_; }
  int episodes_done() const noexcept { return episodes_done_; }
  void set_counters(std::uint64_t steps, int episodes) noexcept {
    steps_ = steps;
    episodes_done_ = episodes;
  }

 private:
  void note(const char* op) {
    if (trace_) trace_->emplace_back(op);
  }
  Vec<Real> explore(Vec<Real> a);
  void finish_episode();

  AgentConfig cfg_;
  envs::EnvSpec spec_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;

  circuits::ActorCircuit actor_;
  circuits::PolicyCircuit policy_;
  circuits::GeneratorCircuit generator_;
  circuits::PriorCircuit prior_;

  memory::WorkingMemory wm_;
  memory::ReplayBuffer replay_;
  memory::ReplayBuffer demos_;
  memory::ActorBuffer actor_buffer_;
  rewards::RewardState rewards_;

  std::uint64_t steps_ = 0;
  int episodes_done_ = 0;

  // Current episode.
  bool in_episode_ = false;
  int limit_ = 0;
  Vec<Real> obs_;
  Episode episode_;
  EpisodeRecord running_;

  std::vector<std::string>* trace_ = nullptr;
};

struct EvalSummary {
  int episodes = 0;
  double success_rate = 0.0;
  double avg_return = 0.0;
  bool operator==(const EvalSummary&) const = default;
};

/// Noise-free rollouts of the agent's actor. The agent is not modified.
EvalSummary evaluate(const Agent& agent, envs::Environment& env, int episodes, std::uint64_t seed, int max_len = 0);

/// Rollouts with actions drawn uniformly from [-kappa, kappa].
EvalSummary evaluate_random(envs::Environment& env, int episodes, std::uint64_t seed, int max_len = 0);

/// Rollouts of the scripted expert, keeping the first `count` successful
/// episodes. Gives up after 10 * count attempts.
std::vector<Episode> collect_demos(envs::Environment& env, int count, std::uint64_t seed, int max_len = 0);

}  // namespace actpc
