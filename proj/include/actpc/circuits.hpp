#pragma once

// The four specialized circuits of the agent: motor-action (actor), policy
// (critic), generator (world model) and prior preference.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "actpc/memory.hpp"
#include "actpc/ngc.hpp"
#include "actpc/optim.hpp"

namespace actpc::circuits {

using Circuit = ngc::Circuit<Real>;
using Params = ngc::Params<Real>;
using memory::Transition;
using Batch = std::span<const Transition* const>;

class FrozenError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Hyper-parameters shared by one circuit and its target copy.
struct CircuitParams {
  std::vector<std::size_t> hidden{256, 256};  // listed from the input side
  ngc::Activation activation = ngc::Activation::relu6;
  double eta = 3e-4;
  double beta = 0.1;
  double leak = 0.0;
  int k_steps = 15;
  double gamma_e = 0.9;
  double tau = 0.005;
  std::uint64_t target_sync_interval = 0;  // > 0: hard copy every C updates instead of Polyak
  double row_norm_bound = 1.0;
  double init_scale = 0.1;
};

ngc::CircuitConfig make_circuit_config(const CircuitParams& hp, std::size_t input_dim, std::size_t output_dim,
                                       ngc::OutputFn output, std::size_t memory_dim, bool use_memory);

/// A circuit together with its adaptive rule and (optionally) a target copy.
class LearningCircuit {
 public:
  LearningCircuit() = default;
  LearningCircuit(const CircuitParams& hp, ngc::CircuitConfig cfg, bool with_target);

  void initialize(std::mt19937_64& rng);

  Circuit& core() noexcept { return core_; }
  const Circuit& core() const noexcept { return core_; }
  bool has_target() const noexcept { return target_.has_value(); }
  Circuit& target();
  const Circuit& target() const;
  optim::AdaptiveRule<Real>& rule() noexcept { return rule_; }
  const optim::AdaptiveRule<Real>& rule() const noexcept { return rule_; }
  const CircuitParams& hyper() const noexcept { return hp_; }
  std::uint64_t updates() const noexcept { return updates_; }
  void set_updates(std::uint64_t u) noexcept { updates_ = u; }

  /// Apply averaged deltas through the rule.
  void apply(const Params& deltas);
  /// Move the target copy toward the core per the target schedule.
  void track_target();

 private:
  CircuitParams hp_{};
  Circuit core_;
  std::optional<Circuit> target_;
  optim::AdaptiveRule<Real> rule_;
  std::uint64_t updates_ = 0;
};

class ActorCircuit : public LearningCircuit {
 public:
  ActorCircuit() = default;
  ActorCircuit(const CircuitParams& hp, std::size_t obs_dim, std::size_t action_dim, double kappa,
               std::size_t memory_dim);

  double kappa() const noexcept { return kappa_; }
  std::size_t action_dim() const { return core().output_dim(); }

  Vec<Real> act(std::span<const Real> obs, std::span<const Real> mem);
  Vec<Real> act_target(std::span<const Real> obs, std::span<const Real> mem);

 private:
  double kappa_ = 1.0;
};

/// Critic with split input [action, observation] and two output error
/// populations selected by the switch u_a.
class PolicyCircuit : public LearningCircuit {
 public:
  PolicyCircuit() = default;
  PolicyCircuit(const CircuitParams& hp, std::size_t obs_dim, std::size_t action_dim, double discount,
                std::size_t memory_dim);

  std::size_t action_dim() const noexcept { return action_dim_; }
  double discount() const noexcept { return discount_; }

  Vec<Real> value(std::span<const Real> action, std::span<const Real> obs);
  Vec<Real> target_value(std::span<const Real> action, std::span<const Real> obs);

  int switch_state() const noexcept { return u_a_; }
  void set_switch(int u_a);

  /// e0_p: target-driven errors from the last policy settle.
  const Vec<Real>& policy_errors() const noexcept { return e_policy_; }
  void set_policy_errors(Vec<Real> e) { e_policy_ = std::move(e); }
  /// e0_a = -1/A: derivative of the negated mean action-value w.r.t. the outputs.
  const Vec<Real>& actor_errors() const noexcept { return e_actor_; }
  /// u_a * e0_a + (1 - u_a) * e0_p
  Vec<Real> effective_output_error() const;

  /// Views into the split top-layer synapses (columns of the top prediction matrix).
  std::size_t top_weight_index() const { return core().top() - 1; }

 private:
  std::size_t action_dim_ = 1;
  double discount_ = 0.99;
  int u_a_ = 0;
  Vec<Real> e_policy_;
  Vec<Real> e_actor_;
};

class GeneratorCircuit : public LearningCircuit {
 public:
  GeneratorCircuit() = default;
  GeneratorCircuit(const CircuitParams& hp, std::size_t obs_dim, std::size_t action_dim, std::size_t memory_dim);
};

class PriorCircuit : public LearningCircuit {
 public:
  PriorCircuit() = default;
  PriorCircuit(const CircuitParams& hp, std::size_t obs_dim, std::size_t memory_dim);

  bool frozen() const noexcept { return frozen_; }
  void freeze() noexcept { frozen_ = true; }

 private:
  bool frozen_ = false;
};

/// t = r * 1 when terminal, else r + discount * c.
Vec<Real> td_target(double reward, bool terminal, std::span<const Real> next_values, double discount);

Vec<Real> compute_td_target(PolicyCircuit& policy, ActorCircuit& actor, const Transition& tr);

/// Settles the critic on every batch element ([a, o] -> target), applies the
/// mean Hebbian delta, then moves the target policy.
void update_policy(PolicyCircuit& policy, Batch batch, std::span<const Vec<Real>> targets);

/// Joint actor/policy settle with the actor-orienting error population.
/// Only actor synapses change; afterwards the target actor is moved.
void update_actor_coupled(ActorCircuit& actor, PolicyCircuit& policy, Batch batch);

/// Supervised self-imitation on (o, a) pairs from the actor buffer. Returns
/// false (and changes nothing) when the buffer is empty.
bool actor_refresh(ActorCircuit& actor, const memory::ActorBuffer& buffer, std::size_t batch,
                   std::mt19937_64& rng);

/// Settle on [a, o] -> o_next without learning; returns per-layer errors.
std::vector<Vec<Real>> generator_infer(GeneratorCircuit& gen, const Transition& tr);
/// Settle on [a, o] -> o_next and apply the Hebbian update; returns the
/// pre-update per-layer errors.
std::vector<Vec<Real>> update_generator(GeneratorCircuit& gen, const Transition& tr);

std::vector<Vec<Real>> prior_infer(PriorCircuit& prior, const Transition& tr);
/// One learning step on o -> o_next. Throws FrozenError (changing nothing) once frozen.
void prior_train_step(PriorCircuit& prior, const Transition& tr);
/// Iterate the demonstration transitions `epochs` times, then freeze.
void pretrain_prior(PriorCircuit& prior, std::span<const Transition> demos, int epochs);

}  // namespace actpc::circuits
