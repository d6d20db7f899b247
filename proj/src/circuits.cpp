#include "actpc/circuits.hpp"

#include <algorithm>

namespace actpc::circuits {

namespace {

ngc::Clamp<Real> clamp_io(Vec<Real> top, Vec<Real> bottom) {
  ngc::Clamp<Real> c;
  c.top = std::move(top);
  c.bottom = std::move(bottom);
  return c;
}

Vec<Real> joined(std::span<const Real> a, std::span<const Real> b) { return concat<Real>(a, b); }

// Mean of per-sample deltas. `sum` starts as zeros_like and is scaled at the end.
struct DeltaMean {
  Params sum;
  std::size_t n = 0;
  explicit DeltaMean(const Params& like) : sum(like.zeros_like()) {}
  void add(const Params& d) {
    sum.add_scaled(d, Real{1});
    ++n;
  }
  Params mean() {
    if (n > 1) {
      const Real s = Real{1} / static_cast<Real>(n);
      sum.for_each([&](const std::string&, const char*, Matrix<Real>& m) {
        for (auto& v : m.flat()) v *= s;
      });
    }
    return std::move(sum);
  }
};

}  // namespace

ngc::CircuitConfig make_circuit_config(const CircuitParams& hp, std::size_t input_dim, std::size_t output_dim,
                                       ngc::OutputFn output, std::size_t memory_dim, bool use_memory) {
  ngc::CircuitConfig cfg;
  cfg.layers.push_back({output_dim, hp.activation, output});
  for (auto it = hp.hidden.rbegin(); it != hp.hidden.rend(); ++it) cfg.layers.push_back({*it, hp.activation, {}});
  cfg.layers.push_back({input_dim, ngc::Activation::identity, {}});
  cfg.beta = hp.beta;
  cfg.leak = hp.leak;
  cfg.k_steps = hp.k_steps;
  cfg.gamma_e = hp.gamma_e;
  cfg.memory_dim = memory_dim;
  cfg.use_memory = use_memory && memory_dim > 0;
  cfg.row_norm_bound = hp.row_norm_bound;
  cfg.init_scale = hp.init_scale;
  return cfg;
}

LearningCircuit::LearningCircuit(const CircuitParams& hp, ngc::CircuitConfig cfg, bool with_target)
    : hp_(hp), core_(std::move(cfg)) {
  optim::AdamConfig adam;
  adam.eta = hp.eta;
  rule_ = core_.make_rule(adam);
  if (with_target) target_ = core_;
}

void LearningCircuit::initialize(std::mt19937_64& rng) {
  core_.initialize(rng);
  if (target_) target_->params() = core_.params();
}

Circuit& LearningCircuit::target() {
  if (!target_) throw std::logic_error("circuit has no target copy");
  return *target_;
}

const Circuit& LearningCircuit::target() const {
  if (!target_) throw std::logic_error("circuit has no target copy");
  return *target_;
}

void LearningCircuit::apply(const Params& deltas) {
  core_.apply_updates(deltas, rule_);
  ++updates_;
}

void LearningCircuit::track_target() {
  if (!target_) return;
  optim::TargetSchedule sched{hp_.tau, hp_.target_sync_interval};
  const double coef = sched.coefficient(updates_);
  if (coef == 0.0) return;
  auto src = core_.params().pointers();
  std::size_t i = 0;
  target_->params().for_each([&](const std::string&, const char*, Matrix<Real>& m) {
    optim::polyak(m, *src[i++], coef);
  });
}

ActorCircuit::ActorCircuit(const CircuitParams& hp, std::size_t obs_dim, std::size_t action_dim, double kappa,
                           std::size_t memory_dim)
    : LearningCircuit(hp,
                      make_circuit_config(hp, obs_dim, action_dim, {ngc::OutputKind::scaled_tanh, kappa},
                                          memory_dim, true),
                      true),
      kappa_(kappa) {}

Vec<Real> ActorCircuit::act(std::span<const Real> obs, std::span<const Real> mem) { return core().project(obs, mem); }

Vec<Real> ActorCircuit::act_target(std::span<const Real> obs, std::span<const Real> mem) {
  return target().project(obs, mem);
}

PolicyCircuit::PolicyCircuit(const CircuitParams& hp, std::size_t obs_dim, std::size_t action_dim, double discount,
                             std::size_t memory_dim)
    : LearningCircuit(hp, make_circuit_config(hp, action_dim + obs_dim, action_dim, {}, memory_dim, false), true),
      action_dim_(action_dim),
      discount_(discount),
      e_policy_(action_dim, Real{0}),
      e_actor_(action_dim, -Real{1} / static_cast<Real>(action_dim)) {
  if (!(discount >= 0.0 && discount <= 1.0)) throw std::invalid_argument("discount must lie in [0,1]");
}

Vec<Real> PolicyCircuit::value(std::span<const Real> action, std::span<const Real> obs) {
  return core().project(joined(action, obs));
}

Vec<Real> PolicyCircuit::target_value(std::span<const Real> action, std::span<const Real> obs) {
  return target().project(joined(action, obs));
}

void PolicyCircuit::set_switch(int u_a) {
  if (u_a != 0 && u_a != 1) throw std::invalid_argument("u_a must be 0 or 1");
  u_a_ = u_a;
}

Vec<Real> PolicyCircuit::effective_output_error() const {
  Vec<Real> e(action_dim_);
  const Real ua = static_cast<Real>(u_a_);
  for (std::size_t i = 0; i < action_dim_; ++i) e[i] = ua * e_actor_[i] + (Real{1} - ua) * e_policy_[i];
  return e;
}

GeneratorCircuit::GeneratorCircuit(const CircuitParams& hp, std::size_t obs_dim, std::size_t action_dim,
                                   std::size_t memory_dim)
    : LearningCircuit(hp, make_circuit_config(hp, action_dim + obs_dim, obs_dim, {}, memory_dim, true), false) {}

PriorCircuit::PriorCircuit(const CircuitParams& hp, std::size_t obs_dim, std::size_t memory_dim)
    : LearningCircuit(hp, make_circuit_config(hp, obs_dim, obs_dim, {}, memory_dim, true), false) {}

Vec<Real> td_target(double reward, bool terminal, std::span<const Real> next_values, double discount) {
  Vec<Real> t(next_values.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = terminal ? static_cast<Real>(reward)
                    : static_cast<Real>(reward + discount * static_cast<double>(next_values[i]));
  return t;
}

Vec<Real> compute_td_target(PolicyCircuit& policy, ActorCircuit& actor, const Transition& tr) {
  if (tr.terminal) return td_target(tr.reward, true, Vec<Real>(policy.action_dim(), Real{0}), policy.discount());
  const auto next_action = actor.act_target(tr.next_obs, tr.next_memory);
  const auto c = policy.target_value(next_action, tr.next_obs);
  return td_target(tr.reward, false, c, policy.discount());
}

void update_policy(PolicyCircuit& policy, Batch batch, std::span<const Vec<Real>> targets) {
  if (batch.size() != targets.size()) throw ShapeError("update_policy: one target per transition required");
  if (batch.empty()) return;
  policy.set_switch(0);
  auto& core = policy.core();
  DeltaMean acc(core.params());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& tr = *batch[i];
    core.settle(clamp_io(joined(tr.action, tr.obs), targets[i]));
    acc.add(core.compute_weight_updates());
    if (i == 0) policy.set_policy_errors(core.error(0));
  }
  policy.apply(acc.mean());
  policy.track_target();
}

void update_actor_coupled(ActorCircuit& actor, PolicyCircuit& policy, Batch batch) {
  if (batch.empty()) return;
  policy.set_switch(1);
  auto& pc = policy.core();
  auto& ac = actor.core();
  const std::size_t A = policy.action_dim();
  const std::size_t below_input = pc.top() - 1;
  // The population holds the gradient of -mean(q); the settling dynamics take
  // the mismatch (target minus prediction), i.e. its negation.
  const auto pop = policy.effective_output_error();
  Vec<Real> drive(A);
  for (std::size_t i = 0; i < A; ++i) drive[i] = -pop[i];
  const int steps = std::max(ac.config().k_steps, pc.config().k_steps);

  DeltaMean acc(ac.params());
  Vec<Real> d_a(A);
  for (const Transition* tp : batch) {
    const auto& tr = *tp;
    const auto action = actor.act(tr.obs, tr.memory);

    ngc::Clamp<Real> pclamp;
    pclamp.top = joined(action, tr.obs);
    pclamp.output_error_override = drive;
    pc.set_memory_input({});
    pc.begin(pclamp);

    ngc::Clamp<Real> aclamp;
    aclamp.top = tr.obs;
    aclamp.output_error_override = Vec<Real>(A, Real{0});
    ac.set_memory_input(tr.memory);
    ac.begin(aclamp);

    auto link = [&] {
      pc.compute_errors();
      kernels::gemv_rows<Real>(pc.params().feedback[below_input], 0, pc.error(below_input), d_a);
      ac.set_output_error(d_a);
      ac.compute_errors();
    };
    for (int k = 0; k < steps; ++k) {
      link();
      pc.settle_step();
      ac.settle_step();
    }
    link();
    acc.add(ac.compute_weight_updates());
  }
  actor.apply(acc.mean());
  actor.track_target();
  policy.set_switch(0);
}

bool actor_refresh(ActorCircuit& actor, const memory::ActorBuffer& buffer, std::size_t batch, std::mt19937_64& rng) {
  if (buffer.empty() || batch == 0) return false;
  auto& core = actor.core();
  DeltaMean acc(core.params());
  for (std::size_t i = 0; i < batch; ++i) {
    const auto& tr = buffer.sample(rng);
    core.settle(clamp_io(tr.obs, tr.action), tr.memory);
    acc.add(core.compute_weight_updates());
  }
  actor.apply(acc.mean());
  return true;
}

std::vector<Vec<Real>> generator_infer(GeneratorCircuit& gen, const Transition& tr) {
  return gen.core().settle(clamp_io(joined(tr.action, tr.obs), tr.next_obs), tr.memory).errors;
}

std::vector<Vec<Real>> update_generator(GeneratorCircuit& gen, const Transition& tr) {
  auto errors = generator_infer(gen, tr);
  gen.apply(gen.core().compute_weight_updates());
  return errors;
}

std::vector<Vec<Real>> prior_infer(PriorCircuit& prior, const Transition& tr) {
  return prior.core().settle(clamp_io(tr.obs, tr.next_obs), tr.memory).errors;
}

void prior_train_step(PriorCircuit& prior, const Transition& tr) {
  if (prior.frozen()) throw FrozenError("prior circuit is frozen; synaptic update refused");
  prior_infer(prior, tr);
  prior.apply(prior.core().compute_weight_updates());
}

void pretrain_prior(PriorCircuit& prior, std::span<const Transition> demos, int epochs) {
  if (prior.frozen()) throw FrozenError("prior circuit is already frozen");
  if (demos.empty()) throw std::invalid_argument("pretrain_prior: demonstration set is empty");
  if (epochs < 0) throw std::invalid_argument("pretrain_prior: epochs must be >= 0");
  for (int e = 0; e < epochs; ++e)
    for (const auto& tr : demos) prior_train_step(prior, tr);
  prior.freeze();
}

}  // namespace actpc::circuits
