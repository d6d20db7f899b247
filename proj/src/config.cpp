#include "actpc/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "actpc/envs.hpp"

namespace actpc {

using nlohmann::json;

namespace {

const char* activation_name(ngc::Activation a) {
  switch (a) {
    case ngc::Activation::identity: return "identity";
    case ngc::Activation::tanh: return "tanh";
    case ngc::Activation::relu: return "relu";
    case ngc::Activation::relu6: return "relu6";
  }
  return "identity";
}

ngc::Activation parse_activation(const std::string& s) {
  if (s == "identity") return ngc::Activation::identity;
  if (s == "tanh") return ngc::Activation::tanh;
  if (s == "relu") return ngc::Activation::relu;
  if (s == "relu6") return ngc::Activation::relu6;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

AgentConfig::AgentConfig() {
  // The generator and prior have no target copies; tau is irrelevant there.
  generator.tau = 0.0;
  prior.tau = 0.0;
}

namespace circuits {

void to_json(json& j, const CircuitParams& p) {
  j = json{{"hidden", p.hidden},
           {"activation", activation_name(p.activation)},
           {"eta", p.eta},
           {"beta", p.beta},
           {"leak", p.leak},
           {"k_steps", p.k_steps},
           {"gamma_e", p.gamma_e},
           {"tau", p.tau},
           {"target_sync_interval", p.target_sync_interval},
           {"row_norm_bound", p.row_norm_bound},
           {"init_scale", p.init_scale}};
}

void from_json(const json& j, CircuitParams& p) {
  get_if(j, "hidden", p.hidden);
  if (j.contains("activation")) p.activation = parse_activation(j.at("activation").get<std::string>());
  get_if(j, "eta", p.eta);
  get_if(j, "beta", p.beta);
  get_if(j, "leak", p.leak);
  get_if(j, "k_steps", p.k_steps);
  get_if(j, "gamma_e", p.gamma_e);
  get_if(j, "tau", p.tau);
  get_if(j, "target_sync_interval", p.target_sync_interval);
  get_if(j, "row_norm_bound", p.row_norm_bound);
  get_if(j, "init_scale", p.init_scale);
}

}  // namespace circuits

void to_json(json& j, const AgentConfig& c) {
  j = json{{"actor", c.actor},
           {"policy", c.policy},
           {"generator", c.generator},
           {"prior", c.prior},
           {"discount", c.discount},
           {"alpha_ep", c.alpha_ep},
           {"alpha_in", c.alpha_in},
           {"add_sparse_reward", c.add_sparse_reward},
           {"exploration_sigma", c.exploration_sigma},
           {"demo_fraction", c.demo_fraction},
           {"batch", c.batch},
           {"replay_capacity", c.replay_capacity},
           {"demo_capacity", c.demo_capacity},
           {"actor_capacity", c.actor_capacity},
           {"memory_window", c.memory_window},
           {"memory_sigma", c.memory_sigma},
           {"warmup_steps", c.warmup_steps},
           {"prior_epochs", c.prior_epochs}};
}

void from_json(const json& j, AgentConfig& c) {
  for (auto [key, dst] : {std::pair{"actor", &c.actor}, std::pair{"policy", &c.policy},
                          std::pair{"generator", &c.generator}, std::pair{"prior", &c.prior}})
    if (j.contains(key)) from_json(j.at(key), *dst);
  get_if(j, "discount", c.discount);
  get_if(j, "alpha_ep", c.alpha_ep);
  get_if(j, "alpha_in", c.alpha_in);
  get_if(j, "add_sparse_reward", c.add_sparse_reward);
  get_if(j, "exploration_sigma", c.exploration_sigma);
  get_if(j, "demo_fraction", c.demo_fraction);
  get_if(j, "batch", c.batch);
  get_if(j, "replay_capacity", c.replay_capacity);
  get_if(j, "demo_capacity", c.demo_capacity);
  get_if(j, "actor_capacity", c.actor_capacity);
  get_if(j, "memory_window", c.memory_window);
  get_if(j, "memory_sigma", c.memory_sigma);
  get_if(j, "warmup_steps", c.warmup_steps);
  get_if(j, "prior_epochs", c.prior_epochs);
}

void to_json(json& j, const RunConfig& c) {
  j = json{{"env", c.env},
           {"seeds", c.seeds},
           {"episodes", c.episodes},
           {"max_len", c.max_len},
           {"fail_reward", c.fail_reward},
           {"agent", c.agent},
           {"paths", {{"demo_file", c.demo_file}, {"checkpoint", c.checkpoint}, {"out_dir", c.out_dir}}},
           {"demo_episodes", c.demo_episodes},
           {"eval_episodes", c.eval_episodes},
           {"write_steps", c.write_steps},
           {"snapshot_buffers", c.snapshot_buffers}};
}

void from_json(const json& j, RunConfig& c) {
  get_if(j, "env", c.env);
  get_if(j, "seeds", c.seeds);
  get_if(j, "episodes", c.episodes);
  get_if(j, "max_len", c.max_len);
  get_if(j, "fail_reward", c.fail_reward);
  if (j.contains("agent")) from_json(j.at("agent"), c.agent);
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    get_if(p, "demo_file", c.demo_file);
    get_if(p, "checkpoint", c.checkpoint);
    get_if(p, "out_dir", c.out_dir);
  }
  get_if(j, "demo_episodes", c.demo_episodes);
  get_if(j, "eval_episodes", c.eval_episodes);
  get_if(j, "write_steps", c.write_steps);
  get_if(j, "snapshot_buffers", c.snapshot_buffers);
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
  const auto names = envs::env_names();
  if (std::find(names.begin(), names.end(), env) == names.end()) fail("unknown env '" + env + "'");
  if (seeds.empty()) fail("at least one seed is required");
  if (episodes < 0) fail("episodes must be >= 0");
  if (max_len < 0) fail("max_len must be >= 0");
  if (fail_reward != 0.0 && fail_reward != -1.0) fail("fail_reward must be 0 or -1");
  if (demo_episodes < 0) fail("demo_episodes must be >= 0");
  if (eval_episodes < 0) fail("eval_episodes must be >= 0");
  const auto& a = agent;
  if (!(a.discount >= 0.0 && a.discount <= 1.0)) fail("agent.discount must lie in [0,1]");
  if (!(a.demo_fraction >= 0.0 && a.demo_fraction <= 1.0)) fail("agent.demo_fraction must lie in [0,1]");
  if (a.exploration_sigma < 0.0) fail("agent.exploration_sigma must be >= 0");
  if (a.batch == 0) fail("agent.batch must be >= 1");
  if (a.replay_capacity == 0 || a.demo_capacity == 0 || a.actor_capacity == 0) fail("buffer capacities must be >= 1");
  if (a.memory_window < 1) fail("agent.memory_window must be >= 1");
  if (a.prior_epochs < 0) fail("agent.prior_epochs must be >= 0");
  for (const auto* p : {&a.actor, &a.policy, &a.generator, &a.prior}) {
    if (p->eta < 0.0) fail("eta must be >= 0");
    if (p->k_steps < 0) fail("k_steps must be >= 0");
    if (!(p->tau >= 0.0 && p->tau <= 1.0)) fail("tau must lie in [0,1]");
    if (!(p->beta >= 0.0 && p->beta <= 1.0)) fail("beta must lie in [0,1]");
    for (auto h : p->hidden)
      if (h == 0) fail("hidden layer sizes must be >= 1");
  }
}

RunConfig desk_config() {
  RunConfig c;
  auto& a = c.agent;
  for (auto* p : {&a.actor, &a.policy, &a.generator, &a.prior}) {
    p->hidden = {32, 32};
    p->eta = 1e-3;
    p->k_steps = 10;
  }
  a.actor.tau = a.policy.tau = 0.01;
  a.batch = 16;
  a.replay_capacity = 100000;
  a.demo_capacity = 20000;
  a.actor_capacity = 20000;
  a.warmup_steps = 200;
  return c;
}

RunConfig paper_config() {
  RunConfig c;
  auto& a = c.agent;
  for (auto* p : {&a.actor, &a.policy, &a.generator, &a.prior}) {
    p->hidden = {256, 256};
    p->activation = ngc::Activation::relu6;
    p->eta = 1e-3;
  }
  a.actor.target_sync_interval = a.policy.target_sync_interval = 500;
  a.batch = 256;
  a.discount = 0.99;
  a.replay_capacity = 1000000;
  a.demo_capacity = 120000;
  a.actor_capacity = 200000;
  return c;
}

RunConfig merge_config(RunConfig base, const json& j) {
  from_json(j, base);
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config file '" + path + "': " + e.what());
  }
  RunConfig c;
  try {
    c = merge_config(std::move(base), j);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config file '" + path + "': " + e.what());
  }
  c.validate();
  return c;
}

std::string config_hash(const RunConfig& c) {
  const json j{{"env", c.env}, {"fail_reward", c.fail_reward}, {"agent", c.agent}};
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace actpc
