#pragma once

#include <filesystem>
#include <string>

#include "actpc/agent.hpp"
#include "actpc/config.hpp"

namespace actpc::testing {

// Small enough that a few hundred agent steps take well under a second.
inline RunConfig tiny_config(const std::string& env = "point_reacher") {
  RunConfig c = desk_config();
  c.env = env;
  for (auto* p : {&c.agent.actor, &c.agent.policy, &c.agent.generator, &c.agent.prior}) {
    p->hidden = {8};
    p->k_steps = 5;
  }
  c.agent.batch = 4;
  c.agent.warmup_steps = 10;
  c.agent.replay_capacity = 500;
  c.agent.demo_capacity = 500;
  c.agent.actor_capacity = 500;
  c.agent.prior_epochs = 1;
  return c;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("actpc_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline bool same_params(const circuits::Circuit& a, const circuits::Circuit& b) { return a.params() == b.params(); }

}  // namespace actpc::testing
