#include <algorithm>

#include "actpc/agent.hpp"
#include "agent_support.hpp"
#include "doctest.h"

using namespace actpc;

namespace {

struct Setup {
  RunConfig cfg;
  std::unique_ptr<envs::Environment> env;
  explicit Setup(RunConfig c) : cfg(std::move(c)), env(envs::make_env(cfg.env, cfg.fail_reward, cfg.max_len)) {}
  Agent agent(std::uint64_t seed = 1, int demos = 5) const {
    Agent a(cfg.agent, env->spec(), seed);
    if (demos > 0) {
      auto e = env->clone();
      a.load_demos(collect_demos(*e, demos, 99));
    }
    return a;
  }
};

}  // namespace

TEST_CASE("step order") {
  Setup s(testing::tiny_config());
  s.cfg.agent.warmup_steps = 0;
  Agent a(s.cfg.agent, s.env->spec(), 1);
  std::vector<std::string> trace;
  a.set_trace(&trace);
  a.begin_episode(*s.env);
  a.step(*s.env);
  const std::vector<std::string> want{"act",        "env_step",        "generator_infer", "prior_infer",
                                      "combine",    "store",           "sample",          "update_actor",
                                      "update_policy", "update_generator", "actor_refresh", "wm_push"};
  CHECK(trace == want);
}

TEST_CASE("warm-up skips learning") {
  Setup s(testing::tiny_config());
  s.cfg.agent.warmup_steps = 3;
  Agent a = s.agent(1, 0);
  const auto actor = a.actor().core().params();
  a.begin_episode(*s.env);
  for (int i = 0; i < 3; ++i) CHECK_FALSE(a.step(*s.env).updated);
  CHECK(a.actor().core().params() == actor);
  CHECK(a.step(*s.env).updated);
}

TEST_CASE("zero learning rates freeze the agent") {
  auto cfg = testing::tiny_config();
  for (auto* p : {&cfg.agent.actor, &cfg.agent.policy, &cfg.agent.generator, &cfg.agent.prior}) p->eta = 0;
  cfg.agent.warmup_steps = 0;
  cfg.agent.exploration_sigma = 0;
  Setup s(cfg);
  Agent a = s.agent(2, 3);
  const auto actor = a.actor().core().params();
  const auto policy = a.policy().core().params();
  const auto gen = a.generator().core().params();
  a.run(*s.env, 3);
  CHECK(a.actor().core().params() == actor);
  CHECK(a.policy().core().params() == policy);
  CHECK(a.generator().core().params() == gen);
}

TEST_CASE("run") {
  Setup s(testing::tiny_config());
  Agent a = s.agent();
  CHECK(a.run(*s.env, 0).episodes.empty());
  CHECK_THROWS_AS(a.run(*s.env, -1), std::invalid_argument);
  int steps = 0;
  const auto log = a.run(*s.env, 4, 1, [&](const StepRecord&) { ++steps; });
  CHECK(steps == 4);
  for (const auto& e : log.episodes) CHECK(e.steps == 1);
  CHECK(a.episodes_done() == 4);
}

TEST_CASE("step records are reproducible") {
  Setup s(testing::tiny_config());
  std::vector<StepRecord> r1, r2;
  Agent a = s.agent(7), b = s.agent(7);
  auto e1 = s.env->clone(), e2 = s.env->clone();
  a.run(*e1, 3, 0, [&](const StepRecord& r) { r1.push_back(r); });
  b.run(*e2, 3, 0, [&](const StepRecord& r) { r2.push_back(r); });
  CHECK(r1 == r2);
  Agent c = s.agent(8);
  std::vector<StepRecord> r3;
  auto e3 = s.env->clone();
  c.run(*e3, 3, 0, [&](const StepRecord& r) { r3.push_back(r); });
  CHECK_FALSE(r1 == r3);
}

TEST_CASE("record contents") {
  Setup s(testing::tiny_config());
  Agent a = s.agent();
  std::vector<StepRecord> recs;
  const auto ep = a.run_episode(*s.env, 0, [&](const StepRecord& r) { recs.push_back(r); });
  REQUIRE(!recs.empty());
  double sum_rt = 0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    CHECK(r.episode_step == static_cast<int>(i) + 1);
    CHECK(r.r_ep >= 0.0);
    CHECK(r.r_ep <= 1.0);
    CHECK(r.r_in >= -1.0);
    CHECK(r.r_in <= 0.0);
    CHECK(r.r_t == doctest::Approx(r.r_ep + r.r_in));
    CHECK(r.tod.size() == a.generator().core().top());
    sum_rt += r.r_t;
  }
  CHECK(ep.steps == static_cast<int>(recs.size()));
  CHECK(ep.combined_return == doctest::Approx(sum_rt));
  CHECK(a.replay().size() == recs.size());
}

TEST_CASE("sparse reward can be added to r_t") {
  auto cfg = testing::tiny_config("line_world");
  cfg.agent.add_sparse_reward = true;
  cfg.fail_reward = -1;
  Setup s(cfg);
  Agent a = s.agent(1, 0);
  a.begin_episode(*s.env);
  const auto r = a.step(*s.env);
  CHECK(r.r_t == doctest::Approx(r.r_ep + r.r_in + r.sparse_r));
}

TEST_CASE("demos") {
  Setup s(testing::tiny_config());
  auto demos = collect_demos(*s.env, 4, 3);
  REQUIRE(demos.size() == 4);
  for (const auto& ep : demos) CHECK(ep.back().sparse_reward == 1.0f);
  Agent a(s.cfg.agent, s.env->spec(), 1);
  a.load_demos(demos);
  CHECK(a.prior().frozen());
  std::size_t n = 0;
  for (const auto& ep : demos) n += ep.size();
  CHECK(a.demos().size() == n);
  CHECK(a.actor_buffer().episodes() >= 1);
  // Agent maxima are untouched by demo labelling.
  CHECK(a.reward_state().in_max == 1.0);
  // The first demo transition of every episode sees an empty memory.
  for (Real v : a.demos().at(0).memory) CHECK(v == 0);

  Agent none(s.cfg.agent, s.env->spec(), 1);
  none.load_demos({});
  CHECK(none.prior().frozen());
  CHECK(none.demos().empty());

  auto bad = demos;
  bad[0][0].obs.pop_back();
  Agent c(s.cfg.agent, s.env->spec(), 1);
  CHECK_THROWS_AS(c.load_demos(bad), ShapeError);
}

TEST_CASE("environment mismatch") {
  Setup s(testing::tiny_config());
  Agent a = s.agent(1, 0);
  auto other = envs::make_env("line_world");
  CHECK_THROWS_AS(a.begin_episode(*other), ShapeError);
  CHECK_THROWS_AS(a.step(*s.env), std::logic_error);
}

TEST_CASE("evaluation") {
  Setup s(testing::tiny_config());
  Agent a = s.agent();
  a.run(*s.env, 2);
  const auto before = a.actor().core().params();
  auto e1 = s.env->clone(), e2 = s.env->clone();
  const auto r1 = evaluate(a, *e1, 5, 3);
  const auto r2 = evaluate(a, *e2, 5, 3);
  CHECK(r1 == r2);
  CHECK(a.actor().core().params() == before);
  const auto rnd = evaluate_random(*e1, 50, 1);
  CHECK(rnd.success_rate >= 0.0);
  CHECK(rnd.success_rate <= 1.0);
  CHECK(evaluate_random(*e1, 50, 1) == rnd);
}

TEST_CASE("collect_demos") {
  auto env = envs::make_env("point_reacher");
  CHECK(collect_demos(*env, 0, 1).empty());
  CHECK_THROWS_AS(collect_demos(*env, -1, 1), std::invalid_argument);
  auto hopeless = envs::make_env("mountain_car", 0.0, 2);
  CHECK_THROWS_AS(collect_demos(*hopeless, 3, 1), std::runtime_error);
}
