#include <cmath>
#include <random>

#include "actpc/circuits.hpp"
#include "doctest.h"

using namespace actpc;
using namespace actpc::circuits;

namespace {

CircuitParams small(std::vector<std::size_t> hidden = {6}) {
  CircuitParams hp;
  hp.hidden = std::move(hidden);
  hp.activation = ngc::Activation::tanh;
  hp.k_steps = 20;
  hp.eta = 1e-2;
  return hp;
}

void zero_all(Circuit& c) {
  c.params().for_each([](const std::string&, const char*, Matrix<Real>& m) { m.fill(0); });
}

Transition make_tr(Vec<Real> obs, Vec<Real> action, Vec<Real> next, Real reward = 0, bool terminal = false) {
  Transition t;
  t.obs = std::move(obs);
  t.action = std::move(action);
  t.next_obs = std::move(next);
  t.reward = reward;
  t.terminal = terminal;
  return t;
}

}  // namespace

TEST_CASE("act") {
  std::mt19937_64 rng(1);
  SUBCASE("zero synapses act zero") {
    ActorCircuit a(small(), 3, 2, 1.0, 0);
    zero_all(a.core());
    for (Real v : a.act(Vec<Real>{1, -2, 3}, {})) CHECK(v == 0);
  }
  SUBCASE("bounded by kappa") {
    for (double kappa : {1.0, 2.0}) {
      ActorCircuit a(small(), 3, 2, kappa, 0);
      a.initialize(rng);
      for (auto& w : a.core().params().weight)
        for (auto& v : w.flat()) v *= 50;
      for (Real v : a.act(Vec<Real>{5, -5, 5}, {})) CHECK(std::abs(v) <= kappa);
    }
  }
  SUBCASE("scalar tanh") {
    ActorCircuit a(small({}), 1, 1, 2.0, 0);
    zero_all(a.core());
    a.core().params().weight[0](0, 0) = 0.5;
    CHECK(a.act(Vec<Real>{1}, {})[0] == doctest::Approx(2 * std::tanh(0.5)).epsilon(1e-6));
  }
}

TEST_CASE("td targets") {
  CHECK(td_target(1.0, true, Vec<Real>{7, 8, 9}, 0.99) == Vec<Real>{1, 1, 1});
  const auto t = td_target(0.5, false, Vec<Real>{1, -1}, 0.99);
  CHECK(t[0] == doctest::Approx(1.49));
  CHECK(t[1] == doctest::Approx(-0.49));

  std::mt19937_64 rng(2);
  ActorCircuit actor(small(), 2, 2, 1.0, 0);
  PolicyCircuit policy(small(), 2, 2, 0.9, 0);
  actor.initialize(rng);
  policy.initialize(rng);
  auto tr = make_tr({0.1f, 0.2f}, {0, 0}, {0.3f, -0.4f}, 0.25f);
  const auto a2 = actor.act_target(tr.next_obs, {});
  const auto c = policy.target_value(a2, tr.next_obs);
  const auto got = compute_td_target(policy, actor, tr);
  for (std::size_t i = 0; i < 2; ++i) CHECK(got[i] == doctest::Approx(0.25 + 0.9 * c[i]));
  tr.terminal = true;
  CHECK(compute_td_target(policy, actor, tr) == Vec<Real>{0.25f, 0.25f});
}

TEST_CASE("update_policy") {
  std::mt19937_64 rng(3);
  PolicyCircuit policy(small(), 2, 1, 0.99, 0);
  policy.initialize(rng);
  auto tr = make_tr({0.5f, -0.5f}, {0.3f}, {0, 0});
  const Transition* one[] = {&tr};

  SUBCASE("own projection as target gives zero output delta") {
    const auto q = policy.value(tr.action, tr.obs);
    ngc::Clamp<Real> c;
    c.top = concat<Real>(tr.action, tr.obs);
    c.bottom = q;
    policy.core().settle(c);
    const auto d = policy.core().compute_weight_updates();
    for (Real v : d.weight[0].flat()) CHECK(v == doctest::Approx(0).epsilon(1e-6));
    for (Real v : d.bias[0].flat()) CHECK(v == doctest::Approx(0).epsilon(1e-6));
  }
  SUBCASE("identical batch equals a single transition") {
    PolicyCircuit twin = policy;
    const Transition* four[] = {&tr, &tr, &tr, &tr};
    const std::vector<Vec<Real>> t1{{1.0f}}, t4(4, Vec<Real>{1.0f});
    update_policy(policy, one, t1);
    update_policy(twin, four, t4);
    auto a = policy.core().params().pointers(), b = twin.core().params().pointers();
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t k = 0; k < a[i]->size(); ++k)
        CHECK(a[i]->flat()[k] == doctest::Approx(b[i]->flat()[k]).epsilon(1e-6));
  }
  SUBCASE("scalar policy delta is the negative squared-error gradient") {
    PolicyCircuit p(small({}), 1, 1, 0.99, 0);
    zero_all(p.core());
    p.core().params().weight[0](0, 0) = 0.4f;
    p.core().params().weight[0](0, 1) = -0.7f;
    p.core().params().bias[0](0, 0) = 0.1f;
    const double a = 0.3, o = 0.8, t = 1.2;
    ngc::Clamp<Real> c;
    c.top = Vec<Real>{static_cast<Real>(a), static_cast<Real>(o)};
    c.bottom = Vec<Real>{static_cast<Real>(t)};
    p.core().settle(c);
    const auto d = p.core().compute_weight_updates();
    auto loss = [&](double w0, double w1, double b) {
      const double q = w0 * a + w1 * o + b;
      return 0.5 * (q - t) * (q - t);
    };
    const double h = 1e-6, w0 = 0.4f, w1 = -0.7f, b = 0.1f;
    const double g0 = (loss(w0 + h, w1, b) - loss(w0 - h, w1, b)) / (2 * h);
    const double g1 = (loss(w0, w1 + h, b) - loss(w0, w1 - h, b)) / (2 * h);
    const double gb = (loss(w0, w1, b + h) - loss(w0, w1, b - h)) / (2 * h);
    CHECK(d.weight[0](0, 0) == doctest::Approx(-g0).epsilon(1e-5));
    CHECK(d.weight[0](0, 1) == doctest::Approx(-g1).epsilon(1e-5));
    CHECK(d.bias[0](0, 0) == doctest::Approx(-gb).epsilon(1e-5));
  }
  SUBCASE("mismatched targets") {
    const std::vector<Vec<Real>> none;
    CHECK_THROWS_AS(update_policy(policy, one, none), ShapeError);
  }
}

TEST_CASE("update_actor_coupled") {
  std::mt19937_64 rng(4);
  SUBCASE("orienting population is -1/A") {
    PolicyCircuit p(small(), 3, 4, 0.99, 0);
    for (Real v : p.actor_errors()) CHECK(v == -0.25f);
    p.set_switch(1);
    CHECK(p.effective_output_error() == p.actor_errors());
    CHECK_THROWS_AS(p.set_switch(2), std::invalid_argument);
  }
  SUBCASE("no feedback path leaves the actor unchanged") {
    ActorCircuit actor(small(), 2, 2, 1.0, 0);
    PolicyCircuit policy(small(), 2, 2, 0.99, 0);
    actor.initialize(rng);
    policy.initialize(rng);
    policy.core().params().feedback.back().fill(0);
    const auto before = actor.core().params();
    auto tr = make_tr({0.2f, 0.1f}, {0, 0}, {0, 0});
    const Transition* b[] = {&tr};
    update_actor_coupled(actor, policy, b);
    CHECK(actor.core().params() == before);
    CHECK(policy.switch_state() == 0);
  }
  SUBCASE("raises the critic's value of the actor's action") {
    // Fixed linear critic q = w . a with a positive slope: the actor should
    // push its action up.
    ActorCircuit actor(small({}), 1, 1, 1.0, 0);
    PolicyCircuit policy(small({}), 1, 1, 0.99, 0);
    zero_all(actor.core());
    zero_all(policy.core());
    policy.core().params().weight[0](0, 0) = 1.0f;
    policy.core().params().feedback[0](0, 0) = 1.0f;
    auto tr = make_tr({1.0f}, {0}, {0});
    const Transition* b[] = {&tr};
    const Real before = actor.act(tr.obs, {})[0];
    for (int i = 0; i < 20; ++i) update_actor_coupled(actor, policy, b);
    CHECK(actor.act(tr.obs, {})[0] > before + 0.05f);
  }
}

TEST_CASE("actor_refresh") {
  std::mt19937_64 rng(5);
  ActorCircuit actor(small(), 2, 1, 1.0, 0);
  actor.initialize(rng);
  memory::ActorBuffer buf(100);
  const auto before = actor.core().params();
  CHECK_FALSE(actor_refresh(actor, buf, 8, rng));
  CHECK(actor.core().params() == before);

  auto tr = make_tr({0.3f, -0.1f}, {0}, {0, 0});
  tr.action = actor.act(tr.obs, {});
  tr.sparse_reward = 1;
  buf.store_episode_filtered({tr});
  ngc::Clamp<Real> c;
  c.top = tr.obs;
  c.bottom = tr.action;
  actor.core().settle(c);
  const auto d = actor.core().compute_weight_updates();
  for (const auto& w : d.weight)
    for (Real v : w.flat()) CHECK(v == doctest::Approx(0).epsilon(1e-6));
  CHECK(actor_refresh(actor, buf, 4, rng));
}

TEST_CASE("generator") {
  std::mt19937_64 rng(6);
  GeneratorCircuit gen(small(), 2, 1, 0);
  gen.initialize(rng);
  zero_all(gen.core());
  auto tr = make_tr({0.1f, 0.2f}, {0.5f}, {0.7f, -0.3f});
  const auto e = update_generator(gen, tr);
  CHECK(e[0][0] == doctest::Approx(0.7f));
  CHECK(e[0][1] == doctest::Approx(-0.3f));

  SUBCASE("memorizing a deterministic transition drives the surprise down") {
    GeneratorCircuit g(small(), 2, 1, 0);
    g.initialize(rng);
    auto sq = [](const std::vector<Vec<Real>>& es) {
      double s = 0;
      for (const auto& v : es)
        for (Real x : v) s += x * x;
      return s;
    };
    const double first = sq(generator_infer(g, tr));
    for (int i = 0; i < 300; ++i) update_generator(g, tr);
    CHECK(sq(generator_infer(g, tr)) < 0.05 * first);
  }
}

TEST_CASE("prior") {
  std::mt19937_64 rng(7);
  auto tr = make_tr({0.2f, -0.4f}, {0}, {0.5f, 0.1f});
  SUBCASE("zero epochs freezes at initialization") {
    PriorCircuit p(small(), 2, 0);
    p.initialize(rng);
    const auto before = p.core().params();
    const Transition demos[] = {tr};
    pretrain_prior(p, demos, 0);
    CHECK(p.frozen());
    CHECK(p.core().params() == before);
    CHECK_THROWS_AS(prior_train_step(p, tr), FrozenError);
    CHECK(p.core().params() == before);
  }
  SUBCASE("empty demos") {
    PriorCircuit p(small(), 2, 0);
    CHECK_THROWS_AS(pretrain_prior(p, {}, 3), std::invalid_argument);
  }
  SUBCASE("regresses a repeated transition") {
    PriorCircuit p(small(), 2, 0);
    p.initialize(rng);
    const Transition demos[] = {tr};
    pretrain_prior(p, demos, 200);
    const auto out = p.core().project(tr.obs);
    CHECK(std::abs(out[0] - 0.5f) < 1e-2);
    CHECK(std::abs(out[1] - 0.1f) < 1e-2);
  }
}

TEST_CASE("target tracking") {
  std::mt19937_64 rng(8);
  SUBCASE("polyak") {
    auto hp = small();
    hp.tau = 0.5;
    ActorCircuit a(hp, 2, 1, 1.0, 0);
    a.initialize(rng);
    CHECK(a.target().params() == a.core().params());
    const Real src = a.core().params().weight[0](0, 0);
    a.core().params().weight[0](0, 0) = src + 1;
    a.track_target();
    CHECK(a.target().params().weight[0](0, 0) == doctest::Approx(src + 0.5f));
  }
  SUBCASE("hard copy every C updates") {
    auto hp = small();
    hp.target_sync_interval = 2;
    ActorCircuit a(hp, 2, 1, 1.0, 0);
    a.initialize(rng);
    const auto init = a.target().params();
    a.set_updates(1);
    a.core().params().weight[0](0, 0) += 1;
    a.track_target();
    CHECK(a.target().params() == init);
    a.set_updates(2);
    a.track_target();
    CHECK(a.target().params() == a.core().params());
  }
}
