#include <random>

#include "actpc/memory.hpp"
#include "doctest.h"

using namespace actpc;
using namespace actpc::memory;

namespace {

Matrix<Real> identity(std::size_t n) {
  Matrix<Real> q(n, n);
  for (std::size_t i = 0; i < n; ++i) q(i, i) = 1;
  return q;
}

Transition tagged(Real tag, Real sparse = 0) {
  Transition t;
  t.obs = {tag};
  t.action = {0};
  t.next_obs = {tag};
  t.sparse_reward = sparse;
  return t;
}

std::vector<Transition> episode_with(std::vector<Real> sparse) {
  std::vector<Transition> ep;
  for (std::size_t i = 0; i < sparse.size(); ++i) ep.push_back(tagged(static_cast<Real>(i), sparse[i]));
  return ep;
}

}  // namespace

TEST_CASE("working memory") {
  SUBCASE("fresh episode reads zeros") {
    WorkingMemory wm(3, 4, 9);
    CHECK(wm.dim() == 9);
    for (Real v : wm.vector()) CHECK(v == 0);
  }
  SUBCASE("identity projection, oldest first") {
    WorkingMemory wm(2, 3, 1);
    wm.set_projection(identity(2));
    wm.push(Vec<Real>{1, 2});
    CHECK(wm.vector() == Vec<Real>{0, 0, 1, 2});
    wm.push(Vec<Real>{3, 4});
    CHECK(wm.vector() == Vec<Real>{1, 2, 3, 4});
  }
  SUBCASE("only the last H-1 survive") {
    WorkingMemory wm(1, 3, 1);
    wm.set_projection(identity(1));
    for (Real x = 1; x <= 6; ++x) wm.push(Vec<Real>{x});
    CHECK(wm.vector() == Vec<Real>{5, 6});
    wm.reset();
    CHECK(wm.vector() == Vec<Real>{0, 0});
  }
  SUBCASE("advance matches push") {
    WorkingMemory wm(3, 5, 4);
    std::mt19937_64 rng(2);
    std::normal_distribution<float> n;
    for (int i = 0; i < 7; ++i) {
      Vec<Real> x{n(rng), n(rng), n(rng)};
      const auto predicted = wm.advance(wm.vector(), x);
      wm.push(x);
      CHECK(predicted == wm.vector());
    }
  }
  SUBCASE("window 1 has no memory") {
    WorkingMemory wm(2, 1, 1);
    wm.push(Vec<Real>{1, 1});
    CHECK(wm.vector().empty());
  }
  SUBCASE("projection scale and determinism") {
    WorkingMemory a(64, 3, 77), b(64, 3, 77), c(64, 3, 78);
    CHECK(a.projection() == b.projection());
    CHECK_FALSE(a.projection() == c.projection());
    double sq = 0;
    for (Real v : a.projection().flat()) sq += static_cast<double>(v) * v;
    const double sd = std::sqrt(sq / static_cast<double>(a.projection().size()));
    CHECK(sd == doctest::Approx(0.1 / 8.0).epsilon(0.05));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(WorkingMemory(2, 0, 1), std::invalid_argument);
    WorkingMemory wm(2, 3, 1);
    CHECK_THROWS_AS(wm.push(Vec<Real>{1}), ShapeError);
    CHECK_THROWS_AS(wm.set_projection(Matrix<Real>(2, 3)), ShapeError);
  }
}

TEST_CASE("replay buffer ring") {
  ReplayBuffer buf(3);
  CHECK_THROWS_AS(ReplayBuffer(0), std::invalid_argument);
  for (Real i = 0; i < 5; ++i) buf.push(tagged(i));
  CHECK(buf.size() == 3);
  CHECK(buf.at(0).obs[0] == 2);
  CHECK(buf.at(2).obs[0] == 4);
  CHECK_THROWS_AS(buf.at(3), std::out_of_range);
}

TEST_CASE("sample_combined") {
  std::mt19937_64 rng(5);
  ReplayBuffer buf(10);
  const auto cur = tagged(-1);
  SUBCASE("batch 1 is the current transition") {
    buf.push(tagged(3));
    auto b = sample_combined(buf, 1, cur, rng);
    REQUIRE(b.size() == 1);
    CHECK(b[0] == &cur);
  }
  SUBCASE("single stored element fills the rest") {
    buf.push(tagged(3));
    auto b = sample_combined(buf, 4, cur, rng);
    REQUIRE(b.size() == 4);
    CHECK(b[0] == &cur);
    for (std::size_t i = 1; i < 4; ++i) CHECK(b[i]->obs[0] == 3);
  }
  SUBCASE("demo fraction") {
    buf.push(tagged(3));
    ReplayBuffer demos(4);
    demos.push(tagged(9));
    auto b = sample_combined(buf, 9, cur, rng, &demos, 0.25);
    int from_demo = 0;
    for (std::size_t i = 1; i < b.size(); ++i) from_demo += b[i]->obs[0] == 9;
    CHECK(from_demo == 2);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(sample_combined(buf, 0, cur, rng), std::invalid_argument);
    CHECK_THROWS_AS(sample_combined(buf, 2, cur, rng), std::logic_error);
  }
}

TEST_CASE("actor buffer filter") {
  ActorBuffer buf(100);
  CHECK_FALSE(buf.store_episode_filtered(episode_with({0, 0, 0})));
  CHECK(buf.store_episode_filtered(episode_with({0, 1})));
  CHECK(buf.best_return() == 1.0);
  CHECK_FALSE(buf.store_episode_filtered(episode_with({0.5f})));
  CHECK(buf.store_episode_filtered(episode_with({0, 0, 1})));
  CHECK(buf.episodes() == 2);
  CHECK(buf.size() == 5);
  CHECK_THROWS_AS(buf.store_episode_filtered({}), std::invalid_argument);

  SUBCASE("capacity evicts oldest episodes") {
    ActorBuffer small(4);
    CHECK(small.store_episode_filtered(episode_with({0, 0, 1})));
    CHECK(small.store_episode_filtered(episode_with({0, 1})));
    CHECK(small.episodes() == 1);
    CHECK(small.size() == 2);
  }
  SUBCASE("negative fail rewards never qualify") {
    ActorBuffer b(10);
    CHECK_FALSE(b.store_episode_filtered(episode_with({-1, -1, 1})));
    CHECK(b.store_episode_filtered(episode_with({1})));
  }
  SUBCASE("sampling only returns stored transitions") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 50; ++i) CHECK(buf.sample(rng).obs[0] <= 2);
    ActorBuffer empty(3);
    CHECK_THROWS_AS(empty.sample(rng), std::logic_error);
  }
}
