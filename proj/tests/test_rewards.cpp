#include "actpc/rewards.hpp"
#include "doctest.h"

using namespace actpc;
using namespace actpc::rewards;

TEST_CASE("epistemic") {
  RewardState s;
  SUBCASE("zero errors") {
    std::vector<Vec<Real>> e{{0, 0}, {0}};
    CHECK(epistemic(s, e) == 0.0);
  }
  SUBCASE("hand evaluation") {
    s.ep_max = 4.0;
    std::vector<Vec<Real>> e{{1, 1}, {0}, {0}};
    CHECK(epistemic(s, e) == 0.5);
    CHECK(s.ep_max == 4.0);
  }
  SUBCASE("new maximum gives exactly 1") {
    std::vector<Vec<Real>> e{{3}};
    CHECK(epistemic(s, e) == 1.0);
    CHECK(s.ep_max == 9.0);
    std::vector<Vec<Real>> small{{1}};
    CHECK(epistemic(s, small) == doctest::Approx(1.0 / 9.0));
  }
}

TEST_CASE("instrumental") {
  RewardState s;
  SUBCASE("exact match is best") {
    std::vector<Vec<Real>> e{{0}};
    CHECK(instrumental(s, e) == 0.0);
  }
  SUBCASE("equal to the maximum") {
    s.in_max = 4.0;
    std::vector<Vec<Real>> e{{2}};
    CHECK(instrumental(s, e) == -1.0);
  }
  SUBCASE("hand evaluation") {
    s.in_max = 18.0;
    std::vector<Vec<Real>> e{{3}, {0}};
    CHECK(instrumental(s, e) == -0.5);
  }
}

TEST_CASE("combine") {
  RewardState s;
  CHECK(combine(s, 0.5, -0.5) == 0.0);
  CHECK(combine(s, 0.0, 0.0) == 0.0);
  s.alpha_ep = 0.0;
  CHECK(combine(s, 0.9, -0.3) == -0.3);
  s.alpha_ep = 2.0;
  s.alpha_in = 0.5;
  CHECK(combine(s, 0.25, -1.0) == 0.0);
}

TEST_CASE("reward state is deterministic") {
  std::vector<Vec<Real>> e{{1.5f, -2.0f}, {0.25f}};
  RewardState a, b;
  for (int i = 0; i < 3; ++i) CHECK(epistemic(a, e) == epistemic(b, e));
  CHECK(a.ep_max == b.ep_max);
}
