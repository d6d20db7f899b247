#include "actpc/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace actpc::envs {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined word
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> Environment::clip_action(std::span<const Real> action) {
  const auto& s = spec();
  require_dim(action.size(), s.action_dim, "action");
  std::vector<double> a(action.begin(), action.end());
  bool clipped = false;
  for (auto& v : a) {
    if (std::isnan(v)) throw std::invalid_argument("action contains NaN");
    if (v > s.action_bound || v < -s.action_bound) {
      v = std::clamp(v, -s.action_bound, s.action_bound);
      clipped = true;
    }
  }
  if (clipped) ++clipped_;
  return a;
}

// --- point reacher ---------------------------------------------------------

PointReacher::PointReacher(Params p) : p_(p) {
  spec_ = {"point_reacher", 4, 2, 1.0, p.max_episode_len, p.fail_reward};
}

Vec<Real> PointReacher::observe() const {
  return {static_cast<Real>(pos_[0]), static_cast<Real>(pos_[1]), static_cast<Real>(goal_[0]),
          static_cast<Real>(goal_[1])};
}

Vec<Real> PointReacher::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> g(-p_.goal_range, p_.goal_range);
  std::uniform_real_distribution<double> s(-p_.start_range, p_.start_range);
  pos_ = p_.start_range > 0 ? std::array<double, 2>{s(rng), s(rng)} : std::array<double, 2>{0.0, 0.0};
  do {
    goal_ = {g(rng), g(rng)};
  } while (std::hypot(goal_[0] - pos_[0], goal_[1] - pos_[1]) < p_.min_goal_dist);
  return observe();
}

void PointReacher::set_state(std::array<double, 2> pos, std::array<double, 2> goal) {
  pos_ = pos;
  goal_ = goal;
}

StepResult PointReacher::step(std::span<const Real> action) {
  const auto a = clip_action(action);
  for (int i = 0; i < 2; ++i) pos_[i] = std::clamp(pos_[i] + p_.dt * a[i], -1.0, 1.0);
  const double dist = std::hypot(pos_[0] - goal_[0], pos_[1] - goal_[1]);
  const bool hit = dist < p_.threshold;
  return {hit ? 1.0 : p_.fail_reward, observe(), hit};
}

// --- line world -------------------------------------------------------------

LineWorld::LineWorld(Params p) : p_(p) { spec_ = {"line_world", 2, 1, 1.0, p.max_episode_len, p.fail_reward}; }

Vec<Real> LineWorld::reset(std::uint64_t) {
  x_ = 0.0;
  return {static_cast<Real>(x_), static_cast<Real>(p_.goal)};
}

StepResult LineWorld::step(std::span<const Real> action) {
  const auto a = clip_action(action);
  x_ = std::clamp(x_ + p_.dt * a[0], -1.0, 1.0);
  const bool hit = std::abs(x_ - p_.goal) < p_.threshold;
  return {hit ? 1.0 : p_.fail_reward, {static_cast<Real>(x_), static_cast<Real>(p_.goal)}, hit};
}

// --- mountain car -----------------------------------------------------------

namespace mc {
constexpr double kMinPos = -1.2, kMaxPos = 0.6, kMaxSpeed = 0.07, kGoal = 0.45;
constexpr double kPower = 0.0015, kGravity = 0.0025;
}  // namespace mc

MountainCar::MountainCar(Params p) : p_(p) {
  spec_ = {"mountain_car", 2, 1, 1.0, p.max_episode_len, p.fail_reward};
}

Vec<Real> MountainCar::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> start(-0.6, -0.4);
  pos_ = start(rng);
  vel_ = 0.0;
  return {static_cast<Real>(pos_), static_cast<Real>(vel_ / mc::kMaxSpeed)};
}

StepResult MountainCar::step(std::span<const Real> action) {
  const auto a = clip_action(action);
  vel_ += a[0] * mc::kPower - mc::kGravity * std::cos(3.0 * pos_);
  vel_ = std::clamp(vel_, -mc::kMaxSpeed, mc::kMaxSpeed);
  pos_ = std::clamp(pos_ + vel_, mc::kMinPos, mc::kMaxPos);
  if (pos_ == mc::kMinPos && vel_ < 0) vel_ = 0.0;
  const bool hit = pos_ >= mc::kGoal;
  return {hit ? 1.0 : p_.fail_reward, {static_cast<Real>(pos_), static_cast<Real>(vel_ / mc::kMaxSpeed)}, hit};
}

// --- pendulum ---------------------------------------------------------------

namespace pend {
constexpr double kG = 10.0, kM = 1.0, kL = 1.0, kDt = 0.05, kMaxSpeed = 8.0, kMaxTorque = 2.0;
constexpr double kUpright = 0.1;

double wrap(double th) {
  constexpr double pi = std::numbers::pi;
  return std::fmod(std::fmod(th + pi, 2 * pi) + 2 * pi, 2 * pi) - pi;
}
}  // namespace pend

Pendulum::Pendulum(Params p) : p_(p) {
  spec_ = {"pendulum", 3, 1, pend::kMaxTorque, p.max_episode_len, p.fail_reward};
}

Vec<Real> Pendulum::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> th(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  theta_ = th(rng);
  omega_ = w(rng);
  held_ = 0;
  return {static_cast<Real>(std::cos(theta_)), static_cast<Real>(std::sin(theta_)),
          static_cast<Real>(omega_ / pend::kMaxSpeed)};
}

StepResult Pendulum::step(std::span<const Real> action) {
  using namespace pend;
  const auto a = clip_action(action);
  omega_ += (3.0 * kG / (2.0 * kL) * std::sin(theta_) + 3.0 / (kM * kL * kL) * a[0]) * kDt;
  omega_ = std::clamp(omega_, -kMaxSpeed, kMaxSpeed);
  theta_ = wrap(theta_ + omega_ * kDt);
  held_ = std::abs(theta_) < kUpright ? held_ + 1 : 0;
  const bool hit = held_ >= p_.hold_steps;
  return {hit ? 1.0 : p_.fail_reward,
          {static_cast<Real>(std::cos(theta_)), static_cast<Real>(std::sin(theta_)),
           static_cast<Real>(omega_ / kMaxSpeed)},
          hit};
}

// --- factory / experts ------------------------------------------------------

std::vector<std::string> env_names() { return {"point_reacher", "line_world", "mountain_car", "pendulum"}; }

std::unique_ptr<Environment> make_env(const std::string& name, double fail_reward, int max_len) {
  if (name == "point_reacher") {
    PointReacher::Params p;
    p.fail_reward = fail_reward;
    if (max_len > 0) p.max_episode_len = max_len;
    return std::make_unique<PointReacher>(p);
  }
  if (name == "line_world") {
    LineWorld::Params p;
    p.fail_reward = fail_reward;
    if (max_len > 0) p.max_episode_len = max_len;
    return std::make_unique<LineWorld>(p);
  }
  if (name == "mountain_car") {
    MountainCar::Params p;
    p.fail_reward = fail_reward;
    if (max_len > 0) p.max_episode_len = max_len;
    return std::make_unique<MountainCar>(p);
  }
  if (name == "pendulum") {
    Pendulum::Params p;
    p.fail_reward = fail_reward;
    if (max_len > 0) p.max_episode_len = max_len;
    return std::make_unique<Pendulum>(p);
  }
  throw std::invalid_argument("unknown environment '" + name + "'");
}

Vec<Real> scripted_expert(const std::string& env_name, std::span<const Real> obs, double kappa) {
  auto clip = [kappa](double v) { return static_cast<Real>(std::clamp(v, -kappa, kappa)); };
  if (env_name == "point_reacher") {
    require_dim(obs.size(), 4, "point_reacher observation");
    constexpr double gain = 10.0;
    return {clip(gain * (obs[2] - obs[0])), clip(gain * (obs[3] - obs[1]))};
  }
  if (env_name == "line_world") {
    require_dim(obs.size(), 2, "line_world observation");
    return {clip(10.0 * (obs[1] - obs[0]))};
  }
  if (env_name == "mountain_car") {
    require_dim(obs.size(), 2, "mountain_car observation");
    // Pump energy: push along the current velocity.
    return {static_cast<Real>(obs[1] >= 0 ? kappa : -kappa)};
  }
  if (env_name == "pendulum") {
    require_dim(obs.size(), 3, "pendulum observation");
    const double th = std::atan2(static_cast<double>(obs[1]), static_cast<double>(obs[0]));
    const double w = static_cast<double>(obs[2]) * pend::kMaxSpeed;
    // Energy of the undamped pendulum, zero at upright rest.
    const double energy = 0.5 * w * w / 15.0 + (std::cos(th) - 1.0);
    if (std::abs(th) < 0.6 && std::abs(energy) < 0.6) return {clip(-(12.0 * th + 2.5 * w))};
    const double pump = w * (0.0 - energy);
    return {static_cast<Real>(pump >= 0 ? kappa : -kappa)};
  }
  throw std::invalid_argument("no scripted expert for environment '" + env_name + "'");
}

}  // namespace actpc::envs
