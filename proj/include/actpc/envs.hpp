#pragma once

// Sparse-reward continuous-control environments. Observations are the full
// state (no partial observability). Rewards are 1 on reaching the goal and
// `fail_reward` otherwise.

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "actpc/tensor.hpp"

namespace actpc::envs {

struct EnvSpec {
  std::string name;
  std::size_t obs_dim = 1;
  std::size_t action_dim = 1;
  double action_bound = 1.0;  // kappa
  int max_episode_len = 100;
  double fail_reward = 0.0;
};

struct StepResult {
  double reward = 0.0;
  Vec<Real> obs;
  bool terminal = false;
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const = 0;
  /// Deterministic in `seed`.
  virtual Vec<Real> reset(std::uint64_t seed) = 0;
  /// Actions outside [-kappa, kappa] are clipped and counted.
  virtual StepResult step(std::span<const Real> action) = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;

  std::size_t clipped_actions() const noexcept { return clipped_; }

 protected:
  std::vector<double> clip_action(std::span<const Real> action);
  std::size_t clipped_ = 0;
};

/// 2-D point mass on [-1,1]^2: x' = clip(x + dt * a). Success when within
/// 0.06 of the goal. Observation [x, y, goal_x, goal_y].
class PointReacher : public Environment {
 public:
  struct Params {
    double dt = 0.05;
    double threshold = 0.06;
    double goal_range = 0.5;   // goals ~ U[-r, r]^2
    double start_range = 0.0;  // starts ~ U[-r, r]^2
    double min_goal_dist = 0.15;  // goals this close to the start are redrawn
    int max_episode_len = 50;
    double fail_reward = 0.0;
  };
  PointReacher() : PointReacher(Params{}) {}
  explicit PointReacher(Params p);

  const EnvSpec& spec() const override { return spec_; }
  Vec<Real> reset(std::uint64_t seed) override;
  StepResult step(std::span<const Real> action) override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<PointReacher>(*this); }

  void set_state(std::array<double, 2> pos, std::array<double, 2> goal);
  const Params& params() const noexcept { return p_; }

 private:
  Vec<Real> observe() const;
  Params p_;
  EnvSpec spec_;
  std::array<double, 2> pos_{};
  std::array<double, 2> goal_{};
};

/// Deterministic 1-D track: x' = clip(x + dt * a, -1, 1) from x = 0 with a
/// fixed goal. Observation [x, goal].
class LineWorld : public Environment {
 public:
  struct Params {
    double dt = 0.1;
    double goal = 0.5;
    double threshold = 0.05;
    int max_episode_len = 20;
    double fail_reward = 0.0;
  };
  LineWorld() : LineWorld(Params{}) {}
  explicit LineWorld(Params p);

  const EnvSpec& spec() const override { return spec_; }
  Vec<Real> reset(std::uint64_t seed) override;
  StepResult step(std::span<const Real> action) override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<LineWorld>(*this); }

 private:
  Params p_;
  EnvSpec spec_;
  double x_ = 0.0;
};

/// Continuous mountain car (force 0.0015, gravity 0.0025, |v| <= 0.07,
/// x in [-1.2, 0.6]); success at x >= 0.45. Observation [x, v / 0.07].
class MountainCar : public Environment {
 public:
  struct Params {
    int max_episode_len = 300;
    double fail_reward = 0.0;
  };
  MountainCar() : MountainCar(Params{}) {}
  explicit MountainCar(Params p);

  const EnvSpec& spec() const override { return spec_; }
  Vec<Real> reset(std::uint64_t seed) override;
  StepResult step(std::span<const Real> action) override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<MountainCar>(*this); }

  void set_state(double pos, double vel) {
    pos_ = pos;
    vel_ = vel;
  }

 private:
  Params p_;
  EnvSpec spec_;
  double pos_ = -0.5;
  double vel_ = 0.0;
};

/// Torque-limited pendulum (g = 10, m = l = 1, dt = 0.05, |u| <= 2,
/// |w| <= 8), theta = 0 upright. Success once |theta| < 0.1 for 5
/// consecutive steps. Observation [cos, sin, w / 8].
class Pendulum : public Environment {
 public:
  struct Params {
    int max_episode_len = 200;
    double fail_reward = 0.0;
    int hold_steps = 5;
  };
  Pendulum() : Pendulum(Params{}) {}
  explicit Pendulum(Params p);

  const EnvSpec& spec() const override { return spec_; }
  Vec<Real> reset(std::uint64_t seed) override;
  StepResult step(std::span<const Real> action) override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<Pendulum>(*this); }

  void set_state(double theta, double omega) {
    theta_ = theta;
    omega_ = omega;
    held_ = 0;
  }

 private:
  Params p_;
  EnvSpec spec_;
  double theta_ = 0.0;
  double omega_ = 0.0;
  int held_ = 0;
};

/// Known environment names: point_reacher, line_world, mountain_car, pendulum.
std::unique_ptr<Environment> make_env(const std::string& name, double fail_reward = 0.0, int max_len = 0);
std::vector<std::string> env_names();

/// Deterministic controller for `env_name` given the current observation.
Vec<Real> scripted_expert(const std::string& env_name, std::span<const Real> obs, double kappa);

/// Stateless 64-bit mixer for deriving per-episode seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace actpc::envs
