#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <span>
#include <vector>

#include "actpc/tensor.hpp"

namespace actpc::memory {

/// Sliding window of randomly projected observations. m_t is the
/// concatenation of the last H-1 projections k = Q x, oldest first; slots not
/// yet filled this episode read as zeros.
class WorkingMemory {
 public:
  WorkingMemory() = default;
  WorkingMemory(std::size_t input_dim, std::size_t window, std::uint64_t seed, double sigma_scale = 0.1);

  std::size_t input_dim() const noexcept { return q_.cols(); }
  std::size_t slots() const noexcept { return slots_; }
  std::size_t dim() const noexcept { return slots_ * q_.rows(); }

  void reset() { history_.clear(); }
  void push(std::span<const Real> x);
  Vec<Real> vector() const;

  /// The memory vector that follows `m` once `x` is pushed, without touching
  /// this object's history.
  Vec<Real> advance(std::span<const Real> m, std::span<const Real> x) const;

  const Matrix<Real>& projection() const noexcept { return q_; }
  void set_projection(Matrix<Real> q);

  const std::deque<Vec<Real>>& history() const noexcept { return history_; }
  void set_history(std::deque<Vec<Real>> h);

 private:
  Vec<Real> project(std::span<const Real> x) const;

  Matrix<Real> q_;
  std::size_t slots_ = 0;
  std::deque<Vec<Real>> history_;
};

struct Transition {
  Vec<Real> obs;
  Vec<Real> action;
  Real reward = 0;         // combined internal reward r_t
  Vec<Real> next_obs;
  bool terminal = false;
  Real sparse_reward = 0;  // raw environment reward
  Vec<Real> memory;        // m_t seen with obs
  Vec<Real> next_memory;   // m_{t+1} seen with next_obs

  bool operator==(const Transition&) const = default;
};

/// Fixed-capacity ring of transitions; the oldest entry is overwritten first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  std::size_t cursor() const noexcept { return cursor_; }

  void push(Transition t);
  void clear();

  // Index 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;
  const Transition& sample(std::mt19937_64& rng) const;

  // Raw ring access for checkpointing.
  const std::vector<Transition>& raw() const noexcept { return items_; }
  void restore(std::vector<Transition> items, std::size_t cursor);

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t cursor_ = 0;
};

/// Combined experience replay: `current` always comes first, followed by
/// batch-1 uniform draws (with replacement). When `demos` is non-empty a
/// fraction of the draws comes from it instead of `buffer`.
std::vector<const Transition*> sample_combined(const ReplayBuffer& buffer, std::size_t batch,
                                               const Transition& current, std::mt19937_64& rng,
                                               const ReplayBuffer* demos = nullptr,
                                               double demo_fraction = 0.0);

/// Self-imitation memory: keeps only goal-reaching episodes whose cumulative
/// sparse reward matches or beats the best seen so far. Capacity counts
/// transitions; whole episodes are evicted oldest first.
class ActorBuffer {
 public:
  explicit ActorBuffer(std::size_t capacity = 1);

  bool store_episode_filtered(const std::vector<Transition>& episode);

  double best_return() const noexcept { return best_return_; }
  std::size_t episodes() const noexcept { return episodes_.size(); }
  std::size_t size() const noexcept { return total_; }
  bool empty() const noexcept { return total_ == 0; }
  std::size_t capacity() const noexcept { return capacity_; }

  const Transition& sample(std::mt19937_64& rng) const;

  const std::deque<std::vector<Transition>>& raw() const noexcept { return episodes_; }
  void restore(std::deque<std::vector<Transition>> episodes, double best_return);

 private:
  std::size_t capacity_;
  std::deque<std::vector<Transition>> episodes_;
  std::size_t total_ = 0;
  double best_return_ = 0.0;
};

double episode_return(const std::vector<Transition>& episode);

}  // namespace actpc::memory
