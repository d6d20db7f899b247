#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "actpc/kernels.hpp"
#include "actpc/tensor.hpp"

namespace actpc::optim {

struct AdamConfig {
  double eta = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam over an ordered list of tensors. The Hebbian deltas are ascent
/// directions, so each step moves a tensor along +delta with bias-corrected
/// moment scaling.
template <typename T>
class AdaptiveRule {
 public:
  AdaptiveRule() = default;
  AdaptiveRule(AdamConfig cfg, std::span<const Matrix<T>* const> shapes) : cfg_(cfg) {
    for (const auto* s : shapes) {
      first_.emplace_back(s->rows(), s->cols());
      second_.emplace_back(s->rows(), s->cols());
    }
  }

  const AdamConfig& config() const noexcept { return cfg_; }
  void set_eta(double eta) noexcept { cfg_.eta = eta; }
  std::uint64_t steps() const noexcept { return steps_; }
  std::size_t tensor_count() const noexcept { return first_.size(); }

  // Advance the step counter once per batch of tensors updated together.
  void begin_step() { ++steps_; }

  void apply(std::size_t slot, Matrix<T>& tensor, const Matrix<T>& delta) {
    if (slot >= first_.size()) throw ShapeError("adam: tensor slot out of range");
    require_same_shape(tensor, delta, "adam delta");
    require_same_shape(tensor, first_[slot], "adam moment");
    if (steps_ == 0) throw std::logic_error("adam: apply() before begin_step()");
    const T b1 = static_cast<T>(cfg_.beta1), b2 = static_cast<T>(cfg_.beta2);
    const T bias1 = T{1} - static_cast<T>(std::pow(cfg_.beta1, static_cast<double>(steps_)));
    const T bias2 = T{1} - static_cast<T>(std::pow(cfg_.beta2, static_cast<double>(steps_)));
    kernels::adam_ascent<T>(tensor.flat(), delta.flat(), first_[slot].flat(), second_[slot].flat(),
                            static_cast<T>(cfg_.eta), b1, b2, static_cast<T>(cfg_.eps), bias1,
                            bias2);
  }

  // Moment access for checkpointing.
  std::vector<Matrix<T>>& first_moments() noexcept { return first_; }
  std::vector<Matrix<T>>& second_moments() noexcept { return second_; }
  const std::vector<Matrix<T>>& first_moments() const noexcept { return first_; }
  const std::vector<Matrix<T>>& second_moments() const noexcept { return second_; }
  void set_steps(std::uint64_t s) noexcept { steps_ = s; }

 private:
  AdamConfig cfg_{};
  std::vector<Matrix<T>> first_;
  std::vector<Matrix<T>> second_;
  std::uint64_t steps_ = 0;
};

/// target <- tau * source + (1 - tau) * target
template <typename T>
void polyak(Matrix<T>& target, const Matrix<T>& source, double tau) {
  require_same_shape(target, source, "polyak");
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("polyak: tau outside [0,1]");
  if (tau == 1.0) {
    target = source;
    return;
  }
  kernels::lerp<T>(target.flat(), source.flat(), static_cast<T>(tau));
}

/// Decides when a target circuit tracks its source: soft Polyak averaging
/// every step (interval == 0) or a hard copy every `interval` steps.
struct TargetSchedule {
  double tau = 0.005;
  std::uint64_t interval = 0;

  // Effective mixing coefficient for agent step `step` (1-based).
  double coefficient(std::uint64_t step) const noexcept {
    if (interval == 0) return tau;
    return step % interval == 0 ? 1.0 : 0.0;
  }
};

}  // namespace actpc::optim
