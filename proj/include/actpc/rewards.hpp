#pragma once

#include <span>
#include <vector>

#include "actpc/tensor.hpp"

namespace actpc::rewards {

/// Running maxima used to normalize the two intrinsic signals. Both start at
/// 1 and persist across episodes.
struct RewardState {
  double ep_max = 1.0;
  double in_max = 1.0;
  double alpha_ep = 1.0;
  double alpha_in = 1.0;
};

/// Sum of squared error-neuron activity over all layers.
double squared_error_sum(std::span<const Vec<Real>> errors);

/// Normalized generator surprise in [0, 1]; raises ep_max when exceeded.
double epistemic(RewardState& s, std::span<const Vec<Real>> gen_errors);

/// Negative normalized prior mismatch in [-1, 0]; raises in_max when exceeded.
double instrumental(RewardState& s, std::span<const Vec<Real>> prior_errors);

double combine(const RewardState& s, double r_ep, double r_in);

}  // namespace actpc::rewards
