#include "actpc/rewards.hpp"

#include <algorithm>

namespace actpc::rewards {

double squared_error_sum(std::span<const Vec<Real>> errors) {
  double s = 0.0;
  for (const auto& e : errors)
    for (Real v : e) s += static_cast<double>(v) * static_cast<double>(v);
  return s;
}

double epistemic(RewardState& s, std::span<const Vec<Real>> gen_errors) {
  const double raw = squared_error_sum(gen_errors);
  s.ep_max = std::max(s.ep_max, raw);
  return raw / s.ep_max;
}

double instrumental(RewardState& s, std::span<const Vec<Real>> prior_errors) {
  const double raw = squared_error_sum(prior_errors);
  s.in_max = std::max(s.in_max, raw);
  return -raw / s.in_max;
}

double combine(const RewardState& s, double r_ep, double r_in) { return s.alpha_in * r_in + s.alpha_ep * r_ep; }

}  // namespace actpc::rewards
