#pragma once

#include <random>

#include "actpc/ngc.hpp"

namespace actpc::testing {

// Random circuit with `depth` synaptic layers (depth + 1 state layers), up to
// `max_units` units each, weights ~ N(0, weight_std^2), random biases.
// `smooth` restricts hidden activations to identity and tanh.
inline ngc::Circuit<double> random_circuit(std::mt19937_64& rng, std::size_t depth, std::size_t max_units,
                                           bool tied, double beta, double leak, double weight_std = 0.5,
                                           std::size_t memory_dim = 0, bool smooth = false) {
  std::uniform_int_distribution<std::size_t> units(1, max_units);
  std::uniform_int_distribution<int> act(0, smooth ? 1 : 3);
  ngc::CircuitConfig cfg;
  for (std::size_t l = 0; l <= depth; ++l) {
    ngc::LayerSpec s;
    s.size = units(rng);
    s.activation = l == depth ? ngc::Activation::identity : static_cast<ngc::Activation>(act(rng));
    cfg.layers.push_back(s);
  }
  cfg.beta = beta;
  cfg.leak = leak;
  cfg.tied_feedback = tied;
  cfg.memory_dim = memory_dim;
  cfg.use_memory = memory_dim > 0;
  cfg.row_norm_bound = 0.0;
  ngc::Circuit<double> c(cfg);
  std::normal_distribution<double> n(0.0, weight_std);
  for (auto& w : c.params().weight)
    for (auto& v : w.flat()) v = n(rng);
  for (auto& m : c.params().memory)
    for (auto& v : m.flat()) v = n(rng);
  for (auto& b : c.params().bias)
    for (auto& v : b.flat()) v = 0.2 * n(rng);
  c.enforce_constraints();
  if (!tied) {
    for (std::size_t l = 0; l < depth; ++l) c.params().feedback[l] = c.params().weight[l].transposed();
  }
  return c;
}

inline std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double std = 1.0) {
  std::normal_distribution<double> d(0.0, std);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace actpc::testing
