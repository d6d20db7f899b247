#pragma once

// Neural generative coding circuit.
//
// Layers are indexed 0..L with layer 0 the output and layer L the input.
// Layer l (l < L) is predicted from layer l+1:
//
//   zbar[l] = g_l( W[l] * phi_{l+1}(z[l+1]) + alpha_m * M[l] * m + b[l] )
//
// so W[l] has shape (H_l, H_{l+1}). The error-feedback matrix E[l] carries
// e[l] up to layer l+1 and has shape (H_{l+1}, H_l).

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "actpc/kernels.hpp"
#include "actpc/optim.hpp"
#include "actpc/tensor.hpp"

namespace actpc::ngc {

enum class Activation { identity, tanh, relu, relu6 };
enum class OutputKind { identity, scaled_tanh };

struct OutputFn {
  OutputKind kind = OutputKind::identity;
  double kappa = 1.0;
};

struct LayerSpec {
  std::size_t size = 1;
  Activation activation = Activation::identity;
  OutputFn output{};
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t layer)
      : std::runtime_error(what), layer_(layer) {}
  std::size_t layer() const noexcept { return layer_; }

 private:
  std::size_t layer_;
};

struct CircuitConfig {
  std::vector<LayerSpec> layers;  // [0] output ... [L] input
  double beta = 0.1;              // state step, 1/tau
  double leak = 0.0;              // leak factor on z
  int k_steps = 15;
  double gamma_e = 0.9;           // error-synapse time scale
  bool tied_feedback = false;     // E = lambda_e * W^T after every update
  double lambda_e = 1.0;
  std::size_t memory_dim = 0;     // 0: no memory synapses allocated
  bool use_memory = false;        // alpha_m
  double row_norm_bound = 1.0;    // <= 0 disables synaptic scaling
  double init_scale = 0.1;

  void validate() const;
  std::size_t top() const { return layers.size() - 1; }
};

enum class OutputMode { free, clamped, override };

template <typename T>
struct Clamp {
  std::optional<Vec<T>> top;
  std::optional<Vec<T>> bottom;
  std::optional<Vec<T>> output_error_override;
};

/// Synaptic tensors of a circuit (also the layout of their deltas).
template <typename T>
struct Params {
  std::vector<Matrix<T>> weight;
  std::vector<Matrix<T>> feedback;
  std::vector<Matrix<T>> memory;  // empty when memory_dim == 0
  std::vector<Matrix<T>> bias;    // column vectors

  // Visits tensors in a fixed order: W*, E*, M*, b*.
  template <typename Fn>
  void for_each(Fn&& fn) {
    for (std::size_t l = 0; l < weight.size(); ++l) fn("W" + std::to_string(l), "weight", weight[l]);
    for (std::size_t l = 0; l < feedback.size(); ++l) fn("E" + std::to_string(l), "feedback", feedback[l]);
    for (std::size_t l = 0; l < memory.size(); ++l) fn("M" + std::to_string(l), "memory", memory[l]);
    for (std::size_t l = 0; l < bias.size(); ++l) fn("b" + std::to_string(l), "bias", bias[l]);
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    const_cast<Params*>(this)->for_each(
        [&](const std::string& n, const char* role, Matrix<T>& m) { fn(n, role, static_cast<const Matrix<T>&>(m)); });
  }

  std::vector<const Matrix<T>*> pointers() const {
    std::vector<const Matrix<T>*> out;
    for_each([&](const std::string&, const char*, const Matrix<T>& m) { out.push_back(&m); });
    return out;
  }

  Params zeros_like() const {
    Params z = *this;
    z.for_each([](const std::string&, const char*, Matrix<T>& m) { m.fill(T{0}); });
    return z;
  }

  // this += scale * other
  void add_scaled(const Params& other, T scale) {
    auto src = other.pointers();
    std::size_t i = 0;
    for_each([&](const std::string& n, const char*, Matrix<T>& m) {
      require_same_shape(m, *src[i], "params add " + n);
      auto d = m.flat();
      auto s = src[i]->flat();
      for (std::size_t k = 0; k < d.size(); ++k) d[k] += scale * s[k];
      ++i;
    });
  }

  bool operator==(const Params&) const = default;
};

template <typename T>
T activate(Activation a, T z) {
  switch (a) {
    case Activation::identity: return z;
    case Activation::tanh: return std::tanh(z);
    case Activation::relu: return z > T{0} ? z : T{0};
    case Activation::relu6: return z > T{0} ? (z < T{6} ? z : T{6}) : T{0};
  }
  return z;
}

// Derivative; relu/relu6 use subgradient 0 at their kinks.
template <typename T>
T activate_deriv(Activation a, T z) {
  switch (a) {
    case Activation::identity: return T{1};
    case Activation::tanh: {
      const T t = std::tanh(z);
      return T{1} - t * t;
    }
    case Activation::relu: return z > T{0} ? T{1} : T{0};
    case Activation::relu6: return (z > T{0} && z < T{6}) ? T{1} : T{0};
  }
  return T{1};
}

template <typename T>
T apply_output(const OutputFn& g, T v) {
  if (g.kind == OutputKind::scaled_tanh) return static_cast<T>(g.kappa) * std::tanh(v);
  return v;
}

/// Latent statistics returned by a settling cycle.
template <typename T>
struct SettleStats {
  std::vector<Vec<T>> states;
  std::vector<Vec<T>> errors;
};

template <typename T>
class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(CircuitConfig cfg);

  const CircuitConfig& config() const noexcept { return cfg_; }
  std::size_t top() const noexcept { return cfg_.top(); }
  std::size_t input_dim() const { return cfg_.layers.back().size; }
  std::size_t output_dim() const { return cfg_.layers.front().size; }

  /// Gaussian synapse init with std init_scale / sqrt(fan_in); E = lambda_e W^T; b = 0.
  void initialize(std::mt19937_64& rng);

  Params<T>& params() noexcept { return params_; }
  const Params<T>& params() const noexcept { return params_; }

  const Vec<T>& state(std::size_t l) const { return z_.at(l); }
  Vec<T>& state(std::size_t l) { return z_.at(l); }
  const Vec<T>& error(std::size_t l) const { return e_.at(l); }
  const Vec<T>& prediction(std::size_t l) const { return zbar_.at(l); }
  const std::vector<Vec<T>>& errors() const noexcept { return e_; }
  const std::vector<Vec<T>>& states() const noexcept { return z_; }
  OutputMode output_mode() const noexcept { return mode_; }

  /// Sets the working-memory vector m used by predictions (empty = zeros).
  void set_memory_input(std::span<const T> m);
  const Vec<T>& memory_input() const noexcept { return mem_; }

  /// Prediction for layer l from the current state of layer l+1. Pure.
  Vec<T> predict_layer(std::size_t l) const;
  Vec<T> predict_layer(std::size_t l, std::span<const T> memory) const;

  /// Places the circuit at the start of a settling cycle: applies the clamp
  /// and initializes unclamped layers by an ancestral pass from the top.
  void begin(const Clamp<T>& clamp);

  /// Replace the output error override (only valid in override mode).
  void set_output_error(std::span<const T> e0);

  /// e[l] = z[l] - zbar[l] for every l < L; in free-output mode z[0] is
  /// first moved onto its prediction.
  void compute_errors();

  /// One Jacobi-style state update of every unclamped layer. The optional
  /// visit order is a permutation of 0..L; results do not depend on it.
  void settle_step(std::span<const std::size_t> visit_order = {});

  /// begin + K x (compute_errors, settle_step) + final compute_errors.
  SettleStats<T> settle(const Clamp<T>& clamp, std::span<const T> memory = {});

  /// Ancestral projection: z[L] = input, z[l] = zbar[l] for l = L-1..0.
  Vec<T> project(std::span<const T> input, std::span<const T> memory = {});

  /// Hebbian deltas from the current states/errors; nothing is applied.
  Params<T> compute_weight_updates() const;

  /// Sum over l < L of 0.5 * ||e[l]||^2.
  T total_discrepancy() const;

  /// Applies deltas through the adaptive rule, then re-ties E (if tied) and
  /// rescales rows whose L2 norm exceeds row_norm_bound.
  void apply_updates(const Params<T>& deltas, optim::AdaptiveRule<T>& rule);

  optim::AdaptiveRule<T> make_rule(const optim::AdamConfig& cfg) const {
    auto ptrs = params_.pointers();
    return optim::AdaptiveRule<T>(cfg, ptrs);
  }

  void enforce_constraints();

 private:
  void check_finite(std::size_t l);

  CircuitConfig cfg_{};
  Params<T> params_;
  std::vector<Vec<T>> z_;
  std::vector<Vec<T>> zbar_;
  std::vector<Vec<T>> e_;
  Vec<T> mem_;
  bool top_clamped_ = true;
  OutputMode mode_ = OutputMode::free;
  Vec<T> override_;
};

/// Rescale every row of `m` whose L2 norm exceeds `bound`.
template <typename T>
void clip_row_norms(Matrix<T>& m, double bound) {
  if (bound <= 0.0) return;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    double sq = 0.0;
    for (T v : row) sq += static_cast<double>(v) * static_cast<double>(v);
    const double n = std::sqrt(sq);
    if (n > bound) {
      const T s = static_cast<T>(bound / n);
      for (T& v : row) v *= s;
    }
  }
}

extern template class Circuit<float>;
extern template class Circuit<double>;

}  // namespace actpc::ngc
