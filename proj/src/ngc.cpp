#include "actpc/ngc.hpp"

#include <algorithm>
#include <numeric>

namespace actpc::ngc {

namespace {
constexpr double kStateBound = 1e6;
}

void CircuitConfig::validate() const {
  if (layers.size() < 2) throw std::invalid_argument("circuit needs at least an input and an output layer");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].size < 1) throw std::invalid_argument("layer " + std::to_string(l) + " has size 0");
    if (layers[l].output.kind == OutputKind::scaled_tanh && !(layers[l].output.kappa > 0.0))
      throw std::invalid_argument("scaled_tanh output needs kappa > 0");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0,1]");
  if (leak < 0.0) throw std::invalid_argument("leak must be >= 0");
  if (k_steps < 0) throw std::invalid_argument("k_steps must be >= 0");
  if (!(gamma_e > 0.0 && gamma_e <= 1.0)) throw std::invalid_argument("gamma_e must lie in (0,1]");
  if (use_memory && memory_dim == 0) throw std::invalid_argument("use_memory requires memory_dim > 0");
}

template <typename T>
Circuit<T>::Circuit(CircuitConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const std::size_t L = cfg_.top();
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t below = cfg_.layers[l].size, above = cfg_.layers[l + 1].size;
    params_.weight.emplace_back(below, above);
    params_.feedback.emplace_back(above, below);
    if (cfg_.memory_dim > 0) params_.memory.emplace_back(below, cfg_.memory_dim);
    params_.bias.emplace_back(below, 1);
  }
  z_.resize(L + 1);
  zbar_.resize(L);
  e_.resize(L);
  for (std::size_t l = 0; l <= L; ++l) z_[l].assign(cfg_.layers[l].size, T{0});
  for (std::size_t l = 0; l < L; ++l) {
    zbar_[l].assign(cfg_.layers[l].size, T{0});
    e_[l].assign(cfg_.layers[l].size, T{0});
  }
  mem_.assign(cfg_.memory_dim, T{0});
}

template <typename T>
void Circuit<T>::initialize(std::mt19937_64& rng) {
  const std::size_t L = top();
  for (std::size_t l = 0; l < L; ++l) {
    auto& w = params_.weight[l];
    std::normal_distribution<double> wd(0.0, cfg_.init_scale / std::sqrt(static_cast<double>(w.cols())));
    for (auto& v : w.flat()) v = static_cast<T>(wd(rng));
    if (!params_.memory.empty()) {
      auto& m = params_.memory[l];
      std::normal_distribution<double> md(0.0, cfg_.init_scale / std::sqrt(static_cast<double>(m.cols())));
      for (auto& v : m.flat()) v = static_cast<T>(md(rng));
    }
    params_.bias[l].fill(T{0});
  }
  for (std::size_t l = 0; l < L; ++l) {
    auto& e = params_.feedback[l];
    const auto& w = params_.weight[l];
    const T lam = static_cast<T>(cfg_.lambda_e);
    for (std::size_t r = 0; r < e.rows(); ++r)
      for (std::size_t c = 0; c < e.cols(); ++c) e(r, c) = lam * w(c, r);
  }
}

template <typename T>
void Circuit<T>::set_memory_input(std::span<const T> m) {
  if (m.empty()) {
    std::fill(mem_.begin(), mem_.end(), T{0});
    return;
  }
  require_dim(m.size(), cfg_.memory_dim, "memory vector");
  mem_.assign(m.begin(), m.end());
}

template <typename T>
Vec<T> Circuit<T>::predict_layer(std::size_t l) const {
  if (l >= top()) throw std::out_of_range("predict_layer: layer index must be < L");
  const auto& above = z_[l + 1];
  Vec<T> act(above.size());
  const Activation phi = cfg_.layers[l + 1].activation;
  for (std::size_t i = 0; i < above.size(); ++i) act[i] = activate(phi, above[i]);
  Vec<T> out(cfg_.layers[l].size);
  kernels::gemv<T>(params_.weight[l], act, out);
  if (cfg_.use_memory) kernels::gemv<T>(params_.memory[l], mem_, out, /*accumulate=*/true);
  const auto& b = params_.bias[l];
  const OutputFn& g = cfg_.layers[l].output;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = apply_output(g, out[i] + b.data()[i]);
  return out;
}

template <typename T>
Vec<T> Circuit<T>::predict_layer(std::size_t l, std::span<const T> memory) const {
  if (!cfg_.use_memory) return predict_layer(l);
  Circuit copy = *this;
  copy.set_memory_input(memory);
  return copy.predict_layer(l);
}

template <typename T>
void Circuit<T>::begin(const Clamp<T>& clamp) {
  if (!clamp.top && !clamp.bottom && !clamp.output_error_override)
    throw std::invalid_argument("settle: clamp must supply the input or the output");
  if (clamp.bottom && clamp.output_error_override)
    throw std::invalid_argument("settle: output cannot be clamped and overridden at once");
  const std::size_t L = top();
  if (clamp.top) {
    require_dim(clamp.top->size(), input_dim(), "input clamp");
    z_[L] = *clamp.top;
    top_clamped_ = true;
  } else {
    std::fill(z_[L].begin(), z_[L].end(), T{0});
    top_clamped_ = false;
  }
  for (std::size_t l = L; l-- > 0;) z_[l] = predict_layer(l);
  if (clamp.bottom) {
    require_dim(clamp.bottom->size(), output_dim(), "output clamp");
    z_[0] = *clamp.bottom;
    mode_ = OutputMode::clamped;
  } else if (clamp.output_error_override) {
    require_dim(clamp.output_error_override->size(), output_dim(), "output error override");
    override_ = *clamp.output_error_override;
    mode_ = OutputMode::override;
  } else {
    mode_ = OutputMode::free;
  }
  for (auto& e : e_) std::fill(e.begin(), e.end(), T{0});
}

template <typename T>
void Circuit<T>::set_output_error(std::span<const T> e0) {
  if (mode_ != OutputMode::override) throw std::logic_error("set_output_error: circuit is not in override mode");
  require_dim(e0.size(), output_dim(), "output error override");
  override_.assign(e0.begin(), e0.end());
}

template <typename T>
void Circuit<T>::compute_errors() {
  const std::size_t L = top();
  for (std::size_t l = 0; l < L; ++l) zbar_[l] = predict_layer(l);
  if (mode_ != OutputMode::clamped) z_[0] = zbar_[0];
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t i = 0; i < e_[l].size(); ++i) e_[l][i] = z_[l][i] - zbar_[l][i];
  if (mode_ == OutputMode::override) e_[0] = override_;
}

template <typename T>
void Circuit<T>::check_finite(std::size_t l) {
  for (auto& v : z_[l]) {
    if (!std::isfinite(v))
      throw DivergenceError("numerical divergence in layer " + std::to_string(l) + " during settling", l);
    v = std::clamp(v, static_cast<T>(-kStateBound), static_cast<T>(kStateBound));
  }
}

template <typename T>
void Circuit<T>::settle_step(std::span<const std::size_t> visit_order) {
  const std::size_t L = top();
  std::vector<std::size_t> order;
  if (visit_order.empty()) {
    order.resize(L + 1);
    std::iota(order.begin(), order.end(), std::size_t{0});
  } else {
    order.assign(visit_order.begin(), visit_order.end());
    std::vector<std::size_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
      if (sorted.size() != L + 1 || sorted[i] != i)
        throw std::invalid_argument("settle_step: visit order must be a permutation of 0..L");
  }
  const T beta = static_cast<T>(cfg_.beta), leak = static_cast<T>(cfg_.leak);
  // Every update below reads only errors computed from the pre-step states and
  // the layer's own previous value, which makes the visit order irrelevant.
  for (std::size_t l : order) {
    if (l == 0) {
      if (mode_ != OutputMode::clamped) z_[0] = zbar_[0];
      continue;
    }
    if (l == L && top_clamped_) continue;
    auto& z = z_[l];
    Vec<T> fb(z.size());
    kernels::gemv<T>(params_.feedback[l - 1], e_[l - 1], fb);
    const Activation phi = cfg_.layers[l].activation;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const T own = l < L ? e_[l][i] : T{0};
      z[i] += beta * (-leak * z[i] + fb[i] * activate_deriv(phi, z[i]) - own);
    }
    check_finite(l);
  }
}

template <typename T>
SettleStats<T> Circuit<T>::settle(const Clamp<T>& clamp, std::span<const T> memory) {
  set_memory_input(memory);
  begin(clamp);
  for (int k = 0; k < cfg_.k_steps; ++k) {
    compute_errors();
    settle_step();
  }
  compute_errors();
  return {z_, e_};
}

template <typename T>
Vec<T> Circuit<T>::project(std::span<const T> input, std::span<const T> memory) {
  require_dim(input.size(), input_dim(), "projection input");
  set_memory_input(memory);
  Clamp<T> c;
  c.top = Vec<T>(input.begin(), input.end());
  begin(c);
  compute_errors();
  return z_[0];
}

template <typename T>
Params<T> Circuit<T>::compute_weight_updates() const {
  Params<T> d = params_.zeros_like();
  const std::size_t L = top();
  const T ge = static_cast<T>(cfg_.gamma_e);
  for (std::size_t l = 0; l < L; ++l) {
    const auto& above = z_[l + 1];
    Vec<T> act(above.size());
    const Activation phi = cfg_.layers[l + 1].activation;
    for (std::size_t i = 0; i < above.size(); ++i) act[i] = activate(phi, above[i]);
    kernels::outer_acc<T>(d.weight[l], e_[l], act);
    auto& de = d.feedback[l];
    const auto& dw = d.weight[l];
    for (std::size_t r = 0; r < de.rows(); ++r)
      for (std::size_t c = 0; c < de.cols(); ++c) de(r, c) = ge * dw(c, r);
    if (cfg_.use_memory) kernels::outer_acc<T>(d.memory[l], e_[l], mem_);
    std::copy(e_[l].begin(), e_[l].end(), d.bias[l].data());
  }
  return d;
}

template <typename T>
T Circuit<T>::total_discrepancy() const {
  T sum = T{0};
  for (const auto& e : e_)
    for (T v : e) sum += v * v;
  return T{0.5} * sum;
}

template <typename T>
void Circuit<T>::apply_updates(const Params<T>& deltas, optim::AdaptiveRule<T>& rule) {
  auto src = deltas.pointers();
  if (src.size() != rule.tensor_count()) throw ShapeError("apply_updates: rule/tensor count mismatch");
  rule.begin_step();
  std::size_t slot = 0;
  params_.for_each([&](const std::string&, const char* role, Matrix<T>& m) {
    const std::string r = role;
    const bool skip = (r == "feedback" && cfg_.tied_feedback) || (r == "memory" && !cfg_.use_memory);
    if (!skip) rule.apply(slot, m, *src[slot]);
    ++slot;
  });
  enforce_constraints();
}

template <typename T>
void Circuit<T>::enforce_constraints() {
  const std::size_t L = top();
  for (std::size_t l = 0; l < L; ++l) {
    clip_row_norms(params_.weight[l], cfg_.row_norm_bound);
    if (cfg_.tied_feedback) {
      auto& e = params_.feedback[l];
      const auto& w = params_.weight[l];
      const T lam = static_cast<T>(cfg_.lambda_e);
      for (std::size_t r = 0; r < e.rows(); ++r)
        for (std::size_t c = 0; c < e.cols(); ++c) e(r, c) = lam * w(c, r);
    } else {
      clip_row_norms(params_.feedback[l], cfg_.row_norm_bound);
    }
  }
}

template class Circuit<float>;
template class Circuit<double>;

}  // namespace actpc::ngc
