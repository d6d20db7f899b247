#include "actpc/memory.hpp"

#include <cmath>
#include <stdexcept>

#include "actpc/kernels.hpp"

namespace actpc::memory {

WorkingMemory::WorkingMemory(std::size_t input_dim, std::size_t window, std::uint64_t seed, double sigma_scale)
    : q_(input_dim, input_dim), slots_(window > 0 ? window - 1 : 0) {
  if (window == 0) throw std::invalid_argument("working memory window must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma_scale / std::sqrt(static_cast<double>(input_dim)));
  for (auto& v : q_.flat()) v = static_cast<Real>(n(rng));
}

Vec<Real> WorkingMemory::project(std::span<const Real> x) const {
  require_dim(x.size(), q_.cols(), "working memory input");
  Vec<Real> k(q_.rows());
  kernels::gemv<Real>(q_, x, k);
  return k;
}

void WorkingMemory::push(std::span<const Real> x) {
  auto k = project(x);
  if (slots_ == 0) return;
  history_.push_back(std::move(k));
  while (history_.size() > slots_) history_.pop_front();
}

Vec<Real> WorkingMemory::vector() const {
  const std::size_t kd = q_.rows();
  Vec<Real> m(dim(), Real{0});
  const std::size_t offset = slots_ - history_.size();
  for (std::size_t i = 0; i < history_.size(); ++i)
    std::copy(history_[i].begin(), history_[i].end(), m.begin() + (offset + i) * kd);
  return m;
}

Vec<Real> WorkingMemory::advance(std::span<const Real> m, std::span<const Real> x) const {
  require_dim(m.size(), dim(), "working memory vector");
  auto k = project(x);
  if (slots_ == 0) return {};
  const std::size_t kd = q_.rows();
  Vec<Real> out(m.begin() + kd, m.end());
  out.insert(out.end(), k.begin(), k.end());
  return out;
}

void WorkingMemory::set_projection(Matrix<Real> q) {
  if (q.rows() != q.cols()) throw ShapeError("working memory projection must be square");
  q_ = std::move(q);
  history_.clear();
}

void WorkingMemory::set_history(std::deque<Vec<Real>> h) {
  if (h.size() > slots_) throw ShapeError("working memory history longer than window");
  for (const auto& k : h) require_dim(k.size(), q_.rows(), "working memory slot");
  history_ = std::move(h);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be >= 1");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    cursor_ = items_.size() % capacity_;
    return;
  }
  items_[cursor_] = std::move(t);
  cursor_ = (cursor_ + 1) % capacity_;
}

void ReplayBuffer::clear() {
  items_.clear();
  cursor_ = 0;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("replay buffer index");
  if (items_.size() < capacity_) return items_[i];
  return items_[(cursor_ + i) % capacity_];
}

const Transition& ReplayBuffer::sample(std::mt19937_64& rng) const {
  if (items_.empty()) throw std::logic_error("sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  return items_[pick(rng)];
}

void ReplayBuffer::restore(std::vector<Transition> items, std::size_t cursor) {
  if (items.size() > capacity_ || cursor >= capacity_) throw std::invalid_argument("replay buffer restore out of range");
  items_ = std::move(items);
  cursor_ = cursor;
}

std::vector<const Transition*> sample_combined(const ReplayBuffer& buffer, std::size_t batch,
                                               const Transition& current, std::mt19937_64& rng,
                                               const ReplayBuffer* demos, double demo_fraction) {
  if (batch == 0) throw std::invalid_argument("sample_combined: batch must be >= 1");
  std::vector<const Transition*> out;
  out.reserve(batch);
  out.push_back(&current);
  const std::size_t draws = batch - 1;
  std::size_t from_demo = 0;
  if (demos && !demos->empty() && demo_fraction > 0.0)
    from_demo = std::min(draws, static_cast<std::size_t>(std::lround(demo_fraction * static_cast<double>(draws))));
  const std::size_t from_main = draws - from_demo;
  if (from_main > 0 && buffer.empty()) throw std::logic_error("sample_combined: replay buffer is empty");
  for (std::size_t i = 0; i < from_main; ++i) out.push_back(&buffer.sample(rng));
  for (std::size_t i = 0; i < from_demo; ++i) out.push_back(&demos->sample(rng));
  return out;
}

double episode_return(const std::vector<Transition>& episode) {
  double r = 0.0;
  for (const auto& t : episode) r += t.sparse_reward;
  return r;
}

ActorBuffer::ActorBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("actor buffer capacity must be >= 1");
}

bool ActorBuffer::store_episode_filtered(const std::vector<Transition>& episode) {
  if (episode.empty()) throw std::invalid_argument("store_episode_filtered: empty episode");
  const double r = episode_return(episode);
  if (!(r > 0.0 && r >= best_return_)) return false;
  best_return_ = r;
  episodes_.push_back(episode);
  total_ += episode.size();
  // Keep at least the newest episode even if it alone exceeds capacity.
  while (total_ > capacity_ && episodes_.size() > 1) {
    total_ -= episodes_.front().size();
    episodes_.pop_front();
  }
  return true;
}

const Transition& ActorBuffer::sample(std::mt19937_64& rng) const {
  if (total_ == 0) throw std::logic_error("sample from an empty actor buffer");
  std::uniform_int_distribution<std::size_t> pick(0, total_ - 1);
  std::size_t idx = pick(rng);
  for (const auto& ep : episodes_) {
    if (idx < ep.size()) return ep[idx];
    idx -= ep.size();
  }
  return episodes_.back().back();
}

void ActorBuffer::restore(std::deque<std::vector<Transition>> episodes, double best_return) {
  episodes_ = std::move(episodes);
  total_ = 0;
  for (const auto& e : episodes_) total_ += e.size();
  best_return_ = best_return;
}

}  // namespace actpc::memory
