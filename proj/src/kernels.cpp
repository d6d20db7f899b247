#include "actpc/kernels.hpp"

#include <atomic>

namespace actpc::kernels {

namespace {
// Below this many elements the OpenMP fork/join costs more than the loop.
std::atomic<std::size_t> g_threshold{1u << 16};
}  // namespace

std::size_t parallel_threshold() noexcept { return g_threshold.load(std::memory_order_relaxed); }

void set_parallel_threshold(std::size_t elements) noexcept {
  g_threshold.store(elements, std::memory_order_relaxed);
}

}  // namespace actpc::kernels
