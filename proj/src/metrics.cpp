#include "actpc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace actpc::metrics {

std::vector<double> rolling_mean(std::span<const double> series, std::size_t window) {
  if (window == 0) throw std::invalid_argument("rolling_mean: window must be >= 1");
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    // Summed afresh per entry, shifted by the first value so that a constant
    // window averages to exactly that constant.
    const double base = series[lo];
    double s = 0.0;
    for (std::size_t k = lo; k <= i; ++k) s += series[k] - base;
    out[i] = base + s / static_cast<double>(i + 1 - lo);
  }
  return out;
}

double r_stability(std::span<const double> series, std::size_t k_e, std::size_t smoothing) {
  if (k_e == 0) throw std::invalid_argument("r_stability: k_e must be >= 1");
  if (series.size() < k_e)
    throw std::invalid_argument("r_stability: series has " + std::to_string(series.size()) +
                                " values, needs at least k_e = " + std::to_string(k_e));
  const auto smooth = rolling_mean(series, smoothing);
  const std::size_t start = series.size() - k_e;
  const double peak = *std::max_element(series.begin() + static_cast<std::ptrdiff_t>(start), series.end());
  if (!(peak > 0.0)) throw UndefinedMetric("r_stability: window maximum is not positive");
  double s = 0.0;
  for (std::size_t i = start; i < series.size(); ++i) s += std::abs((smooth[i] - peak) / peak);
  return s / static_cast<double>(k_e);
}

double tail_mean(std::span<const double> series, std::size_t n) {
  const std::size_t m = std::min(n, series.size());
  if (m == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = series.size() - m; i < series.size(); ++i) s += series[i];
  return s / static_cast<double>(m);
}

}  // namespace actpc::metrics
