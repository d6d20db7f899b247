#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace actpc::metrics {

/// Raised when R-stability is undefined (the window maximum is not positive).
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Trailing mean; entry i averages the last min(i+1, window) values.
std::vector<double> rolling_mean(std::span<const double> series, std::size_t window);

/// Mean absolute relative error of the last k_e smoothed returns against the
/// maximum raw return in the same window. Smoothing uses a trailing mean of
/// `smoothing` episodes over the whole series.
double r_stability(std::span<const double> series, std::size_t k_e = 100, std::size_t smoothing = 100);

/// Mean of the last min(n, size) values; 0 for an empty series.
double tail_mean(std::span<const double> series, std::size_t n);

}  // namespace actpc::metrics
