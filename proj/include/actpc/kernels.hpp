#pragma once

// Dense inner loops used by circuit settling and synaptic updates.
//
// Every kernel exists twice: `serial::` is the reference loop nest and
// `parallel::` splits the outer loop across OpenMP threads. Each output
// element is accumulated in the same order in both variants, so the two are
// bitwise-identical. The unqualified entry points dispatch on problem size.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "actpc/tensor.hpp"

namespace actpc::kernels {

/// Element count at or above which the dispatching entry points use the
/// OpenMP variants. Zero forces parallel, SIZE_MAX forces serial.
std::size_t parallel_threshold() noexcept;
void set_parallel_threshold(std::size_t elements) noexcept;

namespace serial {

// y = A x  (or y += A x when accumulate is set)
template <typename T>
void gemv(const Matrix<T>& a, std::span<const T> x, std::span<T> y, bool accumulate = false) {
  const std::size_t rows = a.rows(), cols = a.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* ar = a.data() + r * cols;
    T acc = T{0};
    for (std::size_t c = 0; c < cols; ++c) acc += ar[c] * x[c];
    y[r] = accumulate ? y[r] + acc : acc;
  }
}

// y = A[row_begin:row_begin+y.size(), :] x
template <typename T>
void gemv_rows(const Matrix<T>& a, std::size_t row_begin, std::span<const T> x, std::span<T> y) {
  const std::size_t cols = a.cols();
  for (std::size_t r = 0; r < y.size(); ++r) {
    const T* ar = a.data() + (row_begin + r) * cols;
    T acc = T{0};
    for (std::size_t c = 0; c < cols; ++c) acc += ar[c] * x[c];
    y[r] = acc;
  }
}

// D += scale * u v^T
template <typename T>
void outer_acc(Matrix<T>& d, std::span<const T> u, std::span<const T> v, T scale) {
  const std::size_t rows = d.rows(), cols = d.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    T* dr = d.data() + r * cols;
    const T ur = scale * u[r];
    for (std::size_t c = 0; c < cols; ++c) dr[c] += ur * v[c];
  }
}

// target = tau * source + (1 - tau) * target
template <typename T>
void lerp(std::span<T> target, std::span<const T> source, T tau) {
  const T keep = T{1} - tau;
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = tau * source[i] + keep * target[i];
}

// One Adam step that ascends along `delta` (gradient estimate is -delta).
template <typename T>
void adam_ascent(std::span<T> param, std::span<const T> delta, std::span<T> m, std::span<T> v,
                 T eta, T beta1, T beta2, T eps, T bias1, T bias2) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    const T g = -delta[i];
    m[i] = beta1 * m[i] + (T{1} - beta1) * g;
    v[i] = beta2 * v[i] + (T{1} - beta2) * g * g;
    const T mhat = m[i] / bias1;
    const T vhat = v[i] / bias2;
    param[i] -= eta * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace serial

namespace parallel {

template <typename T>
void gemv(const Matrix<T>& a, std::span<const T> x, std::span<T> y, bool accumulate = false) {
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(a.rows());
  const std::size_t cols = a.cols();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const T* ar = a.data() + r * cols;
    T acc = T{0};
    for (std::size_t c = 0; c < cols; ++c) acc += ar[c] * x[c];
    y[r] = accumulate ? y[r] + acc : acc;
  }
}

template <typename T>
void gemv_rows(const Matrix<T>& a, std::size_t row_begin, std::span<const T> x, std::span<T> y) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(y.size());
  const std::size_t cols = a.cols();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    const T* ar = a.data() + (row_begin + r) * cols;
    T acc = T{0};
    for (std::size_t c = 0; c < cols; ++c) acc += ar[c] * x[c];
    y[r] = acc;
  }
}

template <typename T>
void outer_acc(Matrix<T>& d, std::span<const T> u, std::span<const T> v, T scale) {
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(d.rows());
  const std::size_t cols = d.cols();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    T* dr = d.data() + r * cols;
    const T ur = scale * u[r];
    for (std::size_t c = 0; c < cols; ++c) dr[c] += ur * v[c];
  }
}

template <typename T>
void lerp(std::span<T> target, std::span<const T> source, T tau) {
  const T keep = T{1} - tau;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(target.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) target[i] = tau * source[i] + keep * target[i];
}

template <typename T>
void adam_ascent(std::span<T> param, std::span<const T> delta, std::span<T> m, std::span<T> v,
                 T eta, T beta1, T beta2, T eps, T bias1, T bias2) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(param.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const T g = -delta[i];
    m[i] = beta1 * m[i] + (T{1} - beta1) * g;
    v[i] = beta2 * v[i] + (T{1} - beta2) * g * g;
    const T mhat = m[i] / bias1;
    const T vhat = v[i] / bias2;
    param[i] -= eta * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace parallel

template <typename T>
void gemv(const Matrix<T>& a, std::span<const T> x, std::span<T> y, bool accumulate = false) {
  require_dim(x.size(), a.cols(), "gemv input");
  require_dim(y.size(), a.rows(), "gemv output");
  if (a.size() >= parallel_threshold())
    parallel::gemv(a, x, y, accumulate);
  else
    serial::gemv(a, x, y, accumulate);
}

template <typename T>
void gemv_rows(const Matrix<T>& a, std::size_t row_begin, std::span<const T> x, std::span<T> y) {
  require_dim(x.size(), a.cols(), "gemv_rows input");
  if (row_begin + y.size() > a.rows()) throw ShapeError("gemv_rows: row range out of bounds");
  if (y.size() * a.cols() >= parallel_threshold())
    parallel::gemv_rows(a, row_begin, x, y);
  else
    serial::gemv_rows(a, row_begin, x, y);
}

template <typename T>
void outer_acc(Matrix<T>& d, std::span<const T> u, std::span<const T> v, T scale = T{1}) {
  require_dim(u.size(), d.rows(), "outer_acc rows");
  require_dim(v.size(), d.cols(), "outer_acc cols");
  if (d.size() >= parallel_threshold())
    parallel::outer_acc(d, u, v, scale);
  else
    serial::outer_acc(d, u, v, scale);
}

template <typename T>
void lerp(std::span<T> target, std::span<const T> source, T tau) {
  require_dim(source.size(), target.size(), "lerp");
  if (target.size() >= parallel_threshold())
    parallel::lerp(target, source, tau);
  else
    serial::lerp(target, source, tau);
}

template <typename T>
void adam_ascent(std::span<T> param, std::span<const T> delta, std::span<T> m, std::span<T> v,
                 T eta, T beta1, T beta2, T eps, T bias1, T bias2) {
  if (param.size() >= parallel_threshold())
    parallel::adam_ascent(param, delta, m, v, eta, beta1, beta2, eps, bias1, bias2);
  else
    serial::adam_ascent(param, delta, m, v, eta, beta1, beta2, eps, bias1, bias2);
}

}  // namespace actpc::kernels
