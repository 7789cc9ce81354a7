#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "herogcn/errors.hpp"

namespace herogcn {

// Dense row-major matrix. Every tensor in the library (attributes, weights,
// activations, assignment distributions) is one of these.
template <std::floating_point T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{0})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw ShapeError("matrix data length " + std::to_string(data_.size()) + " does not match shape " +
                       shape_string());
    }
  }
  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw ShapeError("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix zeros_like(const Matrix& m) { return Matrix(m.rows_, m.cols_); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  bool same_shape(const Matrix& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }

  std::string shape_string() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <std::floating_point U>
  Matrix<U> cast() const {
    Matrix<U> out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

namespace parallel {

// 1 means strictly serial execution. Row-partitioned kernels never change the
// per-element reduction order, so results are identical for any thread count.
inline std::atomic<unsigned>& max_threads_slot() {
  static std::atomic<unsigned> slot{std::max(1u, std::thread::hardware_concurrency())};
  return slot;
}

inline void set_max_threads(unsigned n) { max_threads_slot() = std::max(1u, n); }
inline unsigned max_threads() { return max_threads_slot(); }

// Deterministic mode: single-threaded kernels, fixed reduction order.
inline void set_deterministic(bool on) {
  set_max_threads(on ? 1u : std::max(1u, std::thread::hardware_concurrency()));
}

template <class Fn>
void for_rows(std::size_t rows, double flops_per_row, Fn&& fn) {
  constexpr double kMinFlopsPerThread = 2e5;
  const unsigned hw = max_threads();
  const auto by_work = static_cast<std::size_t>(static_cast<double>(rows) * flops_per_row / kMinFlopsPerThread);
  const std::size_t workers = std::min<std::size_t>({hw, rows, std::max<std::size_t>(1, by_work)});
  if (workers <= 1) {
    for (std::size_t r = 0; r < rows; ++r) fn(r);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (rows + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(rows, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t r = lo; r < hi; ++r) fn(r);
    });
  }
  for (std::size_t r = 0; r < std::min(rows, chunk); ++r) fn(r);
}

}  // namespace parallel

namespace kernels {

inline std::string shapes(std::size_t ar, std::size_t ac, std::size_t br, std::size_t bc) {
  return std::to_string(ar) + "x" + std::to_string(ac) + " and " + std::to_string(br) + "x" + std::to_string(bc);
}

// out += a * b
template <class T>
void gemm_acc(Matrix<T>& out, const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows() || out.rows() != a.rows() || out.cols() != b.cols()) {
    throw ShapeError("matmul shape mismatch: " + shapes(a.rows(), a.cols(), b.rows(), b.cols()));
  }
  const std::size_t k = a.cols(), n = b.cols();
  parallel::for_rows(a.rows(), static_cast<double>(k * n), [&](std::size_t i) {
    T* o = out.row(i).data();
    const T* ar = a.row(i).data();
    for (std::size_t p = 0; p < k; ++p) {
      const T av = ar[p];
      if (av == T{0}) continue;  // cheap win for sparse left operands such as the adjacency
      const T* br = b.row(p).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += av * br[j];
    }
  });
}

// out += a * b^T
template <class T>
void gemm_a_bt_acc(Matrix<T>& out, const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.cols() || out.rows() != a.rows() || out.cols() != b.rows()) {
    throw ShapeError("matmul (a*b^T) shape mismatch: " + shapes(a.rows(), a.cols(), b.rows(), b.cols()));
  }
  const std::size_t k = a.cols(), n = b.rows();
  parallel::for_rows(a.rows(), static_cast<double>(k * n), [&](std::size_t i) {
    const T* ar = a.row(i).data();
    T* o = out.row(i).data();
    for (std::size_t j = 0; j < n; ++j) {
      const T* br = b.row(j).data();
      T s{0};
      for (std::size_t p = 0; p < k; ++p) s += ar[p] * br[p];
      o[j] += s;
    }
  });
}

// out += a^T * b
template <class T>
void gemm_at_b_acc(Matrix<T>& out, const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || out.rows() != a.cols() || out.cols() != b.cols()) {
    throw ShapeError("matmul (a^T*b) shape mismatch: " + shapes(a.rows(), a.cols(), b.rows(), b.cols()));
  }
  const std::size_t m = a.rows(), n = b.cols();
  // Parallel over output rows (columns of a); each output row sums over m in fixed order.
  parallel::for_rows(a.cols(), static_cast<double>(m * n), [&](std::size_t i) {
    T* o = out.row(i).data();
    for (std::size_t p = 0; p < m; ++p) {
      const T av = a(p, i);
      if (av == T{0}) continue;
      const T* br = b.row(p).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += av * br[j];
    }
  });
}

template <class T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul shape mismatch: " + shapes(a.rows(), a.cols(), b.rows(), b.cols()));
  }
  Matrix<T> out(a.rows(), b.cols());
  gemm_acc(out, a, b);
  return out;
}

template <class T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

template <class T>
void axpy(Matrix<T>& y, T alpha, const Matrix<T>& x) {
  if (!y.same_shape(x)) throw ShapeError("axpy shape mismatch: " + y.shape_string() + " and " + x.shape_string());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

template <class T>
T frobenius_norm(const Matrix<T>& a) {
  T s{0};
  for (T v : a.data()) s += v * v;
  return std::sqrt(s);
}

template <class T>
T sum(const Matrix<T>& a) {
  T s{0};
  for (T v : a.data()) s += v;
  return s;
}

}  // namespace kernels

}  // namespace herogcn
