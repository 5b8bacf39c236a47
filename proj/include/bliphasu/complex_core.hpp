#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bliphasu/error.hpp"

namespace bliphasu {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;
using RVector = std::vector<double>;

inline bool is_finite(Complex c) noexcept {
  return std::isfinite(c.real()) && std::isfinite(c.imag());
}

inline bool all_finite(std::span<const Complex> v) noexcept {
  for (const auto& c : v) {
    if (!is_finite(c)) return false;
  }
  return true;
}

inline bool all_finite(std::span<const double> v) noexcept {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

/// Dense complex matrix, row-major.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}
  CMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("CMatrix: entry count " + std::to_string(data_.size()) +
                           " does not match " + std::to_string(rows_) + "x" +
                           std::to_string(cols_));
    }
  }
  CMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("CMatrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static CMatrix identity(std::size_t d) {
    CMatrix out(d, d);
    for (std::size_t i = 0; i < d; ++i) out(i, i) = 1.0;
    return out;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<const Complex> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<Complex> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  CVector column(std::size_t c) const {
    CVector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  std::span<const Complex> data() const noexcept { return data_; }
  std::span<Complex> data() noexcept { return data_; }

  friend bool operator==(const CMatrix&, const CMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

namespace detail {

inline void require_same_length(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw DimensionError(std::string(op) + ": length mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

}  // namespace detail

/// u^H v.
inline Complex hermitian_inner(std::span<const Complex> u, std::span<const Complex> v) {
  detail::require_same_length(u.size(), v.size(), "hermitian_inner");
  Complex acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += std::conj(u[i]) * v[i];
  return acc;
}

inline double squared_norm(std::span<const Complex> v) noexcept {
  double acc = 0.0;
  for (const auto& c : v) acc += std::norm(c);
  return acc;
}

inline double norm(std::span<const Complex> v) noexcept { return std::sqrt(squared_norm(v)); }

inline double squared_norm(std::span<const double> v) noexcept {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

inline double norm(std::span<const double> v) noexcept { return std::sqrt(squared_norm(v)); }

inline CVector scaled(std::span<const Complex> v, Complex factor) {
  CVector out(v.begin(), v.end());
  for (auto& c : out) c *= factor;
  return out;
}

inline CVector difference(std::span<const Complex> a, std::span<const Complex> b) {
  detail::require_same_length(a.size(), b.size(), "difference");
  CVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline CVector matvec(const CMatrix& A, std::span<const Complex> v) {
  if (A.cols() != v.size()) {
    throw DimensionError("matvec: matrix has " + std::to_string(A.cols()) +
                         " columns, vector has length " + std::to_string(v.size()));
  }
  CVector out(A.rows());
  for (std::size_t r = 0; r < A.rows(); ++r) {
    Complex acc = 0.0;
    auto row = A.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * v[c];
    out[r] = acc;
  }
  return out;
}

/// First m outputs of the unitary DFT, F[a,b] = n^{-1/2} exp(-2 pi j a b / n).
/// Direct O(m n) evaluation; the twiddle index a*b is reduced mod n before
/// the exponential so large products do not lose phase accuracy.
inline CVector partial_dft(std::span<const Complex> v, std::size_t m) {
  const std::size_t n = v.size();
  if (n == 0) throw DimensionError("partial_dft: empty input");
  if (m == 0 || m > n) {
    throw DimensionError("partial_dft: m=" + std::to_string(m) + " outside [1, " +
                         std::to_string(n) + "]");
  }
  CVector twiddle(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(i) /
                         static_cast<double>(n);
    twiddle[i] = {std::cos(angle), std::sin(angle)};
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  CVector out(m);
  for (std::size_t a = 0; a < m; ++a) {
    Complex acc = 0.0;
    for (std::size_t b = 0; b < n; ++b) acc += twiddle[(a * b) % n] * v[b];
    out[a] = acc * scale;
  }
  return out;
}

inline CVector dft(std::span<const Complex> v) { return partial_dft(v, v.size()); }

/// F_lo A: the partial DFT applied to every column of A.
inline CMatrix partial_dft_columns(const CMatrix& A, std::size_t m) {
  CMatrix out(m, A.cols());
  for (std::size_t c = 0; c < A.cols(); ++c) {
    const CVector col = partial_dft(A.column(c), m);
    for (std::size_t r = 0; r < m; ++r) out(r, c) = col[r];
  }
  return out;
}

/// out[t] = sum_tau x[tau] h[(t - tau) mod n].
inline CVector circular_convolve(std::span<const Complex> x, std::span<const Complex> h) {
  detail::require_same_length(x.size(), h.size(), "circular_convolve");
  const std::size_t n = x.size();
  CVector out(n);
  for (std::size_t t = 0; t < n; ++t) {
    Complex acc = 0.0;
    for (std::size_t tau = 0; tau < n; ++tau) acc += x[tau] * h[(t + n - tau) % n];
    out[t] = acc;
  }
  return out;
}

}  // namespace bliphasu
