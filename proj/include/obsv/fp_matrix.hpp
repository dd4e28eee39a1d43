#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "obsv/prime_field.hpp"

namespace obsv {

/// Dense row-major matrix of residues.
class FpMatrix {
 public:
  FpMatrix() = default;
  FpMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

  static FpMatrix identity(std::size_t n) {
    FpMatrix id(n, n);
    for (std::size_t i = 0; i < n; ++i) id(i, i) = 1;
    return id;
  }

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }

  std::uint64_t& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  [[nodiscard]] std::uint64_t operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  [[nodiscard]] std::span<const std::uint64_t> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  [[nodiscard]] bool is_zero() const {
    for (auto v : data_) {
      if (v != 0) return false;
    }
    return true;
  }

  /// Copy keeping only the listed columns, in the given order.
  [[nodiscard]] FpMatrix select_columns(std::span<const std::size_t> keep) const {
    FpMatrix out(rows_, keep.size());
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t k = 0; k < keep.size(); ++k) out(i, k) = (*this)(i, keep[k]);
    }
    return out;
  }

  [[nodiscard]] FpMatrix first_rows(std::size_t count) const {
    FpMatrix out(count, cols_);
    std::copy(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(count * cols_), out.data_.begin());
    return out;
  }

  friend bool operator==(const FpMatrix&, const FpMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint64_t> data_;
};

inline FpMatrix multiply(const PrimeField& f, const FpMatrix& a, const FpMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matrix product: inner dimensions differ");
  FpMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const auto aik = a(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) = f.add(c(i, j), f.mul(aik, b(k, j)));
    }
  }
  return c;
}

/// Rank over F_p by Gaussian elimination.
inline std::size_t rank_fp(const PrimeField& f, FpMatrix m) {
  std::size_t rank = 0;
  for (std::size_t col = 0; col < m.cols() && rank < m.rows(); ++col) {
    std::size_t pivot = rank;
    while (pivot < m.rows() && m(pivot, col) == 0) ++pivot;
    if (pivot == m.rows()) continue;
    if (pivot != rank) {
      for (std::size_t j = col; j < m.cols(); ++j) std::swap(m(pivot, j), m(rank, j));
    }
    const auto inv = f.inv(m(rank, col));
    for (std::size_t i = rank + 1; i < m.rows(); ++i) {
      if (m(i, col) == 0) continue;
      const auto factor = f.mul(m(i, col), inv);
      for (std::size_t j = col; j < m.cols(); ++j) m(i, j) = f.sub(m(i, j), f.mul(factor, m(rank, j)));
    }
    ++rank;
  }
  return rank;
}

/// Gauss-Jordan inverse; throws NonUnitError when singular.
inline FpMatrix inverse(const PrimeField& f, FpMatrix m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("inverse of a non-square matrix");
  const std::size_t n = m.rows();
  FpMatrix inv = FpMatrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && m(pivot, col) == 0) ++pivot;
    if (pivot == n) throw NonUnitError("singular matrix over F_" + std::to_string(f.modulus()));
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(m(pivot, j), m(col, j));
        std::swap(inv(pivot, j), inv(col, j));
      }
    }
    const auto scale = f.inv(m(col, col));
    for (std::size_t j = 0; j < n; ++j) {
      m(col, j) = f.mul(m(col, j), scale);
      inv(col, j) = f.mul(inv(col, j), scale);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col || m(i, col) == 0) continue;
      const auto factor = m(i, col);
      for (std::size_t j = 0; j < n; ++j) {
        m(i, j) = f.sub(m(i, j), f.mul(factor, m(col, j)));
        inv(i, j) = f.sub(inv(i, j), f.mul(factor, inv(col, j)));
      }
    }
  }
  return inv;
}

}  // namespace obsv
