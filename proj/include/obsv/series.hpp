#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "obsv/fp_matrix.hpp"
#include "obsv/prime_field.hpp"

namespace obsv {

/// Power series over F_p known modulo t^(order+1).
class TruncSeries {
 public:
  using value_type = std::uint64_t;

  TruncSeries() : c_(1, 0) {}
  explicit TruncSeries(std::size_t order) : c_(order + 1, 0) {}
  explicit TruncSeries(std::vector<value_type> coefficients) : c_(std::move(coefficients)) {
    if (c_.empty()) throw std::invalid_argument("series needs at least one coefficient");
  }

  static TruncSeries constant(std::size_t order, value_type v) {
    TruncSeries s(order);
    s.c_[0] = v;
    return s;
  }

  [[nodiscard]] std::size_t order() const { return c_.size() - 1; }
  [[nodiscard]] std::size_t size() const { return c_.size(); }
  value_type& operator[](std::size_t k) { return c_[k]; }
  [[nodiscard]] value_type operator[](std::size_t k) const { return c_[k]; }
  [[nodiscard]] const std::vector<value_type>& coefficients() const { return c_; }

  [[nodiscard]] bool is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](value_type v) { return v == 0; });
  }

  /// Index of the first nonzero coefficient, or size() for the zero series.
  [[nodiscard]] std::size_t valuation() const {
    std::size_t k = 0;
    while (k < c_.size() && c_[k] == 0) ++k;
    return k;
  }

  /// Same series viewed at another order (drops or zero-pads coefficients).
  [[nodiscard]] TruncSeries truncated(std::size_t order) const {
    TruncSeries out(order);
    std::copy_n(c_.begin(), std::min(c_.size(), order + 1), out.c_.begin());
    return out;
  }

  friend bool operator==(const TruncSeries&, const TruncSeries&) = default;

 private:
  std::vector<value_type> c_;
};

namespace detail {
inline void check_orders(const TruncSeries& a, const TruncSeries& b) {
  if (a.order() != b.order()) {
    throw std::invalid_argument("series orders differ: " + std::to_string(a.order()) + " vs " + std::to_string(b.order()));
  }
}
}  // namespace detail

inline TruncSeries add(const PrimeField& f, const TruncSeries& a, const TruncSeries& b) {
  detail::check_orders(a, b);
  TruncSeries out(a.order());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = f.add(a[k], b[k]);
  return out;
}

inline TruncSeries sub(const PrimeField& f, const TruncSeries& a, const TruncSeries& b) {
  detail::check_orders(a, b);
  TruncSeries out(a.order());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = f.sub(a[k], b[k]);
  return out;
}

inline TruncSeries neg(const PrimeField& f, const TruncSeries& a) {
  TruncSeries out(a.order());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = f.neg(a[k]);
  return out;
}

inline TruncSeries scale(const PrimeField& f, const TruncSeries& a, std::uint64_t s) {
  TruncSeries out(a.order());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = f.mul(a[k], s);
  return out;
}

/// Schoolbook product, truncated at the common order.
inline TruncSeries mul(const PrimeField& f, const TruncSeries& a, const TruncSeries& b) {
  detail::check_orders(a, b);
  const std::size_t n = a.size();
  TruncSeries out(a.order());
  const std::size_t va = a.valuation();
  const std::size_t vb = b.valuation();
  for (std::size_t i = va; i < n; ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = vb; i + j < n; ++j) out[i + j] = f.add(out[i + j], f.mul(a[i], b[j]));
  }
  return out;
}

/// Newton inversion b <- b(2 - ab), doubling the number of correct coefficients each step.
inline TruncSeries invert(const PrimeField& f, const TruncSeries& a) {
  if (a[0] == 0) throw NonUnitError("series with zero constant term is not invertible");
  const std::size_t n = a.size();
  TruncSeries b = TruncSeries::constant(0, f.inv(a[0]));
  std::size_t m = 1;
  while (m < n) {
    m = std::min(2 * m, n);
    const TruncSeries bm = b.truncated(m - 1);
    TruncSeries e = mul(f, a.truncated(m - 1), bm);
    e = neg(f, e);
    e[0] = f.add(e[0], 2 % f.modulus());
    b = mul(f, bm, e);
  }
  return b;
}

/// Antiderivative with zero constant term: t^k -> t^(k+1)/(k+1). The top coefficient falls off.
inline TruncSeries integrate(const PrimeField& f, const TruncSeries& a) {
  if (f.modulus() <= a.size()) throw std::domain_error("prime too small to integrate at this order");
  TruncSeries out(a.order());
  for (std::size_t k = 0; k + 1 < a.size(); ++k) out[k + 1] = f.div(a[k], k + 1);
  return out;
}

/// Formal derivative at the same order; the top coefficient is unknown and set to zero.
inline TruncSeries derivative(const PrimeField& f, const TruncSeries& a) {
  TruncSeries out(a.order());
  for (std::size_t k = 0; k + 1 < a.size(); ++k) out[k] = f.mul(a[k + 1], (k + 1) % f.modulus());
  return out;
}

/// Series over F_p at a fixed order, usable as an SLP evaluation ring.
struct SeriesRing {
  using value_type = TruncSeries;
  PrimeField field;
  std::size_t order;

  [[nodiscard]] TruncSeries add(const TruncSeries& a, const TruncSeries& b) const { return obsv::add(field, a, b); }
  [[nodiscard]] TruncSeries sub(const TruncSeries& a, const TruncSeries& b) const { return obsv::sub(field, a, b); }
  [[nodiscard]] TruncSeries mul(const TruncSeries& a, const TruncSeries& b) const { return obsv::mul(field, a, b); }
  [[nodiscard]] TruncSeries div(const TruncSeries& a, const TruncSeries& b) const {
    return obsv::mul(field, a, invert(field, b));
  }
  [[nodiscard]] TruncSeries from_integer(const Integer& c) const {
    return TruncSeries::constant(order, field.from_integer(c));
  }
};

static_assert(CommutativeRing<SeriesRing>);

/// Matrix of series sharing one order; equivalently a series with matrix coefficients.
class SeriesMatrix {
 public:
  SeriesMatrix() = default;
  SeriesMatrix(std::size_t rows, std::size_t cols, std::size_t order)
      : rows_(rows), cols_(cols), order_(order), e_(rows * cols, TruncSeries(order)) {}

  static SeriesMatrix identity(std::size_t n, std::size_t order) {
    SeriesMatrix out(n, n, order);
    for (std::size_t i = 0; i < n; ++i) out(i, i)[0] = 1;
    return out;
  }

  static SeriesMatrix from_constant(const FpMatrix& c, std::size_t order) {
    SeriesMatrix out(c.rows(), c.cols(), order);
    for (std::size_t i = 0; i < c.rows(); ++i) {
      for (std::size_t j = 0; j < c.cols(); ++j) out(i, j)[0] = c(i, j);
    }
    return out;
  }

  /// Builds from the coefficient view: coefficients[k] is the matrix multiplying t^k.
  static SeriesMatrix from_coefficients(std::span<const FpMatrix> coefficients) {
    if (coefficients.empty()) throw std::invalid_argument("need at least one coefficient matrix");
    const std::size_t rows = coefficients[0].rows();
    const std::size_t cols = coefficients[0].cols();
    SeriesMatrix out(rows, cols, coefficients.size() - 1);
    for (std::size_t k = 0; k < coefficients.size(); ++k) {
      if (coefficients[k].rows() != rows || coefficients[k].cols() != cols) {
        throw std::invalid_argument("coefficient matrices differ in shape");
      }
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) out(i, j)[k] = coefficients[k](i, j);
      }
    }
    return out;
  }

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] std::size_t order() const { return order_; }

  TruncSeries& operator()(std::size_t i, std::size_t j) { return e_[i * cols_ + j]; }
  [[nodiscard]] const TruncSeries& operator()(std::size_t i, std::size_t j) const { return e_[i * cols_ + j]; }

  [[nodiscard]] FpMatrix coefficient(std::size_t k) const {
    FpMatrix out(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) out(i, j) = (*this)(i, j)[k];
    }
    return out;
  }

  [[nodiscard]] std::vector<FpMatrix> coefficients() const {
    std::vector<FpMatrix> out;
    out.reserve(order_ + 1);
    for (std::size_t k = 0; k <= order_; ++k) out.push_back(coefficient(k));
    return out;
  }

  [[nodiscard]] SeriesMatrix truncated(std::size_t order) const {
    SeriesMatrix out(rows_, cols_, order);
    for (std::size_t i = 0; i < e_.size(); ++i) out.e_[i] = e_[i].truncated(order);
    return out;
  }

  /// Columns [first, first + count).
  [[nodiscard]] SeriesMatrix column_block(std::size_t first, std::size_t count) const {
    SeriesMatrix out(rows_, count, order_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < count; ++j) out(i, j) = (*this)(i, first + j);
    }
    return out;
  }

  [[nodiscard]] bool is_zero() const {
    return std::all_of(e_.begin(), e_.end(), [](const TruncSeries& s) { return s.is_zero(); });
  }

  friend bool operator==(const SeriesMatrix&, const SeriesMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t order_ = 0;
  std::vector<TruncSeries> e_;
};

namespace detail {
inline void check_same_shape(const SeriesMatrix& a, const SeriesMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.order() != b.order()) {
    throw std::invalid_argument("series matrices differ in shape or order");
  }
}

template <class Op>
SeriesMatrix entrywise(const SeriesMatrix& a, const SeriesMatrix& b, Op op) {
  check_same_shape(a, b);
  SeriesMatrix out(a.rows(), a.cols(), a.order());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = op(a(i, j), b(i, j));
  }
  return out;
}
}  // namespace detail

inline SeriesMatrix add(const PrimeField& f, const SeriesMatrix& a, const SeriesMatrix& b) {
  return detail::entrywise(a, b, [&](const TruncSeries& x, const TruncSeries& y) { return add(f, x, y); });
}

inline SeriesMatrix sub(const PrimeField& f, const SeriesMatrix& a, const SeriesMatrix& b) {
  return detail::entrywise(a, b, [&](const TruncSeries& x, const TruncSeries& y) { return sub(f, x, y); });
}

inline SeriesMatrix neg(const PrimeField& f, const SeriesMatrix& a) {
  SeriesMatrix out(a.rows(), a.cols(), a.order());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = neg(f, a(i, j));
  }
  return out;
}

/// Classical product: (AB)_k = sum over i+j=k of A_i B_j.
inline SeriesMatrix mul(const PrimeField& f, const SeriesMatrix& a, const SeriesMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("series matrix product: inner dimensions differ");
  if (a.order() != b.order()) throw std::invalid_argument("series matrix product: orders differ");
  const std::size_t n = a.order() + 1;
  SeriesMatrix out(a.rows(), b.cols(), a.order());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const TruncSeries& x = a(i, k);
      const std::size_t vx = x.valuation();
      if (vx == n) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        const TruncSeries& y = b(k, j);
        const std::size_t vy = y.valuation();
        if (vy == n) continue;
        TruncSeries& z = out(i, j);
        for (std::size_t s = vx; s + vy < n; ++s) {
          if (x[s] == 0) continue;
          for (std::size_t t = vy; s + t < n; ++t) z[s + t] = f.add(z[s + t], f.mul(x[s], y[t]));
        }
      }
    }
  }
  return out;
}

/// Newton inversion B <- B + B(I - AB); needs A(0) invertible.
inline SeriesMatrix invert(const PrimeField& f, const SeriesMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("inverse of a non-square series matrix");
  const std::size_t dim = a.rows();
  const std::size_t n = a.order() + 1;
  SeriesMatrix b = SeriesMatrix::from_constant(inverse(f, a.coefficient(0)), 0);
  std::size_t m = 1;
  while (m < n) {
    m = std::min(2 * m, n);
    const SeriesMatrix bm = b.truncated(m - 1);
    const SeriesMatrix defect = sub(f, SeriesMatrix::identity(dim, m - 1), mul(f, a.truncated(m - 1), bm));
    b = add(f, bm, mul(f, bm, defect));
  }
  return b;
}

inline SeriesMatrix integrate(const PrimeField& f, const SeriesMatrix& a) {
  SeriesMatrix out(a.rows(), a.cols(), a.order());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = integrate(f, a(i, j));
  }
  return out;
}

inline SeriesMatrix derivative(const PrimeField& f, const SeriesMatrix& a) {
  SeriesMatrix out(a.rows(), a.cols(), a.order());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = derivative(f, a(i, j));
  }
  return out;
}

/// Solves S' = M S + R with S(0) = W0 by the coefficient recurrence
/// (k+1) S_{k+1} = sum_{i+j=k} M_i S_j + R_k. The result has the requested order, so S' = MS + R
/// holds modulo t^order.
inline SeriesMatrix solve_linear_ode(const PrimeField& f, const SeriesMatrix& M, const SeriesMatrix& R,
                                     const FpMatrix& W0, std::size_t order) {
  const std::size_t n = M.rows();
  if (M.cols() != n || W0.rows() != n || R.rows() != n || R.cols() != W0.cols()) {
    throw std::invalid_argument("solve_linear_ode: shape mismatch");
  }
  if (order > 0 && (M.order() + 1 < order || R.order() + 1 < order)) {
    throw std::invalid_argument("solve_linear_ode: coefficient data too short for the requested order");
  }
  if (f.modulus() <= order) throw std::domain_error("prime too small for the requested order");
  std::vector<FpMatrix> Mk;
  Mk.reserve(order);
  for (std::size_t k = 0; k < order; ++k) Mk.push_back(M.coefficient(k));
  std::vector<FpMatrix> S{W0};
  S.reserve(order + 1);
  for (std::size_t k = 0; k < order; ++k) {
    FpMatrix acc = R.coefficient(k);
    for (std::size_t i = 0; i <= k; ++i) {
      const FpMatrix term = multiply(f, Mk[i], S[k - i]);
      for (std::size_t r = 0; r < acc.rows(); ++r) {
        for (std::size_t c = 0; c < acc.cols(); ++c) acc(r, c) = f.add(acc(r, c), term(r, c));
      }
    }
    const auto inv = f.inv(k + 1);
    for (std::size_t r = 0; r < acc.rows(); ++r) {
      for (std::size_t c = 0; c < acc.cols(); ++c) acc(r, c) = f.mul(acc(r, c), inv);
    }
    S.push_back(std::move(acc));
  }
  return SeriesMatrix::from_coefficients(S);
}

inline SeriesMatrix solve_linear_ode(const PrimeField& f, const SeriesMatrix& M, const FpMatrix& W0, std::size_t order) {
  return solve_linear_ode(f, M, SeriesMatrix(M.rows(), W0.cols(), M.order()), W0, order);
}

}  // namespace obsv
