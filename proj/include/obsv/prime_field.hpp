#pragma once

#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "obsv/bigint.hpp"

namespace obsv {

/// Raised when a ring division hits a non-unit divisor.
class NonUnitError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A model or sample the algorithm cannot work with: a denominator vanishes identically or at
/// every random point tried.
class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t result = 1 % m;
  base %= m;
  while (exp != 0) {
    if (exp & 1U) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1U;
  }
  return result;
}

/// Deterministic Miller-Rabin; the base set is a proven witness set for all n < 2^64.
inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t small : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % small == 0) return n == small;
  }
  std::uint64_t d = n - 1;
  unsigned s = 0;
  while ((d & 1U) == 0) {
    d >>= 1U;
    ++s;
  }
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (unsigned r = 1; r < s; ++r) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

/// Smallest prime strictly greater than `x`.
inline std::uint64_t next_prime_above(std::uint64_t x) {
  std::uint64_t candidate = x + 1;
  while (!is_prime(candidate)) {
    if (candidate == UINT64_MAX) throw std::overflow_error("no 64-bit prime above threshold");
    ++candidate;
  }
  return candidate;
}

/// Arithmetic in Z/pZ for a prime p < 2^63. Elements are canonical residues in [0, p).
class PrimeField {
 public:
  using value_type = std::uint64_t;

  explicit PrimeField(std::uint64_t p) : p_(p) {
    if (p >= (1ULL << 63U)) throw std::invalid_argument("modulus must be below 2^63");
    if (!is_prime(p)) throw std::invalid_argument("modulus " + std::to_string(p) + " is not prime");
  }

  [[nodiscard]] std::uint64_t modulus() const { return p_; }

  [[nodiscard]] value_type zero() const { return 0; }
  [[nodiscard]] value_type one() const { return 1 % p_; }

  [[nodiscard]] value_type add(value_type a, value_type b) const {
    value_type s = a + b;
    return s >= p_ ? s - p_ : s;
  }
  [[nodiscard]] value_type sub(value_type a, value_type b) const { return a >= b ? a - b : a + p_ - b; }
  [[nodiscard]] value_type neg(value_type a) const { return a == 0 ? 0 : p_ - a; }
  [[nodiscard]] value_type mul(value_type a, value_type b) const { return mul_mod(a, b, p_); }
  [[nodiscard]] value_type pow(value_type a, std::uint64_t e) const { return pow_mod(a, e, p_); }

  [[nodiscard]] bool is_unit(value_type a) const { return a != 0; }

  [[nodiscard]] value_type inv(value_type a) const {
    if (a == 0) throw NonUnitError("division by zero in F_" + std::to_string(p_));
    return pow_mod(a, p_ - 2, p_);
  }
  [[nodiscard]] value_type div(value_type a, value_type b) const { return mul(a, inv(b)); }

  [[nodiscard]] value_type from_integer(const Integer& c) const {
    Integer r = c % p_;
    if (r < 0) r += p_;
    return static_cast<value_type>(r);
  }
  [[nodiscard]] value_type from_int(std::int64_t c) const {
    std::int64_t r = c % static_cast<std::int64_t>(p_);
    return static_cast<value_type>(r < 0 ? r + static_cast<std::int64_t>(p_) : r);
  }
  [[nodiscard]] value_type from_rational(const Rational& q) const {
    return div(from_integer(numerator(q)), from_integer(denominator(q)));
  }

  /// Symmetric representative in (-p/2, p/2], handy for printing.
  [[nodiscard]] std::int64_t to_signed(value_type a) const {
    return a > p_ / 2 ? -static_cast<std::int64_t>(p_ - a) : static_cast<std::int64_t>(a);
  }

  friend bool operator==(const PrimeField&, const PrimeField&) = default;

 private:
  std::uint64_t p_;
};

using FieldCtx = PrimeField;

/// Minimal interface the straight-line-program evaluator expects from a coefficient ring.
template <class R>
concept CommutativeRing = requires(const R& ring, const typename R::value_type& a, const Integer& c) {
  typename R::value_type;
  { ring.add(a, a) } -> std::convertible_to<typename R::value_type>;
  { ring.sub(a, a) } -> std::convertible_to<typename R::value_type>;
  { ring.mul(a, a) } -> std::convertible_to<typename R::value_type>;
  { ring.div(a, a) } -> std::convertible_to<typename R::value_type>;
  { ring.from_integer(c) } -> std::convertible_to<typename R::value_type>;
};

/// Z with division restricted to the units +-1.
struct IntegerRing {
  using value_type = Integer;
  [[nodiscard]] Integer add(const Integer& a, const Integer& b) const { return a + b; }
  [[nodiscard]] Integer sub(const Integer& a, const Integer& b) const { return a - b; }
  [[nodiscard]] Integer mul(const Integer& a, const Integer& b) const { return a * b; }
  [[nodiscard]] Integer div(const Integer& a, const Integer& b) const {
    if (b != 1 && b != -1) throw NonUnitError("integer division by a non-unit");
    return a * b;
  }
  [[nodiscard]] Integer from_integer(const Integer& c) const { return c; }
};

struct RationalRing {
  using value_type = Rational;
  [[nodiscard]] Rational add(const Rational& a, const Rational& b) const { return a + b; }
  [[nodiscard]] Rational sub(const Rational& a, const Rational& b) const { return a - b; }
  [[nodiscard]] Rational mul(const Rational& a, const Rational& b) const { return a * b; }
  [[nodiscard]] Rational div(const Rational& a, const Rational& b) const {
    if (b == 0) throw NonUnitError("rational division by zero");
    return a / b;
  }
  [[nodiscard]] Rational from_integer(const Integer& c) const { return Rational(c); }
};

static_assert(CommutativeRing<PrimeField>);
static_assert(CommutativeRing<IntegerRing>);
static_assert(CommutativeRing<RationalRing>);

}  // namespace obsv
