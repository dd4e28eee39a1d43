#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "obsv/bigint.hpp"
#include "obsv/expr.hpp"
#include "obsv/prime_field.hpp"

namespace obsv {

/// Sparse multivariate polynomial with integer coefficients over a fixed number of variables.
class Poly {
 public:
  using Monomial = std::vector<std::uint16_t>;
  using Terms = std::map<Monomial, Integer>;

  explicit Poly(std::size_t nvars = 0) : nvars_(nvars) {}

  static Poly constant(std::size_t nvars, const Integer& c) {
    Poly p(nvars);
    if (c != 0) p.terms_.emplace(Monomial(nvars, 0), c);
    return p;
  }

  static Poly variable(std::size_t nvars, std::size_t index) {
    Poly p(nvars);
    Monomial mono(nvars, 0);
    mono.at(index) = 1;
    p.terms_.emplace(std::move(mono), 1);
    return p;
  }

  [[nodiscard]] std::size_t nvars() const { return nvars_; }
  [[nodiscard]] const Terms& terms() const { return terms_; }
  [[nodiscard]] bool is_zero() const { return terms_.empty(); }
  [[nodiscard]] std::size_t term_count() const { return terms_.size(); }

  [[nodiscard]] bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && degree_of(terms_.begin()->first) == 0);
  }
  [[nodiscard]] bool is_one() const { return is_constant() && !terms_.empty() && terms_.begin()->second == 1; }

  [[nodiscard]] std::size_t total_degree() const {
    std::size_t d = 0;
    for (const auto& [mono, c] : terms_) d = std::max(d, degree_of(mono));
    return d;
  }

  /// max ln(|c| + 1) over the coefficients; 0 for the zero polynomial.
  [[nodiscard]] double height() const {
    double h = 0.0;
    for (const auto& [mono, c] : terms_) {
      const Integer a = abs(c) + 1;
      h = std::max(h, log_of(a));
    }
    return h;
  }

  [[nodiscard]] Integer content() const {
    Integer g = 0;
    for (const auto& [mono, c] : terms_) g = gcd(g, abs(c));
    return g;
  }

  [[nodiscard]] Integer leading_coefficient() const { return terms_.empty() ? Integer(0) : terms_.rbegin()->second; }

  Poly& operator+=(const Poly& o) {
    check(o);
    for (const auto& [mono, c] : o.terms_) accumulate(mono, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    check(o);
    for (const auto& [mono, c] : o.terms_) accumulate(mono, -c);
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator-(Poly a) {
    for (auto& [mono, c] : a.terms_) c = -c;
    return a;
  }

  friend Poly operator*(const Poly& a, const Poly& b) {
    a.check(b);
    Poly out(a.nvars_);
    Monomial mono(a.nvars_);
    for (const auto& [ma, ca] : a.terms_) {
      for (const auto& [mb, cb] : b.terms_) {
        for (std::size_t v = 0; v < a.nvars_; ++v) mono[v] = static_cast<std::uint16_t>(ma[v] + mb[v]);
        out.accumulate(mono, ca * cb);
      }
    }
    return out;
  }

  [[nodiscard]] Poly scaled(const Integer& k) const {
    if (k == 0) return Poly(nvars_);
    Poly out = *this;
    for (auto& [mono, c] : out.terms_) c *= k;
    return out;
  }

  /// Divides every coefficient by `k`, which must divide all of them.
  [[nodiscard]] Poly divided_exactly(const Integer& k) const {
    Poly out = *this;
    for (auto& [mono, c] : out.terms_) {
      if (c % k != 0) throw std::logic_error("inexact coefficient division");
      c /= k;
    }
    return out;
  }

  [[nodiscard]] Poly pow(unsigned k) const {
    Poly result = constant(nvars_, 1);
    Poly base = *this;
    while (k != 0) {
      if (k & 1U) result = result * base;
      k >>= 1U;
      if (k != 0) base = base * base;
    }
    return result;
  }

  [[nodiscard]] Poly derivative(std::size_t var) const {
    Poly out(nvars_);
    for (const auto& [mono, c] : terms_) {
      if (mono[var] == 0) continue;
      Monomial m = mono;
      --m[var];
      out.accumulate(m, c * mono[var]);
    }
    return out;
  }

  template <CommutativeRing Ring>
  [[nodiscard]] typename Ring::value_type evaluate(const Ring& ring, std::span<const typename Ring::value_type> point) const {
    if (point.size() != nvars_) throw std::invalid_argument("evaluation point has wrong dimension");
    auto acc = ring.from_integer(0);
    for (const auto& [mono, c] : terms_) {
      auto term = ring.from_integer(c);
      for (std::size_t v = 0; v < nvars_; ++v) {
        for (std::uint16_t e = 0; e < mono[v]; ++e) term = ring.mul(term, point[v]);
      }
      acc = ring.add(acc, term);
    }
    return acc;
  }

  friend bool operator==(const Poly&, const Poly&) = default;

 private:
  static std::size_t degree_of(const Monomial& m) {
    std::size_t d = 0;
    for (auto e : m) d += e;
    return d;
  }

  static double log_of(const Integer& a) {
    // ln(a) for a >= 1 without overflowing a double.
    const std::size_t bits = boost::multiprecision::msb(a) + 1;
    if (bits <= 1000) return std::log(a.convert_to<double>());
    const std::size_t shift = bits - 64;
    const Integer top = a >> shift;
    return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
  }

  void check(const Poly& o) const {
    if (o.nvars_ != nvars_) throw std::invalid_argument("polynomials over different variable sets");
  }

  void accumulate(const Monomial& mono, const Integer& c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(mono, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  std::size_t nvars_;
  Terms terms_;
};

/// Unreduced quotient of integer polynomials; no polynomial gcd is taken.
struct RatFunc {
  Poly num;
  Poly den;

  static RatFunc constant(std::size_t nvars, const Integer& c) { return {Poly::constant(nvars, c), Poly::constant(nvars, 1)}; }
  static RatFunc constant(std::size_t nvars, const Rational& q) {
    return {Poly::constant(nvars, numerator(q)), Poly::constant(nvars, denominator(q))};
  }
  static RatFunc variable(std::size_t nvars, std::size_t index) {
    return {Poly::variable(nvars, index), Poly::constant(nvars, 1)};
  }

  [[nodiscard]] std::size_t nvars() const { return num.nvars(); }

  /// Strips the common integer content and fixes the sign so the denominator's leading term is positive.
  [[nodiscard]] RatFunc normalized() const {
    const Integer g = gcd(num.content(), den.content());
    RatFunc out = *this;
    if (g > 1) out = {num.divided_exactly(g), den.divided_exactly(g)};
    if (out.den.leading_coefficient() < 0) out = {-out.num, -out.den};
    return out;
  }

  friend RatFunc operator+(const RatFunc& a, const RatFunc& b) {
    if (a.den == b.den) return {a.num + b.num, a.den};
    if (b.den.is_one()) return {a.num + b.num * a.den, a.den};
    if (a.den.is_one()) return {a.num * b.den + b.num, b.den};
    return {a.num * b.den + b.num * a.den, a.den * b.den};
  }
  friend RatFunc operator-(const RatFunc& a) { return {-a.num, a.den}; }
  friend RatFunc operator-(const RatFunc& a, const RatFunc& b) { return a + (-b); }
  friend RatFunc operator*(const RatFunc& a, const RatFunc& b) {
    auto times = [](const Poly& x, const Poly& y) { return x.is_one() ? y : (y.is_one() ? x : x * y); };
    return {times(a.num, b.num), times(a.den, b.den)};
  }
  friend RatFunc operator/(const RatFunc& a, const RatFunc& b) {
    if (b.num.is_zero()) throw NonUnitError("rational function division by zero");
    return a * RatFunc{b.den, b.num};
  }

  [[nodiscard]] RatFunc pow(unsigned k) const { return {num.pow(k), den.pow(k)}; }

  [[nodiscard]] RatFunc derivative(std::size_t var) const {
    Poly dn = num.derivative(var);
    Poly dd = den.derivative(var);
    if (dd.is_zero()) return {dn, den};
    return {dn * den - num * dd, den * den};
  }

  template <CommutativeRing Ring>
  [[nodiscard]] typename Ring::value_type evaluate(const Ring& ring, std::span<const typename Ring::value_type> point) const {
    return ring.div(num.evaluate(ring, point), den.evaluate(ring, point));
  }
};

/// Rational-function ring over a fixed variable count, for symbolic evaluation of tapes.
struct RatFuncRing {
  using value_type = RatFunc;
  std::size_t nvars;

  [[nodiscard]] RatFunc add(const RatFunc& a, const RatFunc& b) const { return a + b; }
  [[nodiscard]] RatFunc sub(const RatFunc& a, const RatFunc& b) const { return a - b; }
  [[nodiscard]] RatFunc mul(const RatFunc& a, const RatFunc& b) const { return a * b; }
  [[nodiscard]] RatFunc div(const RatFunc& a, const RatFunc& b) const { return a / b; }
  [[nodiscard]] RatFunc from_integer(const Integer& c) const { return RatFunc::constant(nvars, c); }
};

static_assert(CommutativeRing<RatFuncRing>);

/// Expands an expression into an (unreduced) quotient of integer polynomials.
/// `vars` maps each symbol name to its variable index; unknown names throw.
inline RatFunc to_ratfunc(const Expr& root, const std::map<std::string, std::size_t>& vars, std::size_t nvars) {
  std::unordered_map<const ExprNode*, RatFunc> memo;
  auto go = [&](auto&& self, const Expr& e) -> RatFunc {
    if (auto it = memo.find(e.get()); it != memo.end()) return it->second;
    RatFunc out;
    switch (e->kind) {
      case ExprKind::Constant: out = RatFunc::constant(nvars, e->value); break;
      case ExprKind::Symbol: {
        auto it = vars.find(e->name);
        if (it == vars.end()) throw std::invalid_argument("symbol '" + e->name + "' has no polynomial variable");
        out = RatFunc::variable(nvars, it->second);
        break;
      }
      case ExprKind::Neg: out = -self(self, e->lhs); break;
      case ExprKind::Pow: out = self(self, e->lhs).pow(e->exponent); break;
      case ExprKind::Add: out = self(self, e->lhs) + self(self, e->rhs); break;
      case ExprKind::Sub: out = self(self, e->lhs) - self(self, e->rhs); break;
      case ExprKind::Mul: out = self(self, e->lhs) * self(self, e->rhs); break;
      case ExprKind::Div: out = self(self, e->lhs) / self(self, e->rhs); break;
    }
    memo.emplace(e.get(), out);
    return out;
  };
  return go(go, root);
}

}  // namespace obsv
