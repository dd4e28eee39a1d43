#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "obsv/expr.hpp"
#include "obsv/model.hpp"
#include "obsv/slp.hpp"

namespace obsv {

using SymbolOperands = std::map<std::string, Operand>;

/// Emits `e` onto the builder as written, divisions included.
inline Operand emit_expr(SlpBuilder& b, const Expr& e, const SymbolOperands& symbols,
                         std::unordered_map<const ExprNode*, Operand>& memo) {
  if (auto it = memo.find(e.get()); it != memo.end()) return it->second;
  Operand out;
  switch (e->kind) {
    case ExprKind::Constant: out = b.constant(e->value); break;
    case ExprKind::Symbol: {
      auto it = symbols.find(e->name);
      if (it == symbols.end()) throw std::invalid_argument("no operand bound to symbol '" + e->name + "'");
      out = it->second;
      break;
    }
    case ExprKind::Neg: out = b.neg(emit_expr(b, e->lhs, symbols, memo)); break;
    case ExprKind::Pow: out = b.pow(emit_expr(b, e->lhs, symbols, memo), e->exponent); break;
    case ExprKind::Add: out = b.add(emit_expr(b, e->lhs, symbols, memo), emit_expr(b, e->rhs, symbols, memo)); break;
    case ExprKind::Sub: out = b.sub(emit_expr(b, e->lhs, symbols, memo), emit_expr(b, e->rhs, symbols, memo)); break;
    case ExprKind::Mul: out = b.mul(emit_expr(b, e->lhs, symbols, memo), emit_expr(b, e->rhs, symbols, memo)); break;
    case ExprKind::Div: out = b.div(emit_expr(b, e->lhs, symbols, memo), emit_expr(b, e->rhs, symbols, memo)); break;
  }
  memo.emplace(e.get(), out);
  return out;
}

inline Operand emit_expr(SlpBuilder& b, const Expr& e, const SymbolOperands& symbols) {
  std::unordered_map<const ExprNode*, Operand> memo;
  return emit_expr(b, e, symbols, memo);
}

/// Numerator/denominator operand pair.
struct NumDen {
  Operand num;
  Operand den;
};

namespace detail {

class NumDenEmitter {
 public:
  NumDenEmitter(SlpBuilder& b, const SymbolOperands& symbols) : b_(b), symbols_(symbols) {}

  NumDen operator()(const Expr& e) {
    if (auto it = memo_.find(e.get()); it != memo_.end()) return it->second;
    const NumDen out = emit(e);
    memo_.emplace(e.get(), out);
    return out;
  }

 private:
  NumDen emit(const Expr& e) {
    switch (e->kind) {
      case ExprKind::Constant: return {b_.constant(e->value), one()};
      case ExprKind::Symbol: {
        auto it = symbols_.find(e->name);
        if (it == symbols_.end()) throw std::invalid_argument("no operand bound to symbol '" + e->name + "'");
        return {it->second, one()};
      }
      case ExprKind::Neg: {
        const NumDen a = (*this)(e->lhs);
        if (auto q = folded(a)) return constant(-*q);
        return {b_.neg(a.num), a.den};
      }
      case ExprKind::Pow: {
        const NumDen a = (*this)(e->lhs);
        if (auto q = folded(a)) {
          return constant(Rational(boost::multiprecision::pow(numerator(*q), e->exponent),
                                   boost::multiprecision::pow(denominator(*q), e->exponent)));
        }
        return {b_.pow(a.num, e->exponent), b_.pow(a.den, e->exponent)};
      }
      default: break;
    }
    const NumDen a = (*this)(e->lhs);
    const NumDen c = (*this)(e->rhs);
    const auto qa = folded(a);
    const auto qc = folded(c);
    switch (e->kind) {
      case ExprKind::Add:
      case ExprKind::Sub: {
        const bool plus = e->kind == ExprKind::Add;
        if (qa && qc) return constant(plus ? *qa + *qc : *qa - *qc);
        auto combine = [&](Operand x, Operand y) { return plus ? b_.add(x, y) : b_.sub(x, y); };
        if (a.den == c.den) return {combine(a.num, c.num), a.den};
        return {combine(b_.mul(a.num, c.den), b_.mul(c.num, a.den)), b_.mul(a.den, c.den)};
      }
      case ExprKind::Mul:
        if (qa && qc) return constant(*qa * *qc);
        return {b_.mul(a.num, c.num), b_.mul(a.den, c.den)};
      case ExprKind::Div:
        if (qc && *qc == 0) throw std::domain_error("division by the constant 0");
        if (qa && qc) return constant(*qa / *qc);
        return {b_.mul(a.num, c.den), b_.mul(a.den, c.num)};
      default: break;
    }
    throw std::logic_error("unreachable expression kind");
  }

  Operand one() { return b_.constant(1); }

  std::optional<Rational> folded(const NumDen& x) const {
    auto n = b_.constant_value(x.num);
    auto d = b_.constant_value(x.den);
    if (!n || !d || *d == 0) return std::nullopt;
    return Rational(*n, *d);
  }

  NumDen constant(const Rational& q) { return {b_.constant(numerator(q)), b_.constant(denominator(q))}; }

  SlpBuilder& b_;
  const SymbolOperands& symbols_;
  std::unordered_map<const ExprNode*, NumDen> memo_;
};

}  // namespace detail

/// Division-free program for the numerators and denominators of F and G.
/// Inputs are the states, then the parameters, then the inputs of the model.
struct SlpBundle {
  Slp slp;
  std::size_t n = 0;
  std::size_t l = 0;
  std::size_t r = 0;
  std::size_t m = 0;

  [[nodiscard]] Operand p(std::size_t i) const { return slp.results.at(2 * i).value; }
  [[nodiscard]] Operand q(std::size_t i) const { return slp.results.at(2 * i + 1).value; }
  [[nodiscard]] Operand g_num(std::size_t j) const { return slp.results.at(2 * n + 2 * j).value; }
  [[nodiscard]] Operand g_den(std::size_t j) const { return slp.results.at(2 * n + 2 * j + 1).value; }
};

inline std::vector<std::string> bundle_input_names(const Model& model) {
  std::vector<std::string> names = model.states;
  names.insert(names.end(), model.parameters.begin(), model.parameters.end());
  names.insert(names.end(), model.inputs.begin(), model.inputs.end());
  return names;
}

/// Compiles every right-hand side into numerator/denominator pairs on one division-free tape.
/// Results: p[i], q[i] for each state equation, then num[j], den[j] for each output.
inline SlpBundle compile_numden(const Model& model) {
  SlpBuilder b(bundle_input_names(model));
  SymbolOperands symbols;
  const auto names = bundle_input_names(model);
  for (std::size_t i = 0; i < names.size(); ++i) symbols.emplace(names[i], Operand::input(i));
  detail::NumDenEmitter emit(b, symbols);
  for (std::size_t i = 0; i < model.n(); ++i) {
    const NumDen f = emit(model.state_rhs[i]);
    b.add_result("p[" + model.states[i] + "]", f.num);
    b.add_result("q[" + model.states[i] + "]", f.den);
  }
  for (std::size_t j = 0; j < model.m(); ++j) {
    const NumDen g = emit(model.output_rhs[j]);
    b.add_result("num[" + model.outputs[j] + "]", g.num);
    b.add_result("den[" + model.outputs[j] + "]", g.den);
  }
  return SlpBundle{std::move(b).build(), model.n(), model.l(), model.r(), model.m()};
}

}  // namespace obsv
