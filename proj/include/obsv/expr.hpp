#pragma once

#include <memory>
#include <set>
#include <string>
#include <utility>

#include "obsv/bigint.hpp"

namespace obsv {

enum class ExprKind { Constant, Symbol, Neg, Add, Sub, Mul, Div, Pow };

struct ExprNode;

/// Immutable expression DAG; nodes may be shared (auxiliary definitions are inlined by reference).
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind = ExprKind::Constant;
  Integer value;         // Constant: nonnegative literal
  std::string name;      // Symbol
  Expr lhs;              // Neg, binary ops, Pow base
  Expr rhs;              // binary ops
  unsigned exponent = 0; // Pow
};

namespace expr {

inline Expr constant(Integer v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Constant;
  n->value = std::move(v);
  return n;
}

inline Expr symbol(std::string name) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Symbol;
  n->name = std::move(name);
  return n;
}

inline Expr neg(Expr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Neg;
  n->lhs = std::move(a);
  return n;
}

inline Expr binary(ExprKind kind, Expr a, Expr b) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

inline Expr add(Expr a, Expr b) { return binary(ExprKind::Add, std::move(a), std::move(b)); }
inline Expr sub(Expr a, Expr b) { return binary(ExprKind::Sub, std::move(a), std::move(b)); }
inline Expr mul(Expr a, Expr b) { return binary(ExprKind::Mul, std::move(a), std::move(b)); }
inline Expr div(Expr a, Expr b) { return binary(ExprKind::Div, std::move(a), std::move(b)); }

inline Expr pow(Expr base, unsigned k) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Pow;
  n->lhs = std::move(base);
  n->exponent = k;
  return n;
}

}  // namespace expr

inline bool is_binary(ExprKind k) {
  return k == ExprKind::Add || k == ExprKind::Sub || k == ExprKind::Mul || k == ExprKind::Div;
}

inline bool structurally_equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprKind::Constant: return a->value == b->value;
    case ExprKind::Symbol: return a->name == b->name;
    case ExprKind::Neg: return structurally_equal(a->lhs, b->lhs);
    case ExprKind::Pow: return a->exponent == b->exponent && structurally_equal(a->lhs, b->lhs);
    default: return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
  }
}

inline void collect_symbols(const Expr& e, std::set<std::string>& out) {
  switch (e->kind) {
    case ExprKind::Constant: return;
    case ExprKind::Symbol: out.insert(e->name); return;
    case ExprKind::Neg:
    case ExprKind::Pow: collect_symbols(e->lhs, out); return;
    default:
      collect_symbols(e->lhs, out);
      collect_symbols(e->rhs, out);
  }
}

namespace detail {

// Binding strength: sums 1, products 2, unary minus 3, powers 4, atoms 5.
inline int precedence(const Expr& e) {
  switch (e->kind) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Pow: return 4;
    default: return 5;
  }
}

inline std::string wrap(const Expr& e, bool parens);

}  // namespace detail

/// Prints in the model-language grammar; re-parsing yields a structurally equal tree.
inline std::string to_string(const Expr& e) {
  using detail::precedence;
  using detail::wrap;
  switch (e->kind) {
    case ExprKind::Constant: return e->value.str();
    case ExprKind::Symbol: return e->name;
    case ExprKind::Neg: return "-" + wrap(e->lhs, precedence(e->lhs) < 3);
    case ExprKind::Pow: return wrap(e->lhs, precedence(e->lhs) < 5) + "^" + std::to_string(e->exponent);
    case ExprKind::Add:
    case ExprKind::Sub: {
      const char* op = e->kind == ExprKind::Add ? " + " : " - ";
      return wrap(e->lhs, precedence(e->lhs) < 1) + op + wrap(e->rhs, precedence(e->rhs) <= 1);
    }
    case ExprKind::Mul:
    case ExprKind::Div: {
      const char* op = e->kind == ExprKind::Mul ? "*" : "/";
      return wrap(e->lhs, precedence(e->lhs) < 2) + op + wrap(e->rhs, precedence(e->rhs) <= 2);
    }
  }
  return {};
}

inline std::string detail::wrap(const Expr& e, bool parens) {
  return parens ? "(" + to_string(e) + ")" : to_string(e);
}

}  // namespace obsv
