#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "obsv/compile.hpp"
#include "obsv/expr.hpp"
#include "obsv/gradient.hpp"
#include "obsv/model.hpp"
#include "obsv/parser.hpp"
#include "obsv/prime_field.hpp"
#include "obsv/randomization.hpp"
#include "obsv/slp.hpp"

namespace obsv {

/// Finite group action T_lambda on states and parameters. Symbols not in `map` are fixed.
struct GroupAction {
  std::vector<std::string> lambdas;
  std::vector<std::pair<std::string, Expr>> map;

  [[nodiscard]] const Expr* image(const std::string& symbol) const {
    for (const auto& [s, e] : map) {
      if (s == symbol) return &e;
    }
    return nullptr;
  }
};

/// Group file grammar, sharing the model expression syntax:
///   file  := ("lambdas:" ident ("," ident)* ";")? ("map:" (ident "->" expr ";")*)?
inline GroupAction parse_group(std::string_view text, const Model& model) {
  TokenStream ts(tokenize(text));
  GroupAction g;
  std::set<std::string> model_symbols;
  for (const auto* list : {&model.states, &model.parameters, &model.inputs, &model.outputs}) {
    model_symbols.insert(list->begin(), list->end());
  }
  auto is_in = [](const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
  };

  if (ts.peek().kind == TokenKind::Ident && ts.peek().text == "lambdas" && ts.is_punct(":", 1)) {
    ts.next();
    ts.next();
    while (true) {
      const Token& id = ts.expect_ident();
      if (model_symbols.count(id.text)) TokenStream::fail(id, "group parameter '" + id.text + "' clashes with a model symbol");
      if (is_in(g.lambdas, id.text)) TokenStream::fail(id, "duplicate group parameter '" + id.text + "'");
      g.lambdas.push_back(id.text);
      if (ts.is_punct(",")) {
        ts.next();
        continue;
      }
      ts.expect_punct(";");
      break;
    }
  }
  if (ts.at_end()) return g;
  if (!(ts.peek().kind == TokenKind::Ident && ts.peek().text == "map" && ts.is_punct(":", 1))) {
    TokenStream::fail(ts.peek(), "expected 'map:'" + TokenStream::found(ts.peek()));
  }
  ts.next();
  ts.next();

  while (!ts.at_end()) {
    const Token target = ts.expect_ident();
    const bool is_state = is_in(model.states, target.text);
    if (!is_state && !is_in(model.parameters, target.text)) {
      TokenStream::fail(target, "'" + target.text + "' is not a state or parameter of the model");
    }
    if (g.image(target.text) != nullptr) TokenStream::fail(target, "second image given for '" + target.text + "'");
    ts.expect_punct("->");
    const TokenStream::Resolver resolve = [&](const Token& t) -> Expr {
      if (is_in(g.lambdas, t.text)) return expr::symbol(t.text);
      if (is_in(model.parameters, t.text)) return expr::symbol(t.text);
      if (is_in(model.states, t.text)) {
        if (!is_state) {
          TokenStream::fail(t, "image of parameter '" + target.text + "' depends on state '" + t.text + "'");
        }
        return expr::symbol(t.text);
      }
      if (model_symbols.count(t.text)) {
        TokenStream::fail(t, "'" + t.text + "' is an input or output; actions act on states and parameters only");
      }
      TokenStream::fail(t, "undeclared symbol '" + t.text + "'");
    };
    g.map.emplace_back(target.text, ts.parse_expr(resolve));
    ts.expect_punct(";");
  }
  return g;
}

/// One failed identity at a concrete point.
struct SymmetryWitness {
  std::map<std::string, std::uint64_t> point;  // X, Theta, U and lambda values
  std::string equation;                       // e.g. "output y" or "state x"
  std::uint64_t lhs = 0;
  std::uint64_t rhs = 0;
};

struct SymmetryVerdict {
  bool accepted = true;
  std::size_t trials = 0;
  std::optional<SymmetryWitness> witness;
};

/// Program checking the invariance identities. Inputs: states, parameters, inputs, lambdas.
/// Results come in (lhs, rhs) pairs labeled by equation:
///   identity at lambda = 1 is checked separately; here
///   output j:  G_j(T X, T Theta, U)                     vs  G_j(X, Theta, U)
///   state i:   sum_k dT_{x_i}/dx_k F_k(X, Theta, U)      vs  F_i(T X, T Theta, U)
struct SymmetryProgram {
  Slp slp;
  std::vector<std::string> equations;
  std::vector<std::string> input_names;
};

inline SymmetryProgram build_symmetry_program(const Model& model, const GroupAction& action) {
  std::vector<std::string> names = bundle_input_names(model);
  names.insert(names.end(), action.lambdas.begin(), action.lambdas.end());
  SlpBuilder b(names);
  SymbolOperands direct;
  for (std::size_t i = 0; i < names.size(); ++i) direct.emplace(names[i], Operand::input(i));

  std::unordered_map<const ExprNode*, Operand> memo_direct;
  SymbolOperands transformed = direct;
  for (const auto& [sym, e] : action.map) transformed[sym] = emit_expr(b, e, direct, memo_direct);

  std::unordered_map<const ExprNode*, Operand> memo_t;
  SymbolOperands symbols_t = transformed;
  std::vector<Operand> F, FT, G, GT;
  for (const auto& e : model.state_rhs) F.push_back(emit_expr(b, e, direct, memo_direct));
  for (const auto& e : model.output_rhs) G.push_back(emit_expr(b, e, direct, memo_direct));
  for (const auto& e : model.state_rhs) FT.push_back(emit_expr(b, e, symbols_t, memo_t));
  for (const auto& e : model.output_rhs) GT.push_back(emit_expr(b, e, symbols_t, memo_t));

  SymmetryProgram prog;
  for (std::size_t j = 0; j < model.m(); ++j) {
    b.add_result("lhs", GT[j]);
    b.add_result("rhs", G[j]);
    prog.equations.push_back("output " + model.outputs[j]);
  }
  std::vector<std::size_t> wrt(model.n());
  for (std::size_t k = 0; k < model.n(); ++k) wrt[k] = k;
  for (std::size_t i = 0; i < model.n(); ++i) {
    const auto grad = append_gradient(b, transformed.at(model.states[i]), wrt);
    Operand acc = b.constant(0);
    for (std::size_t k = 0; k < model.n(); ++k) acc = b.add(acc, b.mul(grad[k], F[k]));
    b.add_result("lhs", acc);
    b.add_result("rhs", FT[i]);
    prog.equations.push_back("state " + model.states[i]);
  }
  prog.slp = std::move(b).build();
  prog.input_names = std::move(names);
  return prog;
}

/// Images of every state and parameter under the action at the given point (inputs order of
/// bundle_input_names followed by the lambdas).
inline std::map<std::string, std::uint64_t> apply_action(const Model& model, const GroupAction& action,
                                                         const PrimeField& f, const std::map<std::string, std::uint64_t>& point) {
  std::vector<std::string> names = bundle_input_names(model);
  names.insert(names.end(), action.lambdas.begin(), action.lambdas.end());
  SlpBuilder b(names);
  SymbolOperands direct;
  for (std::size_t i = 0; i < names.size(); ++i) direct.emplace(names[i], Operand::input(i));
  std::unordered_map<const ExprNode*, Operand> memo;
  std::vector<std::string> targets = model.states;
  targets.insert(targets.end(), model.parameters.begin(), model.parameters.end());
  for (const auto& s : targets) {
    const Expr* e = action.image(s);
    b.add_result(s, e ? emit_expr(b, *e, direct, memo) : direct.at(s));
  }
  const Slp slp = std::move(b).build();
  std::vector<std::uint64_t> in;
  for (const auto& n : names) in.push_back(point.at(n));
  const auto out = evaluate(slp, f, std::span<const std::uint64_t>(in));
  std::map<std::string, std::uint64_t> images;
  for (std::size_t i = 0; i < targets.size(); ++i) images[targets[i]] = out[i];
  return images;
}

namespace detail {

/// First failing equation at a point, if any. Throws NonUnitError on a vanishing denominator.
inline std::optional<SymmetryWitness> check_point(const Model& model, const GroupAction& action,
                                                  const SymmetryProgram& prog, const PrimeField& f,
                                                  const std::vector<std::uint64_t>& in) {
  std::map<std::string, std::uint64_t> point;
  for (std::size_t i = 0; i < in.size(); ++i) point[prog.input_names[i]] = in[i];

  auto at_one = point;
  for (const auto& l : action.lambdas) at_one[l] = 1;
  const auto id = apply_action(model, action, f, at_one);
  for (const auto& [sym, value] : id) {
    if (value != point.at(sym)) return SymmetryWitness{point, "identity at lambda = 1 for " + sym, value, point.at(sym)};
  }

  const auto out = evaluate(prog.slp, f, std::span<const std::uint64_t>(in));
  for (std::size_t e = 0; e < prog.equations.size(); ++e) {
    if (out[2 * e] != out[2 * e + 1]) return SymmetryWitness{point, prog.equations[e], out[2 * e], out[2 * e + 1]};
  }
  return std::nullopt;
}

}  // namespace detail

/// Checks the invariance identities at `trials` random points of F_p (lambdas drawn from
/// {2..p-2}). Points where a denominator vanishes are redrawn.
inline SymmetryVerdict verify_symmetry(const Model& model, const GroupAction& action, const PrimeField& f,
                                       std::size_t trials, std::uint64_t seed) {
  if (f.modulus() < 5) throw std::invalid_argument("symmetry verification needs p >= 5");
  const SymmetryProgram prog = build_symmetry_program(model, action);
  SplitRng rng = SplitRng(seed).split(2);
  const std::size_t fixed = model.n() + model.l() + model.r();
  SymmetryVerdict verdict;
  std::size_t misses = 0;
  const std::size_t max_misses = 5 * trials + 5;
  while (verdict.trials < trials) {
    std::vector<std::uint64_t> in;
    for (std::size_t i = 0; i < fixed; ++i) in.push_back(rng.uniform(0, f.modulus() - 1));
    for (std::size_t i = 0; i < action.lambdas.size(); ++i) in.push_back(rng.uniform(2, f.modulus() - 2));
    try {
      auto w = detail::check_point(model, action, prog, f, in);
      ++verdict.trials;
      if (w) {
        verdict.accepted = false;
        verdict.witness = std::move(w);
        return verdict;
      }
    } catch (const NonUnitError&) {
      if (++misses > max_misses) throw DegeneracyError("denominators keep vanishing at random points");
    }
  }
  return verdict;
}

/// Re-evaluates a witness; true when the recorded equation still fails there.
inline bool witness_fails(const Model& model, const GroupAction& action, const PrimeField& f, const SymmetryWitness& w) {
  const SymmetryProgram prog = build_symmetry_program(model, action);
  std::vector<std::uint64_t> in;
  for (const auto& n : prog.input_names) in.push_back(w.point.at(n));
  const auto again = detail::check_point(model, action, prog, f, in);
  return again && again->equation == w.equation && again->lhs != again->rhs;
}

/// Symbols the action moves although a report called them observable.
inline std::vector<std::string> moved_observable(const GroupAction& action, const std::vector<std::string>& observable) {
  std::vector<std::string> out;
  for (const auto& [sym, e] : action.map) {
    const bool fixed = e->kind == ExprKind::Symbol && e->name == sym;
    if (!fixed && std::find(observable.begin(), observable.end(), sym) != observable.end()) out.push_back(sym);
  }
  return out;
}

}  // namespace obsv
