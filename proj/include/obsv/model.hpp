#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "obsv/expr.hpp"

namespace obsv {

enum class SymbolKind { State, Parameter, Input, Output };

inline const char* to_string(SymbolKind k) {
  switch (k) {
    case SymbolKind::State: return "state";
    case SymbolKind::Parameter: return "parameter";
    case SymbolKind::Input: return "input";
    case SymbolKind::Output: return "output";
  }
  return "?";
}

struct Symbol {
  std::string name;
  SymbolKind kind;
  friend bool operator==(const Symbol&, const Symbol&) = default;
};

/// A rational state-space system: x' = F(x, theta, u), y = G(x, theta, u), theta' = 0.
struct Model {
  std::string name = "model";
  std::vector<std::string> parameters;
  std::vector<std::string> states;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<Expr> state_rhs;   // aligned with states
  std::vector<Expr> output_rhs;  // aligned with outputs
  std::vector<std::string> warnings;

  [[nodiscard]] std::size_t n() const { return states.size(); }
  [[nodiscard]] std::size_t l() const { return parameters.size(); }
  [[nodiscard]] std::size_t r() const { return inputs.size(); }
  [[nodiscard]] std::size_t m() const { return outputs.size(); }

  /// Jacobian column order: states first, then parameters.
  [[nodiscard]] std::vector<Symbol> unknowns() const {
    std::vector<Symbol> out;
    for (const auto& s : states) out.push_back({s, SymbolKind::State});
    for (const auto& s : parameters) out.push_back({s, SymbolKind::Parameter});
    return out;
  }

  [[nodiscard]] std::optional<SymbolKind> kind_of(const std::string& sym) const {
    auto in = [&](const std::vector<std::string>& v) {
      for (const auto& s : v) {
        if (s == sym) return true;
      }
      return false;
    };
    if (in(states)) return SymbolKind::State;
    if (in(parameters)) return SymbolKind::Parameter;
    if (in(inputs)) return SymbolKind::Input;
    if (in(outputs)) return SymbolKind::Output;
    return std::nullopt;
  }
};

/// Renders the model back to source text (auxiliary definitions appear inlined).
inline std::string to_source(const Model& model) {
  std::string out;
  auto section = [&](const char* label, const std::vector<std::string>& names) {
    if (names.empty()) return;
    out += label;
    out += ' ';
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i != 0) out += ", ";
      out += names[i];
    }
    out += ";\n";
  };
  section("params:", model.parameters);
  section("states:", model.states);
  section("inputs:", model.inputs);
  section("outputs:", model.outputs);
  for (std::size_t i = 0; i < model.n(); ++i) out += "d(" + model.states[i] + ") = " + to_string(model.state_rhs[i]) + ";\n";
  for (std::size_t i = 0; i < model.m(); ++i) out += model.outputs[i] + " = " + to_string(model.output_rhs[i]) + ";\n";
  return out;
}

inline bool structurally_equal(const Model& a, const Model& b) {
  if (a.parameters != b.parameters || a.states != b.states || a.inputs != b.inputs || a.outputs != b.outputs) return false;
  for (std::size_t i = 0; i < a.n(); ++i) {
    if (!structurally_equal(a.state_rhs[i], b.state_rhs[i])) return false;
  }
  for (std::size_t i = 0; i < a.m(); ++i) {
    if (!structurally_equal(a.output_rhs[i], b.output_rhs[i])) return false;
  }
  return true;
}

}  // namespace obsv
