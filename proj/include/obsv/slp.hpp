#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "obsv/bigint.hpp"
#include "obsv/prime_field.hpp"

namespace obsv {

enum class SlpOp : std::uint8_t { Add, Sub, Mul, Div };

inline char op_char(SlpOp op) {
  switch (op) {
    case SlpOp::Add: return '+';
    case SlpOp::Sub: return '-';
    case SlpOp::Mul: return '*';
    case SlpOp::Div: return '/';
  }
  return '?';
}

/// Reference to an input slot, an earlier tape entry, or a pooled integer constant.
struct Operand {
  enum class Kind : std::uint8_t { Input, Tape, Const };
  Kind kind = Kind::Const;
  std::uint32_t index = 0;

  static Operand input(std::size_t i) { return {Kind::Input, static_cast<std::uint32_t>(i)}; }
  static Operand tape(std::size_t i) { return {Kind::Tape, static_cast<std::uint32_t>(i)}; }
  static Operand constant(std::size_t i) { return {Kind::Const, static_cast<std::uint32_t>(i)}; }

  friend bool operator==(const Operand&, const Operand&) = default;
  friend auto operator<=>(const Operand&, const Operand&) = default;
};

struct Instruction {
  SlpOp op;
  Operand lhs;
  Operand rhs;
};

struct LabeledResult {
  std::string label;
  Operand value;
};

/// Thrown when evaluation divides by a non-unit; carries the offending tape index.
class SlpDivisionError : public NonUnitError {
 public:
  SlpDivisionError(std::size_t tape_index, const std::string& what)
      : NonUnitError("division by a non-unit at t" + std::to_string(tape_index) + ": " + what), tape_index_(tape_index) {}
  [[nodiscard]] std::size_t tape_index() const { return tape_index_; }

 private:
  std::size_t tape_index_;
};

/// A straight-line program: operands only reference inputs, constants, or earlier entries.
struct Slp {
  std::vector<std::string> inputs;
  std::vector<Integer> constants;
  std::vector<Instruction> tape;
  std::vector<LabeledResult> results;

  [[nodiscard]] std::size_t length() const { return tape.size(); }

  [[nodiscard]] bool has_division() const {
    for (const auto& ins : tape) {
      if (ins.op == SlpOp::Div) return true;
    }
    return false;
  }

  [[nodiscard]] bool is_acyclic() const {
    auto ok = [&](const Operand& o, std::size_t at) {
      switch (o.kind) {
        case Operand::Kind::Input: return o.index < inputs.size();
        case Operand::Kind::Const: return o.index < constants.size();
        case Operand::Kind::Tape: return o.index < at;
      }
      return false;
    };
    for (std::size_t i = 0; i < tape.size(); ++i) {
      if (!ok(tape[i].lhs, i) || !ok(tape[i].rhs, i)) return false;
    }
    for (const auto& r : results) {
      if (!ok(r.value, tape.size())) return false;
    }
    return true;
  }

  [[nodiscard]] std::optional<std::size_t> find_result(const std::string& label) const {
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (results[i].label == label) return i;
    }
    return std::nullopt;
  }
};

/// Appends instructions to a tape. Constants are pooled; trivial identities with the
/// constants 0 and 1 are folded instead of emitted.
class SlpBuilder {
 public:
  SlpBuilder() = default;
  explicit SlpBuilder(std::vector<std::string> inputs) { slp_.inputs = std::move(inputs); }

  /// Starts from an existing program (tape, constants, and results are kept).
  explicit SlpBuilder(Slp base) : slp_(std::move(base)) {
    for (std::size_t i = 0; i < slp_.constants.size(); ++i) pool_.emplace(slp_.constants[i], i);
  }

  Operand input(std::size_t i) const {
    if (i >= slp_.inputs.size()) throw std::out_of_range("input slot out of range");
    return Operand::input(i);
  }

  std::size_t add_input(std::string name) {
    slp_.inputs.push_back(std::move(name));
    return slp_.inputs.size() - 1;
  }

  Operand constant(const Integer& c) {
    auto [it, inserted] = pool_.try_emplace(c, slp_.constants.size());
    if (inserted) slp_.constants.push_back(c);
    return Operand::constant(it->second);
  }

  [[nodiscard]] std::optional<Integer> constant_value(const Operand& o) const {
    if (o.kind != Operand::Kind::Const) return std::nullopt;
    return slp_.constants[o.index];
  }
  [[nodiscard]] bool is_constant(const Operand& o, int v) const {
    auto c = constant_value(o);
    return c && *c == v;
  }

  Operand add(Operand a, Operand b) {
    if (is_constant(a, 0)) return b;
    if (is_constant(b, 0)) return a;
    return emit(SlpOp::Add, a, b);
  }
  Operand sub(Operand a, Operand b) {
    if (is_constant(b, 0)) return a;
    return emit(SlpOp::Sub, a, b);
  }
  Operand mul(Operand a, Operand b) {
    if (is_constant(a, 0) || is_constant(b, 0)) return constant(0);
    if (is_constant(a, 1)) return b;
    if (is_constant(b, 1)) return a;
    return emit(SlpOp::Mul, a, b);
  }
  Operand div(Operand a, Operand b) {
    if (is_constant(b, 1)) return a;
    return emit(SlpOp::Div, a, b);
  }
  Operand neg(Operand a) { return sub(constant(0), a); }

  /// Raises to a nonnegative power by repeated squaring.
  Operand pow(Operand base, unsigned k) {
    if (k == 0) return constant(1);
    std::optional<Operand> result;
    Operand sq = base;
    while (true) {
      if (k & 1U) result = result ? mul(*result, sq) : sq;
      k >>= 1U;
      if (k == 0) break;
      sq = mul(sq, sq);
    }
    return *result;
  }

  /// Operand translation for a program copied into this builder by `inline_program`.
  struct Inlined {
    std::vector<Operand> inputs;
    std::vector<Operand> constants;
    std::vector<Operand> entries;

    [[nodiscard]] Operand operator()(const Operand& o) const {
      switch (o.kind) {
        case Operand::Kind::Input: return inputs[o.index];
        case Operand::Kind::Const: return constants[o.index];
        case Operand::Kind::Tape: break;
      }
      return entries[o.index];
    }
  };

  /// Copies `other`'s tape, binding its input slots to `input_map`.
  Inlined inline_program(const Slp& other, std::span<const Operand> input_map) {
    if (input_map.size() != other.inputs.size()) throw std::invalid_argument("inline_program: input map size mismatch");
    Inlined map;
    map.inputs.assign(input_map.begin(), input_map.end());
    for (const auto& c : other.constants) map.constants.push_back(constant(c));
    map.entries.reserve(other.tape.size());
    for (const auto& ins : other.tape) {
      const Operand a = map(ins.lhs);
      const Operand b = map(ins.rhs);
      switch (ins.op) {
        case SlpOp::Add: map.entries.push_back(add(a, b)); break;
        case SlpOp::Sub: map.entries.push_back(sub(a, b)); break;
        case SlpOp::Mul: map.entries.push_back(mul(a, b)); break;
        case SlpOp::Div: map.entries.push_back(div(a, b)); break;
      }
    }
    return map;
  }

  void add_result(std::string label, Operand value) { slp_.results.push_back({std::move(label), value}); }
  void clear_results() { slp_.results.clear(); }

  [[nodiscard]] const Slp& program() const { return slp_; }
  [[nodiscard]] std::size_t length() const { return slp_.tape.size(); }
  Slp build() && { return std::move(slp_); }
  [[nodiscard]] Slp build() const& { return slp_; }

 private:
  Operand emit(SlpOp op, Operand a, Operand b) {
    slp_.tape.push_back({op, a, b});
    return Operand::tape(slp_.tape.size() - 1);
  }

  Slp slp_;
  std::map<Integer, std::size_t> pool_;
};

/// Evaluates every tape entry over `ring`; returns the full trace (one value per tape entry).
template <CommutativeRing Ring>
std::vector<typename Ring::value_type> evaluate_trace(const Slp& slp, const Ring& ring,
                                                      std::span<const typename Ring::value_type> inputs,
                                                      std::vector<typename Ring::value_type>* constants_out = nullptr) {
  using V = typename Ring::value_type;
  if (inputs.size() != slp.inputs.size()) {
    throw std::invalid_argument("SLP expects " + std::to_string(slp.inputs.size()) + " inputs, got " +
                                std::to_string(inputs.size()));
  }
  std::vector<V> consts;
  consts.reserve(slp.constants.size());
  for (const auto& c : slp.constants) consts.push_back(ring.from_integer(c));
  std::vector<V> trace;
  trace.reserve(slp.tape.size());
  auto fetch = [&](const Operand& o) -> const V& {
    switch (o.kind) {
      case Operand::Kind::Input: return inputs[o.index];
      case Operand::Kind::Const: return consts[o.index];
      case Operand::Kind::Tape: break;
    }
    return trace[o.index];
  };
  for (std::size_t i = 0; i < slp.tape.size(); ++i) {
    const auto& ins = slp.tape[i];
    const V& a = fetch(ins.lhs);
    const V& b = fetch(ins.rhs);
    switch (ins.op) {
      case SlpOp::Add: trace.push_back(ring.add(a, b)); break;
      case SlpOp::Sub: trace.push_back(ring.sub(a, b)); break;
      case SlpOp::Mul: trace.push_back(ring.mul(a, b)); break;
      case SlpOp::Div:
        try {
          trace.push_back(ring.div(a, b));
        } catch (const NonUnitError& e) {
          throw SlpDivisionError(i, e.what());
        }
        break;
    }
  }
  if (constants_out != nullptr) *constants_out = std::move(consts);
  return trace;
}

/// Evaluates the labeled results, in result order.
template <CommutativeRing Ring>
std::vector<typename Ring::value_type> evaluate(const Slp& slp, const Ring& ring,
                                                std::span<const typename Ring::value_type> inputs) {
  using V = typename Ring::value_type;
  std::vector<V> consts;
  const std::vector<V> trace = evaluate_trace(slp, ring, inputs, &consts);
  std::vector<V> out;
  out.reserve(slp.results.size());
  for (const auto& r : slp.results) {
    switch (r.value.kind) {
      case Operand::Kind::Input: out.push_back(inputs[r.value.index]); break;
      case Operand::Kind::Const: out.push_back(consts[r.value.index]); break;
      case Operand::Kind::Tape: out.push_back(trace[r.value.index]); break;
    }
  }
  return out;
}

inline std::string to_string(const Slp& slp, const Operand& o) {
  switch (o.kind) {
    case Operand::Kind::Input: return slp.inputs[o.index];
    case Operand::Kind::Const: return slp.constants[o.index].str();
    case Operand::Kind::Tape: return "t" + std::to_string(o.index);
  }
  return "?";
}

/// Text dump, one instruction per line: `t<k> = <operand> <op> <operand>`, then results.
inline std::string dump(const Slp& slp) {
  std::string out;
  for (std::size_t i = 0; i < slp.tape.size(); ++i) {
    const auto& ins = slp.tape[i];
    out += "t" + std::to_string(i) + " = " + to_string(slp, ins.lhs) + " " + op_char(ins.op) + " " +
           to_string(slp, ins.rhs) + "\n";
  }
  for (const auto& r : slp.results) out += "# " + r.label + " := " + to_string(slp, r.value) + "\n";
  return out;
}

}  // namespace obsv
