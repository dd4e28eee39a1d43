#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "obsv/slp.hpp"

namespace obsv {

/// Appends a reverse (adjoint) sweep for `result` to the builder's tape and returns the
/// operands holding d(result)/d(input) for each requested input slot. The sweep emits at most
/// four instructions per forward instruction, so forward plus adjoint tapes stay within 5L.
inline std::vector<Operand> append_gradient(SlpBuilder& b, Operand result, std::span<const std::size_t> wrt) {
  const std::size_t end = result.kind == Operand::Kind::Tape ? result.index + 1 : 0;
  const std::vector<Instruction> forward(b.program().tape.begin(),
                                         b.program().tape.begin() + static_cast<std::ptrdiff_t>(end));
  std::vector<std::optional<Operand>> tape_adj(end);
  std::vector<std::optional<Operand>> input_adj(b.program().inputs.size());

  auto slot = [&](const Operand& o) -> std::optional<Operand>* {
    switch (o.kind) {
      case Operand::Kind::Input: return &input_adj[o.index];
      case Operand::Kind::Tape: return &tape_adj[o.index];
      case Operand::Kind::Const: break;
    }
    return nullptr;
  };
  auto accumulate = [&](const Operand& target, Operand contribution, bool negate) {
    auto* s = slot(target);
    if (s == nullptr) return;
    if (!*s) {
      *s = negate ? b.neg(contribution) : contribution;
    } else {
      *s = negate ? b.sub(**s, contribution) : b.add(**s, contribution);
    }
  };

  if (auto* s = slot(result)) *s = b.constant(1);

  for (std::size_t k = end; k-- > 0;) {
    if (!tape_adj[k]) continue;
    const Operand bar = *tape_adj[k];
    const Instruction ins = forward[k];
    switch (ins.op) {
      case SlpOp::Add:
        accumulate(ins.lhs, bar, false);
        accumulate(ins.rhs, bar, false);
        break;
      case SlpOp::Sub:
        accumulate(ins.lhs, bar, false);
        accumulate(ins.rhs, bar, true);
        break;
      case SlpOp::Mul:
        if (slot(ins.lhs) != nullptr) accumulate(ins.lhs, b.mul(bar, ins.rhs), false);
        if (slot(ins.rhs) != nullptr) accumulate(ins.rhs, b.mul(bar, ins.lhs), false);
        break;
      case SlpOp::Div: {
        // c = a / b:  a-bar += c-bar / b,  b-bar -= (c-bar / b) * c
        const Operand scaled = b.div(bar, ins.rhs);
        accumulate(ins.lhs, scaled, false);
        if (slot(ins.rhs) != nullptr) accumulate(ins.rhs, b.mul(scaled, Operand::tape(k)), true);
        break;
      }
    }
  }

  std::vector<Operand> out;
  out.reserve(wrt.size());
  for (std::size_t i : wrt) out.push_back(input_adj.at(i).value_or(b.constant(0)));
  return out;
}

/// Returns a program computing every partial derivative of the given scalar result with
/// respect to every input slot. Results are labeled `d<label>/d<input>`.
inline Slp reverse_gradient(const Slp& slp, std::size_t result_index) {
  const LabeledResult target = slp.results.at(result_index);
  SlpBuilder b(slp);
  b.clear_results();
  std::vector<std::size_t> all(slp.inputs.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto partials = append_gradient(b, target.value, all);
  for (std::size_t i = 0; i < all.size(); ++i) b.add_result("d" + target.label + "/d" + slp.inputs[i], partials[i]);
  return std::move(b).build();
}

}  // namespace obsv
