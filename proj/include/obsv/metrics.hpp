#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "obsv/compile.hpp"
#include "obsv/model.hpp"
#include "obsv/polynomial.hpp"

namespace obsv {

struct ModelMetrics {
  std::size_t d = 0;  // max total degree of a numerator or denominator
  double h = 0.0;     // max ln(|c| + 1) over their integer coefficients
  std::size_t L = 0;  // length of the division-free program
  std::size_t n = 0;
  std::size_t l = 0;
  std::size_t r = 0;
  std::size_t m = 0;
  std::vector<std::string> warnings;
};

/// Variable indices used when expanding a model's right-hand sides: states, parameters, inputs.
inline std::map<std::string, std::size_t> polynomial_variables(const Model& model) {
  std::map<std::string, std::size_t> vars;
  for (const auto& name : bundle_input_names(model)) vars.emplace(name, vars.size());
  return vars;
}

/// Expanded, content-free numerator/denominator of every f_i then every g_j.
inline std::vector<RatFunc> expanded_right_hand_sides(const Model& model) {
  const auto vars = polynomial_variables(model);
  std::vector<RatFunc> out;
  try {
    for (const auto& e : model.state_rhs) out.push_back(to_ratfunc(e, vars, vars.size()).normalized());
    for (const auto& e : model.output_rhs) out.push_back(to_ratfunc(e, vars, vars.size()).normalized());
  } catch (const NonUnitError&) {
    throw DegeneracyError("a right-hand side divides by an expression that is identically zero");
  }
  return out;
}

inline ModelMetrics measure_metrics(const Model& model) {
  ModelMetrics mm;
  mm.n = model.n();
  mm.l = model.l();
  mm.r = model.r();
  mm.m = model.m();
  for (const auto& f : expanded_right_hand_sides(model)) {
    mm.d = std::max({mm.d, f.num.total_degree(), f.den.total_degree()});
    mm.h = std::max({mm.h, f.num.height(), f.den.height()});
  }
  if (mm.d == 0) {
    mm.d = 1;
    mm.warnings.push_back("all right-hand sides are constant; degree bound clamped to 1");
  }
  mm.L = compile_numden(model).slp.length();
  return mm;
}

}  // namespace obsv
