#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "obsv/fp_matrix.hpp"
#include "obsv/model.hpp"
#include "obsv/polynomial.hpp"
#include "obsv/randomization.hpp"

namespace obsv {

inline constexpr std::size_t kMaxLieOrder = 6;

/// Model right-hand sides over the variables X, Theta and u_i^(k) for k = 0..order.
struct LieSystem {
  std::size_t n = 0;
  std::size_t l = 0;
  std::size_t r = 0;
  std::size_t order = 0;
  std::vector<RatFunc> F;
  std::vector<RatFunc> G;

  [[nodiscard]] std::size_t nvars() const { return n + l + r * (order + 1); }
  [[nodiscard]] std::size_t x(std::size_t i) const { return i; }
  [[nodiscard]] std::size_t theta(std::size_t k) const { return n + k; }
  [[nodiscard]] std::size_t u(std::size_t i, std::size_t k) const { return n + l + i * (order + 1) + k; }
};

inline LieSystem lie_system(const Model& model, std::size_t order) {
  LieSystem s{model.n(), model.l(), model.r(), order, {}, {}};
  std::map<std::string, std::size_t> vars;
  for (std::size_t i = 0; i < s.n; ++i) vars.emplace(model.states[i], s.x(i));
  for (std::size_t k = 0; k < s.l; ++k) vars.emplace(model.parameters[k], s.theta(k));
  for (std::size_t i = 0; i < s.r; ++i) vars.emplace(model.inputs[i], s.u(i, 0));
  for (const auto& e : model.state_rhs) s.F.push_back(to_ratfunc(e, vars, s.nvars()).normalized());
  for (const auto& e : model.output_rhs) s.G.push_back(to_ratfunc(e, vars, s.nvars()).normalized());
  return s;
}

/// One application of the Lie derivation sum_i F_i d/dx_i + sum_{i,k} u_i^(k+1) d/du_i^(k).
/// Terms in u_i^(order) are not differentiated further, so the result is exact when `g` involves
/// input derivatives of order below `order`.
inline RatFunc lie_derivative(const LieSystem& s, const RatFunc& g) {
  RatFunc acc = RatFunc::constant(s.nvars(), Integer(0));
  for (std::size_t i = 0; i < s.n; ++i) {
    const RatFunc d = g.derivative(s.x(i));
    if (d.num.is_zero()) continue;
    acc = (acc + d * s.F[i]).normalized();
  }
  for (std::size_t i = 0; i < s.r; ++i) {
    for (std::size_t k = 0; k < s.order; ++k) {
      const RatFunc d = g.derivative(s.u(i, k));
      if (d.num.is_zero()) continue;
      acc = (acc + d * RatFunc::variable(s.nvars(), s.u(i, k + 1))).normalized();
    }
  }
  return acc;
}

/// L^j G symbolically, by repeated differentiation. Exponential in j; j is capped.
inline std::vector<std::vector<RatFunc>> lie_derivatives(const LieSystem& s, std::size_t j) {
  if (j > kMaxLieOrder) throw std::invalid_argument("lie oracle order above " + std::to_string(kMaxLieOrder));
  if (j > s.order) throw std::invalid_argument("lie system built for a lower input derivative order");
  std::vector<std::vector<RatFunc>> out{s.G};
  for (std::size_t k = 1; k <= j; ++k) {
    std::vector<RatFunc> next;
    for (const auto& g : out.back()) next.push_back(lie_derivative(s, g));
    out.push_back(std::move(next));
  }
  return out;
}

inline std::vector<RatFunc> lie_oracle(const Model& model, std::size_t j) {
  if (j > kMaxLieOrder) throw std::invalid_argument("lie oracle order above " + std::to_string(kMaxLieOrder));
  return lie_derivatives(lie_system(model, j), j).back();
}

/// Point for a specialization: X0, theta, and u_i^(k) = k! times the t^k coefficient of U_i.
inline std::vector<std::uint64_t> lie_point(const LieSystem& s, const PrimeField& f, const Specialization& spec) {
  std::vector<std::uint64_t> pt(s.nvars(), 0);
  for (std::size_t i = 0; i < s.n; ++i) pt[s.x(i)] = spec.X0[i];
  for (std::size_t k = 0; k < s.l; ++k) pt[s.theta(k)] = spec.theta[k];
  for (std::size_t i = 0; i < s.r; ++i) {
    std::uint64_t fact = 1;
    for (std::size_t k = 0; k <= s.order; ++k) {
      if (k > 0) fact = f.mul(fact, k);
      pt[s.u(i, k)] = k < spec.U[i].size() ? f.mul(fact, spec.U[i][k]) : 0;
    }
  }
  return pt;
}

/// (1/j!) d(L^j G)/d(X, Theta) at the point, m rows by n + l columns.
inline FpMatrix lie_jacobian_block(const LieSystem& s, const std::vector<RatFunc>& LjG, std::size_t j,
                                   const PrimeField& f, std::span<const std::uint64_t> point) {
  std::uint64_t fact = 1;
  for (std::size_t k = 2; k <= j; ++k) fact = f.mul(fact, k);
  const std::uint64_t scale = f.inv(fact);
  FpMatrix out(LjG.size(), s.n + s.l);
  for (std::size_t o = 0; o < LjG.size(); ++o) {
    for (std::size_t c = 0; c < s.n + s.l; ++c) {
      const RatFunc d = LjG[o].derivative(c);
      out(o, c) = f.mul(scale, d.evaluate(f, point));
    }
  }
  return out;
}

}  // namespace obsv
