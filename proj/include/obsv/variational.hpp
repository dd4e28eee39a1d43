#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "obsv/compile.hpp"
#include "obsv/gradient.hpp"
#include "obsv/slp.hpp"

namespace obsv {

/// Programs encoding the variational system and the output jacobian.
///
/// `system` inputs: xdot[n], x[n], theta[l], u[r]. Results, in order:
///   P[i]              = q_i * xdot_i - p_i                         (n)
///   dP/dxdot[i]       = q_i, the diagonal of dP/dXdot               (n)
///   dP/dx[i][j]                                                     (n*n, row-major)
///   dP/dtheta[i][k]                                                 (n*l, row-major)
///
/// `output` inputs: x[n], theta[l], u[r], Gamma[n*n], Lambda[n*l] (row-major). Results:
///   gradY[j][c] = (dG/dX Gamma | dG/dX Lambda + dG/dTheta)[j][c]  (m*(n+l), row-major)
/// The output program divides by the output denominators.
struct VariationalSlps {
  std::size_t n = 0;
  std::size_t l = 0;
  std::size_t r = 0;
  std::size_t m = 0;
  Slp system;
  Slp output;

  [[nodiscard]] std::size_t p_index(std::size_t i) const { return i; }
  [[nodiscard]] std::size_t dxdot_index(std::size_t i) const { return n + i; }
  [[nodiscard]] std::size_t dx_index(std::size_t i, std::size_t j) const { return 2 * n + i * n + j; }
  [[nodiscard]] std::size_t dtheta_index(std::size_t i, std::size_t k) const { return 2 * n + n * n + i * l + k; }
  [[nodiscard]] std::size_t grad_y_index(std::size_t j, std::size_t c) const { return j * (n + l) + c; }
};

inline VariationalSlps build_variational(const SlpBundle& bundle) {
  const std::size_t n = bundle.n;
  const std::size_t l = bundle.l;
  const std::size_t r = bundle.r;
  const std::size_t m = bundle.m;
  VariationalSlps v{n, l, r, m, {}, {}};

  {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("xdot:" + bundle.slp.inputs[i]);
    names.insert(names.end(), bundle.slp.inputs.begin(), bundle.slp.inputs.end());
    SlpBuilder b(std::move(names));
    std::vector<Operand> bind;
    for (std::size_t i = 0; i < bundle.slp.inputs.size(); ++i) bind.push_back(Operand::input(n + i));
    const auto map = b.inline_program(bundle.slp, bind);

    std::vector<Operand> P(n);
    for (std::size_t i = 0; i < n; ++i) {
      P[i] = b.sub(b.mul(map(bundle.q(i)), Operand::input(i)), map(bundle.p(i)));
    }
    std::vector<std::size_t> wrt(2 * n + l);
    std::iota(wrt.begin(), wrt.end(), std::size_t{0});
    std::vector<std::vector<Operand>> grads;
    for (std::size_t i = 0; i < n; ++i) grads.push_back(append_gradient(b, P[i], wrt));

    for (std::size_t i = 0; i < n; ++i) b.add_result("P[" + std::to_string(i) + "]", P[i]);
    for (std::size_t i = 0; i < n; ++i) b.add_result("dP/dxdot[" + std::to_string(i) + "]", grads[i][i]);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        b.add_result("dP/dx[" + std::to_string(i) + "][" + std::to_string(j) + "]", grads[i][n + j]);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < l; ++k) {
        b.add_result("dP/dtheta[" + std::to_string(i) + "][" + std::to_string(k) + "]", grads[i][2 * n + k]);
      }
    }
    v.system = std::move(b).build();
  }

  {
    std::vector<std::string> names = bundle.slp.inputs;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) names.push_back("Gamma[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < l; ++k) names.push_back("Lambda[" + std::to_string(i) + "][" + std::to_string(k) + "]");
    }
    const std::size_t base = bundle.slp.inputs.size();
    auto gamma = [&](std::size_t i, std::size_t j) { return Operand::input(base + i * n + j); };
    auto lambda = [&](std::size_t i, std::size_t k) { return Operand::input(base + n * n + i * l + k); };

    SlpBuilder b(std::move(names));
    std::vector<Operand> bind;
    for (std::size_t i = 0; i < base; ++i) bind.push_back(Operand::input(i));
    const auto map = b.inline_program(bundle.slp, bind);

    std::vector<std::size_t> wrt(n + l);
    std::iota(wrt.begin(), wrt.end(), std::size_t{0});
    for (std::size_t j = 0; j < m; ++j) {
      const Operand g = b.div(map(bundle.g_num(j)), map(bundle.g_den(j)));
      const auto dg = append_gradient(b, g, wrt);
      for (std::size_t c = 0; c < n; ++c) {
        Operand acc = b.constant(0);
        for (std::size_t i = 0; i < n; ++i) acc = b.add(acc, b.mul(dg[i], gamma(i, c)));
        b.add_result("gradY[" + std::to_string(j) + "][" + std::to_string(c) + "]", acc);
      }
      for (std::size_t k = 0; k < l; ++k) {
        Operand acc = dg[n + k];
        for (std::size_t i = 0; i < n; ++i) acc = b.add(acc, b.mul(dg[i], lambda(i, k)));
        b.add_result("gradY[" + std::to_string(j) + "][" + std::to_string(n + k) + "]", acc);
      }
    }
    v.output = std::move(b).build();
  }
  return v;
}

}  // namespace obsv
