#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "obsv/fp_matrix.hpp"
#include "obsv/randomization.hpp"
#include "obsv/series.hpp"
#include "obsv/slp.hpp"
#include "obsv/variational.hpp"

namespace obsv {

/// Phi, Gamma = dPhi/dX0, Lambda = dPhi/dTheta as series with `coefficients` terms.
struct VariationalSolution {
  std::vector<TruncSeries> Phi;
  SeriesMatrix Gamma;
  SeriesMatrix Lambda;
  std::size_t coefficients = 0;
  std::size_t newton_steps = 0;  // 0 for the recurrence path
};

enum class SolverKind { Newton, Recurrence };

inline const char* to_string(SolverKind k) { return k == SolverKind::Newton ? "newton" : "recurrence"; }

/// Blocks of the variational system evaluated along a state trajectory.
struct SystemBlocks {
  std::vector<TruncSeries> P;      // P_i(Phi', Phi)
  std::vector<TruncSeries> A;      // diagonal of dP/dXdot, the q_i
  SeriesMatrix Aprime;             // dP/dX, n x n
  SeriesMatrix B;                  // dP/dTheta, n x l
};

/// Evaluates the system program at order `order`, with xdot taken as the formal derivative of Phi.
inline SystemBlocks evaluate_system(const VariationalSlps& v, const PrimeField& f, const Specialization& s,
                                    const std::vector<TruncSeries>& Phi, std::size_t order) {
  const std::size_t n = v.n;
  const std::size_t l = v.l;
  std::vector<TruncSeries> in;
  in.reserve(2 * n + l + v.r);
  for (std::size_t i = 0; i < n; ++i) in.push_back(derivative(f, Phi[i].truncated(order)));
  for (std::size_t i = 0; i < n; ++i) in.push_back(Phi[i].truncated(order));
  for (std::size_t k = 0; k < l; ++k) in.push_back(TruncSeries::constant(order, s.theta[k]));
  for (std::size_t i = 0; i < v.r; ++i) in.push_back(s.U[i].truncated(order));
  const auto out = evaluate(v.system, SeriesRing{f, order}, std::span<const TruncSeries>(in));
  SystemBlocks b{{}, {}, SeriesMatrix(n, n, order), SeriesMatrix(n, l, order)};
  for (std::size_t i = 0; i < n; ++i) {
    b.P.push_back(out[v.p_index(i)]);
    b.A.push_back(out[v.dxdot_index(i)]);
    for (std::size_t j = 0; j < n; ++j) b.Aprime(i, j) = out[v.dx_index(i, j)];
    for (std::size_t k = 0; k < l; ++k) b.B(i, k) = out[v.dtheta_index(i, k)];
  }
  return b;
}

/// Inverse of diag(a) as a series matrix, computed entrywise.
inline SeriesMatrix diagonal_inverse(const PrimeField& f, const std::vector<TruncSeries>& a, std::size_t order) {
  SeriesMatrix out(a.size(), a.size(), order);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const TruncSeries q = a[i].truncated(order);
    if (q[0] == 0) throw DegeneracyError("denominator of state equation " + std::to_string(i) + " vanishes at t = 0");
    out(i, i) = invert(f, q);
  }
  return out;
}

inline SeriesMatrix diagonal(const std::vector<TruncSeries>& a, std::size_t order) {
  SeriesMatrix out(a.size(), a.size(), order);
  for (std::size_t i = 0; i < a.size(); ++i) out(i, i) = a[i].truncated(order);
  return out;
}

/// Phi by the term-by-term recurrence x_{k+1} = [t^k] F(Phi) / (k+1), with F = -P(0, Phi) / q.
inline std::vector<TruncSeries> solve_phi(const VariationalSlps& v, const PrimeField& f, const Specialization& s,
                                          std::size_t coefficients) {
  if (coefficients == 0) throw std::invalid_argument("need at least one coefficient");
  if (f.modulus() <= coefficients) throw std::domain_error("prime too small for the requested order");
  const std::size_t n = v.n;
  const std::size_t order = coefficients - 1;
  std::vector<TruncSeries> Phi;
  for (std::size_t i = 0; i < n; ++i) Phi.push_back(TruncSeries::constant(order, s.X0[i]));
  for (std::size_t k = 0; k < order; ++k) {
    std::vector<TruncSeries> in;
    for (std::size_t i = 0; i < n; ++i) in.emplace_back(k);
    for (std::size_t i = 0; i < n; ++i) in.push_back(Phi[i].truncated(k));
    for (std::size_t j = 0; j < v.l; ++j) in.push_back(TruncSeries::constant(k, s.theta[j]));
    for (std::size_t i = 0; i < v.r; ++i) in.push_back(s.U[i].truncated(k));
    const auto out = evaluate(v.system, SeriesRing{f, k}, std::span<const TruncSeries>(in));
    const auto inv = f.inv(k + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const TruncSeries& q = out[v.dxdot_index(i)];
      if (q[0] == 0) throw DegeneracyError("denominator of state equation " + std::to_string(i) + " vanishes at t = 0");
      const TruncSeries F = neg(f, mul(f, out[v.p_index(i)], invert(f, q)));
      Phi[i][k + 1] = f.mul(F[k], inv);
    }
  }
  return Phi;
}

/// Fundamental matrix of W' = M W with W(0) = Id, known to `order`, by Newton doubling:
///   Z <- Z + Z (I - W Z),   W <- W - W Int(Z (W' - M W)).
inline SeriesMatrix homogeneous_resolution_from(const PrimeField& f, const SeriesMatrix& M, std::size_t order) {
  const std::size_t n = M.rows();
  const std::size_t target = order + 1;
  SeriesMatrix W = SeriesMatrix::identity(n, 0);
  SeriesMatrix Z = SeriesMatrix::identity(n, 0);
  std::size_t m = 1;
  while (m < target) {
    const std::size_t m2 = std::min(2 * m, target);
    if (m > 1) {
      const SeriesMatrix Wm = W.truncated(m - 1);
      const SeriesMatrix Zm = Z.truncated(m - 1);
      Z = add(f, Zm, mul(f, Zm, sub(f, SeriesMatrix::identity(n, m - 1), mul(f, Wm, Zm))));
    }
    const SeriesMatrix W2 = W.truncated(m2 - 1);
    const SeriesMatrix Z2 = Z.truncated(m2 - 1);
    const SeriesMatrix defect = sub(f, derivative(f, W2), mul(f, M.truncated(m2 - 1), W2));
    W = sub(f, W2, mul(f, W2, integrate(f, mul(f, Z2, defect))));
    m = m2;
  }
  return W.truncated(order);
}

/// W with A W' + A' W = 0 mod t^order and W(0) = Id; A(0) must be invertible.
inline SeriesMatrix homogeneous_resolution(const PrimeField& f, const SeriesMatrix& A, const SeriesMatrix& Aprime,
                                           std::size_t order) {
  const SeriesMatrix Ainv = invert(f, A.truncated(order));
  return homogeneous_resolution_from(f, neg(f, mul(f, Ainv, Aprime.truncated(order))), order);
}

namespace detail {
/// E = -W Int(W^-1 A^-1 R).
inline SeriesMatrix constants_variation_with(const PrimeField& f, const SeriesMatrix& W, const SeriesMatrix& Ainv,
                                             const SeriesMatrix& R, std::size_t order) {
  const SeriesMatrix Wt = W.truncated(order);
  const SeriesMatrix Winv = invert(f, Wt);
  return neg(f, mul(f, Wt, integrate(f, mul(f, Winv, mul(f, Ainv.truncated(order), R.truncated(order))))));
}
}  // namespace detail

/// E with A E' + A' E + R = 0 mod t^order and E(0) = 0, given W from homogeneous_resolution.
inline SeriesMatrix constants_variation(const PrimeField& f, const SeriesMatrix& W, const SeriesMatrix& A,
                                        const SeriesMatrix& R, std::size_t order) {
  return detail::constants_variation_with(f, W, invert(f, A.truncated(order)), R, order);
}

/// Residual blocks [P | A Gamma' + A' Gamma | A Lambda' + A' Lambda + B] at order `order`.
inline SeriesMatrix variational_residual(const PrimeField& f, const SystemBlocks& b, const SeriesMatrix& Gamma,
                                         const SeriesMatrix& Lambda, std::size_t order) {
  const std::size_t n = b.P.size();
  const std::size_t l = b.B.cols();
  const SeriesMatrix A = diagonal(b.A, order);
  const SeriesMatrix Ap = b.Aprime.truncated(order);
  const SeriesMatrix G = Gamma.truncated(order);
  const SeriesMatrix L = Lambda.truncated(order);
  const SeriesMatrix RG = add(f, mul(f, A, derivative(f, G)), mul(f, Ap, G));
  const SeriesMatrix RL = add(f, add(f, mul(f, A, derivative(f, L)), mul(f, Ap, L)), b.B.truncated(order));
  SeriesMatrix R(n, 1 + n + l, order);
  for (std::size_t i = 0; i < n; ++i) {
    R(i, 0) = b.P[i].truncated(order);
    for (std::size_t j = 0; j < n; ++j) R(i, 1 + j) = RG(i, j);
    for (std::size_t k = 0; k < l; ++k) R(i, 1 + n + k) = RL(i, k);
  }
  return R;
}

/// Quadratic Newton iteration on the whole variational system. Precision doubles 1, 2, 4, ... up
/// to `coefficients`; the last resolution is then repeated once at full precision so that Gamma
/// and Lambda, which trail Phi by one step, become exact too.
inline VariationalSolution newton_iterate(const VariationalSlps& v, const PrimeField& f, const Specialization& s,
                                          std::size_t coefficients) {
  if (coefficients == 0) throw std::invalid_argument("need at least one coefficient");
  if (f.modulus() <= coefficients) throw std::domain_error("prime too small for the requested order");
  const std::size_t n = v.n;
  const std::size_t l = v.l;
  VariationalSolution sol;
  sol.coefficients = coefficients;
  for (std::size_t i = 0; i < n; ++i) sol.Phi.push_back(TruncSeries::constant(0, s.X0[i]));
  sol.Gamma = SeriesMatrix::identity(n, 0);
  sol.Lambda = SeriesMatrix(n, l, 0);

  auto step = [&](std::size_t K) {
    const std::size_t order = K - 1;
    for (auto& x : sol.Phi) x = x.truncated(order);
    sol.Gamma = sol.Gamma.truncated(order);
    sol.Lambda = sol.Lambda.truncated(order);
    const SystemBlocks b = evaluate_system(v, f, s, sol.Phi, order);
    const SeriesMatrix Ainv = diagonal_inverse(f, b.A, order);
    const SeriesMatrix M = neg(f, mul(f, Ainv, b.Aprime));
    const SeriesMatrix W = homogeneous_resolution_from(f, M, order);
    const SeriesMatrix R = variational_residual(f, b, sol.Gamma, sol.Lambda, order);
    const SeriesMatrix E = detail::constants_variation_with(f, W, Ainv, R, order);
    for (std::size_t i = 0; i < n; ++i) {
      sol.Phi[i] = add(f, sol.Phi[i], E(i, 0));
      for (std::size_t j = 0; j < n; ++j) sol.Gamma(i, j) = add(f, sol.Gamma(i, j), E(i, 1 + j));
      for (std::size_t k = 0; k < l; ++k) sol.Lambda(i, k) = add(f, sol.Lambda(i, k), E(i, 1 + n + k));
    }
    ++sol.newton_steps;
  };

  std::size_t K = 1;
  while (K < coefficients) {
    K = std::min(2 * K, coefficients);
    step(K);
  }
  step(coefficients);
  return sol;
}

/// Phi by recurrence, then Gamma and Lambda from the linear recurrences
/// Gamma' = M Gamma, Lambda' = M Lambda - A^-1 B with M = -A^-1 A'.
inline VariationalSolution recurrence_solve(const VariationalSlps& v, const PrimeField& f, const Specialization& s,
                                            std::size_t coefficients) {
  const std::size_t n = v.n;
  const std::size_t l = v.l;
  const std::size_t order = coefficients - 1;
  VariationalSolution sol;
  sol.coefficients = coefficients;
  sol.Phi = solve_phi(v, f, s, coefficients);
  const SystemBlocks b = evaluate_system(v, f, s, sol.Phi, order);
  const SeriesMatrix Ainv = diagonal_inverse(f, b.A, order);
  const SeriesMatrix M = neg(f, mul(f, Ainv, b.Aprime));
  sol.Gamma = solve_linear_ode(f, M, FpMatrix::identity(n), order);
  sol.Lambda = solve_linear_ode(f, M, neg(f, mul(f, Ainv, b.B)), FpMatrix(n, l), order);
  return sol;
}

inline VariationalSolution solve_variational(const VariationalSlps& v, const PrimeField& f, const Specialization& s,
                                             std::size_t coefficients, SolverKind kind) {
  return kind == SolverKind::Newton ? newton_iterate(v, f, s, coefficients) : recurrence_solve(v, f, s, coefficients);
}

/// Largest k with every residual block of the variational system zero mod t^k. Only the first
/// coefficients - 1 residual coefficients are determined, so that is the maximum.
inline std::size_t residual_order(const VariationalSlps& v, const PrimeField& f, const Specialization& s,
                                  const VariationalSolution& sol) {
  if (sol.coefficients <= 1) return 0;
  const std::size_t order = sol.coefficients - 1;
  const SystemBlocks b = evaluate_system(v, f, s, sol.Phi, order);
  const SeriesMatrix R = variational_residual(f, b, sol.Gamma, sol.Lambda, order);
  std::size_t k = order;
  for (std::size_t i = 0; i < R.rows(); ++i) {
    for (std::size_t j = 0; j < R.cols(); ++j) k = std::min(k, R(i, j).valuation());
  }
  // Initial conditions are part of the contract.
  for (std::size_t i = 0; i < v.n; ++i) {
    if (sol.Phi[i][0] != s.X0[i]) return 0;
    for (std::size_t j = 0; j < v.n; ++j) {
      if (sol.Gamma(i, j)[0] != (i == j ? 1U : 0U)) return 0;
    }
    for (std::size_t j = 0; j < v.l; ++j) {
      if (sol.Lambda(i, j)[0] != 0) return 0;
    }
  }
  return k;
}

}  // namespace obsv
