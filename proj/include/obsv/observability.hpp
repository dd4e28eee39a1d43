#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "obsv/compile.hpp"
#include "obsv/fp_matrix.hpp"
#include "obsv/metrics.hpp"
#include "obsv/model.hpp"
#include "obsv/randomization.hpp"
#include "obsv/series.hpp"
#include "obsv/solver.hpp"
#include "obsv/variational.hpp"

namespace obsv {

/// Rows: block j (coefficient of t^j) times output index; columns: states then parameters.
struct JacobianMatrix {
  FpMatrix entries;
  std::size_t outputs = 0;
  std::size_t blocks = 0;
  std::vector<std::string> columns;

  /// Output index and coefficient order of a row.
  [[nodiscard]] std::pair<std::size_t, std::size_t> row_label(std::size_t row) const {
    return {row % outputs, row / outputs};
  }
  [[nodiscard]] JacobianMatrix first_blocks(std::size_t count) const {
    return {entries.first_rows(count * outputs), outputs, count, columns};
  }
};

/// Coefficient series of grad Y = (dG/dX Gamma | dG/dX Lambda + dG/dTheta) along the solution,
/// known to order `order`. Result index j * (n + l) + c.
inline std::vector<TruncSeries> output_gradient_series(const VariationalSlps& v, const PrimeField& f,
                                                       const Specialization& s, const VariationalSolution& sol,
                                                       std::size_t order) {
  const std::size_t n = v.n;
  const std::size_t l = v.l;
  std::vector<TruncSeries> in;
  for (std::size_t i = 0; i < n; ++i) in.push_back(sol.Phi[i].truncated(order));
  for (std::size_t k = 0; k < l; ++k) in.push_back(TruncSeries::constant(order, s.theta[k]));
  for (std::size_t i = 0; i < v.r; ++i) in.push_back(s.U[i].truncated(order));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) in.push_back(sol.Gamma(i, j).truncated(order));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < l; ++k) in.push_back(sol.Lambda(i, k).truncated(order));
  }
  try {
    return evaluate(v.output, SeriesRing{f, order}, std::span<const TruncSeries>(in));
  } catch (const NonUnitError& e) {
    throw DegeneracyError(std::string("output denominator vanishes at t = 0: ") + e.what());
  }
}

/// Row block j holds the t^j coefficients of grad Y, j < nu. Rows are raw series coefficients,
/// i.e. the Lie-derivative rows divided by j!.
inline JacobianMatrix jacobian_from_series(const VariationalSlps& v, const PrimeField& f, const Specialization& s,
                                           const VariationalSolution& sol, std::size_t nu,
                                           std::vector<std::string> columns = {}) {
  if (nu == 0 || nu > sol.coefficients) throw std::invalid_argument("nu must lie in 1..number of solved coefficients");
  const std::size_t cols = v.n + v.l;
  const auto grad = output_gradient_series(v, f, s, sol, nu - 1);
  JacobianMatrix J{FpMatrix(v.m * nu, cols), v.m, nu, std::move(columns)};
  for (std::size_t j = 0; j < nu; ++j) {
    for (std::size_t o = 0; o < v.m; ++o) {
      for (std::size_t c = 0; c < cols; ++c) J.entries(j * v.m + o, c) = grad[v.grad_y_index(o, c)][j];
    }
  }
  return J;
}

/// Rank of the first k row blocks, for k = 1..blocks.
inline std::vector<std::size_t> block_ranks(const PrimeField& f, const JacobianMatrix& J) {
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k <= J.blocks; ++k) out.push_back(rank_fp(f, J.entries.first_rows(k * J.outputs)));
  return out;
}

/// Smallest block count k whose rank equals the rank at k + 1 blocks; the last count if none.
inline std::size_t first_stationary_count(std::span<const std::size_t> ranks) {
  for (std::size_t k = 0; k + 1 < ranks.size(); ++k) {
    if (ranks[k] == ranks[k + 1]) return k + 1;
  }
  return ranks.size();
}

enum class NuRule {
  /// Ranks are inspected where the Newton loop reaches a new precision (1, 2, 4, ..., cap). With
  /// several outputs the loop stops at the first checkpoint whose rank is n + l; otherwise, and
  /// always for a single output, all cap coefficients are used.
  ExpectedRank,
  /// As ExpectedRank, but also stops once two consecutive checkpoints report the same rank.
  Stationary,
  /// First block count whose rank equals the next one's.
  FirstRepeat,
};

inline const char* to_string(NuRule r) {
  switch (r) {
    case NuRule::ExpectedRank: return "expected-rank";
    case NuRule::Stationary: return "stationary";
    case NuRule::FirstRepeat: return "first-repeat";
  }
  return "?";
}

/// Coefficient count used for the final Jacobian, from the block ranks at all cap coefficients.
inline std::size_t detect_nu(std::span<const std::size_t> ranks, std::size_t outputs, std::size_t unknowns,
                             NuRule rule = NuRule::ExpectedRank) {
  if (ranks.empty()) throw std::invalid_argument("no block ranks");
  const std::size_t cap = ranks.size();
  if (rule == NuRule::FirstRepeat) return first_stationary_count(ranks);
  if (outputs <= 1) return cap;
  std::optional<std::size_t> previous;
  std::size_t k = 1;
  while (true) {
    const std::size_t r = ranks[k - 1];
    if (r == unknowns || k == cap) return k;
    if (rule == NuRule::Stationary && previous && *previous == r) return k;
    previous = r;
    k = std::min(2 * k, cap);
  }
}

/// Per-column verdicts on a Jacobian restricted to the unknown columns.
struct Classification {
  std::size_t rank = 0;
  std::size_t phi = 0;
  bool certified = false;
  std::vector<std::size_t> observable;      // column indices into the full Jacobian
  std::vector<std::size_t> non_observable;
  std::vector<std::size_t> assumed_known;
  std::vector<std::size_t> rank_without;    // rank after deleting each kept column, aligned with kept order
};

/// Deletes the known columns, then calls a column observable iff deleting it lowers the rank.
inline Classification classify_columns(const PrimeField& f, const FpMatrix& J, std::span<const std::size_t> known) {
  const std::set<std::size_t> known_set(known.begin(), known.end());
  for (auto c : known_set) {
    if (c >= J.cols()) throw std::out_of_range("assumed-known column out of range");
  }
  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < J.cols(); ++c) {
    if (!known_set.count(c)) kept.push_back(c);
  }
  Classification out;
  out.assumed_known.assign(known_set.begin(), known_set.end());
  const FpMatrix reduced = J.select_columns(kept);
  out.rank = rank_fp(f, reduced);
  out.phi = kept.size() - out.rank;
  out.certified = out.rank == kept.size();
  for (std::size_t k = 0; k < kept.size(); ++k) {
    std::vector<std::size_t> rest;
    for (std::size_t q = 0; q < kept.size(); ++q) {
      if (q != k) rest.push_back(kept[q]);
    }
    const std::size_t r = rank_fp(f, J.select_columns(rest));
    out.rank_without.push_back(r);
    (r + 1 == out.rank ? out.observable : out.non_observable).push_back(kept[k]);
  }
  return out;
}

inline Classification classify(const PrimeField& f, const JacobianMatrix& J) { return classify_columns(f, J.entries, {}); }

/// Treats the named symbols as known (deletes their columns) and classifies the rest.
inline Classification classify_assuming_known(const PrimeField& f, const JacobianMatrix& J,
                                              std::span<const std::string> known) {
  std::vector<std::size_t> idx;
  for (const auto& name : known) {
    auto it = std::find(J.columns.begin(), J.columns.end(), name);
    if (it == J.columns.end()) throw std::invalid_argument("unknown state or parameter '" + name + "'");
    idx.push_back(static_cast<std::size_t>(it - J.columns.begin()));
  }
  return classify_columns(f, J.entries, idx);
}

struct RunConfig {
  std::uint64_t mu = 3000;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> prime;  // replaces the selected prime
  bool force = false;                  // accept a prime override below the bound
  std::vector<std::string> assume_known;
  std::optional<std::size_t> max_order;  // caps the number of series coefficients
  SolverKind solver = SolverKind::Newton;
  NuRule nu_rule = NuRule::ExpectedRank;
};

struct ObservabilityReport {
  std::string model;
  std::size_t n = 0;
  std::size_t l = 0;
  std::size_t r = 0;
  std::size_t m = 0;
  std::uint64_t p = 0;
  std::uint64_t mu = 0;
  std::uint64_t seed = 0;
  bool prime_overridden = false;
  std::size_t nu = 0;
  std::size_t phi = 0;
  std::size_t rank = 0;
  bool certified = false;
  std::vector<std::string> observable;
  std::vector<std::string> non_observable;
  std::vector<std::string> assumed_known;
  Rational probability_bound;
  std::vector<std::size_t> block_ranks;
  std::size_t coefficients = 0;
  std::size_t newton_steps = 0;
  SolverKind solver = SolverKind::Newton;
  ModelMetrics metrics;
  Bounds bounds;
  Prop6Diagnostic prop6;
  std::vector<std::string> warnings;
  double seconds = 0.0;
};

/// Column names in Jacobian order: states then parameters.
inline std::vector<std::string> unknown_names(const Model& model) {
  std::vector<std::string> out = model.states;
  out.insert(out.end(), model.parameters.begin(), model.parameters.end());
  return out;
}

/// Prime for a run: the selected one, or a validated override.
inline PrimeField working_prime(const Bounds& bounds, const RunConfig& cfg) {
  if (!cfg.prime) return select_prime(bounds);
  const PrimeField f(*cfg.prime);
  if (*cfg.prime <= bounds.unknowns + 2) {
    throw std::invalid_argument("prime override must exceed n + l + 2 = " + std::to_string(bounds.unknowns + 2));
  }
  if (!cfg.force && static_cast<long double>(*cfg.prime) <= bounds.threshold()) {
    throw std::invalid_argument("prime override " + std::to_string(*cfg.prime) + " is not above 2 D' mu; pass force to use it anyway");
  }
  return f;
}

/// Full test: bounds, prime, specialization, series solution, Jacobian, ranks, verdicts.
inline ObservabilityReport run_test(const Model& model, const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  ObservabilityReport rep;
  rep.model = model.name;
  rep.n = model.n();
  rep.l = model.l();
  rep.r = model.r();
  rep.m = model.m();
  rep.mu = cfg.mu;
  rep.seed = cfg.seed;
  rep.solver = cfg.solver;
  rep.warnings = model.warnings;

  const auto columns = unknown_names(model);
  for (const auto& name : cfg.assume_known) {
    if (std::find(columns.begin(), columns.end(), name) == columns.end()) {
      throw std::invalid_argument("unknown state or parameter '" + name + "'");
    }
  }

  rep.metrics = measure_metrics(model);
  rep.warnings.insert(rep.warnings.end(), rep.metrics.warnings.begin(), rep.metrics.warnings.end());
  rep.bounds = compute_bounds(rep.metrics, cfg.mu);
  const PrimeField f = working_prime(rep.bounds, cfg);
  rep.p = f.modulus();
  rep.prime_overridden = cfg.prime.has_value();
  rep.probability_bound = probability_bound(cfg.mu);

  const SlpBundle bundle = compile_numden(model);
  const VariationalSlps v = build_variational(bundle);
  const Specialization s = sample_specialization(bundle, rep.bounds, f, cfg.seed);
  if (s.rounds > 1) rep.warnings.push_back("specialization resampled " + std::to_string(s.rounds - 1) + " time(s)");

  std::size_t coeffs = rep.n + rep.l + 1;
  if (cfg.max_order) coeffs = std::max<std::size_t>(1, std::min(coeffs, *cfg.max_order));
  rep.coefficients = coeffs;
  const VariationalSolution sol = solve_variational(v, f, s, coeffs, cfg.solver);
  rep.newton_steps = sol.newton_steps;

  const JacobianMatrix full = jacobian_from_series(v, f, s, sol, coeffs, columns);
  rep.block_ranks = block_ranks(f, full);
  rep.nu = detect_nu(rep.block_ranks, rep.m, rep.n + rep.l, cfg.nu_rule);
  rep.prop6 = prop6_diagnostic(rep.metrics, rep.nu);

  const Classification c = classify_assuming_known(f, full.first_blocks(rep.nu), cfg.assume_known);
  rep.rank = c.rank;
  rep.phi = c.phi;
  rep.certified = c.certified;
  for (auto i : c.observable) rep.observable.push_back(columns[i]);
  for (auto i : c.non_observable) rep.non_observable.push_back(columns[i]);
  for (auto i : c.assumed_known) rep.assumed_known.push_back(columns[i]);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace obsv
