#pragma once

// Test-only oracles and generators shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <map>
#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "obsv/obsv.hpp"

#ifndef OBSV_MODELS_DIR
#error "OBSV_MODELS_DIR must point at the models/ directory"
#endif

namespace obsv::testing {

inline std::filesystem::path models_dir() { return OBSV_MODELS_DIR; }

inline Model corpus_model(const std::string& stem) { return load_model(models_dir() / (stem + ".model")); }

inline GroupAction corpus_group(const std::string& stem, const Model& model) {
  return load_group(models_dir() / (stem + ".group"), model);
}

/// The seven published models, in the benchmark table's order, with the tabulated nu and the
/// published verdicts.
struct CorpusEntry {
  std::string stem;
  std::size_t published_nu;
  std::set<std::string> non_observable;
  std::size_t phi;
};

inline const std::vector<CorpusEntry>& corpus() {
  static const std::vector<CorpusEntry> entries{
      {"v1987", 8, {}, 0},
      {"r1986", 14, {"x2", "x3", "x4", "c1", "c2", "c3", "c7", "c8", "c9"}, 1},
      {"mv1991", 14, {"I_x", "I_y", "M", "L_s", "R_s", "L_r", "R_r", "J", "T_L"}, 1},
      {"mw2000", 18, {"beta1", "beta2", "I2", "m1", "m2"}, 2},
      {"kd1999", 19, {"A", "E", "R", "DeltaH_r", "U", "rho", "c_p", "rho_h", "c_ph", "k0"}, 5},
      {"g1995", 23, {"M", "v_s", "v_m", "K_m", "k_s"}, 1},
      {"shh1997", 23, {"kc_X", "km_X", "kc_V", "km_V", "k_PT", "kc_II", "kc_2", "X", "Xa", "V", "Va", "PL", "PT"}, 1}};
  return entries;
}

/// The prime a default run selects for this model.
inline PrimeField model_prime(const Model& model, std::uint64_t mu = 3000) {
  return select_prime(compute_bounds(measure_metrics(model), mu));
}

/// The stems of the six models that ship a published symmetry group.
inline const std::vector<std::string>& group_stems() {
  static const std::vector<std::string> stems{"g1995", "r1986", "mv1991", "mw2000", "kd1999", "shh1997"};
  return stems;
}

/// Rebuilds `e` with symbols replaced per `repl`.
inline Expr substitute(const Expr& e, const std::map<std::string, Expr>& repl) {
  switch (e->kind) {
    case ExprKind::Constant:
      return e;
    case ExprKind::Symbol: {
      auto it = repl.find(e->name);
      return it == repl.end() ? e : it->second;
    }
    case ExprKind::Neg:
      return expr::neg(substitute(e->lhs, repl));
    case ExprKind::Pow:
      return expr::pow(substitute(e->lhs, repl), e->exponent);
    default:
      return expr::binary(e->kind, substitute(e->lhs, repl), substitute(e->rhs, repl));
  }
}

/// Variants of `g` where a single map entry has every group parameter replaced by its inverse,
/// which flips the sign of that entry's exponents. Entries without a group parameter are skipped.
inline std::vector<std::pair<std::string, GroupAction>> single_entry_inversions(const GroupAction& g) {
  std::map<std::string, Expr> inv;
  for (const auto& l : g.lambdas) inv[l] = expr::div(expr::constant(1), expr::symbol(l));
  std::vector<std::pair<std::string, GroupAction>> out;
  for (std::size_t k = 0; k < g.map.size(); ++k) {
    std::set<std::string> used;
    collect_symbols(g.map[k].second, used);
    const bool has_lambda = std::any_of(g.lambdas.begin(), g.lambdas.end(), [&](const auto& l) { return used.count(l) > 0; });
    if (!has_lambda) continue;
    GroupAction h = g;
    h.map[k].second = substitute(g.map[k].second, inv);
    out.emplace_back(g.map[k].first, std::move(h));
  }
  return out;
}

/// The prime selected for G1995 at mu = 3000.
inline PrimeField corpus_prime() {
  static const PrimeField f = select_prime(compute_bounds(measure_metrics(corpus_model("g1995")), 3000));
  return f;
}

// ---------------------------------------------------------------------------------------------
// Random models.

struct RandomModelShape {
  std::size_t max_unknowns = 5;  // n + l
  std::size_t max_degree = 3;
  bool inputs = true;
  bool rational = false;  // some right-hand sides get a denominator k + monomial
};

/// Source text of a random model; always parses.
inline std::string random_model_source(std::mt19937_64& rng, const RandomModelShape& shape = {}) {
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  const std::size_t n = pick(1, std::min<std::size_t>(3, shape.max_unknowns));
  const std::size_t l = pick(0, shape.max_unknowns - n);
  const std::size_t r = shape.inputs ? pick(0, 1) : 0;
  const std::size_t m = pick(1, 2);

  std::vector<std::string> xs, ths, us, vars;
  for (std::size_t i = 0; i < n; ++i) xs.push_back("x" + std::to_string(i + 1));
  for (std::size_t i = 0; i < l; ++i) ths.push_back("k" + std::to_string(i + 1));
  for (std::size_t i = 0; i < r; ++i) us.push_back("u" + std::to_string(i + 1));
  vars = xs;
  vars.insert(vars.end(), ths.begin(), ths.end());
  vars.insert(vars.end(), us.begin(), us.end());

  auto monomial = [&](const std::vector<std::string>& pool, std::size_t max_deg) {
    const std::size_t deg = pick(0, max_deg);
    std::string out;
    for (std::size_t k = 0; k < deg; ++k) out += (k ? "*" : "") + pool[pick(0, pool.size() - 1)];
    return out;
  };
  auto polynomial = [&](const std::vector<std::string>& pool, std::size_t terms, std::size_t max_deg) {
    std::string out;
    for (std::size_t t = 0; t < terms; ++t) {
      int c = static_cast<int>(pick(1, 3));
      if (pick(0, 1) != 0U) c = -c;
      const std::string mono = monomial(pool, max_deg);
      out += t ? (c < 0 ? " - " : " + ") : (c < 0 ? "-" : "");
      const int a = std::abs(c);
      if (mono.empty()) {
        out += std::to_string(a);
      } else {
        out += (a == 1 ? "" : std::to_string(a) + "*") + mono;
      }
    }
    return out;
  };
  auto join_names = [](const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
    return out;
  };

  std::string src;
  if (l) src += "params: " + join_names(ths) + ";\n";
  src += "states: " + join_names(xs) + ";\n";
  if (r) src += "inputs: " + join_names(us) + ";\n";
  std::vector<std::string> ys;
  for (std::size_t j = 0; j < m; ++j) ys.push_back("y" + std::to_string(j + 1));
  src += "outputs: " + join_names(ys) + ";\n";
  for (std::size_t i = 0; i < n; ++i) {
    std::string rhs = polynomial(vars, pick(1, 3), shape.max_degree);
    if (shape.rational && pick(0, 2) == 0) {
      rhs = "(" + rhs + ")/(" + std::to_string(pick(1, 3)) + " + " + vars[pick(0, vars.size() - 1)] + ")";
    }
    src += "d(" + xs[i] + ") = " + rhs + ";\n";
  }
  std::vector<std::string> out_pool = xs;
  out_pool.insert(out_pool.end(), ths.begin(), ths.end());
  for (std::size_t j = 0; j < m; ++j) {
    std::string g = xs[pick(0, n - 1)] + " + " + polynomial(out_pool, pick(0, 1) + 1, std::min<std::size_t>(2, shape.max_degree));
    src += ys[j] + " = " + g + ";\n";
  }
  return src;
}

inline Model random_model(std::mt19937_64& rng, const RandomModelShape& shape = {}, const std::string& name = "random") {
  return parse_model(random_model_source(rng, shape), name);
}

/// Everything needed to run the pipeline pieces on one model at one specialization.
struct Pipeline {
  Model model;
  PrimeField field{101};
  SlpBundle bundle;
  VariationalSlps v;
  Specialization spec;
  std::size_t coefficients = 0;
};

inline Pipeline make_pipeline(Model model, std::uint64_t seed, std::uint64_t mu = 3000) {
  Pipeline p;
  const Bounds b = compute_bounds(measure_metrics(model), mu);
  p.field = select_prime(b);
  p.bundle = compile_numden(model);
  p.v = build_variational(p.bundle);
  p.spec = sample_specialization(p.bundle, b, p.field, seed);
  p.coefficients = model.n() + model.l() + 1;
  p.model = std::move(model);
  return p;
}

// ---------------------------------------------------------------------------------------------
// Exact rank over Q by Gaussian elimination on rationals.

inline std::size_t rational_rank(std::vector<std::vector<Integer>> rows) {
  if (rows.empty()) return 0;
  const std::size_t R = rows.size();
  const std::size_t C = rows[0].size();
  std::vector<std::vector<Rational>> a(R, std::vector<Rational>(C));
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t j = 0; j < C; ++j) a[i][j] = Rational(rows[i][j]);
  }
  std::size_t rank = 0;
  for (std::size_t col = 0; col < C && rank < R; ++col) {
    std::size_t piv = rank;
    while (piv < R && a[piv][col] == 0) ++piv;
    if (piv == R) continue;
    std::swap(a[piv], a[rank]);
    for (std::size_t i = rank + 1; i < R; ++i) {
      if (a[i][col] == 0) continue;
      const Rational factor = a[i][col] / a[rank][col];
      for (std::size_t j = col; j < C; ++j) a[i][j] -= factor * a[rank][j];
    }
    ++rank;
  }
  return rank;
}

/// Random integer matrix with entries in [-1000, 1000]; about half are built with deficient rank.
inline std::vector<std::vector<Integer>> random_integer_matrix(std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const std::size_t R = static_cast<std::size_t>(pick(1, 12));
  const std::size_t C = static_cast<std::size_t>(pick(1, 12));
  std::vector<std::vector<Integer>> out(R, std::vector<Integer>(C));
  if (pick(0, 1) == 0) {
    for (auto& row : out) {
      for (auto& e : row) e = pick(-1000, 1000);
    }
    return out;
  }
  // Product of R x k and k x C factors with entries in [-9, 9]; |entries| <= 12 * 81.
  const std::size_t k = static_cast<std::size_t>(pick(1, static_cast<int>(std::min(R, C))));
  std::vector<std::vector<int>> P(R, std::vector<int>(k)), Q(k, std::vector<int>(C));
  for (auto& row : P) {
    for (auto& e : row) e = pick(-9, 9);
  }
  for (auto& row : Q) {
    for (auto& e : row) e = pick(-9, 9);
  }
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t j = 0; j < C; ++j) {
      long long s = 0;
      for (std::size_t t = 0; t < k; ++t) s += static_cast<long long>(P[i][t]) * Q[t][j];
      out[i][j] = s;
    }
  }
  return out;
}

inline FpMatrix reduce(const PrimeField& f, const std::vector<std::vector<Integer>>& rows) {
  FpMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = f.from_integer(rows[i][j]);
  }
  return m;
}

// ---------------------------------------------------------------------------------------------
// Schoolbook convolution.

inline std::vector<std::uint64_t> convolve(const PrimeField& f, const std::vector<std::uint64_t>& a,
                                           const std::vector<std::uint64_t>& b, std::size_t order) {
  std::vector<std::uint64_t> c(order + 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (i + j <= order) c[i + j] = f.add(c[i + j], f.mul(a[i], b[j]));
    }
  }
  return c;
}

inline TruncSeries random_series(const PrimeField& f, std::mt19937_64& rng, std::size_t order) {
  TruncSeries s(order);
  for (std::size_t k = 0; k <= order; ++k) s[k] = std::uniform_int_distribution<std::uint64_t>(0, f.modulus() - 1)(rng);
  return s;
}

inline SeriesMatrix random_series_matrix(const PrimeField& f, std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                         std::size_t order) {
  SeriesMatrix m(rows, cols, order);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = random_series(f, rng, order);
  }
  return m;
}

// ---------------------------------------------------------------------------------------------
// Random tapes and their symbolic gradients.

struct RandomTape {
  Slp slp;
  RatFunc symbolic;  // the single result as a rational function of the inputs
};

/// Random single-result tape of the given length over `inputs` variables, with + - * / and
/// small constants. Growth of the symbolic form is capped so the oracle stays cheap.
inline RandomTape random_tape(std::mt19937_64& rng, std::size_t inputs, std::size_t length) {
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  while (true) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < inputs; ++i) names.push_back("v" + std::to_string(i));
    SlpBuilder b(names);
    std::vector<Operand> ops;
    std::vector<RatFunc> sym;
    for (std::size_t i = 0; i < inputs; ++i) {
      ops.push_back(Operand::input(i));
      sym.push_back(RatFunc::variable(inputs, i));
    }
    std::size_t divisions = 0;
    std::size_t attempts = 0;
    while (b.length() < length && ++attempts < 50 * length) {
      const std::size_t ia = pick(0, ops.size() - 1);
      const std::size_t ib = pick(0, ops.size() - 1);
      const Operand a = ops[ia];
      Operand c = ops[ib];
      const RatFunc& sa = sym[ia];
      RatFunc sc = sym[ib];
      if (pick(0, 5) == 0) {
        const auto k = static_cast<long long>(pick(2, 7));
        c = b.constant(Integer(k));
        sc = RatFunc::constant(inputs, Integer(k));
      }
      std::size_t op = pick(0, 3);
      if (op == 3 && divisions >= 3) op = 2;
      RatFunc s;
      try {
        s = (op == 0 ? sa + sc : op == 1 ? sa - sc : op == 2 ? sa * sc : sa / sc).normalized();
      } catch (const NonUnitError&) {
        continue;
      }
      if (s.num.term_count() + s.den.term_count() > 400 || s.num.total_degree() + s.den.total_degree() > 24) continue;
      const std::size_t before = b.length();
      const Operand out = op == 0 ? b.add(a, c) : op == 1 ? b.sub(a, c) : op == 2 ? b.mul(a, c) : b.div(a, c);
      if (b.length() == before) continue;  // folded away; nothing new on the tape
      if (op == 3) ++divisions;
      ops.push_back(out);
      sym.push_back(std::move(s));
    }
    if (b.length() == 0) continue;
    b.add_result("f", ops.back());
    return {std::move(b).build(), sym.back()};
  }
}

}  // namespace obsv::testing
