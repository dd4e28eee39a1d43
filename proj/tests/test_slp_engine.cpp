#include <gtest/gtest.h>

#include <random>
#include <regex>

#include "support.hpp"

using namespace obsv;
using obsv::testing::corpus;
using obsv::testing::corpus_model;

namespace {

Slp fifth_power() {
  SlpBuilder b({"x"});
  b.add_result("x^5", b.pow(b.input(0), 5));
  return std::move(b).build();
}

std::vector<std::uint64_t> random_point(const PrimeField& f, std::mt19937_64& rng, std::size_t k) {
  std::vector<std::uint64_t> pt(k);
  for (auto& v : pt) v = std::uniform_int_distribution<std::uint64_t>(0, f.modulus() - 1)(rng);
  return pt;
}

/// Symbolic numerator form P_i = q_i xdot_i - p_i over the variables xdot[n], x[n], theta[l],
/// u[r], where (p_i, q_i) is the pair the bundle computes, expanded by running the bundle over
/// rational functions.
struct SymbolicSystem {
  std::size_t nv = 0;
  std::vector<RatFunc> P;
};

SymbolicSystem symbolic_system(const Model& m, const SlpBundle& bundle) {
  SymbolicSystem s;
  const std::size_t n = m.n();
  s.nv = 2 * n + m.l() + m.r();
  std::vector<RatFunc> in;
  for (std::size_t i = n; i < s.nv; ++i) in.push_back(RatFunc::variable(s.nv, i));
  const auto pq = evaluate(bundle.slp, RatFuncRing{s.nv}, std::span<const RatFunc>(in));
  for (std::size_t i = 0; i < n; ++i) {
    s.P.push_back(RatFunc::variable(s.nv, i) * pq[2 * i + 1] - pq[2 * i]);
  }
  return s;
}

}  // namespace

TEST(Evaluate, FifthPowerOverIntegers) {
  const auto v = evaluate(fifth_power(), IntegerRing{}, std::span<const Integer>(std::vector<Integer>{2}));
  EXPECT_EQ(v[0], 32);
}

TEST(Evaluate, FifthPowerOverSeries) {
  const PrimeField f(1000003);
  const std::vector<TruncSeries> x{TruncSeries(std::vector<std::uint64_t>{1, 1})};
  const auto v = evaluate(fifth_power(), SeriesRing{f, 1}, std::span<const TruncSeries>(x));
  EXPECT_EQ(v[0], TruncSeries(std::vector<std::uint64_t>{1, 5}));
}

TEST(Evaluate, FifthPowerOverF7) {
  const auto v = evaluate(fifth_power(), PrimeField(7), std::span<const std::uint64_t>(std::vector<std::uint64_t>{2}));
  EXPECT_EQ(v[0], 4U);
}

TEST(Evaluate, PowersUseRepeatedSquaring) {
  EXPECT_EQ(fifth_power().length(), 3U);  // x^2, x^4, x^4 * x
}

TEST(Evaluate, DivisionByNonUnitReportsTapeIndex) {
  SlpBuilder b({"x", "y"});
  const Operand s = b.sub(b.input(0), b.input(1));
  b.add_result("q", b.div(b.input(0), s));
  const Slp slp = std::move(b).build();
  try {
    evaluate(slp, PrimeField(7), std::span<const std::uint64_t>(std::vector<std::uint64_t>{3, 10}));
    FAIL() << "expected a division error";
  } catch (const SlpDivisionError& e) {
    EXPECT_EQ(e.tape_index(), 1U);
  }
}

TEST(Evaluate, WrongInputCountThrows) {
  EXPECT_THROW(evaluate(fifth_power(), PrimeField(7), std::span<const std::uint64_t>(std::vector<std::uint64_t>{1, 2})),
               std::invalid_argument);
}

TEST(Builder, ConstantsArePooled) {
  SlpBuilder b({"x"});
  const Operand a = b.mul(b.input(0), b.constant(3));
  const Operand c = b.add(a, b.constant(3));
  b.add_result("r", b.mul(c, b.constant(7)));
  const Slp slp = std::move(b).build();
  EXPECT_EQ(slp.constants.size(), 2U);
}

TEST(Builder, DumpFormat) {
  const std::string text = dump(fifth_power());
  const std::regex line(R"(t\d+ = \S+ [-+*/] \S+)");
  std::istringstream in(text);
  std::string l;
  std::size_t instr = 0;
  while (std::getline(in, l)) {
    if (l.rfind("#", 0) == 0) continue;
    EXPECT_TRUE(std::regex_match(l, line)) << l;
    ++instr;
  }
  EXPECT_EQ(instr, 3U);
  EXPECT_NE(text.find("t0 = x * x"), std::string::npos);
}

TEST(ReverseGradient, Product) {
  SlpBuilder b({"x", "y"});
  b.add_result("f", b.mul(b.input(0), b.input(1)));
  const Slp g = reverse_gradient(std::move(b).build(), 0);
  const auto v = evaluate(g, IntegerRing{}, std::span<const Integer>(std::vector<Integer>{3, 8}));
  EXPECT_EQ(v[0], 8);
  EXPECT_EQ(v[1], 3);
}

TEST(ReverseGradient, FifthPower) {
  const Slp g = reverse_gradient(fifth_power(), 0);
  const auto v = evaluate(g, IntegerRing{}, std::span<const Integer>(std::vector<Integer>{2}));
  EXPECT_EQ(v[0], 80);
}

TEST(ReverseGradient, QuotientRule) {
  SlpBuilder b({"x", "y"});
  b.add_result("f", b.div(b.input(0), b.input(1)));
  const Slp g = reverse_gradient(std::move(b).build(), 0);
  const auto v = evaluate(g, RationalRing{}, std::span<const Rational>(std::vector<Rational>{3, 4}));
  EXPECT_EQ(v[0], Rational(1, 4));
  EXPECT_EQ(v[1], Rational(-3, 16));
}

TEST(ReverseGradient, RandomTapesMatchSymbolicDerivatives) {
  std::mt19937_64 rng(2024);
  const PrimeField f = obsv::testing::corpus_prime();
  for (int t = 0; t < 50; ++t) {
    const std::size_t inputs = 2 + static_cast<std::size_t>(t % 3);
    const auto tape = obsv::testing::random_tape(rng, inputs, 40);
    ASSERT_TRUE(tape.slp.is_acyclic());
    const Slp g = reverse_gradient(tape.slp, 0);
    ASSERT_TRUE(g.is_acyclic());
    EXPECT_LE(g.length(), 5 * tape.slp.length() + 2 * inputs);
    int points = 0;
    while (points < 10) {
      const auto pt = random_point(f, rng, inputs);
      std::vector<std::uint64_t> got;
      std::vector<std::uint64_t> want;
      try {
        got = evaluate(g, f, std::span<const std::uint64_t>(pt));
        for (std::size_t i = 0; i < inputs; ++i) {
          want.push_back(tape.symbolic.derivative(i).evaluate(f, std::span<const std::uint64_t>(pt)));
        }
      } catch (const NonUnitError&) {
        continue;
      }
      EXPECT_EQ(got, want) << dump(tape.slp);
      ++points;
    }
  }
}

TEST(ReverseGradient, CommutesWithReductionModP) {
  std::mt19937_64 rng(77);
  const PrimeField f(1000003);
  std::uniform_int_distribution<int> val(-50, 50);
  for (int t = 0; t < 20; ++t) {
    const auto tape = obsv::testing::random_tape(rng, 3, 25);
    const Slp g = reverse_gradient(tape.slp, 0);
    int points = 0;
    while (points < 5) {
      std::vector<Rational> q;
      for (int i = 0; i < 3; ++i) q.emplace_back(val(rng), 1 + std::abs(val(rng)));
      std::vector<std::uint64_t> qp;
      for (const auto& v : q) qp.push_back(f.from_rational(v));
      std::vector<Rational> exact;
      std::vector<std::uint64_t> modular;
      try {
        exact = evaluate(g, RationalRing{}, std::span<const Rational>(q));
        modular = evaluate(g, f, std::span<const std::uint64_t>(qp));
      } catch (const NonUnitError&) {
        continue;
      }
      for (std::size_t i = 0; i < exact.size(); ++i) EXPECT_EQ(f.from_rational(exact[i]), modular[i]);
      ++points;
    }
  }
}

TEST(Variational, LinearGrowth) {
  // x' = theta x: P = xdot - theta x.
  const Model m = parse_model("params: theta; states: x; outputs: y; d(x) = theta*x; y = x;");
  const VariationalSlps v = build_variational(compile_numden(m));
  const std::vector<Integer> in{5, 3, 7};  // xdot, x, theta
  const auto out = evaluate(v.system, IntegerRing{}, std::span<const Integer>(in));
  EXPECT_EQ(out[v.p_index(0)], 5 - 7 * 3);
  EXPECT_EQ(out[v.dxdot_index(0)], 1);
  EXPECT_EQ(out[v.dx_index(0, 0)], -7);
  EXPECT_EQ(out[v.dtheta_index(0, 0)], -3);
}

TEST(Variational, ToyANumeratorForm) {
  const VariationalSlps v = build_variational(compile_numden(corpus_model("toy_a")));
  // xdot1..3, x1..3, theta
  const std::vector<Integer> in{2, 3, 5, 7, 11, 13, 17};
  const auto out = evaluate(v.system, IntegerRing{}, std::span<const Integer>(in));
  EXPECT_EQ(out[v.p_index(0)], 7 * 2 - 11);
  EXPECT_EQ(out[v.dxdot_index(0)], 7);
  EXPECT_EQ(out[v.dx_index(0, 0)], 2);
  EXPECT_EQ(out[v.dx_index(0, 1)], -1);
  EXPECT_EQ(out[v.dx_index(0, 2)], 0);
}

TEST(Variational, ToyBOutputGradient) {
  const VariationalSlps v = build_variational(compile_numden(corpus_model("toy_b")));
  // x, theta1, theta2, Gamma (1x1), Lambda (1x2)
  const std::vector<Integer> in{4, 5, 6, 9, 10, 11};
  const auto out = evaluate(v.output, RationalRing{}, std::span<const Rational>(std::vector<Rational>(in.begin(), in.end())));
  EXPECT_EQ(out[v.grad_y_index(0, 0)], 9);
  EXPECT_EQ(out[v.grad_y_index(0, 1)], 10);
  EXPECT_EQ(out[v.grad_y_index(0, 2)], 11);
}

TEST(Variational, BlocksMatchSymbolicPartials) {
  std::mt19937_64 rng(99);
  const PrimeField f = obsv::testing::corpus_prime();
  std::vector<Model> models;
  for (const auto& c : corpus()) models.push_back(corpus_model(c.stem));
  for (int i = 0; i < 10; ++i) models.push_back(obsv::testing::random_model(rng, {.rational = true}));
  for (const Model& m : models) {
    const SlpBundle bundle = compile_numden(m);
    const VariationalSlps v = build_variational(bundle);
    ASSERT_TRUE(v.system.is_acyclic());
    ASSERT_TRUE(v.output.is_acyclic());
    EXPECT_FALSE(v.system.has_division());
    const SymbolicSystem sym = symbolic_system(m, bundle);
    const std::size_t n = m.n();
    for (int trial = 0; trial < 3; ++trial) {
      const auto pt = random_point(f, rng, sym.nv);
      const auto out = evaluate(v.system, f, std::span<const std::uint64_t>(pt));
      // dP/dXdot is the diagonal of denominators.
      const auto q = evaluate(bundle.slp, f, std::span<const std::uint64_t>(pt).subspan(n));
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_EQ(out[v.dxdot_index(i)], q[2 * i + 1]) << m.name;
        for (std::size_t j = 0; j < n; ++j) {
          EXPECT_EQ(out[v.dx_index(i, j)], sym.P[i].derivative(n + j).evaluate(f, std::span<const std::uint64_t>(pt)))
              << m.name;
        }
        for (std::size_t k = 0; k < m.l(); ++k) {
          EXPECT_EQ(out[v.dtheta_index(i, k)],
                    sym.P[i].derivative(2 * n + k).evaluate(f, std::span<const std::uint64_t>(pt)))
              << m.name;
        }
      }
    }
  }
}

TEST(Variational, OutputGradientMatchesChainRule) {
  std::mt19937_64 rng(5150);
  const PrimeField f = obsv::testing::corpus_prime();
  for (const auto& c : corpus()) {
    const Model m = corpus_model(c.stem);
    const VariationalSlps v = build_variational(compile_numden(m));
    const std::size_t n = m.n(), l = m.l(), r = m.r();
    std::map<std::string, std::size_t> vars;
    const auto names = bundle_input_names(m);
    for (std::size_t i = 0; i < names.size(); ++i) vars[names[i]] = i;
    const auto pt = random_point(f, rng, n + l + r + n * n + n * l);
    const std::span<const std::uint64_t> base(pt.data(), n + l + r);
    std::vector<std::uint64_t> out;
    try {
      out = evaluate(v.output, f, std::span<const std::uint64_t>(pt));
    } catch (const NonUnitError&) {
      continue;
    }
    for (std::size_t j = 0; j < m.m(); ++j) {
      const RatFunc g = to_ratfunc(m.output_rhs[j], vars, names.size());
      std::vector<std::uint64_t> dx(n);
      for (std::size_t i = 0; i < n; ++i) dx[i] = g.derivative(i).evaluate(f, base);
      for (std::size_t c2 = 0; c2 < n + l; ++c2) {
        std::uint64_t want = c2 >= n ? g.derivative(c2).evaluate(f, base) : 0;
        for (std::size_t i = 0; i < n; ++i) {
          const std::uint64_t blk =
              c2 < n ? pt[n + l + r + i * n + c2] : pt[n + l + r + n * n + i * l + (c2 - n)];
          want = f.add(want, f.mul(dx[i], blk));
        }
        EXPECT_EQ(out[v.grad_y_index(j, c2)], want) << c.stem;
      }
    }
  }
}
