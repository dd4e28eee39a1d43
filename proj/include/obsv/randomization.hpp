#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "obsv/bigint.hpp"
#include "obsv/compile.hpp"
#include "obsv/metrics.hpp"
#include "obsv/prime_field.hpp"
#include "obsv/series.hpp"
#include "obsv/slp.hpp"

namespace obsv {

struct Bounds {
  Integer D;                     // 4(n+l)^2 (n+m) d
  long double Dprime_real = 0;   // height bound before rounding
  Integer Dprime;                // ceil(Dprime_real)
  std::uint64_t mu = 0;
  std::size_t unknowns = 0;      // n + l, fixes the minimal admissible prime

  /// 2 D' mu on the real scale.
  [[nodiscard]] long double threshold() const { return 2.0L * Dprime_real * static_cast<long double>(mu); }
  /// Largest value drawn for a specialization.
  [[nodiscard]] Integer sample_max() const { return D * mu; }
};

inline Bounds compute_bounds(const ModelMetrics& mm, std::uint64_t mu) {
  if (mu < 2) throw std::invalid_argument("mu must be at least 2");
  const long double nl = static_cast<long double>(mm.n + mm.l);
  Bounds b;
  b.mu = mu;
  b.unknowns = mm.n + mm.l;
  b.D = Integer(4) * (mm.n + mm.l) * (mm.n + mm.l) * (mm.n + mm.m) * mm.d;
  const long double D = b.D.convert_to<long double>();
  const long double two_n_D = std::max(2.0L * static_cast<long double>(mm.n) * D, 1.0L);
  b.Dprime_real = (2.0L * std::log(nl + static_cast<long double>(mm.r) + 1.0L) + std::log(static_cast<long double>(mu) * D)) * D +
                  4.0L * nl * nl * (static_cast<long double>(mm.n + mm.m) * static_cast<long double>(mm.h) + std::log(two_n_D));
  b.Dprime = Integer(static_cast<unsigned long long>(std::ceil(b.Dprime_real)));
  return b;
}

/// Smallest prime strictly above ceil(2 D' mu) and above n + l + 2.
inline PrimeField select_prime(const Bounds& b) {
  const long double t = std::ceil(b.threshold());
  if (t >= 4.0e18L) throw std::out_of_range("prime threshold exceeds the 63-bit field implementation");
  std::uint64_t floor = static_cast<std::uint64_t>(t);
  floor = std::max<std::uint64_t>(floor, b.unknowns + 2);
  return PrimeField(next_prime_above(floor));
}

/// (1 - 1/mu)^2 as an exact rational.
inline Rational probability_bound(std::uint64_t mu) {
  if (mu < 1) throw std::invalid_argument("mu must be positive");
  const Rational q = Rational(1) - Rational(1, mu);
  return q * q;
}

/// Height diagnostic computed with the measured order nu in place of n + l.
struct Prop6Diagnostic {
  Integer D_nu;
  long double h_c = 0;
};

inline Prop6Diagnostic prop6_diagnostic(const ModelMetrics& mm, std::size_t nu) {
  Prop6Diagnostic out;
  const std::size_t nl = mm.n + mm.l;
  out.D_nu = Integer(nl) * (2 * nu + 1) * (mm.n + mm.m) * mm.d;
  const long double D = out.D_nu.convert_to<long double>();
  const long double two_n_D = std::max(2.0L * static_cast<long double>(mm.n) * D, 1.0L);
  out.h_c = (2.0L * std::log(static_cast<long double>(nl + mm.r + 1)) + std::log(D)) * D +
            static_cast<long double>(nl) * static_cast<long double>(2 * nu + 1) *
                (static_cast<long double>(mm.n + mm.m) * static_cast<long double>(mm.h) + std::log(two_n_D));
  return out;
}

/// Seeded random stream that can spawn independent child streams.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

  [[nodiscard]] std::uint64_t seed() const { return seed_; }

  /// Child stream determined by (seed, stream); does not disturb this stream.
  [[nodiscard]] SplitRng split(std::uint64_t stream) const { return SplitRng(mix(seed_ ^ mix(stream + 0x9e3779b97f4a7c15ULL))); }

  /// Uniform integer in [lo, hi].
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(engine_);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31U);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

struct Specialization {
  std::vector<std::uint64_t> X0;     // n residues
  std::vector<std::uint64_t> theta;  // l residues
  std::vector<TruncSeries> U;        // r input polynomials, coefficients 0..n+l
  std::uint64_t seed = 0;
  std::size_t rounds = 1;            // sampling rounds used (1 = no resample)
  std::vector<std::uint64_t> raw;    // integers drawn in the accepted round, in draw order
};

/// Draws one integer in [0, max]. Tests inject their own to force degenerate samples.
using DrawFn = std::function<std::uint64_t(std::uint64_t max)>;

inline constexpr std::size_t kMaxSpecializationRounds = 5;

/// Samples X0, theta and input polynomials from {0..mu D}; resamples while any denominator of F
/// or G vanishes mod p at t = 0.
inline Specialization sample_specialization(const SlpBundle& bundle, const Bounds& bounds, const PrimeField& f,
                                            std::uint64_t seed, const DrawFn& draw_override = {}) {
  const Integer hi_int = bounds.sample_max();
  const std::uint64_t hi =
      hi_int > Integer(std::numeric_limits<std::uint64_t>::max()) ? std::numeric_limits<std::uint64_t>::max()
                                                                   : static_cast<std::uint64_t>(hi_int);
  SplitRng rng = SplitRng(seed).split(1);
  DrawFn draw = draw_override ? draw_override : DrawFn([&rng](std::uint64_t max) { return rng.uniform(0, max); });
  const std::size_t n = bundle.n;
  const std::size_t l = bundle.l;
  const std::size_t r = bundle.r;
  const std::size_t coeffs = n + l + 1;

  for (std::size_t round = 1; round <= kMaxSpecializationRounds; ++round) {
    Specialization s;
    s.seed = seed;
    s.rounds = round;
    auto take = [&]() {
      const std::uint64_t v = draw(hi);
      s.raw.push_back(v);
      return f.from_integer(Integer(v));
    };
    for (std::size_t i = 0; i < n; ++i) s.X0.push_back(take());
    for (std::size_t i = 0; i < l; ++i) s.theta.push_back(take());
    for (std::size_t i = 0; i < r; ++i) {
      TruncSeries u(coeffs - 1);
      for (std::size_t k = 0; k < coeffs; ++k) u[k] = take();
      s.U.push_back(std::move(u));
    }
    std::vector<std::uint64_t> point = s.X0;
    point.insert(point.end(), s.theta.begin(), s.theta.end());
    for (const auto& u : s.U) point.push_back(u[0]);
    std::vector<std::uint64_t> values;
    try {
      values = evaluate(bundle.slp, f, std::span<const std::uint64_t>(point));
    } catch (const NonUnitError&) {
      continue;
    }
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) ok = values[2 * i + 1] != 0;
    for (std::size_t j = 0; j < bundle.m && ok; ++j) ok = values[2 * n + 2 * j + 1] != 0;
    if (ok) return s;
  }
  throw DegeneracyError("a denominator vanished at " + std::to_string(kMaxSpecializationRounds) +
                        " random specializations; it is probably identically zero, rewrite the model");
}

}  // namespace obsv
