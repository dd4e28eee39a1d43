#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "obsv/bigint.hpp"
#include "obsv/observability.hpp"

namespace obsv {

/// Decimal expansion of a nonnegative rational, truncated to `digits` fractional digits.
inline std::string decimal_string(const Rational& q, unsigned digits) {
  Integer num = numerator(q);
  const Integer den = denominator(q);
  std::string sign;
  if (num < 0) {
    sign = "-";
    num = -num;
  }
  const Integer whole = num / den;
  Integer rem = num % den;
  std::string out = sign + whole.str();
  if (digits == 0) return out;
  out += ".";
  for (unsigned i = 0; i < digits; ++i) {
    rem *= 10;
    out += static_cast<char>('0' + static_cast<int>(rem / den));
    rem %= den;
  }
  return out;
}

inline std::string join(const std::vector<std::string>& items, const std::string& sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

/// Machine-readable report. Contains no timings, so identical inputs give identical bytes.
inline nlohmann::ordered_json to_json(const ObservabilityReport& r) {
  nlohmann::ordered_json j;
  j["model"] = r.model;
  j["p"] = r.p;
  j["mu"] = r.mu;
  j["seed"] = r.seed;
  j["nu"] = r.nu;
  j["phi"] = r.phi;
  j["rank"] = r.rank;
  j["certified"] = r.certified;
  j["observable"] = r.observable;
  j["non_observable"] = r.non_observable;
  j["assumed_known"] = r.assumed_known;
  j["probability_bound"] = r.probability_bound.convert_to<double>();
  return j;
}

inline std::string to_text(const ObservabilityReport& r) {
  std::ostringstream os;
  os << "model: " << r.model << "\n";
  os << "sizes: n=" << r.n << " l=" << r.l << " r=" << r.r << " m=" << r.m << "\n";
  os << "seed: " << r.seed << "\n";
  os << "prime: " << r.p << (r.prime_overridden ? " (override)" : "") << "\n";
  os << "mu: " << r.mu << "\n";
  os << "probability bound: " << r.probability_bound.str() << " = " << decimal_string(r.probability_bound, 6) << "...\n";
  os << "solver: " << to_string(r.solver) << ", " << r.coefficients << " coefficients";
  if (r.solver == SolverKind::Newton) os << ", " << r.newton_steps << " Newton steps";
  os << "\n";
  std::vector<std::string> ranks;
  for (auto k : r.block_ranks) ranks.push_back(std::to_string(k));
  os << "block ranks: " << join(ranks, " ") << "\n";
  os << "nu: " << r.nu << "\n";
  os << "rank: " << r.rank << "\n";
  os << "phi: " << r.phi << "\n";
  os << "certified: " << (r.certified ? "yes" : "no") << "\n";
  os << "observable: " << join(r.observable) << "\n";
  os << "non-observable: " << join(r.non_observable) << "\n";
  if (!r.assumed_known.empty()) os << "assumed known: " << join(r.assumed_known) << "\n";
  return os.str();
}

}  // namespace obsv
