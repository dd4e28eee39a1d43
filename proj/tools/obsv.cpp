// Command-line front end: check, bounds, verify-symmetry.
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "obsv/obsv.hpp"

namespace {

enum Exit : int { kOk = 0, kParse = 1, kDegenerate = 2, kUsage = 3, kRejected = 4 };

struct Options {
  std::string model_path;
  std::string group_path;
  std::uint64_t mu = 3000;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> prime;
  bool force = false;
  std::vector<std::string> assume_known;
  std::string format = "text";
  std::size_t trials = 20;
  std::string solver = "newton";
  std::string nu_rule = "expected-rank";
  bool cross_check = false;
};

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32U) ^ rd();
}

obsv::RunConfig run_config(const Options& o, std::uint64_t seed) {
  obsv::RunConfig cfg;
  cfg.mu = o.mu;
  cfg.seed = seed;
  cfg.prime = o.prime;
  cfg.force = o.force;
  cfg.assume_known = o.assume_known;
  cfg.solver = o.solver == "recurrence" ? obsv::SolverKind::Recurrence : obsv::SolverKind::Newton;
  cfg.nu_rule = o.nu_rule == "stationary"     ? obsv::NuRule::Stationary
                : o.nu_rule == "first-repeat" ? obsv::NuRule::FirstRepeat
                                              : obsv::NuRule::ExpectedRank;
  return cfg;
}

void warn_override(const Options& o) {
  if (!o.prime) return;
  std::cerr << "WARNING: prime overridden to " << *o.prime
            << "; the probability bound below no longer holds for this run\n";
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_check(const Options& o) {
  const std::uint64_t seed = o.seed.value_or(entropy_seed());
  const obsv::Model model = obsv::load_model(o.model_path);
  warn_override(o);
  const obsv::ObservabilityReport rep = obsv::run_test(model, run_config(o, seed));
  print_warnings(rep.warnings);
  if (o.format == "json") {
    std::cout << obsv::to_json(rep).dump(2) << "\n";
  } else {
    std::cout << obsv::to_text(rep);
  }
  return kOk;
}

int cmd_bounds(const Options& o) {
  const obsv::Model model = obsv::load_model(o.model_path);
  const obsv::ModelMetrics mm = obsv::measure_metrics(model);
  print_warnings(mm.warnings);
  const obsv::Bounds b = obsv::compute_bounds(mm, o.mu);
  warn_override(o);
  obsv::RunConfig cfg = run_config(o, 0);
  const obsv::PrimeField f = obsv::working_prime(b, cfg);
  const obsv::Rational bound = obsv::probability_bound(o.mu);
  if (o.format == "json") {
    nlohmann::ordered_json j;
    j["model"] = model.name;
    j["n"] = mm.n;
    j["l"] = mm.l;
    j["r"] = mm.r;
    j["m"] = mm.m;
    j["d"] = mm.d;
    j["h"] = mm.h;
    j["L"] = mm.L;
    j["D"] = b.D.str();
    j["D_prime"] = b.Dprime.str();
    j["p"] = f.modulus();
    j["mu"] = o.mu;
    j["probability_bound"] = bound.convert_to<double>();
    std::cout << j.dump(2) << "\n";
    return kOk;
  }
  std::cout << "model: " << model.name << "\n"
            << "n=" << mm.n << " l=" << mm.l << " r=" << mm.r << " m=" << mm.m << "\n"
            << "d=" << mm.d << " h=" << mm.h << " L=" << mm.L << "\n"
            << "D=" << b.D.str() << "\n"
            << "D'=" << b.Dprime.str() << "\n"
            << "p=" << f.modulus() << (o.prime ? " (override)" : "") << "\n"
            << "mu=" << o.mu << "\n"
            << "probability bound: " << bound.str() << " = " << obsv::decimal_string(bound, 6) << "...\n";
  return kOk;
}

int cmd_verify(const Options& o) {
  const std::uint64_t seed = o.seed.value_or(entropy_seed());
  const obsv::Model model = obsv::load_model(o.model_path);
  const obsv::GroupAction action = obsv::load_group(o.group_path, model);
  const obsv::ModelMetrics mm = obsv::measure_metrics(model);
  const obsv::Bounds b = obsv::compute_bounds(mm, o.mu);
  warn_override(o);
  const obsv::PrimeField f = obsv::working_prime(b, run_config(o, seed));
  const obsv::SymmetryVerdict v = obsv::verify_symmetry(model, action, f, o.trials, seed);

  std::vector<std::string> moved;
  if (o.cross_check) {
    const auto rep = obsv::run_test(model, run_config(o, seed));
    moved = obsv::moved_observable(action, rep.observable);
    if (!moved.empty()) {
      std::cerr << "warning: the action moves symbols classified observable: " << obsv::join(moved) << "\n";
    }
  }

  if (o.format == "json") {
    nlohmann::ordered_json j;
    j["model"] = model.name;
    j["p"] = f.modulus();
    j["mu"] = o.mu;
    j["seed"] = seed;
    j["lambdas"] = action.lambdas;
    j["trials"] = v.trials;
    j["accepted"] = v.accepted;
    if (v.witness) {
      nlohmann::ordered_json w;
      w["equation"] = v.witness->equation;
      w["lhs"] = v.witness->lhs;
      w["rhs"] = v.witness->rhs;
      w["point"] = v.witness->point;
      j["witness"] = w;
    }
    if (o.cross_check) j["moved_observable"] = moved;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "model: " << model.name << "\n"
              << "seed: " << seed << "\n"
              << "prime: " << f.modulus() << (o.prime ? " (override)" : "") << "\n"
              << "mu: " << o.mu << "\n"
              << "group parameters: " << obsv::join(action.lambdas) << "\n"
              << "trials: " << v.trials << "\n"
              << "verdict: " << (v.accepted ? "accepted" : "rejected") << "\n";
    if (v.witness) {
      std::cout << "witness: " << v.witness->equation << " fails, " << v.witness->lhs << " != " << v.witness->rhs
                << " (mod p)\n";
      for (const auto& [name, value] : v.witness->point) std::cout << "  " << name << " = " << value << "\n";
    }
  }
  return v.accepted ? kOk : kRejected;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local algebraic observability of rational ODE models"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* sub) {
    sub->add_option("model", o.model_path, "model file")->required();
    sub->add_option("--mu", o.mu, "probability parameter (>= 2)")->default_val(3000);
    sub->add_option("--prime", o.prime, "use this prime instead of the selected one");
    sub->add_flag("--force", o.force, "accept a prime override below the bound");
    sub->add_option("--format", o.format, "output format")->check(CLI::IsMember({"text", "json"}))->default_val("text");
  };

  CLI::App* check = app.add_subcommand("check", "classify states and parameters");
  common(check);
  check->add_option("--seed", o.seed, "random seed (default: from the OS, echoed)");
  check->add_option("--assume-known", o.assume_known, "treat these symbols as known")->delimiter(',');
  check->add_option("--solver", o.solver, "series solver")->check(CLI::IsMember({"newton", "recurrence"}));
  check->add_option("--nu-rule", o.nu_rule, "truncation rule")
      ->check(CLI::IsMember({"expected-rank", "stationary", "first-repeat"}));

  CLI::App* bounds = app.add_subcommand("bounds", "print sizes, bounds and the selected prime");
  common(bounds);

  CLI::App* verify = app.add_subcommand("verify-symmetry", "check a group action against a model");
  common(verify);
  verify->add_option("group", o.group_path, "group file")->required();
  verify->add_option("--seed", o.seed, "random seed (default: from the OS, echoed)");
  verify->add_option("--trials", o.trials, "random points to test")->default_val(20);
  verify->add_flag("--cross-check", o.cross_check, "also run the observability check and compare");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (o.mu < 2) throw std::invalid_argument("mu must be at least 2");
    if (check->parsed()) return cmd_check(o);
    if (bounds->parsed()) return cmd_bounds(o);
    return cmd_verify(o);
  } catch (const obsv::FileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const obsv::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const obsv::DegeneracyError& e) {
    std::cerr << "degenerate: " << e.what() << "\n";
    return kDegenerate;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDegenerate;
  }
}
