#pragma once

// Shared test utilities: deterministic rng, environment lookup, and a
// constraint-AST generator for round-trip and fuzz properties.

#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "wellposed/constraint.hpp"
#include "wellposed/smt.hpp"
#include "wellposed/state.hpp"
#include "wellposed/subprocess.hpp"

namespace testutil {

struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed) {}

  uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  size_t below(size_t bound) { return static_cast<size_t>(next() % bound); }
  long long range(long long lo, long long hi) {  // inclusive
    return lo + static_cast<long long>(next() % static_cast<uint64_t>(hi - lo + 1));
  }
  bool chance(double p) { return static_cast<double>(next() % 1000000) < p * 1000000; }
};

inline wellposed::SolverConfig test_solver_config() {
  wellposed::SolverConfig cfg;
  if (const char* env = std::getenv("WELLPOSED_SOLVER"); env && *env) {
    cfg.command = wellposed::split_command(env);
  }
  return cfg;
}

inline std::string data_dir() {
  if (const char* env = std::getenv("WELLPOSED_TEST_DATA"); env && *env) return env;
  return "tests/data";
}

inline std::string prompts_dir() {
  if (const char* env = std::getenv("WELLPOSED_PROMPTS"); env && *env) return env;
  return "prompts";
}

// --- AST generator (numeric literals stay finite decimals) ------------------

inline const std::vector<std::string>& name_pool() {
  static const std::vector<std::string> pool = {
      "x",          "y",        "total-cost", "repair-cost", "a_b",
      "v1",         "profit",   "eggs-left",  "rate-2",      "net_gain",
      "first-rate", "quantity",
  };
  return pool;
}

inline wellposed::Rational gen_decimal(Rng& rng) {
  long long numerator = rng.range(-200, 200);
  static const long long dens[] = {1, 1, 1, 2, 4, 5, 10, 100};
  return wellposed::Rational(numerator, dens[rng.below(8)]);
}

inline wellposed::ExprPtr gen_arith(Rng& rng, int depth) {
  using wellposed::ArithOp;
  using wellposed::Expr;
  if (depth <= 0 || rng.chance(0.4)) {
    if (rng.chance(0.5)) return Expr::num(gen_decimal(rng));
    return Expr::var(name_pool()[rng.below(name_pool().size())]);
  }
  ArithOp op = static_cast<ArithOp>(rng.below(4));
  return Expr::arith(op, gen_arith(rng, depth - 1), gen_arith(rng, depth - 1));
}

inline wellposed::Constraint gen_constraint(Rng& rng, int depth = 3) {
  using wellposed::CmpOp;
  using wellposed::Expr;
  CmpOp op = static_cast<CmpOp>(rng.below(6));
  return Expr::cmp(op, gen_arith(rng, depth), gen_arith(rng, depth));
}

// n distinct variable names x0..x{n-1}
inline std::vector<std::string> var_names(size_t n) {
  std::vector<std::string> names;
  for (size_t i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

}  // namespace testutil
