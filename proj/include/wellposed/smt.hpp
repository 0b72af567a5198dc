#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wellposed/state.hpp"

namespace wellposed {

struct SolverConfig {
  std::vector<std::string> command;  // argv; empty -> discover_solver_command()
  double timeout_s = 10.0;           // per check-sat call
  std::string logic = "QF_NRA";
  // When set, the uniqueness re-check blocks the entire model instead of the
  // goal value only (ablation knob).
  bool block_full_assignment = false;
};

// Default solver lookup: $WELLPOSED_SOLVER, then a minismt binary next to
// the running executable, then z3 on PATH.
std::vector<std::string> discover_solver_command();

enum class OutcomeKind { Error, Unsat, Multi, Ans };

const char* outcome_name(OutcomeKind k);

// Four-way verdict of the formal layer. Error reasons are prefixed with
// "timeout:", "process:" or "parse:" so callers can tell them apart.
struct SolveOutcome {
  OutcomeKind kind = OutcomeKind::Error;
  std::string error;
  std::map<std::string, Rational> assignment;  // Ans: every declared variable

  bool definitive() const { return kind != OutcomeKind::Error; }

  static SolveOutcome make_error(std::string reason);
  static SolveOutcome unsat() { return {OutcomeKind::Unsat, "", {}}; }
  static SolveOutcome multi() { return {OutcomeKind::Multi, "", {}}; }
  static SolveOutcome ans(std::map<std::string, Rational> a);

  // One-line rendering used in judge prompts and CLI output.
  std::string describe(const std::string& goal) const;
};

// SMT-LIB v2 script for the state: set-logic, one declare-const per queue
// variable (in queue order), one assert per pool constraint (in pool order),
// optional extra assertions, then check-sat + get-model. Deterministic for
// equal states.
std::string emit_smtlib(const ModelingState& state, const SolverConfig& cfg = {},
                        const std::vector<std::string>& extra_asserts = {});

// Lowers one constraint to an SMT-LIB term.
std::string smt_term(const ExprPtr& e);

enum class CheckStatus { Sat, Unsat, Error };

struct CheckResult {
  CheckStatus status = CheckStatus::Error;
  std::map<std::string, Rational> model;  // Sat only
  std::string error;
};

class SmtSolver {
 public:
  explicit SmtSolver(SolverConfig cfg = {});

  const SolverConfig& config() const { return cfg_; }

  CheckResult check(const ModelingState& state,
                    const std::vector<std::string>& extra_asserts = {}) const;
  CheckResult check_script(const std::string& script) const;

  // Double-check strategy: satisfiability first, then goal uniqueness via a
  // blocking disequality on the goal value found by the first model.
  SolveOutcome classify(const ModelingState& state) const;

 private:
  SolverConfig cfg_;
};

// Parses a solver's check-sat + get-model output. Accepts both bare
// "(...)" model lists and "(model ...)" wrappers; values may be integer,
// decimal, (/ p q) or (- x) terms.
std::optional<std::map<std::string, Rational>> parse_model(const std::string& text,
                                                           std::string* error);

}  // namespace wellposed
