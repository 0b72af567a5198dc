#pragma once

#include <string>
#include <vector>

#include "wellposed/llm.hpp"
#include "wellposed/smt.hpp"
#include "wellposed/state.hpp"

namespace wellposed {

struct SearchConfig {
  int passes = 1;  // T: full sweeps over the variable queue
  enum class Order { Appearance, Frequency } order = Order::Appearance;
  size_t max_queue = 50;
  int max_llm_calls = 40;
  // Anchored initialization keeps the draft constraint pool when the solver
  // returns any definitive status; set to true to require Ans specifically.
  bool draft_requires_ans = false;
};

struct StepRecord {
  std::string head;
  std::vector<Constraint> head_constraints;  // Ch
  std::vector<Constraint> refined;           // C~h after the head filter
  bool changed = false;   // refinement differed from Ch
  bool judged = false;    // classify+judge ran (skipped when unchanged)
  SolveOutcome original_outcome;
  SolveOutcome candidate_outcome;
  JudgeVerdict verdict = JudgeVerdict::KeepOriginal;
  bool took_new = false;
  std::vector<std::string> new_vars;  // appended to the queue tail
  std::vector<std::string> removed;   // rendered constraints removed from the pool
};

struct SearchTrace {
  std::vector<StepRecord> steps;
  bool truncated = false;
  std::string truncation_reason;
  int llm_calls = 0;
};

struct SearchResult {
  ModelingState state;
  SolveOutcome outcome;
  SearchTrace trace;
  bool unmodelable = false;  // initializer produced no variables
};

// Iterative refinement over the variable queue: each step takes the first
// unexplored variable as head, asks the explorer for polished constraints,
// classifies both states and lets the judge pick one. New variables join the
// queue tail; the loop ends when every queue variable has been explored (per
// pass) or a cap is hit.
class SearchEngine {
 public:
  SearchEngine(LlmSession& llm, const SmtSolver& solver, SearchConfig cfg = {});

  // Anchored initialization: LLM draft, kept whole only when the solver can
  // make sense of it, otherwise stripped to its variable set.
  // Throws EmptyModelError when no variables can be extracted.
  ModelingState initialize(const std::string& problem);

  // One Preparation -> Exploration -> Verification iteration on the current
  // head. Advances the explored cursor.
  void step(const std::string& problem, ModelingState& state, SearchTrace& trace);

  SearchResult run_search(const std::string& problem);

 private:
  bool budget_left(int upcoming_calls, SearchTrace& trace) const;

  LlmSession& llm_;
  const SmtSolver& solver_;
  SearchConfig cfg_;
};

}  // namespace wellposed
