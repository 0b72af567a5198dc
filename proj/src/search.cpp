#include "wellposed/search.hpp"

#include <algorithm>
#include <map>

namespace wellposed {

SearchEngine::SearchEngine(LlmSession& llm, const SmtSolver& solver, SearchConfig cfg)
    : llm_(llm), solver_(solver), cfg_(cfg) {
  if (cfg_.passes < 1 || cfg_.max_queue == 0 || cfg_.max_llm_calls < 1) {
    throw std::invalid_argument("search config caps must be positive");
  }
}

ModelingState SearchEngine::initialize(const std::string& problem) {
  InitializerModel draft = llm_.call_initializer(problem);

  ModelingState state;
  for (const auto& v : draft.variables) state.append_var(v);
  state.pool = draft.constraints;
  state.goal = draft.goal;
  state.absorb_pool_vars();

  if (!state.pool.empty()) {
    SolveOutcome check = solver_.classify(state);
    bool keep = cfg_.draft_requires_ans ? check.kind == OutcomeKind::Ans : check.definitive();
    if (!keep) state.pool.clear();
  }
  return state;
}

namespace {

bool same_constraint_set(const std::vector<Constraint>& a, const std::vector<Constraint>& b) {
  if (a.size() != b.size()) return false;
  std::vector<std::string> ra, rb;
  for (const auto& c : a) ra.push_back(render_constraint(c));
  for (const auto& c : b) rb.push_back(render_constraint(c));
  std::sort(ra.begin(), ra.end());
  std::sort(rb.begin(), rb.end());
  return ra == rb;
}

void order_by_frequency(ModelingState& state) {
  std::map<std::string, size_t> counts;
  for (const auto& c : state.pool) {
    for (const auto& v : vars(c)) ++counts[v];
  }
  std::stable_sort(state.queue.begin(), state.queue.end(),
                   [&](const std::string& a, const std::string& b) {
                     size_t ca = counts.count(a) ? counts[a] : 0;
                     size_t cb = counts.count(b) ? counts[b] : 0;
                     return ca > cb;
                   });
}

}  // namespace

bool SearchEngine::budget_left(int upcoming_calls, SearchTrace& trace) const {
  if (llm_.calls() + upcoming_calls <= cfg_.max_llm_calls) return true;
  trace.truncated = true;
  trace.truncation_reason = "llm-call cap reached";
  return false;
}

void SearchEngine::step(const std::string& problem, ModelingState& state, SearchTrace& trace) {
  StepRecord record;
  record.head = state.head();
  record.head_constraints = related_constraints(state, record.head);

  ExplorerResult explored = llm_.call_explorer(problem, record.head, record.head_constraints,
                                               state.pool, state.queue);
  record.refined = explored.constraints;

  // Missing marker, transport failure or an unchanged refinement all keep
  // the original state; only the cursor moves.
  if (!explored.marker_found || same_constraint_set(record.refined, record.head_constraints)) {
    state.explored += 1;
    trace.steps.push_back(std::move(record));
    return;
  }
  record.changed = true;

  // A refinement whose new variables would blow the queue cap is refused
  // outright; taking it would leave pool constraints over undeclared
  // variables.
  std::vector<std::string> incoming;
  for (const auto& v : vars_of(record.refined)) {
    if (!state.in_queue(v)) incoming.push_back(v);
  }
  if (state.queue.size() + incoming.size() > cfg_.max_queue) {
    trace.truncated = true;
    trace.truncation_reason = "queue cap reached";
    state.explored += 1;
    trace.steps.push_back(std::move(record));
    return;
  }

  // Candidate: (C \ Ch) u C~h, new variables appended at the queue tail.
  ModelingState candidate = state;
  candidate.pool.clear();
  for (const auto& c : state.pool) {
    bool in_head = std::any_of(record.head_constraints.begin(), record.head_constraints.end(),
                               [&](const Constraint& h) { return expr_equal(h, c); });
    if (in_head) {
      record.removed.push_back(render_constraint(c));
    } else {
      candidate.pool.push_back(c);
    }
  }
  for (const auto& c : record.refined) candidate.pool.push_back(c);
  for (const auto& v : incoming) {
    candidate.append_var(v);
    record.new_vars.push_back(v);
  }

  if (!budget_left(1, trace)) {
    state.explored += 1;
    trace.steps.push_back(std::move(record));
    return;
  }

  record.judged = true;
  record.original_outcome = solver_.classify(state);
  record.candidate_outcome = solver_.classify(candidate);
  record.verdict = llm_.call_judge(problem, record.head, state, record.original_outcome, candidate,
                                   record.candidate_outcome);
  record.took_new = record.verdict == JudgeVerdict::TakeNew;

  if (record.took_new) {
    candidate.explored = state.explored + 1;
    state = std::move(candidate);
  } else {
    state.explored += 1;
  }
  trace.steps.push_back(std::move(record));
}

SearchResult SearchEngine::run_search(const std::string& problem) {
  SearchResult result;
  try {
    result.state = initialize(problem);
  } catch (const EmptyModelError&) {
    result.unmodelable = true;
    result.outcome = SolveOutcome::make_error("unmodelable: initializer produced no variables");
    result.trace.llm_calls = llm_.calls();
    return result;
  }

  for (int pass = 0; pass < cfg_.passes; ++pass) {
    result.state.explored = 0;
    if (cfg_.order == SearchConfig::Order::Frequency) order_by_frequency(result.state);
    while (result.state.has_unexplored()) {
      if (!budget_left(1, result.trace)) break;
      step(problem, result.state, result.trace);
    }
    if (result.trace.truncated && result.trace.truncation_reason == "llm-call cap reached") break;
  }

  result.outcome = solver_.classify(result.state);
  result.trace.llm_calls = llm_.calls();
  return result;
}

}  // namespace wellposed
