#pragma once

#include <optional>
#include <string>

#include "wellposed/llm.hpp"
#include "wellposed/smt.hpp"

namespace wellposed {

enum class RejectReason { Unsat, Multi, Error, Unmodelable };
enum class AnswerSource { Smt, Cot, Pal, Basic };

const char* reject_reason_name(RejectReason r);
const char* answer_source_name(AnswerSource s);

struct Decision {
  bool rejected = false;
  RejectReason reason = RejectReason::Error;  // rejected only
  Rational value;                             // answered only
  AnswerSource source = AnswerSource::Smt;    // answered only
  std::string diagnostic;
};

struct RouteMode {
  bool hybrid = false;
  DownstreamMethod method = DownstreamMethod::Cot;

  static RouteMode smt_only() { return {}; }
  static RouteMode with(DownstreamMethod m) { return {true, m}; }
};

// Unsat/Multi/Error outcomes reject with the matching reason and never touch
// the downstream model. Ans answers from the solver assignment, or in hybrid
// mode from the downstream method, falling back to the solver value when the
// downstream declines.
Decision route(const SolveOutcome& outcome, const std::string& goal, RouteMode mode,
               const std::string& problem, LlmSession* llm);

}  // namespace wellposed
