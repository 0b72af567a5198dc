#include "wellposed/router.hpp"

namespace wellposed {

const char* reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::Unsat: return "unsat";
    case RejectReason::Multi: return "multi";
    case RejectReason::Error: return "error";
    case RejectReason::Unmodelable: return "unmodelable";
  }
  return "?";
}

const char* answer_source_name(AnswerSource s) {
  switch (s) {
    case AnswerSource::Smt: return "smt";
    case AnswerSource::Cot: return "cot";
    case AnswerSource::Pal: return "pal";
    case AnswerSource::Basic: return "basic";
  }
  return "?";
}

namespace {

AnswerSource source_of(DownstreamMethod m) {
  switch (m) {
    case DownstreamMethod::Cot: return AnswerSource::Cot;
    case DownstreamMethod::Pal: return AnswerSource::Pal;
    case DownstreamMethod::Basic: return AnswerSource::Basic;
  }
  return AnswerSource::Basic;
}

}  // namespace

Decision route(const SolveOutcome& outcome, const std::string& goal, RouteMode mode,
               const std::string& problem, LlmSession* llm) {
  Decision decision;
  switch (outcome.kind) {
    case OutcomeKind::Unsat:
      decision.rejected = true;
      decision.reason = RejectReason::Unsat;
      return decision;
    case OutcomeKind::Multi:
      decision.rejected = true;
      decision.reason = RejectReason::Multi;
      return decision;
    case OutcomeKind::Error:
      decision.rejected = true;
      decision.reason = outcome.error.rfind("unmodelable", 0) == 0 ? RejectReason::Unmodelable
                                                                   : RejectReason::Error;
      decision.diagnostic = outcome.error;
      return decision;
    case OutcomeKind::Ans:
      break;
  }

  auto it = outcome.assignment.find(goal);
  Rational smt_value = it == outcome.assignment.end() ? Rational(0) : it->second;

  if (mode.hybrid && llm != nullptr) {
    DownstreamResult down = llm->call_downstream(problem, mode.method);
    if (!down.reject) {
      decision.value = down.answer;
      decision.source = source_of(mode.method);
      return decision;
    }
    decision.diagnostic = "downstream rejected (" + down.diagnostic + "); using solver value";
  }
  decision.value = smt_value;
  decision.source = AnswerSource::Smt;
  return decision;
}

}  // namespace wellposed
