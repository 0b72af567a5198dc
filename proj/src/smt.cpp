#include "wellposed/smt.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

#include "wellposed/subprocess.hpp"

namespace wellposed {

const char* outcome_name(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Error: return "error";
    case OutcomeKind::Unsat: return "unsat";
    case OutcomeKind::Multi: return "multi";
    case OutcomeKind::Ans: return "ans";
  }
  return "?";
}

SolveOutcome SolveOutcome::make_error(std::string reason) {
  SolveOutcome o;
  o.kind = OutcomeKind::Error;
  o.error = std::move(reason);
  return o;
}

SolveOutcome SolveOutcome::ans(std::map<std::string, Rational> a) {
  SolveOutcome o;
  o.kind = OutcomeKind::Ans;
  o.assignment = std::move(a);
  return o;
}

std::string SolveOutcome::describe(const std::string& goal) const {
  switch (kind) {
    case OutcomeKind::Error:
      return "Error: " + error;
    case OutcomeKind::Unsat:
      return "UNSAT (the constraints are contradictory)";
    case OutcomeKind::Multi:
      return "Multiple solutions (the constraints do not pin down " +
             (goal.empty() ? std::string("the answer") : goal) + ")";
    case OutcomeKind::Ans: {
      auto it = assignment.find(goal);
      std::string v = it == assignment.end() ? "?" : it->second.to_display_string();
      return "Unique solution: " + goal + " = " + v;
    }
  }
  return "?";
}

std::vector<std::string> discover_solver_command() {
  if (const char* env = std::getenv("WELLPOSED_SOLVER"); env && *env) return split_command(env);
  std::string dir = executable_dir();
  if (!dir.empty()) {
    for (const char* rel : {"/minismt", "/../minismt", "/../tools/minismt"}) {
      std::string candidate = dir + rel;
      if (::access(candidate.c_str(), X_OK) == 0) return {candidate};
    }
  }
  return {"z3", "-in"};
}

std::string smt_term(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::Num:
      return e->value.to_smt();
    case Expr::Kind::Var:
      return e->name;
    case Expr::Kind::Arith: {
      const char* op = "?";
      switch (e->arith_op) {
        case ArithOp::Add: op = "+"; break;
        case ArithOp::Sub: op = "-"; break;
        case ArithOp::Mul: op = "*"; break;
        case ArithOp::Div: op = "/"; break;
      }
      return std::string("(") + op + " " + smt_term(e->lhs) + " " + smt_term(e->rhs) + ")";
    }
    case Expr::Kind::Cmp: {
      std::string l = smt_term(e->lhs), r = smt_term(e->rhs);
      switch (e->cmp_op) {
        case CmpOp::Eq: return "(= " + l + " " + r + ")";
        case CmpOp::Ge: return "(>= " + l + " " + r + ")";
        case CmpOp::Le: return "(<= " + l + " " + r + ")";
        case CmpOp::Gt: return "(> " + l + " " + r + ")";
        case CmpOp::Lt: return "(< " + l + " " + r + ")";
        case CmpOp::Ne: return "(not (= " + l + " " + r + "))";
      }
    }
  }
  throw std::logic_error("unreachable expression kind");
}

std::string emit_smtlib(const ModelingState& state, const SolverConfig& cfg,
                        const std::vector<std::string>& extra_asserts) {
  std::ostringstream out;
  out << "(set-logic " << cfg.logic << ")\n";
  for (const auto& v : state.queue) out << "(declare-const " << v << " Real)\n";
  for (const auto& c : state.pool) out << "(assert " << smt_term(c) << ")\n";
  for (const auto& a : extra_asserts) out << "(assert " << a << ")\n";
  out << "(check-sat)\n(get-model)\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Model parsing

namespace {

struct SExpr {
  std::string atom;
  std::vector<SExpr> list;
  bool is_atom = false;
};

bool parse_sexpr(const std::string& s, size_t& pos, SExpr& out) {
  while (pos < s.size() && isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos >= s.size()) return false;
  if (s[pos] == '(') {
    ++pos;
    out = SExpr{};
    while (true) {
      while (pos < s.size() && isspace(static_cast<unsigned char>(s[pos]))) ++pos;
      if (pos >= s.size()) return false;
      if (s[pos] == ')') {
        ++pos;
        return true;
      }
      SExpr child;
      if (!parse_sexpr(s, pos, child)) return false;
      out.list.push_back(std::move(child));
    }
  }
  size_t start = pos;
  while (pos < s.size() && !isspace(static_cast<unsigned char>(s[pos])) && s[pos] != '(' && s[pos] != ')') {
    ++pos;
  }
  out = SExpr{};
  out.is_atom = true;
  out.atom = s.substr(start, pos - start);
  return pos > start;
}

std::optional<Rational> eval_value(const SExpr& e) {
  if (e.is_atom) return Rational::parse_decimal(e.atom);
  if (e.list.empty()) return std::nullopt;
  const SExpr& head = e.list[0];
  if (!head.is_atom) return std::nullopt;
  if (head.atom == "-" && e.list.size() == 2) {
    auto v = eval_value(e.list[1]);
    if (!v) return std::nullopt;
    return -*v;
  }
  if (head.atom == "/" && e.list.size() == 3) {
    auto a = eval_value(e.list[1]);
    auto b = eval_value(e.list[2]);
    if (!a || !b || b->is_zero()) return std::nullopt;
    try {
      return *a / *b;
    } catch (const RationalOverflow&) {
      return std::nullopt;
    }
  }
  if (head.atom == "to_real" && e.list.size() == 2) return eval_value(e.list[1]);
  return std::nullopt;
}

void collect_define_funs(const SExpr& e, std::map<std::string, Rational>& model, bool* bad) {
  if (e.is_atom) return;
  if (!e.list.empty() && e.list[0].is_atom && e.list[0].atom == "define-fun" && e.list.size() >= 5) {
    const SExpr& name = e.list[1];
    const SExpr& body = e.list.back();
    if (name.is_atom) {
      auto v = eval_value(body);
      if (v) {
        model[name.atom] = *v;
      } else {
        *bad = true;  // e.g. algebraic root-obj values
      }
    }
    return;
  }
  for (const auto& child : e.list) collect_define_funs(child, model, bad);
}

}  // namespace

std::optional<std::map<std::string, Rational>> parse_model(const std::string& text,
                                                           std::string* error) {
  size_t pos = 0;
  std::map<std::string, Rational> model;
  bool bad = false;
  bool any = false;
  SExpr e;
  while (parse_sexpr(text, pos, e)) {
    any = true;
    collect_define_funs(e, model, &bad);
  }
  if (!any) {
    if (error) *error = "no model in solver output";
    return std::nullopt;
  }
  if (bad) {
    if (error) *error = "model contains values that are not rational numerals";
    return std::nullopt;
  }
  return model;
}

// ---------------------------------------------------------------------------
// Solver driver

SmtSolver::SmtSolver(SolverConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.command.empty()) cfg_.command = discover_solver_command();
  if (cfg_.timeout_s <= 0) throw std::invalid_argument("solver timeout must be positive");
}

CheckResult SmtSolver::check_script(const std::string& script) const {
  CheckResult result;
  RunResult run = run_with_input(cfg_.command, script, cfg_.timeout_s);
  if (run.timed_out) {
    result.error = "timeout: " + run.error;
    return result;
  }
  if (run.spawn_failed) {
    result.error = "process: " + run.error;
    return result;
  }

  std::istringstream out(run.out);
  std::string first;
  while (std::getline(out, first)) {
    // skip banner noise until the status token
    if (first == "sat" || first == "unsat" || first == "unknown") break;
  }
  if (first == "unsat") {
    result.status = CheckStatus::Unsat;
    return result;
  }
  if (first == "unknown") {
    result.error = "process: solver returned unknown";
    return result;
  }
  if (first != "sat") {
    std::string detail = run.err.empty() ? run.out : run.err;
    if (detail.size() > 200) detail.resize(200);
    result.error = "process: no sat/unsat in solver output (exit " +
                   std::to_string(run.exit_code) + "): " + detail;
    return result;
  }

  std::string rest((std::istreambuf_iterator<char>(out)), std::istreambuf_iterator<char>());
  std::string parse_err;
  auto model = parse_model(rest, &parse_err);
  if (!model) {
    result.error = "parse: " + parse_err;
    return result;
  }
  result.status = CheckStatus::Sat;
  result.model = std::move(*model);
  return result;
}

CheckResult SmtSolver::check(const ModelingState& state,
                             const std::vector<std::string>& extra_asserts) const {
  return check_script(emit_smtlib(state, cfg_, extra_asserts));
}

SolveOutcome SmtSolver::classify(const ModelingState& state) const {
  CheckResult first = check(state);
  if (first.status == CheckStatus::Error) return SolveOutcome::make_error(first.error);
  if (first.status == CheckStatus::Unsat) return SolveOutcome::unsat();

  auto goal_it = first.model.find(state.goal);
  if (goal_it == first.model.end()) {
    return SolveOutcome::make_error("parse: model omits goal variable " + state.goal);
  }

  std::vector<std::string> blocking;
  if (cfg_.block_full_assignment) {
    std::string conj = "(and";
    for (const auto& v : state.queue) {
      auto it = first.model.find(v);
      if (it == first.model.end()) continue;
      conj += " (= " + v + " " + it->second.to_smt() + ")";
    }
    conj += ")";
    blocking.push_back("(not " + conj + ")");
  } else {
    blocking.push_back("(not (= " + state.goal + " " + goal_it->second.to_smt() + "))");
  }

  CheckResult second = check(state, blocking);
  if (second.status == CheckStatus::Error) return SolveOutcome::make_error(second.error);
  if (second.status == CheckStatus::Sat) return SolveOutcome::multi();
  return SolveOutcome::ans(first.model);
}

}  // namespace wellposed
