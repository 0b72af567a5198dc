#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wellposed/rational.hpp"

namespace wellposed {

enum class ArithOp { Add, Sub, Mul, Div };
enum class CmpOp { Eq, Ge, Le, Gt, Lt, Ne };

// Immutable expression tree. A Constraint is an Expr rooted at a Cmp node;
// arithmetic nodes never contain comparisons below them.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;
using Constraint = ExprPtr;

struct Expr {
  enum class Kind { Num, Var, Arith, Cmp };

  Kind kind;
  Rational value;      // Num
  std::string name;    // Var
  ArithOp arith_op{};  // Arith
  CmpOp cmp_op{};      // Cmp
  ExprPtr lhs, rhs;    // Arith / Cmp

  static ExprPtr num(Rational v);
  static ExprPtr var(std::string name);
  static ExprPtr arith(ArithOp op, ExprPtr l, ExprPtr r);
  static Constraint cmp(CmpOp op, ExprPtr l, ExprPtr r);
};

bool expr_equal(const ExprPtr& a, const ExprPtr& b);

// Variable-name rules: [A-Za-z_][A-Za-z0-9_-]*, case-sensitive. Hyphens are
// identifier characters when directly followed by another identifier
// character; a freestanding '-' is the subtraction/negation operator.
bool is_valid_var_name(std::string_view name);

struct ParseDiagnostic {
  int line_no = 0;  // 1-based within the parsed text
  std::string line;
  std::string reason;
};

struct ParseResult {
  std::vector<Constraint> constraints;
  std::vector<ParseDiagnostic> diagnostics;
};

// Parses the constraint wire format: one constraint per line, either
// `solver.add(<expr>)` or a bare `<expr>` containing a comparison. `#` starts
// a comment (whole-line or trailing). Prose lines without a comparison are
// skipped; candidate lines that fail to parse become diagnostics. Never
// throws on any input.
ParseResult parse_constraints(std::string_view text);

std::set<std::string> vars(const Constraint& c);
std::set<std::string> vars_of(const std::vector<Constraint>& cs);

// Canonical wire form, `solver.add(<expr>)` with spaced operators and
// minimal parentheses. parse_constraints(render_constraint(c)) == {c}.
std::string render_constraint(const Constraint& c);
std::string render_expr(const ExprPtr& e);

}  // namespace wellposed
