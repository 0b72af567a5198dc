#include "wellposed/constraint.hpp"

#include <cctype>
#include <stdexcept>

namespace wellposed {

ExprPtr Expr::num(Rational v) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Num;
  e->value = v;
  return e;
}

ExprPtr Expr::var(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Var;
  e->name = std::move(name);
  return e;
}

ExprPtr Expr::arith(ArithOp op, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Arith;
  e->arith_op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

Constraint Expr::cmp(CmpOp op, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Cmp;
  e->cmp_op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Kind::Num:
      return a->value == b->value;
    case Expr::Kind::Var:
      return a->name == b->name;
    case Expr::Kind::Arith:
      return a->arith_op == b->arith_op && expr_equal(a->lhs, b->lhs) && expr_equal(a->rhs, b->rhs);
    case Expr::Kind::Cmp:
      return a->cmp_op == b->cmp_op && expr_equal(a->lhs, b->lhs) && expr_equal(a->rhs, b->rhs);
  }
  return false;
}

namespace {

bool ident_start(char c) {
  return isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool ident_cont(char c) {
  return isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

bool is_valid_var_name(std::string_view name) {
  if (name.empty() || !ident_start(name[0])) return false;
  for (size_t i = 1; i < name.size(); ++i) {
    char c = name[i];
    if (!(ident_cont(c) || c == '-')) return false;
  }
  return name.back() != '-';
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

struct Token {
  enum class Kind { Num, Ident, Plus, Minus, Star, Slash, LParen, RParen, Cmp, End };
  Kind kind;
  Rational value;    // Num
  std::string text;  // Ident / Cmp
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < s_.size() && isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ >= s_.size()) {
      tok_ = {Token::Kind::End, Rational(), ""};
      return;
    }
    char c = s_[pos_];
    // Unicode operator aliases the wire format tolerates: − (U+2212),
    // × (U+00D7 / U+2715), ÷ (U+00F7).
    if (consume_utf8("−", Token::Kind::Minus) || consume_utf8("×", Token::Kind::Star) ||
        consume_utf8("✕", Token::Kind::Star) || consume_utf8("÷", Token::Kind::Slash)) {
      return;
    }
    if (isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < s_.size() && isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ + 1 < s_.size() && s_[pos_] == '.' && isdigit(static_cast<unsigned char>(s_[pos_ + 1]))) {
        ++pos_;
        while (pos_ < s_.size() && isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
      auto v = Rational::parse_decimal(s_.substr(start, pos_ - start));
      if (!v) throw ParseError("bad numeric literal '" + std::string(s_.substr(start, pos_ - start)) + "'");
      tok_ = {Token::Kind::Num, *v, ""};
      return;
    }
    if (ident_start(c)) {
      size_t start = pos_++;
      while (pos_ < s_.size()) {
        char k = s_[pos_];
        if (ident_cont(k)) {
          ++pos_;
        } else if (k == '-' && pos_ + 1 < s_.size() && ident_cont(s_[pos_ + 1])) {
          // Hyphen joins identifier parts only when glued on both sides,
          // so `a - b` and `a -b` stay subtractions while `a-b` is a name.
          pos_ += 2;
        } else {
          break;
        }
      }
      tok_ = {Token::Kind::Ident, Rational(), std::string(s_.substr(start, pos_ - start))};
      return;
    }
    switch (c) {
      case '+': ++pos_; tok_ = {Token::Kind::Plus, Rational(), ""}; return;
      case '-': ++pos_; tok_ = {Token::Kind::Minus, Rational(), ""}; return;
      case '*': ++pos_; tok_ = {Token::Kind::Star, Rational(), ""}; return;
      case '/': ++pos_; tok_ = {Token::Kind::Slash, Rational(), ""}; return;
      case '(': ++pos_; tok_ = {Token::Kind::LParen, Rational(), ""}; return;
      case ')': ++pos_; tok_ = {Token::Kind::RParen, Rational(), ""}; return;
      default: break;
    }
    if (c == '=' || c == '<' || c == '>' || c == '!') {
      std::string op(1, c);
      ++pos_;
      if (pos_ < s_.size() && s_[pos_] == '=') {
        op += '=';
        ++pos_;
      }
      if (op == "=") op = "==";  // tolerate single '=' on input
      if (op == "!") throw ParseError("stray '!'");
      tok_ = {Token::Kind::Cmp, Rational(), op};
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'");
  }

  bool consume_utf8(std::string_view seq, Token::Kind kind) {
    if (s_.substr(pos_).substr(0, seq.size()) != seq) return false;
    pos_ += seq.size();
    tok_ = {kind, Rational(), ""};
    return true;
  }

  std::string_view s_;
  size_t pos_ = 0;
  Token tok_;
};

// ---------------------------------------------------------------------------
// Recursive-descent parser: cmp is the (single, non-chaining) top level;
// * and / bind over + and -; all arithmetic is left-associative.

class Parser {
 public:
  explicit Parser(std::string_view s) : lex_(s) {}

  Constraint parse_constraint() {
    ExprPtr lhs = parse_additive();
    if (lex_.peek().kind != Token::Kind::Cmp) throw ParseError("expected a comparison operator");
    CmpOp op = cmp_from(lex_.take().text);
    ExprPtr rhs = parse_additive();
    if (lex_.peek().kind == Token::Kind::Cmp) throw ParseError("chained comparison");
    if (lex_.peek().kind != Token::Kind::End) throw ParseError("trailing input after constraint");
    return Expr::cmp(op, std::move(lhs), std::move(rhs));
  }

 private:
  static CmpOp cmp_from(const std::string& s) {
    if (s == "==") return CmpOp::Eq;
    if (s == ">=") return CmpOp::Ge;
    if (s == "<=") return CmpOp::Le;
    if (s == ">") return CmpOp::Gt;
    if (s == "<") return CmpOp::Lt;
    if (s == "!=") return CmpOp::Ne;
    throw ParseError("unknown comparison '" + s + "'");
  }

  ExprPtr parse_additive() {
    ExprPtr e = parse_multiplicative();
    while (true) {
      auto k = lex_.peek().kind;
      if (k == Token::Kind::Plus || k == Token::Kind::Minus) {
        lex_.take();
        e = Expr::arith(k == Token::Kind::Plus ? ArithOp::Add : ArithOp::Sub, e, parse_multiplicative());
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_multiplicative() {
    ExprPtr e = parse_unary();
    while (true) {
      auto k = lex_.peek().kind;
      if (k == Token::Kind::Star || k == Token::Kind::Slash) {
        lex_.take();
        e = Expr::arith(k == Token::Kind::Star ? ArithOp::Mul : ArithOp::Div, e, parse_unary());
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_unary() {
    if (lex_.peek().kind == Token::Kind::Minus) {
      lex_.take();
      ExprPtr e = parse_unary();
      if (e->kind == Expr::Kind::Num) return Expr::num(-e->value);
      return Expr::arith(ArithOp::Sub, Expr::num(Rational(0)), e);
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    Token t = lex_.take();
    switch (t.kind) {
      case Token::Kind::Num:
        return Expr::num(t.value);
      case Token::Kind::Ident:
        if (!is_valid_var_name(t.text)) throw ParseError("invalid variable name '" + t.text + "'");
        return Expr::var(t.text);
      case Token::Kind::LParen: {
        ExprPtr e = parse_additive();
        if (lex_.peek().kind != Token::Kind::RParen) throw ParseError("missing ')'");
        lex_.take();
        return e;
      }
      case Token::Kind::End:
        throw ParseError("unexpected end of expression");
      default:
        throw ParseError("unexpected token");
    }
  }

  Lexer lex_;
};

std::string strip_comment(std::string_view line) {
  size_t h = line.find('#');
  if (h != std::string_view::npos) line = line.substr(0, h);
  size_t b = line.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  size_t e = line.find_last_not_of(" \t\r\n");
  return std::string(line.substr(b, e - b + 1));
}

bool has_cmp_token(std::string_view s) {
  return s.find_first_of("<>!=") != std::string_view::npos;
}

// Extracts the argument of a `solver.add(...)` call, balancing parentheses.
std::optional<std::string> solver_add_payload(const std::string& line, std::string* reason) {
  size_t at = line.find("solver.add");
  if (at == std::string::npos) return std::nullopt;
  size_t open = line.find('(', at);
  if (open == std::string::npos) {
    *reason = "solver.add without '('";
    return std::nullopt;
  }
  int depth = 0;
  for (size_t i = open; i < line.size(); ++i) {
    if (line[i] == '(') ++depth;
    if (line[i] == ')') {
      --depth;
      if (depth == 0) return line.substr(open + 1, i - open - 1);
    }
  }
  *reason = "unbalanced parentheses in solver.add(...)";
  return std::nullopt;
}

}  // namespace

ParseResult parse_constraints(std::string_view text) {
  ParseResult result;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    std::string line = strip_comment(raw);
    if (line.empty()) continue;

    std::string reason;
    std::string payload;
    if (auto p = solver_add_payload(line, &reason)) {
      payload = *p;
    } else if (!reason.empty()) {
      result.diagnostics.push_back({line_no, std::string(raw), reason});
      continue;
    } else if (has_cmp_token(line)) {
      payload = line;  // bare constraint line
    } else {
      continue;  // prose
    }

    try {
      result.constraints.push_back(Parser(payload).parse_constraint());
    } catch (const ParseError& e) {
      result.diagnostics.push_back({line_no, std::string(raw), e.what()});
    } catch (const RationalOverflow&) {
      result.diagnostics.push_back({line_no, std::string(raw), "numeric literal out of range"});
    }
  }
  return result;
}

namespace {

void collect_vars(const ExprPtr& e, std::set<std::string>& out) {
  if (!e) return;
  if (e->kind == Expr::Kind::Var) {
    out.insert(e->name);
    return;
  }
  collect_vars(e->lhs, out);
  collect_vars(e->rhs, out);
}

int precedence(const ExprPtr& e) {
  if (e->kind != Expr::Kind::Arith) return 3;
  return (e->arith_op == ArithOp::Mul || e->arith_op == ArithOp::Div) ? 2 : 1;
}

const char* arith_text(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
    case ArithOp::Div: return "/";
  }
  return "?";
}

const char* cmp_text(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ge: return ">=";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Lt: return "<";
    case CmpOp::Ne: return "!=";
  }
  return "?";
}

std::string render_arith(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::Num:
      return e->value.to_decimal_string();
    case Expr::Kind::Var:
      return e->name;
    case Expr::Kind::Arith: {
      int prec = precedence(e);
      std::string l = render_arith(e->lhs);
      std::string r = render_arith(e->rhs);
      if (precedence(e->lhs) < prec) l = "(" + l + ")";
      // Operators are left-associative, so a right operand at equal
      // precedence always needs parentheses to survive re-parsing.
      if (precedence(e->rhs) <= prec) r = "(" + r + ")";
      return l + " " + arith_text(e->arith_op) + " " + r;
    }
    case Expr::Kind::Cmp:
      break;
  }
  throw std::logic_error("comparison nested inside arithmetic");
}

}  // namespace

std::set<std::string> vars(const Constraint& c) {
  std::set<std::string> out;
  collect_vars(c, out);
  return out;
}

std::set<std::string> vars_of(const std::vector<Constraint>& cs) {
  std::set<std::string> out;
  for (const auto& c : cs) collect_vars(c, out);
  return out;
}

std::string render_expr(const ExprPtr& e) {
  if (e->kind == Expr::Kind::Cmp) {
    return render_arith(e->lhs) + " " + cmp_text(e->cmp_op) + " " + render_arith(e->rhs);
  }
  return render_arith(e);
}

std::string render_constraint(const Constraint& c) {
  return "solver.add(" + render_expr(c) + ")";
}

}  // namespace wellposed
