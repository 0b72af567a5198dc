// minismt - a small SMT-LIB v2 solver for quantifier-free real arithmetic.
//
// Reads a script from stdin (or a file argument): set-logic, declare-const
// <name> Real, assert, check-sat, get-model, exit. Decides conjunctions of
// polynomial constraints by constant propagation, equality substitution and
// Fourier-Motzkin elimination over exact rationals; disequalities and
// negated conjunctions are handled by branching. Constraints that stay
// nonlinear after substitution yield `unknown`.
//
// Intended as the default backend for the wellposed pipeline when no full
// SMT solver (z3, cvc5) is installed; any SMT-LIB v2 solver can replace it.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

// ---------------------------------------------------------------------------
// Exact rationals

struct Overflow : std::runtime_error {
  Overflow() : std::runtime_error("overflow") {}
};

struct Rat {
  long long n = 0;
  long long d = 1;

  Rat() = default;
  Rat(long long v) : n(v) {}  // NOLINT
  Rat(__int128 nn, __int128 dd) {
    if (dd == 0) throw Overflow();
    if (dd < 0) {
      nn = -nn;
      dd = -dd;
    }
    __int128 a = nn < 0 ? -nn : nn, b = dd;
    while (b) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      nn /= a;
      dd /= a;
    }
    if (nn > INT64_MAX || nn < INT64_MIN || dd > INT64_MAX) throw Overflow();
    n = static_cast<long long>(nn);
    d = static_cast<long long>(dd);
  }

  bool zero() const { return n == 0; }
  int sign() const { return n > 0 ? 1 : (n < 0 ? -1 : 0); }

  Rat operator+(const Rat& o) const {
    return Rat((__int128)n * o.d + (__int128)o.n * d, (__int128)d * o.d);
  }
  Rat operator-(const Rat& o) const {
    return Rat((__int128)n * o.d - (__int128)o.n * d, (__int128)d * o.d);
  }
  Rat operator*(const Rat& o) const { return Rat((__int128)n * o.n, (__int128)d * o.d); }
  Rat operator/(const Rat& o) const {
    if (o.n == 0) throw Overflow();
    return Rat((__int128)n * o.d, (__int128)d * o.n);
  }
  Rat operator-() const { return Rat(-(__int128)n, d); }
  bool operator==(const Rat& o) const { return n == o.n && d == o.d; }
  bool operator<(const Rat& o) const { return (__int128)n * o.d < (__int128)o.n * d; }
  bool operator<=(const Rat& o) const { return (__int128)n * o.d <= (__int128)o.n * d; }

  std::string smt() const {
    unsigned long long an = n < 0 ? -(unsigned long long)n : (unsigned long long)n;
    std::string body = d == 1 ? std::to_string(an)
                              : "(/ " + std::to_string(an) + " " + std::to_string(d) + ")";
    return n < 0 ? "(- " + body + ")" : body;
  }
};

std::optional<Rat> parse_numeral(const std::string& s) {
  if (s.empty()) return std::nullopt;
  size_t i = s[0] == '-' ? 1 : 0;
  if (i >= s.size() || !isdigit((unsigned char)s[i])) return std::nullopt;
  __int128 num = 0, den = 1;
  bool dot = false;
  for (; i < s.size(); ++i) {
    if (s[i] == '.') {
      if (dot) return std::nullopt;
      dot = true;
      continue;
    }
    if (!isdigit((unsigned char)s[i])) return std::nullopt;
    num = num * 10 + (s[i] - '0');
    if (dot) den *= 10;
    if (den > (__int128)INT64_MAX) return std::nullopt;
  }
  if (s[0] == '-') num = -num;
  try {
    return Rat(num, den);
  } catch (const Overflow&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// S-expressions

struct Sx {
  bool atom = false;
  std::string s;
  std::vector<Sx> kids;
};

struct ScriptError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class SxReader {
 public:
  explicit SxReader(std::string text) : t_(std::move(text)) {}

  std::optional<Sx> next() {
    skip_ws();
    if (p_ >= t_.size()) return std::nullopt;
    return read();
  }

 private:
  void skip_ws() {
    while (p_ < t_.size()) {
      if (t_[p_] == ';') {
        while (p_ < t_.size() && t_[p_] != '\n') ++p_;
      } else if (isspace((unsigned char)t_[p_])) {
        ++p_;
      } else {
        break;
      }
    }
  }

  Sx read() {
    skip_ws();
    if (p_ >= t_.size()) throw ScriptError("unexpected end of input");
    if (t_[p_] == '(') {
      ++p_;
      Sx sx;
      while (true) {
        skip_ws();
        if (p_ >= t_.size()) throw ScriptError("unbalanced '('");
        if (t_[p_] == ')') {
          ++p_;
          return sx;
        }
        sx.kids.push_back(read());
      }
    }
    if (t_[p_] == ')') throw ScriptError("unbalanced ')'");
    if (t_[p_] == '"') {
      size_t start = p_++;
      while (p_ < t_.size() && t_[p_] != '"') ++p_;
      if (p_ < t_.size()) ++p_;
      Sx sx;
      sx.atom = true;
      sx.s = t_.substr(start, p_ - start);
      return sx;
    }
    size_t start = p_;
    while (p_ < t_.size() && !isspace((unsigned char)t_[p_]) && t_[p_] != '(' && t_[p_] != ')' &&
           t_[p_] != ';') {
      ++p_;
    }
    Sx sx;
    sx.atom = true;
    sx.s = t_.substr(start, p_ - start);
    return sx;
  }

  std::string t_;
  size_t p_ = 0;
};

// ---------------------------------------------------------------------------
// Polynomials: map from monomial (sorted var ids, with multiplicity) to
// coefficient.

using Mono = std::vector<int>;
using Poly = std::map<Mono, Rat>;

struct GiveUp : std::runtime_error {
  explicit GiveUp(const std::string& why) : std::runtime_error(why) {}
};

constexpr size_t kMaxDegree = 12;
constexpr size_t kMaxTerms = 4096;
constexpr size_t kMaxBranches = 1024;
constexpr size_t kMaxAtoms = 20000;

void poly_add_term(Poly& p, const Mono& m, const Rat& c) {
  if (c.zero()) return;
  auto it = p.find(m);
  if (it == p.end()) {
    p.emplace(m, c);
  } else {
    it->second = it->second + c;
    if (it->second.zero()) p.erase(it);
  }
}

Poly poly_const(const Rat& c) {
  Poly p;
  poly_add_term(p, {}, c);
  return p;
}

Poly poly_var(int id) {
  Poly p;
  poly_add_term(p, {id}, Rat(1));
  return p;
}

Poly poly_add(const Poly& a, const Poly& b) {
  Poly out = a;
  for (const auto& [m, c] : b) poly_add_term(out, m, c);
  return out;
}

Poly poly_neg(const Poly& a) {
  Poly out;
  for (const auto& [m, c] : a) out.emplace(m, -c);
  return out;
}

Poly poly_sub(const Poly& a, const Poly& b) { return poly_add(a, poly_neg(b)); }

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) {
      if (ma.size() + mb.size() > kMaxDegree) throw GiveUp("degree blowup");
      Mono m = ma;
      m.insert(m.end(), mb.begin(), mb.end());
      std::sort(m.begin(), m.end());
      poly_add_term(out, m, ca * cb);
      if (out.size() > kMaxTerms) throw GiveUp("term blowup");
    }
  }
  return out;
}

Poly poly_scale(const Poly& a, const Rat& c) {
  Poly out;
  if (c.zero()) return out;
  for (const auto& [m, k] : a) out.emplace(m, k * c);
  return out;
}

bool poly_is_const(const Poly& p, Rat* value = nullptr) {
  if (p.empty()) {
    if (value) *value = Rat(0);
    return true;
  }
  if (p.size() == 1 && p.begin()->first.empty()) {
    if (value) *value = p.begin()->second;
    return true;
  }
  return false;
}

bool poly_is_linear(const Poly& p) {
  for (const auto& [m, c] : p) {
    if (m.size() > 1) return false;
  }
  return true;
}

// x := def substituted into p.
Poly poly_subst(const Poly& p, int var, const Poly& def) {
  Poly out;
  for (const auto& [m, c] : p) {
    size_t k = 0;
    Mono rest;
    for (int v : m) {
      if (v == var) {
        ++k;
      } else {
        rest.push_back(v);
      }
    }
    Poly term;
    poly_add_term(term, rest, c);
    for (size_t i = 0; i < k; ++i) term = poly_mul(term, def);
    out = poly_add(out, term);
    if (out.size() > kMaxTerms) throw GiveUp("term blowup");
  }
  return out;
}

Rat poly_eval(const Poly& p, const std::map<int, Rat>& values) {
  Rat total(0);
  for (const auto& [m, c] : p) {
    Rat term = c;
    for (int v : m) {
      auto it = values.find(v);
      if (it == values.end()) throw GiveUp("unassigned variable in evaluation");
      term = term * it->second;
    }
    total = total + term;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Atoms and formulas

enum class Rel { Eq, Ge, Gt, Ne };  // poly REL 0

struct Atom {
  Poly p;
  Rel rel;
};

struct Form {
  enum class Kind { Leaf, And, Or } kind = Kind::And;
  Atom leaf{};  // Leaf
  std::vector<Form> kids;
};

struct Decl {
  std::vector<std::string> names;
  std::map<std::string, int> ids;
};

struct NotYetBuildable : std::runtime_error {
  explicit NotYetBuildable(const std::string& why) : std::runtime_error(why) {}
};

Poly build_poly(const Sx& t, const Decl& decl, const std::map<int, Rat>& pins) {
  if (t.atom) {
    if (auto r = parse_numeral(t.s)) return poly_const(*r);
    auto it = decl.ids.find(t.s);
    if (it == decl.ids.end()) throw GiveUp("unknown symbol " + t.s);
    auto pin = pins.find(it->second);
    if (pin != pins.end()) return poly_const(pin->second);
    return poly_var(it->second);
  }
  if (t.kids.empty() || !t.kids[0].atom) throw GiveUp("malformed term");
  const std::string& op = t.kids[0].s;
  if (op == "+") {
    Poly out;
    for (size_t i = 1; i < t.kids.size(); ++i) out = poly_add(out, build_poly(t.kids[i], decl, pins));
    return out;
  }
  if (op == "-") {
    if (t.kids.size() == 2) return poly_neg(build_poly(t.kids[1], decl, pins));
    Poly out = build_poly(t.kids[1], decl, pins);
    for (size_t i = 2; i < t.kids.size(); ++i) out = poly_sub(out, build_poly(t.kids[i], decl, pins));
    return out;
  }
  if (op == "*") {
    Poly out = poly_const(Rat(1));
    for (size_t i = 1; i < t.kids.size(); ++i) out = poly_mul(out, build_poly(t.kids[i], decl, pins));
    return out;
  }
  if (op == "/") {
    if (t.kids.size() != 3) throw GiveUp("n-ary division");
    Poly num = build_poly(t.kids[1], decl, pins);
    Poly den = build_poly(t.kids[2], decl, pins);
    Rat dv;
    if (!poly_is_const(den, &dv)) throw NotYetBuildable("non-constant divisor");
    if (dv.zero()) throw GiveUp("division by zero");
    return poly_scale(num, Rat(1) / dv);
  }
  if (op == "to_real" && t.kids.size() == 2) return build_poly(t.kids[1], decl, pins);
  throw GiveUp("unsupported arithmetic operator " + op);
}

Form leaf(Poly p, Rel rel) {
  Form f;
  f.kind = Form::Kind::Leaf;
  f.leaf = Atom{std::move(p), rel};
  return f;
}

Form build_form(const Sx& t, const Decl& decl, const std::map<int, Rat>& pins, bool negated) {
  if (t.atom) {
    // `true` is an empty conjunction, `false` an empty disjunction.
    if ((t.s == "true" && !negated) || (t.s == "false" && negated)) return Form{};
    if (t.s == "true" || t.s == "false") {
      Form f;
      f.kind = Form::Kind::Or;
      return f;
    }
    throw GiveUp("boolean symbol " + t.s);
  }
  if (t.kids.empty() || !t.kids[0].atom) throw GiveUp("malformed formula");
  const std::string& op = t.kids[0].s;
  if (op == "not") {
    if (t.kids.size() != 2) throw GiveUp("malformed not");
    return build_form(t.kids[1], decl, pins, !negated);
  }
  if (op == "and" || op == "or") {
    bool conj = (op == "and") != negated;
    Form f;
    f.kind = conj ? Form::Kind::And : Form::Kind::Or;
    for (size_t i = 1; i < t.kids.size(); ++i) {
      f.kids.push_back(build_form(t.kids[i], decl, pins, negated));
    }
    return f;
  }
  if (op == "=" || op == "distinct" || op == ">=" || op == "<=" || op == ">" || op == "<") {
    if (t.kids.size() != 3) throw GiveUp("comparisons must be binary");
    Poly l = build_poly(t.kids[1], decl, pins);
    Poly r = build_poly(t.kids[2], decl, pins);
    Poly diff = poly_sub(l, r);  // diff REL 0
    if (op == "=" || op == "distinct") {
      bool want_ne = (op == "distinct") ? !negated : negated;
      return leaf(std::move(diff), want_ne ? Rel::Ne : Rel::Eq);
    }
    if (op == ">=") return negated ? leaf(poly_neg(diff), Rel::Gt) : leaf(std::move(diff), Rel::Ge);
    if (op == "<=") return negated ? leaf(std::move(diff), Rel::Gt) : leaf(poly_neg(diff), Rel::Ge);
    if (op == ">") return negated ? leaf(poly_neg(diff), Rel::Ge) : leaf(std::move(diff), Rel::Gt);
    /* op == "<" */
    return negated ? leaf(std::move(diff), Rel::Ge) : leaf(poly_neg(diff), Rel::Gt);
  }
  throw GiveUp("unsupported operator " + op);
}

// ---------------------------------------------------------------------------
// DNF expansion

using Branch = std::vector<Atom>;

void expand_dnf(const Form& f, std::vector<Branch>& acc) {
  switch (f.kind) {
    case Form::Kind::Leaf:
      for (auto& b : acc) b.push_back(f.leaf);
      return;
    case Form::Kind::And:
      for (const auto& kid : f.kids) expand_dnf(kid, acc);
      return;
    case Form::Kind::Or: {
      std::vector<Branch> out;
      for (const auto& kid : f.kids) {
        std::vector<Branch> copy = acc;
        expand_dnf(kid, copy);
        out.insert(out.end(), copy.begin(), copy.end());
        if (out.size() > kMaxBranches) throw GiveUp("branch blowup");
      }
      acc = std::move(out);
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// Branch decision: equality substitution, then Fourier-Motzkin.

enum class Status { Sat, Unsat, Unknown };

struct BranchOutcome {
  Status status = Status::Unknown;
  std::map<int, Rat> values;
};

struct BoundRow {
  Poly p;  // c*x + rest REL 0, with x still present
  Rel rel; // Ge or Gt
};

BranchOutcome solve_branch(Branch atoms) {
  BranchOutcome out;

  // Split disequalities first: p != 0 becomes (p > 0) or (-p > 0). Constant
  // disequalities resolve immediately.
  std::vector<size_t> ne_idx;
  for (size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].rel != Rel::Ne) continue;
    Rat v;
    if (poly_is_const(atoms[i].p, &v)) {
      if (v.zero()) {
        out.status = Status::Unsat;
        return out;
      }
      atoms[i].p.clear();  // trivially true; mark as empty Ge
      atoms[i].rel = Rel::Ge;
    } else {
      ne_idx.push_back(i);
    }
  }
  if (!ne_idx.empty()) {
    if (ne_idx.size() > 10) throw GiveUp("too many disequalities");
    bool saw_unknown = false;
    for (size_t mask = 0; mask < (size_t(1) << ne_idx.size()); ++mask) {
      Branch variant = atoms;
      for (size_t k = 0; k < ne_idx.size(); ++k) {
        Atom& a = variant[ne_idx[k]];
        if (mask & (size_t(1) << k)) a.p = poly_neg(a.p);
        a.rel = Rel::Gt;
      }
      BranchOutcome sub = solve_branch(std::move(variant));
      if (sub.status == Status::Sat) return sub;
      if (sub.status == Status::Unknown) saw_unknown = true;
    }
    out.status = saw_unknown ? Status::Unknown : Status::Unsat;
    return out;
  }

  // Equality substitution. defs records (var, definition) in creation order.
  std::vector<std::pair<int, Poly>> defs;
  bool progress = true;
  while (progress) {
    progress = false;
    for (size_t i = 0; i < atoms.size(); ++i) {
      if (atoms[i].rel != Rel::Eq) continue;
      Rat v;
      if (poly_is_const(atoms[i].p, &v)) {
        if (!v.zero()) {
          out.status = Status::Unsat;
          return out;
        }
        atoms.erase(atoms.begin() + i);
        progress = true;
        break;
      }
      // Find a variable occurring only as a lone degree-1 monomial.
      int var = -1;
      Rat coef;
      for (const auto& [m, c] : atoms[i].p) {
        if (m.size() != 1) continue;
        int cand = m[0];
        bool elsewhere = false;
        for (const auto& [m2, c2] : atoms[i].p) {
          if (m2.size() == 1 && m2[0] == cand) continue;
          for (int vv : m2) {
            if (vv == cand) {
              elsewhere = true;
              break;
            }
          }
          if (elsewhere) break;
        }
        if (!elsewhere) {
          var = cand;
          coef = c;
          break;
        }
      }
      if (var < 0) continue;
      Poly rest = atoms[i].p;
      rest.erase(Mono{var});
      Poly def = poly_scale(rest, Rat(-1) / coef);
      atoms.erase(atoms.begin() + i);
      for (auto& a : atoms) a.p = poly_subst(a.p, var, def);
      defs.emplace_back(var, std::move(def));
      progress = true;
      break;
    }
  }
  for (const auto& a : atoms) {
    if (a.rel == Rel::Eq) throw GiveUp("nonlinear equality residue");
  }

  // Remaining atoms are Ge/Gt. Constants evaluate; the rest must be linear.
  Branch ineqs;
  for (auto& a : atoms) {
    Rat v;
    if (poly_is_const(a.p, &v)) {
      bool ok = a.rel == Rel::Ge ? !(v < Rat(0)) : Rat(0) < v;
      if (!ok) {
        out.status = Status::Unsat;
        return out;
      }
      continue;
    }
    if (!poly_is_linear(a.p)) throw GiveUp("nonlinear inequality residue");
    ineqs.push_back(std::move(a));
  }

  // Fourier-Motzkin elimination, variables in ascending id order.
  std::vector<std::pair<int, std::vector<BoundRow>>> stages;
  while (!ineqs.empty()) {
    int var = INT32_MAX;
    for (const auto& a : ineqs) {
      for (const auto& [m, c] : a.p) {
        if (m.size() == 1 && m[0] < var) var = m[0];
      }
    }
    if (var == INT32_MAX) break;  // all constant (possible after erasures)

    std::vector<BoundRow> with_var;
    Branch rest;
    for (auto& a : ineqs) {
      bool has = a.p.count(Mono{var}) > 0;
      if (has) {
        with_var.push_back({a.p, a.rel});
      } else {
        rest.push_back(std::move(a));
      }
    }
    // lowers: c > 0 (x >= -rest/c); uppers: c < 0.
    for (size_t i = 0; i < with_var.size(); ++i) {
      Rat ci = with_var[i].p.at(Mono{var});
      for (size_t j = 0; j < with_var.size(); ++j) {
        Rat cj = with_var[j].p.at(Mono{var});
        if (!(ci.sign() > 0 && cj.sign() < 0)) continue;
        // Combine lower i with upper j: ci*pj - cj*pi (x cancels).
        Poly combo = poly_sub(poly_scale(with_var[j].p, ci), poly_scale(with_var[i].p, cj));
        Rel rel = (with_var[i].rel == Rel::Gt || with_var[j].rel == Rel::Gt) ? Rel::Gt : Rel::Ge;
        Rat v;
        if (poly_is_const(combo, &v)) {
          bool ok = rel == Rel::Ge ? !(v < Rat(0)) : Rat(0) < v;
          if (!ok) {
            out.status = Status::Unsat;
            return out;
          }
        } else {
          rest.push_back({std::move(combo), rel});
          if (rest.size() > kMaxAtoms) throw GiveUp("inequality blowup");
        }
      }
    }
    stages.emplace_back(var, std::move(with_var));
    ineqs = std::move(rest);
  }

  // Feasible. Reconstruct a sample point, last eliminated variable first.
  std::map<int, Rat> values;
  for (auto it = stages.rbegin(); it != stages.rend(); ++it) {
    int var = it->first;
    // Variables in these rows that never earned their own stage are
    // one-sided and free; fix them at 0 before evaluating bounds.
    for (const auto& row : it->second) {
      for (const auto& [m, c] : row.p) {
        for (int v : m) {
          if (v != var && !values.count(v)) values[v] = Rat(0);
        }
      }
    }
    bool has_lo = false, has_hi = false, lo_strict = false, hi_strict = false;
    Rat lo, hi;
    for (const auto& row : it->second) {
      Rat c = row.p.at(Mono{var});
      Poly rest_p = row.p;
      rest_p.erase(Mono{var});
      Rat bound = -poly_eval(rest_p, values) / c;
      if (c.sign() > 0) {
        if (!has_lo || lo < bound || (lo == bound && row.rel == Rel::Gt)) {
          lo = bound;
          lo_strict = row.rel == Rel::Gt;
          has_lo = true;
        }
      } else {
        if (!has_hi || bound < hi || (hi == bound && row.rel == Rel::Gt)) {
          hi = bound;
          hi_strict = row.rel == Rel::Gt;
          has_hi = true;
        }
      }
    }
    Rat zero(0);
    bool zero_ok = (!has_lo || lo < zero || (lo == zero && !lo_strict)) &&
                   (!has_hi || zero < hi || (hi == zero && !hi_strict));
    Rat pick;
    if (zero_ok) {
      pick = zero;
    } else if (has_lo && has_hi) {
      pick = lo == hi ? lo : (lo + hi) / Rat(2);
    } else if (has_lo) {
      pick = lo_strict ? lo + Rat(1) : lo;
    } else {
      pick = hi_strict ? hi - Rat(1) : hi;
    }
    values[var] = pick;
  }
  for (auto it = defs.rbegin(); it != defs.rend(); ++it) {
    for (const auto& [m, c] : it->second) {
      for (int v : m) {
        if (!values.count(v)) values[v] = Rat(0);  // free var inside a definition
      }
    }
    values[it->first] = poly_eval(it->second, values);
  }
  out.status = Status::Sat;
  out.values = std::move(values);
  return out;
}

// ---------------------------------------------------------------------------
// Script interpreter

struct Interp {
  Decl decl;
  std::vector<Sx> asserts;
  Status last = Status::Unknown;
  std::map<int, Rat> model;
  bool have_model = false;

  void declare(const std::string& name) {
    if (decl.ids.count(name)) return;
    decl.ids[name] = static_cast<int>(decl.names.size());
    decl.names.push_back(name);
  }

  // Pins: variables fixed to constants by top-level equality conjuncts
  // (poly of shape c*x + d == 0). They let division-by-variable terms
  // become buildable on the next pass.
  static void collect_pins(const std::vector<Form>& built, std::map<int, Rat>& pins) {
    for (const auto& f : built) {
      std::vector<const Form*> stack{&f};
      while (!stack.empty()) {
        const Form* cur = stack.back();
        stack.pop_back();
        if (cur->kind == Form::Kind::And) {
          for (const auto& k : cur->kids) stack.push_back(&k);
          continue;
        }
        if (cur->kind != Form::Kind::Leaf || cur->leaf.rel != Rel::Eq) continue;
        const Poly& p = cur->leaf.p;
        if (p.size() > 2 || p.empty()) continue;
        int var = -1;
        Rat coef, cons(0);
        bool shaped = true;
        for (const auto& [m, c] : p) {
          if (m.empty()) {
            cons = c;
          } else if (m.size() == 1 && var < 0) {
            var = m[0];
            coef = c;
          } else {
            shaped = false;
          }
        }
        if (!shaped || var < 0 || pins.count(var)) continue;
        pins[var] = -cons / coef;
      }
    }
  }

  void check_sat() {
    try {
      std::map<int, Rat> pins;
      std::vector<Form> built;
      std::vector<const Sx*> pending;
      for (const auto& a : asserts) pending.push_back(&a);
      bool progress = true;
      while (progress) {
        progress = false;
        std::vector<const Sx*> still;
        for (const Sx* t : pending) {
          try {
            built.push_back(build_form(*t, decl, pins, false));
            progress = true;
          } catch (const NotYetBuildable&) {
            still.push_back(t);
          }
        }
        pending = std::move(still);
        if (!pending.empty()) collect_pins(built, pins);
      }
      if (!pending.empty()) throw GiveUp("unresolvable division");

      std::vector<Branch> branches{Branch{}};
      for (const auto& f : built) {
        expand_dnf(f, branches);
        if (branches.empty()) break;  // a `false` conjunct
      }

      bool saw_unknown = false;
      for (auto& b : branches) {
        BranchOutcome r;
        try {
          r = solve_branch(std::move(b));
        } catch (const GiveUp&) {
          saw_unknown = true;
          continue;
        } catch (const Overflow&) {
          saw_unknown = true;
          continue;
        }
        if (r.status == Status::Sat) {
          last = Status::Sat;
          model.clear();
          for (const auto& [name, id] : decl.ids) (void)name, model[id] = Rat(0);
          for (const auto& [id, v] : pins) model[id] = v;
          for (const auto& [id, v] : r.values) model[id] = v;
          have_model = true;
          std::cout << "sat\n";
          return;
        }
        if (r.status == Status::Unknown) saw_unknown = true;
      }
      if (saw_unknown) {
        last = Status::Unknown;
        have_model = false;
        std::cout << "unknown\n";
      } else {
        last = Status::Unsat;
        have_model = false;
        std::cout << "unsat\n";
      }
    } catch (const GiveUp& e) {
      last = Status::Unknown;
      have_model = false;
      std::cerr << "minismt: " << e.what() << "\n";
      std::cout << "unknown\n";
    } catch (const Overflow&) {
      last = Status::Unknown;
      have_model = false;
      std::cerr << "minismt: rational overflow\n";
      std::cout << "unknown\n";
    }
  }

  void get_model() {
    if (!have_model) {
      std::cout << "(error \"model is not available\")\n";
      return;
    }
    std::cout << "(\n";
    for (size_t i = 0; i < decl.names.size(); ++i) {
      Rat v = model.count(static_cast<int>(i)) ? model[static_cast<int>(i)] : Rat(0);
      std::cout << "  (define-fun " << decl.names[i] << " () Real " << v.smt() << ")\n";
    }
    std::cout << ")\n";
  }

  // Returns false when the script requests exit.
  bool command(const Sx& sx) {
    if (sx.atom || sx.kids.empty() || !sx.kids[0].atom) throw ScriptError("malformed command");
    const std::string& cmd = sx.kids[0].s;
    if (cmd == "set-logic" || cmd == "set-option" || cmd == "set-info") return true;
    if (cmd == "declare-const" && sx.kids.size() == 3 && sx.kids[1].atom) {
      declare(sx.kids[1].s);
      return true;
    }
    if (cmd == "declare-fun" && sx.kids.size() == 4 && sx.kids[1].atom && sx.kids[2].kids.empty()) {
      declare(sx.kids[1].s);
      return true;
    }
    if (cmd == "assert" && sx.kids.size() == 2) {
      asserts.push_back(sx.kids[1]);
      return true;
    }
    if (cmd == "check-sat") {
      check_sat();
      return true;
    }
    if (cmd == "get-model") {
      get_model();
      return true;
    }
    if (cmd == "exit") return false;
    throw ScriptError("unsupported command " + cmd);
  }
};

}  // namespace

int main(int argc, char** argv) {
  std::string text;
  if (argc > 1 && std::string(argv[1]) == "--version") {
    std::cout << "minismt 0.1\n";
    return 0;
  }
  if (argc > 1) {
    std::ifstream in(argv[1]);
    if (!in) {
      std::cerr << "minismt: cannot open " << argv[1] << "\n";
      return 1;
    }
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  } else {
    text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }

  Interp interp;
  try {
    SxReader reader(std::move(text));
    while (auto sx = reader.next()) {
      if (!interp.command(*sx)) break;
    }
  } catch (const ScriptError& e) {
    std::cout << "(error \"" << e.what() << "\")\n";
    return 1;
  }
  return 0;
}
