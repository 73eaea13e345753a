#include "stlplan/formula.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace stlplan {

Predicate Predicate::make(Expr h) {
  Predicate p;
  p.owners = referenced_robots(h);
  p.text = print_expr(h) + " <= 0";
  p.id = expr_hash(h);
  p.h = std::move(h);
  return p;
}

Formula Formula::truth() {
  Formula f;
  f.kind = FKind::True;
  return f;
}
Formula Formula::predicate(Predicate p) {
  Formula f;
  f.kind = FKind::Pred;
  f.pred = std::make_shared<const Predicate>(std::move(p));
  return f;
}
Formula Formula::negation(Formula g) {
  Formula f;
  f.kind = FKind::Not;
  f.kids.push_back(std::move(g));
  return f;
}
Formula Formula::conj(std::vector<Formula> fs) {
  Formula f;
  f.kind = FKind::And;
  f.kids = std::move(fs);
  return f;
}
Formula Formula::disj(std::vector<Formula> fs) {
  Formula f;
  f.kind = FKind::Or;
  f.kids = std::move(fs);
  return f;
}
Formula Formula::always(double a, double b, Formula g) {
  Formula f;
  f.kind = FKind::Always;
  f.a = a;
  f.b = b;
  f.kids.push_back(std::move(g));
  return f;
}
Formula Formula::eventually(double a, double b, Formula g) {
  Formula f;
  f.kind = FKind::Eventually;
  f.a = a;
  f.b = b;
  f.kids.push_back(std::move(g));
  return f;
}
Formula Formula::until(double a, double b, Formula lhs, Formula rhs) {
  Formula f;
  f.kind = FKind::Until;
  f.a = a;
  f.b = b;
  f.kids.push_back(std::move(lhs));
  f.kids.push_back(std::move(rhs));
  return f;
}

// ── Lexer ────────────────────────────────────────────────────────────────

namespace {

enum class Tok {
  End, Number, Ident, State,      // State carries robot id
  LParen, RParen, LBracket, RBracket, Comma,
  AndAnd, OrOr, Bang,
  Le, Ge, Lt, Gt,
  Plus, Minus, Star, Slash,
};

struct Token {
  Tok kind;
  double num = 0;
  std::string ident;
  int robot = 0;
  int line = 1, col = 1;
};

class Lexer {
public:
  explicit Lexer(const std::string& s) : s_(s) { tokenize(); }
  const std::vector<Token>& tokens() const { return toks_; }

private:
  void fail(const std::string& msg) { throw ParseError(msg, line_, col_); }

  void tokenize() {
    size_t i = 0;
    while (i < s_.size()) {
      char c = s_[i];
      if (c == '\n') { ++line_; col_ = 1; ++i; continue; }
      if (std::isspace(static_cast<unsigned char>(c))) { ++col_; ++i; continue; }
      if (c == '#') {  // comment to end of line
        while (i < s_.size() && s_[i] != '\n') ++i;
        continue;
      }
      Token t;
      t.line = line_;
      t.col = col_;
      auto two = [&](char a, char b) {
        return c == a && i + 1 < s_.size() && s_[i + 1] == b;
      };
      if (two('&', '&')) { t.kind = Tok::AndAnd; advance(i, 2); }
      else if (two('|', '|')) { t.kind = Tok::OrOr; advance(i, 2); }
      else if (two('<', '=')) { t.kind = Tok::Le; advance(i, 2); }
      else if (two('>', '=')) { t.kind = Tok::Ge; advance(i, 2); }
      else if (c == '<') { t.kind = Tok::Lt; advance(i, 1); }
      else if (c == '>') { t.kind = Tok::Gt; advance(i, 1); }
      else if (c == '!') { t.kind = Tok::Bang; advance(i, 1); }
      else if (c == '(') { t.kind = Tok::LParen; advance(i, 1); }
      else if (c == ')') { t.kind = Tok::RParen; advance(i, 1); }
      else if (c == '[') { t.kind = Tok::LBracket; advance(i, 1); }
      else if (c == ']') { t.kind = Tok::RBracket; advance(i, 1); }
      else if (c == ',') { t.kind = Tok::Comma; advance(i, 1); }
      else if (c == '+') { t.kind = Tok::Plus; advance(i, 1); }
      else if (c == '-') { t.kind = Tok::Minus; advance(i, 1); }
      else if (c == '*') { t.kind = Tok::Star; advance(i, 1); }
      else if (c == '/') { t.kind = Tok::Slash; advance(i, 1); }
      else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        char* end = nullptr;
        t.kind = Tok::Number;
        t.num = std::strtod(s_.c_str() + i, &end);
        size_t len = end - (s_.c_str() + i);
        if (len == 0) fail("malformed number");
        advance(i, len);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t j = i;
        while (j < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_'))
          ++j;
        std::string word = s_.substr(i, j - i);
        if (word.size() >= 2 && word[0] == 'x' &&
            std::all_of(word.begin() + 1, word.end(),
                        [](char d) { return std::isdigit(static_cast<unsigned char>(d)); })) {
          t.kind = Tok::State;
          t.robot = std::atoi(word.c_str() + 1);
        } else {
          t.kind = Tok::Ident;
          t.ident = word;
        }
        advance(i, j - i);
      } else {
        fail(std::string("unexpected character '") + c + "'");
      }
      toks_.push_back(std::move(t));
    }
    Token end;
    end.kind = Tok::End;
    end.line = line_;
    end.col = col_;
    toks_.push_back(end);
  }

  void advance(size_t& i, size_t n) { i += n; col_ += static_cast<int>(n); }

  const std::string& s_;
  std::vector<Token> toks_;
  int line_ = 1, col_ = 1;
};

// ── Parser ───────────────────────────────────────────────────────────────

class Parser {
public:
  explicit Parser(const std::string& s) : lex_(s) {}

  Formula parse() {
    Formula f = parse_or();
    expect(Tok::End, "trailing input after formula");
    return f;
  }

private:
  const Token& cur() const { return lex_.tokens()[pos_]; }
  const Token& next() const { return lex_.tokens()[pos_ + 1]; }
  void bump() { ++pos_; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, cur().line, cur().col);
  }
  void expect(Tok k, const std::string& msg) {
    if (cur().kind != k) fail(msg);
    bump();
  }

  bool ident_is(const char* w) const {
    return cur().kind == Tok::Ident && cur().ident == w;
  }

  std::pair<double, double> parse_window() {
    expect(Tok::LBracket, "expected '[' after temporal operator");
    double a = parse_signed_number();
    expect(Tok::Comma, "expected ',' in window");
    double b = parse_signed_number();
    expect(Tok::RBracket, "expected ']' closing window");
    if (!(a >= 0) || !(a < b) || !std::isfinite(b))
      fail("window must satisfy 0 <= a < b < inf");
    return {a, b};
  }

  double parse_signed_number() {
    double sign = 1;
    if (cur().kind == Tok::Minus) { sign = -1; bump(); }
    if (cur().kind != Tok::Number) fail("expected a number");
    double v = sign * cur().num;
    bump();
    return v;
  }

  Formula parse_or() {
    Formula f = parse_and();
    if (cur().kind != Tok::OrOr) return f;
    std::vector<Formula> kids;
    kids.push_back(std::move(f));
    while (cur().kind == Tok::OrOr) {
      bump();
      kids.push_back(parse_and());
    }
    return Formula::disj(std::move(kids));
  }

  Formula parse_and() {
    Formula f = parse_until();
    if (cur().kind != Tok::AndAnd) return f;
    std::vector<Formula> kids;
    kids.push_back(std::move(f));
    while (cur().kind == Tok::AndAnd) {
      bump();
      kids.push_back(parse_until());
    }
    return Formula::conj(std::move(kids));
  }

  Formula parse_until() {
    Formula lhs = parse_unary();
    if (ident_is("U")) {
      bump();
      auto [a, b] = parse_window();
      Formula rhs = parse_unary();
      return Formula::until(a, b, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Formula parse_unary() {
    if (cur().kind == Tok::Bang) {
      bump();
      return Formula::negation(parse_unary());
    }
    if (ident_is("G") || ident_is("F")) {
      bool always = cur().ident == "G";
      bump();
      auto [a, b] = parse_window();
      Formula kid = parse_unary();
      return always ? Formula::always(a, b, std::move(kid))
                    : Formula::eventually(a, b, std::move(kid));
    }
    if (ident_is("true")) {
      bump();
      return Formula::truth();
    }
    if (cur().kind == Tok::LParen) {
      // '(' is ambiguous: parenthesized formula or parenthesized expression
      // opening a comparison. Try the formula reading; backtrack on failure.
      size_t save = pos_;
      try {
        bump();
        Formula f = parse_or();
        expect(Tok::RParen, "expected ')'");
        return f;
      } catch (const ParseError&) {
        pos_ = save;
      }
    }
    return parse_comparison();
  }

  Formula parse_comparison() {
    Expr lhs = parse_expr();
    Tok op = cur().kind;
    if (op != Tok::Le && op != Tok::Ge && op != Tok::Lt && op != Tok::Gt)
      fail("expected a comparison operator");
    bump();
    Expr rhs = parse_expr();
    // Normalize to h <= 0; strict and non-strict collapse.
    Expr h = (op == Tok::Le || op == Tok::Lt)
                 ? Expr::binary(ExprKind::Sub, std::move(lhs), std::move(rhs))
                 : Expr::binary(ExprKind::Sub, std::move(rhs), std::move(lhs));
    return Formula::predicate(Predicate::make(std::move(h)));
  }

  Expr parse_expr() {
    Expr e = parse_term();
    while (cur().kind == Tok::Plus || cur().kind == Tok::Minus) {
      ExprKind k = cur().kind == Tok::Plus ? ExprKind::Add : ExprKind::Sub;
      bump();
      e = Expr::binary(k, std::move(e), parse_term());
    }
    return e;
  }

  Expr parse_term() {
    Expr e = parse_factor();
    while (cur().kind == Tok::Star || cur().kind == Tok::Slash) {
      ExprKind k = cur().kind == Tok::Star ? ExprKind::Mul : ExprKind::Div;
      bump();
      e = Expr::binary(k, std::move(e), parse_factor());
    }
    return e;
  }

  Expr parse_factor() {
    switch (cur().kind) {
      case Tok::Minus:
        bump();
        return Expr::unary(ExprKind::Neg, parse_factor());
      case Tok::Number: {
        double v = cur().num;
        bump();
        return Expr::constant(v);
      }
      case Tok::State: {
        int r = cur().robot;
        bump();
        int comp = -1;
        if (cur().kind == Tok::LBracket) {
          bump();
          if (cur().kind != Tok::Number || cur().num != std::floor(cur().num))
            fail("expected an integer component index");
          comp = static_cast<int>(cur().num);
          bump();
          expect(Tok::RBracket, "expected ']' after component index");
        }
        return Expr::state(r, comp);
      }
      case Tok::LParen: {
        bump();
        Expr e = parse_expr();
        expect(Tok::RParen, "expected ')' in expression");
        return e;
      }
      case Tok::Ident: {
        std::string w = cur().ident;
        ExprKind k;
        if (w == "t") { bump(); return Expr::time(); }
        if (w == "norm") k = ExprKind::Norm;
        else if (w == "abs") k = ExprKind::Abs;
        else if (w == "exp") k = ExprKind::Exp;
        else if (w == "sin") k = ExprKind::Sin;
        else if (w == "cos") k = ExprKind::Cos;
        else if (w == "sqrt") k = ExprKind::Sqrt;
        else fail("unknown identifier '" + w + "' in expression");
        bump();
        expect(Tok::LParen, "expected '(' after function name");
        Expr arg = parse_expr();
        expect(Tok::RParen, "expected ')' closing function call");
        return Expr::unary(k, std::move(arg));
      }
      default:
        fail("expected an expression");
    }
  }

  Lexer lex_;
  size_t pos_ = 0;
};

// ── Printing ─────────────────────────────────────────────────────────────

void fmt_bound(double v, std::string& out) { out += print_double(v); }

int formula_prec(FKind k) {
  switch (k) {
    case FKind::Or: return 1;
    case FKind::And: return 2;
    case FKind::Until: return 3;
    default: return 4;  // unary and atoms
  }
}

void print_rec(const Formula& f, std::string& out, int parent_prec) {
  int prec = formula_prec(f.kind);
  bool paren = prec < parent_prec;
  if (paren) out += '(';
  switch (f.kind) {
    case FKind::True: out += "true"; break;
    case FKind::Pred: {
      // Reconstruct "lhs <= rhs"-free canonical form: h <= 0.
      out += print_expr(f.pred->h);
      out += " <= 0";
      break;
    }
    case FKind::Not:
      out += '!';
      print_rec(f.kids[0], out, prec + 1);
      break;
    case FKind::And:
    case FKind::Or: {
      const char* sep = f.kind == FKind::And ? " && " : " || ";
      for (size_t i = 0; i < f.kids.size(); ++i) {
        if (i) out += sep;
        print_rec(f.kids[i], out, prec + 1);
      }
      break;
    }
    case FKind::Always:
    case FKind::Eventually:
      out += f.kind == FKind::Always ? 'G' : 'F';
      out += '[';
      fmt_bound(f.a, out);
      out += ',';
      fmt_bound(f.b, out);
      out += ']';
      print_rec(f.kids[0], out, prec + 1);
      break;
    case FKind::Until:
      print_rec(f.kids[0], out, prec + 1);
      out += " U[";
      fmt_bound(f.a, out);
      out += ',';
      fmt_bound(f.b, out);
      out += "] ";
      print_rec(f.kids[1], out, prec + 1);
      break;
  }
  if (paren) out += ')';
}

// Predicate atoms print as "h <= 0": a comparison whose lhs may itself end in
// "- 0"; parsing that reproduces Sub(h, 0)... so predicate round-trips go
// through Predicate::make(Sub(h, 0)). To keep print/parse a fixed point we
// normalize away a trailing "- 0" introduced by printing. See strip_zero.
Expr strip_zero(Expr h) {
  if (h.kind == ExprKind::Sub && h.kids[1].kind == ExprKind::Const &&
      h.kids[1].value == 0.0)
    return h.kids[0];
  return h;
}

Formula normalize_predicates(Formula f) {
  if (f.kind == FKind::Pred) {
    Expr h = strip_zero(f.pred->h);
    return Formula::predicate(Predicate::make(std::move(h)));
  }
  for (auto& k : f.kids) k = normalize_predicates(std::move(k));
  return f;
}

}  // namespace

Formula parse_formula(const std::string& text) {
  Parser p(text);
  return normalize_predicates(p.parse());
}

std::string print_formula(const Formula& f) {
  std::string out;
  print_rec(f, out, 0);
  return out;
}

bool formula_equal(const Formula& a, const Formula& b) {
  if (a.kind != b.kind || a.a != b.a || a.b != b.b || a.kids.size() != b.kids.size())
    return false;
  if (a.kind == FKind::Pred && !expr_equal(a.pred->h, b.pred->h)) return false;
  for (size_t i = 0; i < a.kids.size(); ++i)
    if (!formula_equal(a.kids[i], b.kids[i])) return false;
  return true;
}

// ── Positive normal form ─────────────────────────────────────────────────

namespace {

Formula pnf_rec(const Formula& f, bool neg) {
  switch (f.kind) {
    case FKind::True:
      if (!neg) return Formula::truth();
      // !true is unsatisfiable: the constant predicate 1 <= 0.
      return Formula::predicate(Predicate::make(Expr::constant(1.0)));
    case FKind::Pred: {
      if (!neg) return Formula::predicate(Predicate{*f.pred});
      // !(h <= 0) closes to -h <= 0 (strictness collapses).
      return Formula::predicate(Predicate::make(Expr::unary(ExprKind::Neg, f.pred->h)));
    }
    case FKind::Not:
      return pnf_rec(f.kids[0], !neg);
    case FKind::And:
    case FKind::Or: {
      std::vector<Formula> kids;
      kids.reserve(f.kids.size());
      for (const auto& k : f.kids) kids.push_back(pnf_rec(k, neg));
      bool isAnd = (f.kind == FKind::And) != neg;  // De Morgan
      return isAnd ? Formula::conj(std::move(kids)) : Formula::disj(std::move(kids));
    }
    case FKind::Always: {
      Formula kid = pnf_rec(f.kids[0], neg);
      return neg ? Formula::eventually(f.a, f.b, std::move(kid))
                 : Formula::always(f.a, f.b, std::move(kid));
    }
    case FKind::Eventually: {
      Formula kid = pnf_rec(f.kids[0], neg);
      return neg ? Formula::always(f.a, f.b, std::move(kid))
                 : Formula::eventually(f.a, f.b, std::move(kid));
    }
    case FKind::Until: {
      if (neg)
        throw UnsupportedTransform(
            "negation over Until has no supported normal form here");
      return Formula::until(f.a, f.b, pnf_rec(f.kids[0], false), pnf_rec(f.kids[1], false));
    }
  }
  throw std::logic_error("unreachable formula kind");
}

}  // namespace

Formula to_pnf(const Formula& f) { return pnf_rec(f, false); }

double time_horizon(const Formula& f) {
  switch (f.kind) {
    case FKind::True:
    case FKind::Pred: return 0.0;
    case FKind::Not: return time_horizon(f.kids[0]);
    case FKind::And:
    case FKind::Or: {
      double th = 0;
      for (const auto& k : f.kids) th = std::max(th, time_horizon(k));
      return th;
    }
    case FKind::Always:
    case FKind::Eventually:
      return f.b + time_horizon(f.kids[0]);
    case FKind::Until:
      return f.b + std::max(time_horizon(f.kids[0]), time_horizon(f.kids[1]));
  }
  throw std::logic_error("unreachable formula kind");
}

int count_nodes(const Formula& f) {
  int n = 1;
  for (const auto& k : f.kids) n += count_nodes(k);
  return n;
}

// ── Paths ────────────────────────────────────────────────────────────────

namespace {

struct PathWalker {
  std::vector<Path> out;
  std::vector<TemporalOp> chain;
  std::vector<int> route;
  int next_id = 0;

  void walk(const Formula& f) {
    int id = next_id++;
    switch (f.kind) {
      case FKind::True:
        break;  // contributes no path
      case FKind::Pred: {
        Path p;
        p.chain = chain;
        p.leaf = f.pred;
        p.leaf_node_id = id;
        p.route = route;
        p.owners = f.pred->owners;
        for (size_t i = 0; i + 1 < chain.size(); ++i)
          if (chain[i].eventually == chain[i + 1].eventually) p.same_op_nested = true;
        out.push_back(std::move(p));
        break;
      }
      case FKind::Not:
        throw UnsupportedTransform("enumerate_paths expects positive normal form");
      case FKind::And:
      case FKind::Or:
        for (size_t i = 0; i < f.kids.size(); ++i) {
          route.push_back(static_cast<int>(i));
          walk(f.kids[i]);
          route.pop_back();
        }
        break;
      case FKind::Always:
      case FKind::Eventually: {
        TemporalOp op;
        op.eventually = f.kind == FKind::Eventually;
        op.a = f.a;
        op.b = f.b;
        op.node_id = id;
        chain.push_back(op);
        route.push_back(0);
        walk(f.kids[0]);
        route.pop_back();
        chain.pop_back();
        break;
      }
      case FKind::Until:
        throw UnsupportedTransform(
            "the planner does not support Until; monitor-only operator");
    }
  }
};

}  // namespace

std::vector<Path> enumerate_paths(const Formula& pnf) {
  PathWalker w;
  w.walk(pnf);
  return w.out;
}

SatisfactionTree build_satisfaction_tree(const Formula& pnf) {
  SatisfactionTree t;
  t.tau.assign(count_nodes(pnf), int8_t{-1});
  return t;
}

std::vector<int> path_node_ids(const Formula& pnf, const Path& p) {
  // Re-walk the route, collecting preorder ids along it.
  std::vector<int> ids;
  const Formula* node = &pnf;
  int id = 0;
  ids.push_back(0);
  for (int step : p.route) {
    // id of child k = id(node) + 1 + sum of subtree sizes of children < k
    int child_id = id + 1;
    for (int i = 0; i < step; ++i) child_id += count_nodes(node->kids[i]);
    node = &node->kids[step];
    id = child_id;
    ids.push_back(id);
  }
  return ids;
}

}  // namespace stlplan
