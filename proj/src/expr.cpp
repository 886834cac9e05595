#include "scaleqm/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "scaleqm/errors.hpp"

namespace scaleqm {

using namespace ast;

const char* func_name(Func f) {
  switch (f) {
    case Func::Exp: return "exp";
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Sinh: return "sinh";
    case Func::Abs: return "abs";
  }
  return "?";
}

namespace {

std::optional<Func> func_from_name(std::string_view name) {
  for (Func f : {Func::Exp, Func::Sin, Func::Cos, Func::Sinh, Func::Abs})
    if (name == func_name(f)) return f;
  return std::nullopt;
}

template <class T>
NodePtr make(T data, SourceSpan span = {}) {
  return std::make_shared<const Node>(Node{std::move(data), span});
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

// ---------------------------------------------------------------- builders

Expr::Expr() : root_(make(Number{0.0})) {}

Expr Expr::number(double v) {
  if (std::isnan(v)) throw DomainError("NaN literal");
  if (std::signbit(v)) return Expr(make(Negate{make(Number{-v})}));
  return Expr(make(Number{v}));
}

Expr Expr::param(std::string name) { return Expr(make(Param{std::move(name)})); }
Expr Expr::x() { return Expr(make(Coord{})); }
Expr Expr::call(Func f, const Expr& arg) { return Expr(make(Call{f, arg.root_})); }
Expr Expr::pow(const Expr& base, const Rational& exponent) { return Expr(make(Power{base.root_, exponent})); }

Expr Expr::piecewise(const std::vector<std::array<Expr, 3>>& pieces) {
  if (pieces.empty()) throw DomainError("piecewise needs at least one piece");
  Piecewise pw;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (i > 0 && !(pieces[i - 1][1] == pieces[i][0]))
      throw DomainError("piecewise guards must be contiguous");
    pw.pieces.push_back({pieces[i][0].root_, pieces[i][1].root_, pieces[i][2].root_});
  }
  return Expr(make(std::move(pw)));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr(make(Binary{BinOp::Add, a.root_, b.root_})); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(make(Binary{BinOp::Sub, a.root_, b.root_})); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(make(Binary{BinOp::Mul, a.root_, b.root_})); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(make(Binary{BinOp::Div, a.root_, b.root_})); }
Expr operator-(const Expr& a) { return Expr(make(Negate{a.root_})); }

// ---------------------------------------------------------------- equality

namespace {

bool equal(const Node& a, const Node& b) {
  if (a.data.index() != b.data.index()) return false;
  return std::visit(
      overloaded{
          [&](const Number& n) { return n.value == std::get<Number>(b.data).value; },
          [&](const Param& p) { return p.name == std::get<Param>(b.data).name; },
          [&](const Coord&) { return true; },
          [&](const Negate& n) { return equal(*n.operand, *std::get<Negate>(b.data).operand); },
          [&](const Binary& n) {
            const auto& o = std::get<Binary>(b.data);
            return n.op == o.op && equal(*n.lhs, *o.lhs) && equal(*n.rhs, *o.rhs);
          },
          [&](const Power& n) {
            const auto& o = std::get<Power>(b.data);
            return n.exponent == o.exponent && equal(*n.base, *o.base);
          },
          [&](const Call& n) {
            const auto& o = std::get<Call>(b.data);
            return n.fn == o.fn && equal(*n.arg, *o.arg);
          },
          [&](const Piecewise& n) {
            const auto& o = std::get<Piecewise>(b.data);
            if (n.pieces.size() != o.pieces.size()) return false;
            for (std::size_t i = 0; i < n.pieces.size(); ++i)
              if (!equal(*n.pieces[i].lo, *o.pieces[i].lo) || !equal(*n.pieces[i].hi, *o.pieces[i].hi) ||
                  !equal(*n.pieces[i].value, *o.pieces[i].value))
                return false;
            return true;
          },
      },
      a.data);
}

}  // namespace

bool Expr::operator==(const Expr& o) const { return equal(*root_, *o.root_); }

// ---------------------------------------------------------------- printing

namespace {

constexpr int kPrecAdd = 1, kPrecMul = 2, kPrecNeg = 3, kPrecPow = 4, kPrecAtom = 5;

int precedence(const Node& n) {
  return std::visit(overloaded{
                        [](const Binary& b) {
                          return (b.op == BinOp::Add || b.op == BinOp::Sub) ? kPrecAdd : kPrecMul;
                        },
                        [](const Negate&) { return kPrecNeg; },
                        [](const Power&) { return kPrecPow; },
                        [](const auto&) { return kPrecAtom; },
                    },
                    n.data);
}

std::string format_number(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void print(const Node& n, std::string& out);

void print_wrapped(const Node& n, bool parens, std::string& out) {
  if (parens) out += '(';
  print(n, out);
  if (parens) out += ')';
}

void print(const Node& n, std::string& out) {
  std::visit(overloaded{
                 [&](const Number& v) { out += format_number(v.value); },
                 [&](const Param& p) { out += p.name; },
                 [&](const Coord&) { out += 'x'; },
                 [&](const Negate& v) {
                   out += '-';
                   print_wrapped(*v.operand, precedence(*v.operand) < kPrecNeg, out);
                 },
                 [&](const Binary& b) {
                   const int p = precedence(n);
                   print_wrapped(*b.lhs, precedence(*b.lhs) < p, out);
                   switch (b.op) {
                     case BinOp::Add: out += " + "; break;
                     case BinOp::Sub: out += " - "; break;
                     case BinOp::Mul: out += '*'; break;
                     case BinOp::Div: out += '/'; break;
                   }
                   print_wrapped(*b.rhs, precedence(*b.rhs) <= p, out);
                 },
                 [&](const Power& pw) {
                   print_wrapped(*pw.base, precedence(*pw.base) < kPrecAtom, out);
                   out += '^';
                   if (is_integer(pw.exponent) && pw.exponent >= 0)
                     out += to_string(pw.exponent);
                   else
                     out += "(" + to_string(pw.exponent) + ")";
                 },
                 [&](const Call& c) {
                   out += func_name(c.fn);
                   out += '(';
                   print(*c.arg, out);
                   out += ')';
                 },
                 [&](const Piecewise& pw) {
                   out += "piecewise(";
                   for (std::size_t i = 0; i < pw.pieces.size(); ++i) {
                     if (i) out += ", ";
                     out += '[';
                     print(*pw.pieces[i].lo, out);
                     out += ", ";
                     print(*pw.pieces[i].hi, out);
                     out += "]: ";
                     print(*pw.pieces[i].value, out);
                   }
                   out += ')';
                 },
             },
             n.data);
}

}  // namespace

std::string Expr::to_string() const {
  std::string out;
  print(*root_, out);
  return out;
}

// ---------------------------------------------------------------- evaluation

namespace {

double eval(const Node& n, double x, const ParamValues& params) {
  return std::visit(
      overloaded{
          [&](const Number& v) { return v.value; },
          [&](const Param& p) {
            const auto it = params.find(p.name);
            if (it == params.end()) throw LookupError("unbound parameter '" + p.name + "'");
            return it->second;
          },
          [&](const Coord&) { return x; },
          [&](const Negate& v) { return -eval(*v.operand, x, params); },
          [&](const Binary& b) {
            const double l = eval(*b.lhs, x, params);
            const double r = eval(*b.rhs, x, params);
            switch (b.op) {
              case BinOp::Add: return l + r;
              case BinOp::Sub: return l - r;
              case BinOp::Mul: return l * r;
              case BinOp::Div: return l / r;
            }
            return 0.0;
          },
          [&](const Power& p) {
            const double b = eval(*p.base, x, params);
            if (is_integer(p.exponent)) {
              const long long k = p.exponent.convert_to<long long>();
              if (k == 2) return b * b;
              return std::pow(b, static_cast<double>(k));
            }
            return std::pow(b, to_double(p.exponent));
          },
          [&](const Call& c) {
            const double a = eval(*c.arg, x, params);
            switch (c.fn) {
              case Func::Exp: return std::exp(a);
              case Func::Sin: return std::sin(a);
              case Func::Cos: return std::cos(a);
              case Func::Sinh: return std::sinh(a);
              case Func::Abs: return std::abs(a);
            }
            return 0.0;
          },
          [&](const Piecewise& pw) {
            const std::size_t last = pw.pieces.size() - 1;
            for (std::size_t i = 0; i <= last; ++i) {
              const double lo = eval(*pw.pieces[i].lo, x, params);
              const double hi = eval(*pw.pieces[i].hi, x, params);
              if (x >= lo && (x < hi || (i == last && x <= hi))) return eval(*pw.pieces[i].value, x, params);
            }
            throw DomainError("x = " + format_number(x) + " lies outside every piecewise guard");
          },
      },
      n.data);
}

void collect_params(const Node& n, std::set<std::string>& out) {
  std::visit(overloaded{
                 [&](const Param& p) { out.insert(p.name); },
                 [&](const Negate& v) { collect_params(*v.operand, out); },
                 [&](const Binary& b) {
                   collect_params(*b.lhs, out);
                   collect_params(*b.rhs, out);
                 },
                 [&](const Power& p) { collect_params(*p.base, out); },
                 [&](const Call& c) { collect_params(*c.arg, out); },
                 [&](const Piecewise& pw) {
                   for (const auto& piece : pw.pieces) {
                     collect_params(*piece.lo, out);
                     collect_params(*piece.hi, out);
                     collect_params(*piece.value, out);
                   }
                 },
                 [&](const auto&) {},
             },
             n.data);
}

bool has_x(const Node& n) {
  return std::visit(overloaded{
                        [](const Coord&) { return true; },
                        [](const Negate& v) { return has_x(*v.operand); },
                        [](const Binary& b) { return has_x(*b.lhs) || has_x(*b.rhs); },
                        [](const Power& p) { return has_x(*p.base); },
                        [](const Call& c) { return has_x(*c.arg); },
                        [](const Piecewise&) { return true; },
                        [](const auto&) { return false; },
                    },
                    n.data);
}

void collect_breakpoints(const Node& n, const ParamValues& params, std::vector<double>& out) {
  std::visit(overloaded{
                 [&](const Negate& v) { collect_breakpoints(*v.operand, params, out); },
                 [&](const Binary& b) {
                   collect_breakpoints(*b.lhs, params, out);
                   collect_breakpoints(*b.rhs, params, out);
                 },
                 [&](const Power& p) { collect_breakpoints(*p.base, params, out); },
                 [&](const Call& c) { collect_breakpoints(*c.arg, params, out); },
                 [&](const Piecewise& pw) {
                   for (const auto& piece : pw.pieces) {
                     for (const auto* bound : {&piece.lo, &piece.hi}) {
                       const double v = eval(**bound, 0.0, params);
                       if (std::isfinite(v)) out.push_back(v);
                     }
                     collect_breakpoints(*piece.value, params, out);
                   }
                 },
                 [&](const auto&) {},
             },
             n.data);
}

template <class Fn>
NodePtr rebuild(const NodePtr& n, const Fn& leaf) {
  if (auto replaced = leaf(*n)) return *replaced;
  return std::visit(overloaded{
                        [&](const Negate& v) { return make(Negate{rebuild(v.operand, leaf)}, n->span); },
                        [&](const Binary& b) {
                          return make(Binary{b.op, rebuild(b.lhs, leaf), rebuild(b.rhs, leaf)}, n->span);
                        },
                        [&](const Power& p) { return make(Power{rebuild(p.base, leaf), p.exponent}, n->span); },
                        [&](const Call& c) { return make(Call{c.fn, rebuild(c.arg, leaf)}, n->span); },
                        [&](const Piecewise& pw) {
                          Piecewise out;
                          for (const auto& piece : pw.pieces)
                            out.pieces.push_back(
                                {rebuild(piece.lo, leaf), rebuild(piece.hi, leaf), rebuild(piece.value, leaf)});
                          return make(std::move(out), n->span);
                        },
                        [&](const auto&) { return n; },
                    },
                    n->data);
}

}  // namespace

double Expr::eval(double x, const ParamValues& params) const { return scaleqm::eval(*root_, x, params); }

std::set<std::string> Expr::free_params() const {
  std::set<std::string> out;
  collect_params(*root_, out);
  return out;
}

bool Expr::depends_on_x() const { return has_x(*root_); }

std::vector<double> Expr::breakpoints(const ParamValues& params) const {
  std::vector<double> out;
  collect_breakpoints(*root_, params, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

bool is_zero_or_inf(const Node& n) {
  if (const auto* v = std::get_if<Negate>(&n.data)) return is_zero_or_inf(*v->operand);
  if (const auto* v = std::get_if<Number>(&n.data)) return v->value == 0 || std::isinf(v->value);
  return false;
}

// Guards test the raw coordinate, so a substitution x -> x/c (or x*c) moves
// the guard bounds by the inverse map. Only these scalings are supported.
NodePtr substitute_coord(const NodePtr& root, const NodePtr& replacement) {
  return rebuild(root, [&](const Node& n) -> std::optional<NodePtr> {
    if (std::holds_alternative<Coord>(n.data)) return replacement;
    const auto* pw = std::get_if<Piecewise>(&n.data);
    if (!pw) return std::nullopt;
    std::optional<BinOp> inverse;
    NodePtr scale;
    if (std::holds_alternative<Coord>(replacement->data)) {
      inverse = BinOp::Mul;
      scale = make(Number{1.0});
    } else if (const auto* b = std::get_if<Binary>(&replacement->data)) {
      const bool lx = std::holds_alternative<Coord>(b->lhs->data);
      const bool rx = std::holds_alternative<Coord>(b->rhs->data);
      if (b->op == BinOp::Div && lx && !has_x(*b->rhs)) {
        inverse = BinOp::Mul;
        scale = b->rhs;
      } else if (b->op == BinOp::Mul && lx && !has_x(*b->rhs)) {
        inverse = BinOp::Div;
        scale = b->rhs;
      } else if (b->op == BinOp::Mul && rx && !has_x(*b->lhs)) {
        inverse = BinOp::Div;
        scale = b->lhs;
      }
    }
    if (!inverse) throw DomainError("piecewise guards only support substitutions x -> x/c or x*c");
    const bool identity = std::holds_alternative<Coord>(replacement->data);
    auto move_bound = [&](const NodePtr& bound) {
      if (identity || is_zero_or_inf(*bound)) return bound;
      return make(Binary{*inverse, bound, scale});
    };
    Piecewise out;
    for (const auto& piece : pw->pieces)
      out.pieces.push_back({move_bound(piece.lo), move_bound(piece.hi), substitute_coord(piece.value, replacement)});
    return make(std::move(out), n.span);
  });
}

}  // namespace

Expr Expr::substitute_x(const Expr& replacement) const { return Expr(substitute_coord(root_, replacement.root_)); }

Expr Expr::substitute_params(const std::map<std::string, Expr, std::less<>>& replacements) const {
  return Expr(rebuild(root_, [&](const Node& n) -> std::optional<NodePtr> {
    if (const auto* p = std::get_if<Param>(&n.data)) {
      const auto it = replacements.find(p->name);
      if (it != replacements.end()) return it->second.root_;
    }
    return std::nullopt;
  }));
}

// ---------------------------------------------------------------- parsing

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, LBracket, RBracket, Comma, Colon, Equals, End };

struct Token {
  Tok kind;
  std::string_view text;
  int offset;
  double number = 0;
};

class Parser {
public:
  explicit Parser(std::string_view src) : src_(src) {
    for (std::size_t i = 0; i < src.size(); ++i)
      if (src[i] == '\n') line_starts_.push_back(static_cast<int>(i) + 1);
    advance();
  }

  Expr parse_full() {
    Expr e(parse_expr());
    expect(Tok::End, "end of input");
    return e;
  }

  Equation parse_equation_full() {
    Equation eq;
    eq.lhs = Expr(parse_expr());
    expect(Tok::Equals, "'='");
    eq.rhs = Expr(parse_expr());
    expect(Tok::End, "end of input");
    eq.text = std::string(src_);
    return eq;
  }

private:
  SourceSpan span_from(int begin) const {
    SourceSpan s;
    s.begin = begin;
    s.end = prev_end_;
    const auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), begin);
    s.line = static_cast<int>(it - line_starts_.begin());
    s.column = begin - *(it - 1) + 1;
    return s;
  }

  [[noreturn]] void fail(const std::string& msg, int offset) const {
    const auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
    throw ParseError(msg, static_cast<int>(it - line_starts_.begin()), offset - *(it - 1) + 1);
  }

  void advance() {
    prev_end_ = cur_.offset + static_cast<int>(cur_.text.size());
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const int start = static_cast<int>(pos_);
    if (pos_ >= src_.size()) {
      cur_ = {Tok::End, {}, start};
      return;
    }
    const char c = src_[pos_];
    auto single = [&](Tok k) {
      cur_ = {k, src_.substr(pos_, 1), start};
      ++pos_;
    };
    switch (c) {
      case '+': return single(Tok::Plus);
      case '-': return single(Tok::Minus);
      case '*': return single(Tok::Star);
      case '/': return single(Tok::Slash);
      case '^': return single(Tok::Caret);
      case '(': return single(Tok::LParen);
      case ')': return single(Tok::RParen);
      case '[': return single(Tok::LBracket);
      case ']': return single(Tok::RBracket);
      case ',': return single(Tok::Comma);
      case ':': return single(Tok::Colon);
      case '=': return single(Tok::Equals);
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t end = pos_;
      while (end < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.')) ++end;
      if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
        std::size_t k = end + 1;
        if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
        if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
          while (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) ++k;
          end = k;
        }
      }
      const auto text = src_.substr(pos_, end - pos_);
      double v = 0;
      const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
      if (res.ec != std::errc() || res.ptr != text.data() + text.size()) fail("malformed number '" + std::string(text) + "'", start);
      cur_ = {Tok::Number, text, start, v};
      pos_ = end;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) ++end;
      cur_ = {Tok::Ident, src_.substr(pos_, end - pos_), start};
      pos_ = end;
      return;
    }
    fail(std::string("unexpected character '") + c + "'", start);
  }

  void expect(Tok k, const char* what) {
    if (cur_.kind != k) fail(std::string("expected ") + what, cur_.offset);
    advance();
  }

  NodePtr parse_expr() {
    const int begin = cur_.offset;
    NodePtr lhs = parse_term();
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      const BinOp op = cur_.kind == Tok::Plus ? BinOp::Add : BinOp::Sub;
      advance();
      NodePtr rhs = parse_term();
      lhs = make(Binary{op, lhs, rhs}, span_from(begin));
    }
    return lhs;
  }

  NodePtr parse_term() {
    const int begin = cur_.offset;
    NodePtr lhs = parse_unary();
    while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
      const BinOp op = cur_.kind == Tok::Star ? BinOp::Mul : BinOp::Div;
      advance();
      NodePtr rhs = parse_unary();
      lhs = make(Binary{op, lhs, rhs}, span_from(begin));
    }
    return lhs;
  }

  NodePtr parse_unary() {
    const int begin = cur_.offset;
    if (cur_.kind == Tok::Minus) {
      advance();
      NodePtr operand = parse_unary();
      return make(Negate{operand}, span_from(begin));
    }
    return parse_power();
  }

  NodePtr parse_power() {
    const int begin = cur_.offset;
    NodePtr base = parse_primary();
    if (cur_.kind != Tok::Caret) return base;
    advance();
    Rational e = parse_exponent();
    return make(Power{base, e}, span_from(begin));
  }

  BigInt parse_int() {
    if (cur_.kind != Tok::Number || cur_.text.find_first_not_of("0123456789") != std::string_view::npos)
      fail("exponent must be an integer or a parenthesised rational p/q", cur_.offset);
    BigInt v(std::string(cur_.text));
    advance();
    return v;
  }

  Rational parse_exponent() {
    Rational r;
    if (cur_.kind == Tok::LParen) {
      advance();
      bool neg = false;
      if (cur_.kind == Tok::Minus) {
        neg = true;
        advance();
      }
      BigInt num = parse_int();
      BigInt den = 1;
      if (cur_.kind == Tok::Slash) {
        advance();
        const int at = cur_.offset;
        den = parse_int();
        if (den == 0) fail("zero denominator in exponent", at);
      }
      expect(Tok::RParen, "')'");
      r = Rational(neg ? BigInt(-num) : num, den);
    } else if (cur_.kind == Tok::Minus) {
      advance();
      r = Rational(BigInt(-parse_int()));
    } else {
      r = Rational(parse_int());
    }
    if (cur_.kind == Tok::Caret) {
      const int at = cur_.offset;
      advance();
      const Rational outer = parse_exponent();
      if (!is_integer(outer) || abs(outer) > 64) fail("chained exponent must fold to an exact rational", at);
      const long long k = outer.convert_to<long long>();
      if (r == 0 && k < 0) fail("zero raised to a negative exponent", at);
      Rational acc = 1;
      for (long long i = 0; i < (k < 0 ? -k : k); ++i) acc *= r;
      r = k < 0 ? Rational(1) / acc : acc;
    }
    return r;
  }

  NodePtr parse_primary() {
    const int begin = cur_.offset;
    switch (cur_.kind) {
      case Tok::Number: {
        const double v = cur_.number;
        advance();
        return make(Number{v}, span_from(begin));
      }
      case Tok::LParen: {
        advance();
        NodePtr inner = parse_expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident: break;
      default: fail("expected an operand", cur_.offset);
    }
    const std::string name(cur_.text);
    advance();
    if (name == "x") return make(Coord{}, span_from(begin));
    if (name == "inf") return make(Number{std::numeric_limits<double>::infinity()}, span_from(begin));
    if (name == "piecewise") return parse_piecewise(begin);
    if (cur_.kind == Tok::LParen) {
      const auto fn = func_from_name(name);
      if (!fn) fail("unknown function '" + name + "'", begin);
      advance();
      NodePtr arg = parse_expr();
      expect(Tok::RParen, "')'");
      return make(Call{*fn, arg}, span_from(begin));
    }
    if (func_from_name(name)) fail("function '" + name + "' requires an argument", begin);
    return make(Param{name}, span_from(begin));
  }

  NodePtr parse_piecewise(int begin) {
    expect(Tok::LParen, "'(' after piecewise");
    Piecewise pw;
    for (;;) {
      const int piece_at = cur_.offset;
      expect(Tok::LBracket, "'[' opening a piecewise guard");
      NodePtr lo = parse_expr();
      expect(Tok::Comma, "',' in piecewise guard");
      NodePtr hi = parse_expr();
      expect(Tok::RBracket, "']' closing a piecewise guard");
      expect(Tok::Colon, "':' after piecewise guard");
      NodePtr value = parse_expr();
      if (!pw.pieces.empty() && !equal(*pw.pieces.back().hi, *lo))
        fail("piecewise guards must be contiguous: lower bound must repeat the previous upper bound", piece_at);
      const auto* ln = std::get_if<Number>(&lo->data);
      const auto* hn = std::get_if<Number>(&hi->data);
      if (ln && hn && !(ln->value < hn->value)) fail("empty piecewise guard", piece_at);
      pw.pieces.push_back({lo, hi, value});
      if (cur_.kind == Tok::Comma) {
        advance();
        continue;
      }
      break;
    }
    expect(Tok::RParen, "')' closing piecewise");
    return make(std::move(pw), span_from(begin));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token cur_{Tok::End, {}, 0};
  int prev_end_ = 0;
  std::vector<int> line_starts_{0};
};

}  // namespace

Expr parse_expr(std::string_view text) { return Parser(text).parse_full(); }

Equation parse_equation(std::string_view text) { return Parser(text).parse_equation_full(); }

// ---------------------------------------------------------------- linting

std::string Diagnostic::to_string() const {
  std::string out = message + ": '" + subexpr + "'";
  if (dim) out += " has dimension " + dim->to_string();
  if (span.line > 0) out += " (line " + std::to_string(span.line) + ", column " + std::to_string(span.column) + ")";
  return out;
}

namespace {

using MaybeDim = std::optional<Dimension>;

class DimensionChecker {
public:
  DimensionChecker(const ParamDims& dims, std::vector<Diagnostic>* diags, Dimension coord = Dimension::length())
      : dims_(dims), diags_(diags), coord_(std::move(coord)) {}

  MaybeDim check(const Node& n) {
    return std::visit(
        overloaded{
            [&](const Number& v) -> MaybeDim {
              if (v.value == 0 || std::isinf(v.value)) return std::nullopt;
              return Dimension::none();
            },
            [&](const Param& p) -> MaybeDim {
              const auto it = dims_.find(p.name);
              if (it == dims_.end()) throw LookupError("unknown symbol '" + p.name + "'");
              return it->second;
            },
            [&](const Coord&) -> MaybeDim { return coord_; },
            [&](const Negate& v) { return check(*v.operand); },
            [&](const Binary& b) -> MaybeDim {
              const MaybeDim l = check(*b.lhs);
              const MaybeDim r = check(*b.rhs);
              switch (b.op) {
                case BinOp::Add:
                case BinOp::Sub:
                  if (l && r && *l != *r)
                    report(n, std::string(b.op == BinOp::Add ? "sum" : "difference") + " of " + l->to_string() +
                                  " and " + r->to_string(),
                           std::nullopt);
                  return l ? l : r;
                case BinOp::Mul:
                  if (!l || !r) return std::nullopt;
                  return *l * *r;
                case BinOp::Div:
                  if (!l || !r) return std::nullopt;
                  return *l / *r;
              }
              return std::nullopt;
            },
            [&](const Power& p) -> MaybeDim {
              const MaybeDim b = check(*p.base);
              if (!b) return std::nullopt;
              return b->pow(p.exponent);
            },
            [&](const Call& c) -> MaybeDim {
              const MaybeDim a = check(*c.arg);
              if (c.fn == Func::Abs) return a;
              if (a && !a->is_dimensionless())
                report(*c.arg, std::string("argument of ") + func_name(c.fn) + " must be dimensionless", a);
              return Dimension::none();
            },
            [&](const Piecewise& pw) -> MaybeDim {
              MaybeDim result;
              for (const auto& piece : pw.pieces) {
                for (const auto* bound : {&piece.lo, &piece.hi}) {
                  const MaybeDim d = check(**bound);
                  if (d && *d != coord_) report(**bound, "piecewise guard must have the dimension of x", d);
                }
                const MaybeDim v = check(*piece.value);
                if (v && result && *v != *result)
                  report(*piece.value, "piecewise branches disagree, expected " + result->to_string(), v);
                if (!result) result = v;
              }
              return result;
            },
        },
        n.data);
  }

  void report(const Node& n, std::string message, MaybeDim dim) {
    if (!diags_) return;
    std::string text;
    print(n, text);
    diags_->push_back({std::move(message), std::move(text), n.span, std::move(dim)});
  }

private:
  const ParamDims& dims_;
  std::vector<Diagnostic>* diags_;
  Dimension coord_;
};

}  // namespace

std::vector<Diagnostic> lint(const Expr& expr, const ParamDims& param_dims, const Dimension& x_dim) {
  std::vector<Diagnostic> diags;
  DimensionChecker(param_dims, &diags, x_dim).check(expr.node());
  return diags;
}

std::vector<Diagnostic> lint_equation(const Equation& eq, const ParamDims& param_dims) {
  std::vector<Diagnostic> diags;
  DimensionChecker checker(param_dims, &diags);
  const MaybeDim l = checker.check(eq.lhs.node());
  const MaybeDim r = checker.check(eq.rhs.node());
  if (l && r && *l != *r) {
    Diagnostic d;
    d.message = "equation equates " + l->to_string() + " with " + r->to_string();
    d.subexpr = eq.lhs.to_string() + " = " + eq.rhs.to_string();
    d.span = eq.lhs.node().span;
    d.dim = l;
    diags.push_back(std::move(d));
  }
  return diags;
}

std::optional<Dimension> infer_dimension(const Expr& expr, const ParamDims& param_dims, const Dimension& x_dim) {
  return DimensionChecker(param_dims, nullptr, x_dim).check(expr.node());
}

}  // namespace scaleqm
