#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scaleqm/dimensions.hpp"
#include "scaleqm/rational.hpp"

namespace scaleqm {

/// Byte range of a node in the parsed text plus the 1-based position of its
/// first character. Default-constructed for nodes built programmatically.
struct SourceSpan {
  int begin = 0;
  int end = 0;
  int line = 0;
  int column = 0;
};

enum class Func { Exp, Sin, Cos, Sinh, Abs };
enum class BinOp { Add, Sub, Mul, Div };

const char* func_name(Func f);

class Expr;

namespace ast {

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Number {
  double value;  // nonnegative; +inf allowed
};
struct Param {
  std::string name;
};
struct Coord {};
struct Negate {
  NodePtr operand;
};
struct Binary {
  BinOp op;
  NodePtr lhs, rhs;
};
struct Power {
  NodePtr base;
  Rational exponent;
};
struct Call {
  Func fn;
  NodePtr arg;
};
/// Half-open guard [lo, hi); the last piece is closed on the right.
struct Piece {
  NodePtr lo, hi, value;
};
struct Piecewise {
  std::vector<Piece> pieces;
};

struct Node {
  std::variant<Number, Param, Coord, Negate, Binary, Power, Call, Piecewise> data;
  SourceSpan span;
};

}  // namespace ast

using ParamValues = std::map<std::string, double, std::less<>>;
using ParamDims = std::map<std::string, Dimension, std::less<>>;

/// Immutable potential-energy expression over the coordinate `x`.
///
/// Grammar (whitespace-insensitive):
///
///     expr     := term (('+' | '-') term)*
///     term     := unary (('*' | '/') unary)*
///     unary    := '-' unary | power
///     power    := primary ('^' exponent)?
///     exponent := INT | '-' INT | '(' ['-'] INT ['/' INT] ')'   ['^' exponent]
///     primary  := NUMBER | 'inf' | 'x' | IDENT | FUNC '(' expr ')'
///               | '(' expr ')' | 'piecewise' '(' piece (',' piece)* ')'
///     piece    := '[' expr ',' expr ']' ':' expr
///     FUNC     := exp | sin | cos | sinh | abs
///
/// `^` is right-associative; chained exponents must fold to an exact rational.
class Expr {
public:
  Expr();  // the literal 0
  explicit Expr(ast::NodePtr root) : root_(std::move(root)) {}

  static Expr number(double v);  // negative values become Negate(Number)
  static Expr param(std::string name);
  static Expr x();
  static Expr call(Func f, const Expr& arg);
  static Expr pow(const Expr& base, const Rational& exponent);
  static Expr piecewise(const std::vector<std::array<Expr, 3>>& pieces);

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

  const ast::Node& node() const { return *root_; }
  const ast::NodePtr& ptr() const { return root_; }

  /// Structural equality; source spans are ignored.
  bool operator==(const Expr& o) const;

  /// Canonical text in the grammar above; parse(print()) == *this.
  std::string to_string() const;

  double eval(double x, const ParamValues& params) const;

  std::set<std::string> free_params() const;
  bool depends_on_x() const;

  /// Finite piecewise breakpoints, evaluated with `params`, sorted.
  std::vector<double> breakpoints(const ParamValues& params) const;

  /// Replaces every occurrence of x.
  Expr substitute_x(const Expr& replacement) const;
  /// Replaces named parameters; names not in the map are kept.
  Expr substitute_params(const std::map<std::string, Expr, std::less<>>& replacements) const;

private:
  ast::NodePtr root_;
};

/// Throws ParseError with line/column on bad syntax or unknown function names.
Expr parse_expr(std::string_view text);

/// `lhs = rhs` declaration, used to lint unit assumptions.
struct Equation {
  Expr lhs, rhs;
  std::string text;
};
Equation parse_equation(std::string_view text);

struct Diagnostic {
  std::string message;
  std::string subexpr;
  SourceSpan span;
  std::optional<Dimension> dim;  // nullopt for dimension-polymorphic 0/inf

  std::string to_string() const;
};

/// Dimensional lint. `x` has dimension `x_dim` (a length by default). Returns no diagnostics iff every
/// transcendental argument is dimensionless, every sum (and every set of
/// piecewise branches) has a single dimension, and piecewise guards are
/// lengths. The literals 0 and inf adapt to any dimension. Throws LookupError
/// for a symbol missing from `param_dims`.
std::vector<Diagnostic> lint(const Expr& expr, const ParamDims& param_dims,
                             const Dimension& x_dim = Dimension::length());

/// Flags an equation whose sides have different dimensions, e.g. a
/// dimensional quantity equated to a bare number.
std::vector<Diagnostic> lint_equation(const Equation& eq, const ParamDims& param_dims);

/// Dimension of the whole expression (nullopt if polymorphic). Does not
/// report diagnostics; throws LookupError on unknown symbols.
std::optional<Dimension> infer_dimension(const Expr& expr, const ParamDims& param_dims,
                                        const Dimension& x_dim = Dimension::length());

}  // namespace scaleqm
