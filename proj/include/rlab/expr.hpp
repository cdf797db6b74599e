#pragma once

// Arithmetic expressions in the variable t with named parameters.
//
// Grammar (infix, standard precedence with ^ binding tighter than unary minus):
//   expr   := term  (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?            right associative
//   atom   := number | 't' | ident | ident '(' expr ')' | '(' expr ')'
// Recognized functions: exp, log.  Any other identifier is a named parameter
// whose value is supplied at evaluation time.
//
// Trees are immutable and cheap to share between threads.

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rlab::expr {

using ParamMap = std::map<std::string, double>;

struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset(offset) {}
  std::size_t offset;
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class NodeKind { Constant, Var, Param, Add, Sub, Mul, Div, Pow, Neg, Exp, Log };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind;
  double value = 0.0;   // Constant
  std::string name;     // Param
  NodePtr a, b;         // operands; unary nodes use a only
};

class Expression {
 public:
  Expression() = default;

  static Expression parse(std::string_view source);
  static Expression constant(double c);
  static Expression variable();
  static Expression parameter(const std::string& name);

  // Structural builders (used by the coefficient families).
  friend Expression operator+(const Expression&, const Expression&);
  friend Expression operator-(const Expression&, const Expression&);
  friend Expression operator*(const Expression&, const Expression&);
  friend Expression operator/(const Expression&, const Expression&);
  friend Expression pow(const Expression&, const Expression&);
  friend Expression exp(const Expression&);
  friend Expression log(const Expression&);
  friend Expression operator-(const Expression&);

  // Evaluate at t.  Throws EvalError if the result is not a finite real
  // (log of a nonpositive number, division by zero, overflow, ...).
  double eval(double t, const ParamMap& params = {}) const;

  // Serialization; parse(to_string()) yields a structurally identical tree.
  std::string to_string() const;

  bool structurally_equal(const Expression& other) const;
  std::set<std::string> parameters() const;
  bool empty() const { return root_ == nullptr; }
  const NodePtr& root() const { return root_; }

 private:
  explicit Expression(NodePtr root) : root_(std::move(root)) {}
  NodePtr root_;
};

// Expression with its parameter values fixed; usable as a plain function.
class BoundExpr {
 public:
  BoundExpr() = default;
  BoundExpr(Expression e, ParamMap params)
      : expr_(std::move(e)), params_(std::move(params)) {}
  double operator()(double t) const { return expr_.eval(t, params_); }
  const Expression& expression() const { return expr_; }
  const ParamMap& params() const { return params_; }

 private:
  Expression expr_;
  ParamMap params_;
};

}  // namespace rlab::expr
