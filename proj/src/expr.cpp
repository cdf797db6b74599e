#include "rlab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace rlab::expr {

namespace {

NodePtr make_node(NodeKind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

// ---------------------------------------------------------------------------
// Parser: recursive descent over a byte cursor.

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr run() {
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size())
      throw ParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (eat('+')) {
        lhs = make_node(NodeKind::Add, lhs, parse_term());
      } else if (eat('-')) {
        lhs = make_node(NodeKind::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (eat('*')) {
        lhs = make_node(NodeKind::Mul, lhs, parse_unary());
      } else if (eat('/')) {
        lhs = make_node(NodeKind::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (eat('-')) return make_node(NodeKind::Neg, parse_unary());
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (eat('^')) {
      // right associative; exponent may itself be signed: t^-2
      return make_node(NodeKind::Pow, base, parse_unary());
    }
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    char c = src_[pos_];

    if (c == '(') {
      ++pos_;
      NodePtr e = parse_expr();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return e;
    }

    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();

    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr parse_number() {
    std::size_t start = pos_;
    const char* begin = src_.data() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError("malformed number", start);
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Constant;
    n->value = v;
    return n;
  }

  NodePtr parse_ident() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string name(src_.substr(start, pos_ - start));

    if (name == "t") return make_node(NodeKind::Var);

    if (name == "exp" || name == "log") {
      if (!eat('(')) throw ParseError("'" + name + "' expects one argument", pos_);
      NodePtr arg = parse_expr();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return make_node(name == "exp" ? NodeKind::Exp : NodeKind::Log, arg);
    }

    if (peek() == '(')
      throw ParseError("unknown function '" + name + "'", start);

    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Param;
    n->name = name;
    return n;
  }
};

// ---------------------------------------------------------------------------

double eval_node(const Node& n, double t, const ParamMap& params) {
  switch (n.kind) {
    case NodeKind::Constant: return n.value;
    case NodeKind::Var: return t;
    case NodeKind::Param: {
      auto it = params.find(n.name);
      if (it == params.end())
        throw EvalError("unbound parameter '" + n.name + "'");
      return it->second;
    }
    case NodeKind::Add: return eval_node(*n.a, t, params) + eval_node(*n.b, t, params);
    case NodeKind::Sub: return eval_node(*n.a, t, params) - eval_node(*n.b, t, params);
    case NodeKind::Mul: return eval_node(*n.a, t, params) * eval_node(*n.b, t, params);
    case NodeKind::Div: return eval_node(*n.a, t, params) / eval_node(*n.b, t, params);
    case NodeKind::Pow: return std::pow(eval_node(*n.a, t, params), eval_node(*n.b, t, params));
    case NodeKind::Neg: return -eval_node(*n.a, t, params);
    case NodeKind::Exp: return std::exp(eval_node(*n.a, t, params));
    case NodeKind::Log: return std::log(eval_node(*n.a, t, params));
  }
  throw EvalError("corrupt expression node");
}

int precedence(NodeKind k) {
  switch (k) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Neg: return 3;
    case NodeKind::Pow: return 4;
    default: return 5;  // atoms and function calls never need parens
  }
}

void print_node(std::ostringstream& os, const Node& n, int parent_prec, bool rhs_of_binary) {
  int prec = precedence(n.kind);
  // Parenthesize when binding looser than the context, or equally tight on the
  // right of a left-associative operator (keeps a - (b - c) intact).
  bool parens = prec < parent_prec || (prec == parent_prec && rhs_of_binary &&
                                       (n.kind == NodeKind::Add || n.kind == NodeKind::Sub ||
                                        n.kind == NodeKind::Mul || n.kind == NodeKind::Div));
  if (parens) os << '(';
  switch (n.kind) {
    case NodeKind::Constant: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      os << buf;
      break;
    }
    case NodeKind::Var: os << 't'; break;
    case NodeKind::Param: os << n.name; break;
    case NodeKind::Add:
      print_node(os, *n.a, prec, false);
      os << " + ";
      print_node(os, *n.b, prec, true);
      break;
    case NodeKind::Sub:
      print_node(os, *n.a, prec, false);
      os << " - ";
      print_node(os, *n.b, prec, true);
      break;
    case NodeKind::Mul:
      print_node(os, *n.a, prec, false);
      os << "*";
      print_node(os, *n.b, prec, true);
      break;
    case NodeKind::Div:
      print_node(os, *n.a, prec, false);
      os << "/";
      print_node(os, *n.b, prec, true);
      break;
    case NodeKind::Pow:
      // '^' is right associative and tighter than unary minus: parenthesize a
      // left operand that is itself a power or a negation.
      print_node(os, *n.a, prec + 1, false);
      os << "^";
      print_node(os, *n.b, prec, false);
      break;
    case NodeKind::Neg:
      os << "-";
      print_node(os, *n.a, prec + 1, false);
      break;
    case NodeKind::Exp:
      os << "exp(";
      print_node(os, *n.a, 0, false);
      os << ')';
      break;
    case NodeKind::Log:
      os << "log(";
      print_node(os, *n.a, 0, false);
      os << ')';
      break;
  }
  if (parens) os << ')';
}

bool nodes_equal(const NodePtr& x, const NodePtr& y) {
  if (x == y) return true;
  if (!x || !y) return false;
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case NodeKind::Constant: return x->value == y->value;
    case NodeKind::Var: return true;
    case NodeKind::Param: return x->name == y->name;
    default: return nodes_equal(x->a, y->a) && nodes_equal(x->b, y->b);
  }
}

void collect_params(const NodePtr& n, std::set<std::string>& out) {
  if (!n) return;
  if (n->kind == NodeKind::Param) out.insert(n->name);
  collect_params(n->a, out);
  collect_params(n->b, out);
}

}  // namespace

Expression Expression::parse(std::string_view source) {
  return Expression(Parser(source).run());
}

Expression Expression::constant(double c) {
  if (!std::isfinite(c)) throw EvalError("constants must be finite");
  // Negative constants are stored as a negation so that serialization
  // round-trips to a structurally identical tree.
  if (std::signbit(c)) return -constant(-c);
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Constant;
  n->value = c;
  return Expression(n);
}

Expression Expression::variable() { return Expression(make_node(NodeKind::Var)); }

Expression Expression::parameter(const std::string& name) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Param;
  n->name = name;
  return Expression(n);
}

Expression operator+(const Expression& x, const Expression& y) {
  return Expression(make_node(NodeKind::Add, x.root_, y.root_));
}
Expression operator-(const Expression& x, const Expression& y) {
  return Expression(make_node(NodeKind::Sub, x.root_, y.root_));
}
Expression operator*(const Expression& x, const Expression& y) {
  return Expression(make_node(NodeKind::Mul, x.root_, y.root_));
}
Expression operator/(const Expression& x, const Expression& y) {
  return Expression(make_node(NodeKind::Div, x.root_, y.root_));
}
Expression pow(const Expression& x, const Expression& y) {
  return Expression(make_node(NodeKind::Pow, x.root_, y.root_));
}
Expression exp(const Expression& x) { return Expression(make_node(NodeKind::Exp, x.root_)); }
Expression log(const Expression& x) { return Expression(make_node(NodeKind::Log, x.root_)); }
Expression operator-(const Expression& x) {
  return Expression(make_node(NodeKind::Neg, x.root_));
}

double Expression::eval(double t, const ParamMap& params) const {
  if (!root_) throw EvalError("empty expression");
  double v = eval_node(*root_, t, params);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "expression '" << to_string() << "' is not finite at t = " << t;
    throw EvalError(os.str());
  }
  return v;
}

std::string Expression::to_string() const {
  if (!root_) return "";
  std::ostringstream os;
  print_node(os, *root_, 0, false);
  return os.str();
}

bool Expression::structurally_equal(const Expression& other) const {
  return nodes_equal(root_, other.root_);
}

std::set<std::string> Expression::parameters() const {
  std::set<std::string> out;
  collect_params(root_, out);
  return out;
}

}  // namespace rlab::expr
