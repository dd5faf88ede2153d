#include "sdkit/expr.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace sdkit {

struct Expr::Node {
  Kind kind;
  double number = 0.0;
  std::string name;
  BinaryOp op = BinaryOp::Add;
  Builtin fn = Builtin::Exp;
  Comparator cmp = Comparator::Less;
  std::vector<Expr> children;
};

const char* to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Pow: return "^";
  }
  return "?";
}

const char* to_string(Comparator cmp) {
  switch (cmp) {
    case Comparator::Less: return "<";
    case Comparator::LessEqual: return "<=";
    case Comparator::Greater: return ">";
    case Comparator::GreaterEqual: return ">=";
  }
  return "?";
}

const char* to_string(Builtin fn) {
  switch (fn) {
    case Builtin::Exp: return "exp";
    case Builtin::Min: return "min";
    case Builtin::Max: return "max";
    case Builtin::Abs: return "abs";
  }
  return "?";
}

Expr Expr::number(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Number;
  n->number = value;
  return Expr(std::move(n));
}

Expr Expr::variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::time() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Time;
  return Expr(std::move(n));
}

Expr Expr::negate(Expr operand) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Negate;
  n->children.push_back(std::move(operand));
  return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Binary;
  n->op = op;
  n->children.push_back(std::move(lhs));
  n->children.push_back(std::move(rhs));
  return Expr(std::move(n));
}

Expr Expr::call(Builtin fn, std::vector<Expr> args) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Call;
  n->fn = fn;
  n->children = std::move(args);
  return Expr(std::move(n));
}

Expr Expr::conditional(Comparator cmp, Expr lhs, Expr rhs, Expr then_branch, Expr else_branch) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Conditional;
  n->cmp = cmp;
  n->children = {std::move(lhs), std::move(rhs), std::move(then_branch), std::move(else_branch)};
  return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::number_value() const { return node_->number; }
const std::string& Expr::name() const { return node_->name; }
BinaryOp Expr::binary_op() const { return node_->op; }
Builtin Expr::builtin() const { return node_->fn; }
Comparator Expr::comparator() const { return node_->cmp; }
std::span<const Expr> Expr::operands() const { return node_->children; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case Expr::Kind::Number:
      // Bitwise identity: -0.0 and 0.0 print differently.
      return std::signbit(x.number) == std::signbit(y.number) && x.number == y.number;
    case Expr::Kind::Variable: return x.name == y.name;
    case Expr::Kind::Time: return true;
    case Expr::Kind::Negate: break;
    case Expr::Kind::Binary:
      if (x.op != y.op) return false;
      break;
    case Expr::Kind::Call:
      if (x.fn != y.fn) return false;
      break;
    case Expr::Kind::Conditional:
      if (x.cmp != y.cmp) return false;
      break;
  }
  return x.children == y.children;
}

double apply_binary(BinaryOp op, double lhs, double rhs) {
  switch (op) {
    case BinaryOp::Add: return lhs + rhs;
    case BinaryOp::Sub: return lhs - rhs;
    case BinaryOp::Mul: return lhs * rhs;
    case BinaryOp::Div:
      if (rhs == 0.0) throw EvalError(EvalErrorKind::DivisionByZero, "/", "division by zero");
      return lhs / rhs;
    case BinaryOp::Pow:
      if (lhs == 0.0 && rhs < 0.0)
        throw EvalError(EvalErrorKind::DomainError, "^", "zero raised to a negative power");
      if (lhs < 0.0 && std::isfinite(rhs) && std::trunc(rhs) != rhs)
        throw EvalError(EvalErrorKind::DomainError, "^",
                        "negative base raised to a non-integer power");
      return std::pow(lhs, rhs);
  }
  return 0.0;
}

double apply_builtin(Builtin fn, std::span<const double> args) {
  switch (fn) {
    case Builtin::Exp: return std::exp(args[0]);
    case Builtin::Abs: return std::fabs(args[0]);
    case Builtin::Min: {
      double v = args[0];
      for (double a : args.subspan(1)) v = a < v ? a : v;
      return v;
    }
    case Builtin::Max: {
      double v = args[0];
      for (double a : args.subspan(1)) v = a > v ? a : v;
      return v;
    }
  }
  return 0.0;
}

bool compare(Comparator cmp, double lhs, double rhs) {
  switch (cmp) {
    case Comparator::Less: return lhs < rhs;
    case Comparator::LessEqual: return lhs <= rhs;
    case Comparator::Greater: return lhs > rhs;
    case Comparator::GreaterEqual: return lhs >= rhs;
  }
  return false;
}

double evaluate(const Expr& expr, const Environment& env, double t) {
  switch (expr.kind()) {
    case Expr::Kind::Number: return expr.number_value();
    case Expr::Kind::Time: return t;
    case Expr::Kind::Variable: {
      auto it = env.find(expr.name());
      if (it == env.end())
        throw EvalError(EvalErrorKind::UnboundVariable, expr.name(),
                        "unbound variable '" + expr.name() + "'");
      return it->second;
    }
    case Expr::Kind::Negate: return -evaluate(expr.operands()[0], env, t);
    case Expr::Kind::Binary: {
      double lhs = evaluate(expr.operands()[0], env, t);
      double rhs = evaluate(expr.operands()[1], env, t);
      return apply_binary(expr.binary_op(), lhs, rhs);
    }
    case Expr::Kind::Call: {
      std::vector<double> args;
      args.reserve(expr.operands().size());
      for (const auto& a : expr.operands()) args.push_back(evaluate(a, env, t));
      return apply_builtin(expr.builtin(), args);
    }
    case Expr::Kind::Conditional: {
      auto ops = expr.operands();
      bool holds = compare(expr.comparator(), evaluate(ops[0], env, t), evaluate(ops[1], env, t));
      return evaluate(holds ? ops[2] : ops[3], env, t);
    }
  }
  return 0.0;
}

namespace {

void collect_names(const Expr& expr, std::set<std::string>& out) {
  if (expr.kind() == Expr::Kind::Variable) out.insert(expr.name());
  for (const auto& child : expr.operands()) collect_names(child, out);
}

}  // namespace

std::set<std::string> referenced_names(const Expr& expr) {
  std::set<std::string> out;
  collect_names(expr, out);
  return out;
}

bool references_time(const Expr& expr) {
  if (expr.kind() == Expr::Kind::Time) return true;
  for (const auto& child : expr.operands())
    if (references_time(child)) return true;
  return false;
}

Expr rename_variables(const Expr& expr, const std::map<std::string, std::string>& rename) {
  switch (expr.kind()) {
    case Expr::Kind::Number:
    case Expr::Kind::Time: return expr;
    case Expr::Kind::Variable: {
      auto it = rename.find(expr.name());
      return it == rename.end() ? expr : Expr::variable(it->second);
    }
    case Expr::Kind::Negate: return Expr::negate(rename_variables(expr.operands()[0], rename));
    case Expr::Kind::Binary:
      return Expr::binary(expr.binary_op(), rename_variables(expr.operands()[0], rename),
                          rename_variables(expr.operands()[1], rename));
    case Expr::Kind::Call: {
      std::vector<Expr> args;
      for (const auto& a : expr.operands()) args.push_back(rename_variables(a, rename));
      return Expr::call(expr.builtin(), std::move(args));
    }
    case Expr::Kind::Conditional: {
      auto ops = expr.operands();
      return Expr::conditional(expr.comparator(), rename_variables(ops[0], rename),
                               rename_variables(ops[1], rename), rename_variables(ops[2], rename),
                               rename_variables(ops[3], rename));
    }
  }
  return expr;
}

std::string format_number(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

// Binding strength as seen by the parser. Negative literals bind like unary minus.
constexpr int kCondPrec = 0;
constexpr int kAddPrec = 1;
constexpr int kMulPrec = 2;
constexpr int kUnaryPrec = 3;
constexpr int kPowPrec = 4;
constexpr int kAtomPrec = 5;

int precedence(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Number: return std::signbit(e.number_value()) ? kUnaryPrec : kAtomPrec;
    case Expr::Kind::Variable:
    case Expr::Kind::Time:
    case Expr::Kind::Call: return kAtomPrec;
    case Expr::Kind::Negate: return kUnaryPrec;
    case Expr::Kind::Conditional: return kCondPrec;
    case Expr::Kind::Binary:
      switch (e.binary_op()) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return kAddPrec;
        case BinaryOp::Mul:
        case BinaryOp::Div: return kMulPrec;
        case BinaryOp::Pow: return kPowPrec;
      }
  }
  return kAtomPrec;
}

void format_into(const Expr& e, std::string& out);

void format_wrapped(const Expr& e, bool parens, std::string& out) {
  if (parens) out += '(';
  format_into(e, out);
  if (parens) out += ')';
}

void format_into(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case Expr::Kind::Number: out += format_number(e.number_value()); return;
    case Expr::Kind::Variable: out += e.name(); return;
    case Expr::Kind::Time: out += 't'; return;
    case Expr::Kind::Negate: {
      const Expr& operand = e.operands()[0];
      // A bare literal after '-' would be read back as a negative literal.
      bool parens = precedence(operand) <= kUnaryPrec || operand.kind() == Expr::Kind::Number;
      out += '-';
      format_wrapped(operand, parens, out);
      return;
    }
    case Expr::Kind::Binary: {
      const Expr& lhs = e.operands()[0];
      const Expr& rhs = e.operands()[1];
      int prec = precedence(e);
      if (e.binary_op() == BinaryOp::Pow) {
        format_wrapped(lhs, precedence(lhs) <= kPowPrec, out);
        out += '^';
        format_wrapped(rhs, precedence(rhs) < kUnaryPrec, out);
        return;
      }
      format_wrapped(lhs, precedence(lhs) < prec, out);
      out += ' ';
      out += to_string(e.binary_op());
      out += ' ';
      format_wrapped(rhs, precedence(rhs) <= prec, out);
      return;
    }
    case Expr::Kind::Call: {
      out += to_string(e.builtin());
      out += '(';
      bool first = true;
      for (const auto& a : e.operands()) {
        if (!first) out += ", ";
        first = false;
        format_into(a, out);
      }
      out += ')';
      return;
    }
    case Expr::Kind::Conditional: {
      auto ops = e.operands();
      out += "if ";
      format_wrapped(ops[0], precedence(ops[0]) == kCondPrec, out);
      out += ' ';
      out += to_string(e.comparator());
      out += ' ';
      format_wrapped(ops[1], precedence(ops[1]) == kCondPrec, out);
      out += " then ";
      format_into(ops[2], out);
      out += " else ";
      format_into(ops[3], out);
      return;
    }
  }
}

}  // namespace

std::string format_expr(const Expr& expr) {
  std::string out;
  format_into(expr, out);
  return out;
}

}  // namespace sdkit
