#pragma once

#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdkit {

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Comparator { Less, LessEqual, Greater, GreaterEqual };
enum class Builtin { Exp, Min, Max, Abs };

const char* to_string(BinaryOp op);
const char* to_string(Comparator cmp);
const char* to_string(Builtin fn);

/// Immutable expression tree. Copies share nodes; equality is structural.
class Expr {
 public:
  enum class Kind { Number, Variable, Time, Negate, Binary, Call, Conditional };

  static Expr number(double value);
  static Expr variable(std::string name);
  static Expr time();
  static Expr negate(Expr operand);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
  static Expr call(Builtin fn, std::vector<Expr> args);
  /// `if lhs <cmp> rhs then then_branch else else_branch`
  static Expr conditional(Comparator cmp, Expr lhs, Expr rhs, Expr then_branch, Expr else_branch);

  Kind kind() const;
  double number_value() const;
  const std::string& name() const;
  BinaryOp binary_op() const;
  Builtin builtin() const;
  Comparator comparator() const;
  /// Negate: [operand]; Binary: [lhs, rhs]; Call: args;
  /// Conditional: [lhs, rhs, then, else].
  std::span<const Expr> operands() const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

inline Expr operator+(Expr a, Expr b) { return Expr::binary(BinaryOp::Add, std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return Expr::binary(BinaryOp::Sub, std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return Expr::binary(BinaryOp::Mul, std::move(a), std::move(b)); }
inline Expr operator/(Expr a, Expr b) { return Expr::binary(BinaryOp::Div, std::move(a), std::move(b)); }
inline Expr operator-(Expr a) { return Expr::negate(std::move(a)); }

enum class EvalErrorKind { UnboundVariable, DivisionByZero, DomainError };

class EvalError : public std::runtime_error {
 public:
  EvalError(EvalErrorKind kind, std::string subject, const std::string& message)
      : std::runtime_error(message), kind_(kind), subject_(std::move(subject)) {}

  EvalErrorKind kind() const { return kind_; }
  /// The unbound name, or the offending operator text.
  const std::string& subject() const { return subject_; }

 private:
  EvalErrorKind kind_;
  std::string subject_;
};

using Environment = std::map<std::string, double, std::less<>>;

/// Deterministic evaluation. Throws EvalError.
double evaluate(const Expr& expr, const Environment& env, double t);

// Primitive operations shared by every evaluator so that all evaluation
// routes produce the same bits.
double apply_binary(BinaryOp op, double lhs, double rhs);
double apply_builtin(Builtin fn, std::span<const double> args);
bool compare(Comparator cmp, double lhs, double rhs);

/// Distinct variable names referenced by `expr` (excluding `t`).
std::set<std::string> referenced_names(const Expr& expr);
bool references_time(const Expr& expr);

/// Replaces every variable reference through `rename`.
Expr rename_variables(const Expr& expr, const std::map<std::string, std::string>& rename);

/// DSL text with minimal parentheses. Parsing the result yields an equal tree.
std::string format_expr(const Expr& expr);

/// Shortest decimal text that reads back to exactly `value`.
std::string format_number(double value);

}  // namespace sdkit
