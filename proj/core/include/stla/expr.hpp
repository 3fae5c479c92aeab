#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stla/errors.hpp"

namespace stla {

/// Value, gradient and Hessian of a scalar expression at a point.
/// The Hessian is filled symmetrically; only the upper triangle is computed.
struct Jet2 {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Scalar expression in named variables, immutable after construction.
/// Evaluation is pure and reentrant: the same Expr may be evaluated from many
/// threads concurrently.
///
/// Grammar (see README): infix with precedence ^ > unary- > * / > + -, all
/// left associative except ^ which is right associative. Identifiers are
/// [a-zA-Z_][a-zA-Z0-9_]*, functions are sin|cos|exp|sqrt|log, `pi` is a
/// builtin constant, literals are decimal with optional exponent.
class Expr {
 public:
  Expr() = default;

  static Expr parse(std::string_view text, const std::vector<std::string>& variables);

  // Programmatic builders; operands must agree on the variable list.
  static Expr constant(double value, std::vector<std::string> variables);
  static Expr variable(int index, std::vector<std::string> variables);
  static Expr negate(const Expr& e);
  static Expr add(const Expr& a, const Expr& b);
  static Expr sub(const Expr& a, const Expr& b);
  static Expr mul(const Expr& a, const Expr& b);
  static Expr div(const Expr& a, const Expr& b);
  static Expr pow_int(const Expr& base, int exponent);
  static Expr call(const std::string& function, const Expr& argument);

  bool empty() const noexcept { return nodes_.empty(); }
  int num_variables() const noexcept { return static_cast<int>(variables_.size()); }
  const std::vector<std::string>& variables() const noexcept { return variables_; }

  /// Value-only fast path; identical value to jet2().value.
  double value(const Eigen::VectorXd& point) const;

  /// Exact value, gradient and Hessian at the point.
  Jet2 jet2(const Eigen::VectorXd& point) const;

  /// Render back to the input grammar. parse(str()) is structurally equal.
  std::string str() const;

  bool structurally_equal(const Expr& other) const;

 private:
  enum class Op : std::uint8_t {
    kLiteral,
    kVariable,
    kNeg,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kPow,
    kSin,
    kCos,
    kExp,
    kSqrt,
    kLog,
  };

  struct Node {
    Op op = Op::kLiteral;
    double number = 0.0;
    int var = -1;
    int lhs = -1;
    int rhs = -1;
  };

  friend class ExprParser;

  int push(Node node);
  int clone_into(const Expr& source, int node);

  std::string render(int node, int parent_precedence, bool right_operand) const;
  std::string node_string(int node) const;
  double eval_node_values(const Eigen::VectorXd& point, double* values) const;

  std::vector<Node> nodes_;  // topological order, children before parents, root last
  std::vector<std::string> variables_;
};

}  // namespace stla
