#include "stla/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace stla {

namespace {

constexpr std::array<std::string_view, 5> kFunctions = {"sin", "cos", "exp", "sqrt", "log"};

bool is_function_name(std::string_view s) {
  return std::find(kFunctions.begin(), kFunctions.end(), s) != kFunctions.end();
}

bool is_reserved(std::string_view s) { return s == "pi" || is_function_name(s); }

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Exact integer power by repeated multiplication.
double pow_by_squaring(double base, int exponent) {
  double result = 1.0;
  double b = base;
  int e = exponent;
  while (e > 0) {
    if (e & 1) result *= b;
    b *= b;
    e >>= 1;
  }
  return result;
}

}  // namespace

class ExprParser {
 public:
  ExprParser(std::string_view text, const std::vector<std::string>& variables, Expr& out)
      : text_(text), variables_(variables), out_(out) {}

  void run() {
    int root = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) throw SyntaxError("unexpected trailing input", pos_);
    (void)root;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int parse_sum() {
    int lhs = parse_product();
    for (;;) {
      if (consume('+')) {
        int rhs = parse_product();
        lhs = out_.push({Expr::Op::kAdd, 0.0, -1, lhs, rhs});
      } else if (consume('-')) {
        int rhs = parse_product();
        lhs = out_.push({Expr::Op::kSub, 0.0, -1, lhs, rhs});
      } else {
        return lhs;
      }
    }
  }

  int parse_product() {
    int lhs = parse_unary();
    for (;;) {
      if (consume('*')) {
        int rhs = parse_unary();
        lhs = out_.push({Expr::Op::kMul, 0.0, -1, lhs, rhs});
      } else if (consume('/')) {
        int rhs = parse_unary();
        lhs = out_.push({Expr::Op::kDiv, 0.0, -1, lhs, rhs});
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    if (consume('-')) {
      int operand = parse_unary();
      return out_.push({Expr::Op::kNeg, 0.0, -1, operand, -1});
    }
    return parse_power();
  }

  int parse_power() {
    int base = parse_atom();
    if (consume('^')) {
      int exponent = parse_unary();  // right associative; allows x^-2
      return out_.push({Expr::Op::kPow, 0.0, -1, base, exponent});
    }
    return base;
  }

  int parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError("unexpected end of input", pos_);
    char c = text_[pos_];

    if (c == '(') {
      std::size_t open = pos_;
      ++pos_;
      int inner = parse_sum();
      skip_ws();
      if (!consume(')')) throw SyntaxError("unbalanced parenthesis", std::min(pos_, text_.size()));
      (void)open;
      return inner;
    }

    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();

    throw SyntaxError(std::string("unexpected character '") + c + "'", pos_);
  }

  int parse_number() {
    double value = 0.0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) throw SyntaxError("malformed number", pos_);
    pos_ += static_cast<std::size_t>(ptr - begin);
    return out_.push({Expr::Op::kLiteral, value, -1, -1, -1});
  }

  int parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    std::string_view name = text_.substr(start, pos_ - start);

    if (is_function_name(name)) {
      if (!consume('(')) throw SyntaxError("expected '(' after function name", pos_);
      int arg = parse_sum();
      if (!consume(')')) throw SyntaxError("unbalanced parenthesis", std::min(pos_, text_.size()));
      Expr::Op op = Expr::Op::kSin;
      if (name == "cos") op = Expr::Op::kCos;
      else if (name == "exp") op = Expr::Op::kExp;
      else if (name == "sqrt") op = Expr::Op::kSqrt;
      else if (name == "log") op = Expr::Op::kLog;
      return out_.push({op, 0.0, -1, arg, -1});
    }

    for (std::size_t i = 0; i < variables_.size(); ++i) {
      if (variables_[i] == name) {
        return out_.push({Expr::Op::kVariable, 0.0, static_cast<int>(i), -1, -1});
      }
    }

    if (name == "pi") {
      return out_.push({Expr::Op::kLiteral, std::numbers::pi, -1, -1, -1});
    }

    throw UnknownIdentifier(std::string(name));
  }

  std::string_view text_;
  const std::vector<std::string>& variables_;
  Expr& out_;
  std::size_t pos_ = 0;
};

int Expr::push(Node node) {
  nodes_.push_back(node);
  return static_cast<int>(nodes_.size()) - 1;
}

namespace {

void check_variable_list(const std::vector<std::string>& variables) {
  if (variables.empty()) throw std::invalid_argument("variable list must be nonempty");
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (is_reserved(variables[i]))
      throw std::invalid_argument("variable name '" + variables[i] + "' is reserved");
    for (std::size_t j = i + 1; j < variables.size(); ++j) {
      if (variables[i] == variables[j])
        throw std::invalid_argument("duplicate variable name '" + variables[i] + "'");
    }
  }
}

}  // namespace

Expr Expr::parse(std::string_view text, const std::vector<std::string>& variables) {
  check_variable_list(variables);
  Expr e;
  e.variables_ = variables;
  ExprParser parser(text, variables, e);
  parser.run();
  return e;
}

int Expr::clone_into(const Expr& source, int node) {
  const Node& n = source.nodes_[static_cast<std::size_t>(node)];
  Node copy = n;
  if (n.lhs >= 0) copy.lhs = clone_into(source, n.lhs);
  if (n.rhs >= 0) copy.rhs = clone_into(source, n.rhs);
  return push(copy);
}

Expr Expr::constant(double value, std::vector<std::string> variables) {
  check_variable_list(variables);
  Expr e;
  e.variables_ = std::move(variables);
  e.push({Op::kLiteral, value, -1, -1, -1});
  return e;
}

Expr Expr::variable(int index, std::vector<std::string> variables) {
  check_variable_list(variables);
  if (index < 0 || index >= static_cast<int>(variables.size()))
    throw std::invalid_argument("variable index out of range");
  Expr e;
  e.variables_ = std::move(variables);
  e.push({Op::kVariable, 0.0, index, -1, -1});
  return e;
}

Expr Expr::negate(const Expr& a) {
  Expr e;
  e.variables_ = a.variables_;
  int operand = e.clone_into(a, static_cast<int>(a.nodes_.size()) - 1);
  e.push({Op::kNeg, 0.0, -1, operand, -1});
  return e;
}

#define STLA_BINARY_BUILDER(name, opcode)                                     \
  Expr Expr::name(const Expr& a, const Expr& b) {                             \
    if (a.variables_ != b.variables_)                                         \
      throw std::invalid_argument("operand variable lists differ");           \
    Expr e;                                                                   \
    e.variables_ = a.variables_;                                              \
    int lhs = e.clone_into(a, static_cast<int>(a.nodes_.size()) - 1);         \
    int rhs = e.clone_into(b, static_cast<int>(b.nodes_.size()) - 1);         \
    e.push({opcode, 0.0, -1, lhs, rhs});                                      \
    return e;                                                                 \
  }

STLA_BINARY_BUILDER(add, Op::kAdd)
STLA_BINARY_BUILDER(sub, Op::kSub)
STLA_BINARY_BUILDER(mul, Op::kMul)
STLA_BINARY_BUILDER(div, Op::kDiv)
#undef STLA_BINARY_BUILDER

Expr Expr::pow_int(const Expr& base, int exponent) {
  Expr e;
  e.variables_ = base.variables_;
  int lhs = e.clone_into(base, static_cast<int>(base.nodes_.size()) - 1);
  int rhs = e.push({Op::kLiteral, static_cast<double>(exponent), -1, -1, -1});
  e.push({Op::kPow, 0.0, -1, lhs, rhs});
  return e;
}

Expr Expr::call(const std::string& function, const Expr& argument) {
  Op op;
  if (function == "sin") op = Op::kSin;
  else if (function == "cos") op = Op::kCos;
  else if (function == "exp") op = Op::kExp;
  else if (function == "sqrt") op = Op::kSqrt;
  else if (function == "log") op = Op::kLog;
  else throw std::invalid_argument("unknown function '" + function + "'");
  Expr e;
  e.variables_ = argument.variables_;
  int arg = e.clone_into(argument, static_cast<int>(argument.nodes_.size()) - 1);
  e.push({op, 0.0, -1, arg, -1});
  return e;
}

double Expr::eval_node_values(const Eigen::VectorXd& point, double* v) const {
  const std::size_t count = nodes_.size();
  for (std::size_t i = 0; i < count; ++i) {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::kLiteral:
        v[i] = n.number;
        break;
      case Op::kVariable:
        v[i] = point[n.var];
        break;
      case Op::kNeg:
        v[i] = -v[n.lhs];
        break;
      case Op::kAdd:
        v[i] = v[n.lhs] + v[n.rhs];
        break;
      case Op::kSub:
        v[i] = v[n.lhs] - v[n.rhs];
        break;
      case Op::kMul:
        v[i] = v[n.lhs] * v[n.rhs];
        break;
      case Op::kDiv:
        if (v[n.rhs] == 0.0) throw DomainError("division by zero", node_string(static_cast<int>(i)));
        v[i] = v[n.lhs] / v[n.rhs];
        break;
      case Op::kPow: {
        const Node& en = nodes_[static_cast<std::size_t>(n.rhs)];
        double exponent = v[n.rhs];
        bool syntactic_const =
            en.op == Op::kLiteral ||
            (en.op == Op::kNeg && nodes_[static_cast<std::size_t>(en.lhs)].op == Op::kLiteral);
        double base = v[n.lhs];
        if (syntactic_const && exponent == std::nearbyint(exponent) && std::abs(exponent) <= 64.0) {
          int k = static_cast<int>(exponent);
          if (k < 0) {
            if (base == 0.0) throw DomainError("zero raised to a negative power", node_string(static_cast<int>(i)));
            v[i] = 1.0 / pow_by_squaring(base, -k);
          } else {
            v[i] = pow_by_squaring(base, k);
          }
        } else {
          if (base <= 0.0)
            throw DomainError("nonintegral power of a nonpositive base", node_string(static_cast<int>(i)));
          v[i] = std::pow(base, exponent);
        }
        break;
      }
      case Op::kSin:
        v[i] = std::sin(v[n.lhs]);
        break;
      case Op::kCos:
        v[i] = std::cos(v[n.lhs]);
        break;
      case Op::kExp:
        v[i] = std::exp(v[n.lhs]);
        break;
      case Op::kSqrt:
        if (v[n.lhs] < 0.0) throw DomainError("square root of a negative number", node_string(static_cast<int>(i)));
        v[i] = std::sqrt(v[n.lhs]);
        break;
      case Op::kLog:
        if (v[n.lhs] <= 0.0) throw DomainError("logarithm of a nonpositive number", node_string(static_cast<int>(i)));
        v[i] = std::log(v[n.lhs]);
        break;
    }
  }
  return v[count - 1];
}

double Expr::value(const Eigen::VectorXd& point) const {
  if (nodes_.empty()) throw std::logic_error("evaluating an empty expression");
  if (point.size() != num_variables()) throw std::invalid_argument("point dimension mismatch");
  constexpr std::size_t kSmall = 128;
  if (nodes_.size() <= kSmall) {
    double buffer[kSmall];
    return eval_node_values(point, buffer);
  }
  std::vector<double> buffer(nodes_.size());
  return eval_node_values(point, buffer.data());
}

namespace {

// Second order jet arithmetic. All Hessian updates fill the upper triangle
// and mirror it, so symmetry is exact by construction.
struct JetWork {
  double v = 0.0;
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
};

template <typename F>
void sym_fill(Eigen::MatrixXd& h, F&& entry) {
  const Eigen::Index n = h.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      double e = entry(i, j);
      h(i, j) = e;
      h(j, i) = e;
    }
  }
}

// out = g(s) for a univariate g applied to jet s, given g(s), g'(s), g''(s).
void compose(const JetWork& s, double value, double d1, double d2, JetWork& out) {
  out.v = value;
  out.g = d1 * s.g;
  out.h.resizeLike(s.h);
  sym_fill(out.h, [&](Eigen::Index i, Eigen::Index j) {
    return d1 * s.h(i, j) + d2 * s.g[i] * s.g[j];
  });
}

}  // namespace

Jet2 Expr::jet2(const Eigen::VectorXd& point) const {
  if (nodes_.empty()) throw std::logic_error("evaluating an empty expression");
  if (point.size() != num_variables()) throw std::invalid_argument("point dimension mismatch");
  const Eigen::Index n = num_variables();
  std::vector<JetWork> w(nodes_.size());

  auto init = [&](JetWork& jw) {
    jw.g = Eigen::VectorXd::Zero(n);
    jw.h = Eigen::MatrixXd::Zero(n, n);
  };

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& node = nodes_[i];
    JetWork& out = w[i];
    switch (node.op) {
      case Op::kLiteral:
        init(out);
        out.v = node.number;
        break;
      case Op::kVariable:
        init(out);
        out.v = point[node.var];
        out.g[node.var] = 1.0;
        break;
      case Op::kNeg: {
        const JetWork& a = w[node.lhs];
        out.v = -a.v;
        out.g = -a.g;
        out.h = -a.h;
        break;
      }
      case Op::kAdd: {
        const JetWork& a = w[node.lhs];
        const JetWork& b = w[node.rhs];
        out.v = a.v + b.v;
        out.g = a.g + b.g;
        out.h = a.h + b.h;
        break;
      }
      case Op::kSub: {
        const JetWork& a = w[node.lhs];
        const JetWork& b = w[node.rhs];
        out.v = a.v - b.v;
        out.g = a.g - b.g;
        out.h = a.h - b.h;
        break;
      }
      case Op::kMul: {
        const JetWork& a = w[node.lhs];
        const JetWork& b = w[node.rhs];
        out.v = a.v * b.v;
        out.g = a.v * b.g + b.v * a.g;
        out.h.resize(n, n);
        sym_fill(out.h, [&](Eigen::Index r, Eigen::Index c) {
          return a.v * b.h(r, c) + b.v * a.h(r, c) + a.g[r] * b.g[c] + b.g[r] * a.g[c];
        });
        break;
      }
      case Op::kDiv: {
        const JetWork& a = w[node.lhs];
        const JetWork& b = w[node.rhs];
        if (b.v == 0.0) throw DomainError("division by zero", node_string(static_cast<int>(i)));
        JetWork recip;
        double inv = 1.0 / b.v;
        compose(b, inv, -inv * inv, 2.0 * inv * inv * inv, recip);
        out.v = a.v * recip.v;
        out.g = a.v * recip.g + recip.v * a.g;
        out.h.resize(n, n);
        sym_fill(out.h, [&](Eigen::Index r, Eigen::Index c) {
          return a.v * recip.h(r, c) + recip.v * a.h(r, c) + a.g[r] * recip.g[c] +
                 recip.g[r] * a.g[c];
        });
        break;
      }
      case Op::kPow: {
        const JetWork& base = w[node.lhs];
        const Node& en = nodes_[static_cast<std::size_t>(node.rhs)];
        bool syntactic_const =
            en.op == Op::kLiteral ||
            (en.op == Op::kNeg && nodes_[static_cast<std::size_t>(en.lhs)].op == Op::kLiteral);
        double exponent = w[node.rhs].v;
        if (syntactic_const && exponent == std::nearbyint(exponent) && std::abs(exponent) <= 64.0) {
          int k = static_cast<int>(exponent);
          double s = base.v;
          if (k == 0) {
            init(out);
            out.v = 1.0;
          } else if (k > 0) {
            double d2 = (k >= 2) ? static_cast<double>(k) * (k - 1) * pow_by_squaring(s, k - 2) : 0.0;
            compose(base, pow_by_squaring(s, k), k * pow_by_squaring(s, k - 1), d2, out);
          } else {
            if (s == 0.0)
              throw DomainError("zero raised to a negative power", node_string(static_cast<int>(i)));
            double p = 1.0 / pow_by_squaring(s, -k);  // s^k
            compose(base, p, k * p / s, static_cast<double>(k) * (k - 1) * p / (s * s), out);
          }
        } else {
          if (base.v <= 0.0)
            throw DomainError("nonintegral power of a nonpositive base", node_string(static_cast<int>(i)));
          // a^b = exp(b log a) handles variable exponents too.
          const JetWork& b = w[node.rhs];
          JetWork lg, prod;
          compose(base, std::log(base.v), 1.0 / base.v, -1.0 / (base.v * base.v), lg);
          prod.v = b.v * lg.v;
          prod.g = b.v * lg.g + lg.v * b.g;
          prod.h.resize(n, n);
          sym_fill(prod.h, [&](Eigen::Index r, Eigen::Index c) {
            return b.v * lg.h(r, c) + lg.v * b.h(r, c) + b.g[r] * lg.g[c] + lg.g[r] * b.g[c];
          });
          double e = std::exp(prod.v);
          compose(prod, e, e, e, out);
        }
        break;
      }
      case Op::kSin: {
        const JetWork& a = w[node.lhs];
        compose(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v), out);
        break;
      }
      case Op::kCos: {
        const JetWork& a = w[node.lhs];
        compose(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v), out);
        break;
      }
      case Op::kExp: {
        const JetWork& a = w[node.lhs];
        double e = std::exp(a.v);
        compose(a, e, e, e, out);
        break;
      }
      case Op::kSqrt: {
        const JetWork& a = w[node.lhs];
        if (a.v <= 0.0)
          throw DomainError("square root of a nonpositive number", node_string(static_cast<int>(i)));
        double r = std::sqrt(a.v);
        compose(a, r, 0.5 / r, -0.25 / (r * a.v), out);
        break;
      }
      case Op::kLog: {
        const JetWork& a = w[node.lhs];
        if (a.v <= 0.0)
          throw DomainError("logarithm of a nonpositive number", node_string(static_cast<int>(i)));
        compose(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v), out);
        break;
      }
    }
  }

  const JetWork& root = w.back();
  Jet2 jet;
  jet.value = root.v;
  jet.gradient = root.g;
  jet.hessian = root.h;
  return jet;
}

std::string Expr::render(int node, int parent_precedence, bool right_operand) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  // precedence classes: 1 additive, 2 multiplicative, 3 unary minus, 4 power, 5 atom
  int prec = 5;
  std::string body;
  switch (n.op) {
    case Op::kLiteral:
      body = format_number(n.number);
      if (!body.empty() && body[0] == '-') prec = 3;
      break;
    case Op::kVariable:
      body = variables_[static_cast<std::size_t>(n.var)];
      break;
    case Op::kNeg:
      prec = 3;
      body = "-" + render(n.lhs, prec, false);
      break;
    case Op::kAdd:
      prec = 1;
      body = render(n.lhs, prec, false) + " + " + render(n.rhs, prec, true);
      break;
    case Op::kSub:
      prec = 1;
      body = render(n.lhs, prec, false) + " - " + render(n.rhs, prec, true);
      break;
    case Op::kMul:
      prec = 2;
      body = render(n.lhs, prec, false) + "*" + render(n.rhs, prec, true);
      break;
    case Op::kDiv:
      prec = 2;
      body = render(n.lhs, prec, false) + "/" + render(n.rhs, prec, true);
      break;
    case Op::kPow:
      prec = 4;
      body = render(n.lhs, prec, true) + "^" + render(n.rhs, prec - 1, false);
      break;
    case Op::kSin:
      body = "sin(" + render(n.lhs, 0, false) + ")";
      break;
    case Op::kCos:
      body = "cos(" + render(n.lhs, 0, false) + ")";
      break;
    case Op::kExp:
      body = "exp(" + render(n.lhs, 0, false) + ")";
      break;
    case Op::kSqrt:
      body = "sqrt(" + render(n.lhs, 0, false) + ")";
      break;
    case Op::kLog:
      body = "log(" + render(n.lhs, 0, false) + ")";
      break;
  }
  bool needs_parens = prec < parent_precedence || (prec == parent_precedence && right_operand);
  if (needs_parens) return "(" + body + ")";
  return body;
}

std::string Expr::node_string(int node) const { return render(node, 0, false); }

std::string Expr::str() const {
  if (nodes_.empty()) return "";
  return render(static_cast<int>(nodes_.size()) - 1, 0, false);
}

bool Expr::structurally_equal(const Expr& other) const {
  if (num_variables() != other.num_variables()) return false;
  if (nodes_.empty() || other.nodes_.empty()) return nodes_.empty() == other.nodes_.empty();

  auto eq = [&](auto&& self, int a, int b) -> bool {
    const Node& na = nodes_[static_cast<std::size_t>(a)];
    const Node& nb = other.nodes_[static_cast<std::size_t>(b)];
    if (na.op != nb.op) return false;
    switch (na.op) {
      case Op::kLiteral:
        return na.number == nb.number;
      case Op::kVariable:
        return na.var == nb.var;
      default:
        break;
    }
    if ((na.lhs >= 0) != (nb.lhs >= 0) || (na.rhs >= 0) != (nb.rhs >= 0)) return false;
    if (na.lhs >= 0 && !self(self, na.lhs, nb.lhs)) return false;
    if (na.rhs >= 0 && !self(self, na.rhs, nb.rhs)) return false;
    return true;
  };
  return eq(eq, static_cast<int>(nodes_.size()) - 1, static_cast<int>(other.nodes_.size()) - 1);
}

}  // namespace stla
