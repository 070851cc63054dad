#pragma once

// Scenario expression language.
//
//   expr    := term (('+' | '-') term)*
//   term    := power (('*' | '/') power)*
//   power   := unary ('^' power)?          right-associative
//   unary   := '-' unary | primary         binds tighter than '^'
//   primary := number | identifier | identifier '(' expr (',' expr)* ')'
//            | '(' expr ')'
//
// Identifiers are x1..xn, u, w, declared parameters, and the constants pi
// and e. Functions: sin cos tan sinh cosh tanh exp log sqrt abs pow.

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "eisenhart/error.hpp"
#include "eisenhart/scalar.hpp"

namespace eisenhart::expr {

enum class Op { Number, Variable, Negate, Add, Subtract, Multiply, Divide, Power, Call };

enum class Function { Sin, Cos, Tan, Sinh, Cosh, Tanh, Exp, Log, Sqrt, Abs, Pow };

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct Node {
  Op op = Op::Number;
  double number = 0.0;
  int variable = -1;  // index into Ast::variables()
  Function function = Function::Sin;
  int lhs = -1;
  int rhs = -1;
  Span span;
};

enum class VariableKind { X, U, W, Parameter };

struct Variable {
  std::string name;
  VariableKind kind = VariableKind::Parameter;
  int x_index = -1;  // zero-based coordinate index for VariableKind::X
};

/// Immutable parse tree. Nodes reference children by index; the root is
/// the last node.
class Ast {
 public:
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& root() const { return nodes_.back(); }
  int root_index() const noexcept { return static_cast<int>(nodes_.size()) - 1; }
  const std::vector<Variable>& variables() const noexcept { return variables_; }
  const std::string& source() const noexcept { return source_; }

 private:
  friend class Parser;
  std::vector<Node> nodes_;
  std::vector<Variable> variables_;
  std::string source_;
};

/// Names an expression may reference. `n < 0` accepts any x<k>.
struct Symbols {
  int n = -1;
  std::set<std::string, std::less<>> parameters;
};

Ast parse(std::string_view text, const Symbols& symbols = {});

/// Fully parenthesized rendering that parses back to the same tree.
std::string print(const Ast& ast);

bool is_reserved_name(std::string_view name);

std::string_view function_name(Function f) noexcept;

template <Scalar T>
struct Env {
  std::map<std::string, T, std::less<>> variables;
  std::map<std::string, double, std::less<>> parameters;
};

namespace detail {

[[noreturn]] void throw_eval(ErrorCode code, const Ast& ast, const Node& node, const std::string& what);

template <Scalar T, class Lookup>
T evaluate_node(const Ast& ast, int index, const Lookup& lookup) {
  const Node& node = ast.nodes()[static_cast<std::size_t>(index)];
  switch (node.op) {
    case Op::Number:
      return T(node.number);
    case Op::Variable:
      return lookup(node.variable);
    case Op::Negate:
      return -evaluate_node<T>(ast, node.lhs, lookup);
    case Op::Add:
      return evaluate_node<T>(ast, node.lhs, lookup) + evaluate_node<T>(ast, node.rhs, lookup);
    case Op::Subtract:
      return evaluate_node<T>(ast, node.lhs, lookup) - evaluate_node<T>(ast, node.rhs, lookup);
    case Op::Multiply:
      return evaluate_node<T>(ast, node.lhs, lookup) * evaluate_node<T>(ast, node.rhs, lookup);
    case Op::Divide: {
      const T num = evaluate_node<T>(ast, node.lhs, lookup);
      const T den = evaluate_node<T>(ast, node.rhs, lookup);
      if (real_part(den) == 0.0) throw_eval(ErrorCode::NonFinite, ast, node, "division by zero");
      return num / den;
    }
    default:
      break;
  }
  const T a = evaluate_node<T>(ast, node.lhs, lookup);
  try {
    if (node.op == Op::Power) return scalar::pow(a, evaluate_node<T>(ast, node.rhs, lookup));
    switch (node.function) {
      case Function::Sin: return scalar::sin(a);
      case Function::Cos: return scalar::cos(a);
      case Function::Tan: return scalar::tan(a);
      case Function::Sinh: return scalar::sinh(a);
      case Function::Cosh: return scalar::cosh(a);
      case Function::Tanh: return scalar::tanh(a);
      case Function::Exp: return scalar::exp(a);
      case Function::Log: return scalar::log(a);
      case Function::Sqrt: return scalar::sqrt(a);
      case Function::Abs: return scalar::abs(a);
      case Function::Pow: return scalar::pow(a, evaluate_node<T>(ast, node.rhs, lookup));
    }
  } catch (const Error& e) {
    if (e.offset() != Error::npos) throw;
    throw_eval(e.code(), ast, node, e.what());
  }
  throw_eval(ErrorCode::FieldEvalError, ast, node, "corrupt expression tree");
}

}  // namespace detail

/// Evaluates `ast` with `lookup(variable_index) -> T` resolving variables.
template <Scalar T, class Lookup>
T evaluate(const Ast& ast, const Lookup& lookup) {
  return detail::evaluate_node<T>(ast, ast.root_index(), lookup);
}

template <Scalar T>
T eval(const Ast& ast, const Env<T>& env) {
  return evaluate<T>(ast, [&](int index) -> T {
    const Variable& v = ast.variables()[static_cast<std::size_t>(index)];
    if (auto it = env.variables.find(v.name); it != env.variables.end()) return it->second;
    if (auto it = env.parameters.find(v.name); it != env.parameters.end()) return T(it->second);
    throw Error(ErrorCode::UnboundVariable, "unbound variable '" + v.name + "'");
  });
}

}  // namespace eisenhart::expr
