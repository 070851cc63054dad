#include "eisenhart/expr.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <numbers>
#include <utility>

namespace eisenhart::expr {

namespace {

struct FunctionInfo {
  std::string_view name;
  Function function;
  int arity;
};

constexpr std::array<FunctionInfo, 11> kFunctions{{
    {"sin", Function::Sin, 1},
    {"cos", Function::Cos, 1},
    {"tan", Function::Tan, 1},
    {"sinh", Function::Sinh, 1},
    {"cosh", Function::Cosh, 1},
    {"tanh", Function::Tanh, 1},
    {"exp", Function::Exp, 1},
    {"log", Function::Log, 1},
    {"sqrt", Function::Sqrt, 1},
    {"abs", Function::Abs, 1},
    {"pow", Function::Pow, 2},
}};

const FunctionInfo* find_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (f.name == name) return &f;
  return nullptr;
}

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

// x<k> with k >= 1 and no leading zero; returns k or 0.
int parse_x_index(std::string_view name) {
  if (name.size() < 2 || name[0] != 'x' || name[1] == '0') return 0;
  int k = 0;
  for (std::size_t i = 1; i < name.size(); ++i) {
    if (!is_digit(name[i])) return 0;
    if (k > 100000) return 0;
    k = k * 10 + (name[i] - '0');
  }
  return k;
}

}  // namespace

bool is_reserved_name(std::string_view name) {
  return name == "u" || name == "w" || name == "pi" || name == "e" || parse_x_index(name) > 0 ||
         find_function(name) != nullptr;
}

std::string_view function_name(Function f) noexcept {
  for (const auto& info : kFunctions)
    if (info.function == f) return info.name;
  return "?";
}

class Parser {
 public:
  Parser(std::string_view text, const Symbols& symbols) : text_(text), symbols_(symbols) {
    ast_.source_ = std::string(text);
  }

  Ast run() {
    skip_space();
    parse_expr();
    skip_space();
    if (pos_ < text_.size()) fail("expected operator or end of input");
    return std::move(ast_);
  }

 private:
  [[noreturn]] void fail(const std::string& expected) const {
    std::string found = pos_ < text_.size() ? "'" + std::string(1, text_[pos_]) + "'" : "end of input";
    throw Error(ErrorCode::SyntaxError,
                "syntax error at offset " + std::to_string(pos_) + ": " + expected + ", found " + found, pos_);
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                   text_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int push(Node node) {
    ast_.nodes_.push_back(node);
    return static_cast<int>(ast_.nodes_.size()) - 1;
  }

  int binary(Op op, int lhs, int rhs) {
    Node node;
    node.op = op;
    node.lhs = lhs;
    node.rhs = rhs;
    node.span = {ast_.nodes_[lhs].span.begin, ast_.nodes_[rhs].span.end};
    return push(node);
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = binary(Op::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = binary(Op::Subtract, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_power();
    for (;;) {
      if (accept('*')) {
        lhs = binary(Op::Multiply, lhs, parse_power());
      } else if (accept('/')) {
        lhs = binary(Op::Divide, lhs, parse_power());
      } else {
        return lhs;
      }
    }
  }

  int parse_power() {
    const int base = parse_unary();
    if (accept('^')) return binary(Op::Power, base, parse_power());
    return base;
  }

  int parse_unary() {
    skip_space();
    const std::size_t start = pos_;
    if (accept('-')) {
      Node node;
      node.op = Op::Negate;
      node.lhs = parse_unary();
      node.span = {start, ast_.nodes_[node.lhs].span.end};
      return push(node);
    }
    return parse_primary();
  }

  int parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("expected number, identifier or '('");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (is_digit(c) || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_identifier();
    fail("expected number, identifier or '('");
  }

  int parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && is_digit(text_[look])) {
        pos_ = look;
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
      }
    }
    const std::string_view literal = text_.substr(start, pos_ - start);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), value);
    if (ec != std::errc() || ptr != literal.data() + literal.size()) {
      pos_ = start;
      fail("expected a valid number literal");
    }
    if (pos_ < text_.size() && (is_ident_start(text_[pos_]) || text_[pos_] == '.'))
      fail("expected operator after number (implicit multiplication is not supported)");
    Node node;
    node.op = Op::Number;
    node.number = value;
    node.span = {start, pos_};
    return push(node);
  }

  int parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    const Span span{start, pos_};

    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      const FunctionInfo* info = find_function(name);
      if (info == nullptr) {
        pos_ = start;
        throw Error(ErrorCode::UnknownIdentifier, "unknown function '" + std::string(name) + "'", start);
      }
      ++pos_;
      Node node;
      node.op = Op::Call;
      node.function = info->function;
      node.lhs = parse_expr();
      if (info->arity == 2) {
        if (!accept(',')) fail("expected ',' (" + std::string(name) + " takes 2 arguments)");
        node.rhs = parse_expr();
      }
      if (!accept(')')) fail("expected ')' closing call to " + std::string(name));
      node.span = {start, pos_};
      return push(node);
    }

    Node node;
    node.span = span;
    if (name == "pi" || name == "e") {
      node.op = Op::Number;
      node.number = name == "pi" ? std::numbers::pi : std::numbers::e;
      return push(node);
    }
    if (find_function(name) != nullptr) {
      pos_ = span.end;
      fail("expected '(' after function name " + std::string(name));
    }
    node.op = Op::Variable;
    node.variable = intern(name, start);
    return push(node);
  }

  int intern(std::string_view name, std::size_t offset) {
    for (std::size_t i = 0; i < ast_.variables_.size(); ++i)
      if (ast_.variables_[i].name == name) return static_cast<int>(i);
    Variable v;
    v.name = std::string(name);
    if (name == "u") {
      v.kind = VariableKind::U;
    } else if (name == "w") {
      v.kind = VariableKind::W;
    } else if (const int k = parse_x_index(name); k > 0) {
      if (symbols_.n >= 0 && k > symbols_.n)
        throw Error(ErrorCode::UnknownIdentifier,
                    "unknown identifier '" + v.name + "' (coordinates are x1..x" + std::to_string(symbols_.n) + ")",
                    offset);
      v.kind = VariableKind::X;
      v.x_index = k - 1;
    } else if (symbols_.parameters.count(name) != 0) {
      v.kind = VariableKind::Parameter;
    } else {
      throw Error(ErrorCode::UnknownIdentifier, "unknown identifier '" + v.name + "'", offset);
    }
    ast_.variables_.push_back(std::move(v));
    return static_cast<int>(ast_.variables_.size()) - 1;
  }

  std::string_view text_;
  const Symbols& symbols_;
  std::size_t pos_ = 0;
  Ast ast_;
};

Ast parse(std::string_view text, const Symbols& symbols) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (static_cast<unsigned char>(text[i]) >= 0x80)
      throw Error(ErrorCode::SyntaxError,
                  "syntax error at offset " + std::to_string(i) + ": identifiers and operators are ASCII", i);
  }
  return Parser(text, symbols).run();
}

namespace {

void print_node(const Ast& ast, int index, std::string& out) {
  const Node& node = ast.nodes()[static_cast<std::size_t>(index)];
  switch (node.op) {
    case Op::Number: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", node.number);
      out += buf;
      return;
    }
    case Op::Variable:
      out += ast.variables()[static_cast<std::size_t>(node.variable)].name;
      return;
    case Op::Negate:
      out += "(-";
      print_node(ast, node.lhs, out);
      out += ')';
      return;
    case Op::Call:
      out += function_name(node.function);
      out += '(';
      print_node(ast, node.lhs, out);
      if (node.rhs >= 0) {
        out += ", ";
        print_node(ast, node.rhs, out);
      }
      out += ')';
      return;
    default:
      break;
  }
  const char* op = node.op == Op::Add        ? " + "
                   : node.op == Op::Subtract ? " - "
                   : node.op == Op::Multiply ? " * "
                   : node.op == Op::Divide   ? " / "
                                             : "^";
  out += '(';
  print_node(ast, node.lhs, out);
  out += op;
  print_node(ast, node.rhs, out);
  out += ')';
}

}  // namespace

std::string print(const Ast& ast) {
  std::string out;
  print_node(ast, ast.root_index(), out);
  return out;
}

namespace detail {

void throw_eval(ErrorCode code, const Ast& ast, const Node& node, const std::string& what) {
  const std::string_view src = ast.source();
  std::string snippet;
  if (node.span.end <= src.size() && node.span.begin < node.span.end)
    snippet = std::string(src.substr(node.span.begin, node.span.end - node.span.begin));
  throw Error(code,
              what + " in '" + snippet + "' at offset " + std::to_string(node.span.begin) + " of '" + ast.source() +
                  "'",
              node.span.begin);
}

}  // namespace detail

}  // namespace eisenhart::expr
