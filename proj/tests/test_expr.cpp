#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "eisenhart/expr.hpp"

using namespace eisenhart;
using namespace eisenhart::expr;

namespace {

double value_of(const std::string& text, std::map<std::string, double, std::less<>> vars = {},
                std::map<std::string, double, std::less<>> params = {}) {
  Symbols s;
  for (const auto& [k, v] : params) s.parameters.insert(k);
  const Ast ast = parse(text, s);
  Env<double> env;
  env.variables = std::move(vars);
  env.parameters = std::move(params);
  return eval(ast, env);
}

Error error_of(const std::string& text, const Symbols& s = {}) {
  try {
    parse(text, s);
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected a parse error for " << text);
  return Error(ErrorCode::ConfigError, "");
}

// Random expressions over x1, x2, u, w whose values and derivatives stay
// moderate, so that central differences at step 1e-6 are accurate.
class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  std::string expression(int depth) {
    if (depth == 0 || pick(4) == 0) return leaf();
    const std::string a = expression(depth - 1);
    const std::string b = expression(depth - 1);
    switch (pick(17)) {
      case 0: return "(" + a + "+" + b + ")";
      case 1: return "(" + a + "-" + b + ")";
      case 2: return "(" + a + "*" + b + ")";
      case 3: return "(" + a + ")/(2+cos(" + b + "))";
      case 4: return "sin(" + a + ")";
      case 5: return "cos(" + a + ")";
      case 6: return "tan(0.4*tanh(" + a + "))";
      case 7: return "sinh(tanh(" + a + "))";
      case 8: return "cosh(tanh(" + a + "))";
      case 9: return "tanh(" + a + ")";
      case 10: return "exp(sin(" + a + "))";
      case 11: return "log(2+sin(" + a + "))";
      case 12: return "sqrt(2+cos(" + a + "))";
      case 13: return "abs(2+sin(" + a + "))";
      case 14: return "pow(1.5+sin(" + a + "),cos(" + b + "))";
      case 15: return "(1.5+cos(" + a + "))^(0.5*sin(" + b + "))";
      default: return "-(" + a + ")";
    }
  }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  std::string leaf() {
    static const char* names[] = {"x1", "x2", "u", "w", "pi", "e"};
    if (pick(3) == 0) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", std::uniform_real_distribution<double>(0.1, 2.0)(rng_));
      return buf;
    }
    return names[pick(6)];
  }

  std::mt19937_64 rng_;
};

const char* kVars[] = {"x1", "x2", "u", "w"};

template <Scalar T>
T eval_at(const Ast& ast, const std::vector<T>& v) {
  Env<T> env;
  for (int i = 0; i < 4; ++i) env.variables[kVars[i]] = v[static_cast<std::size_t>(i)];
  return eval(ast, env);
}

std::vector<std::string> corpus() {
  std::vector<std::string> c{"0.5*x1^2",
                             "exp(gamma*u)*(0.5)",
                             "0.5*x1^2 + gamma*w",
                             "-x1^2",
                             "2^3^2",
                             "1-2-3",
                             "8/4/2",
                             "exp(-0.2*u)*w",
                             "pow(x1, 2) + sqrt(4 + w^2)",
                             "-(-x1)",
                             "1e-3*x1 + 2.5E+2*u",
                             "pi*e",
                             "sin(x1)*cos(x2)/(1+u^2)",
                             "abs(x1-x2) + tanh(w)",
                             "log(1 + x1^2) - sinh(u)*cosh(w)"};
  Generator g(7);
  while (c.size() < 50) c.push_back(g.expression(3));
  return c;
}

}  // namespace

TEST_CASE("spec examples parse and evaluate") {
  CHECK(value_of("0.5*x1^2", {{"x1", 3.0}}) == 4.5);
  CHECK(value_of("exp(gamma*u)*(0.5)", {{"u", 0.0}}, {{"gamma", 0.2}}) == 0.5);
  CHECK(value_of("0.5*x1^2 + gamma*w", {{"x1", 2.0}, {"w", 3.0}}, {{"gamma", 0.2}}) ==
        doctest::Approx(2.0 + 0.6).epsilon(1e-15));
  CHECK(value_of("x1+x1", {{"x1", 1.0}}) == 2.0);
  CHECK(value_of("exp(-0.2*u)*w", {{"u", 0.0}, {"w", 5.0}}) == 5.0);
}

TEST_CASE("dual evaluation of 0.5*x1^2 at 3") {
  const Ast ast = parse("0.5*x1^2");
  const std::vector<double> p{3.0};
  Env<Dual> env;
  env.variables["x1"] = seed(p)[0];
  const Dual y = eval(ast, env);
  CHECK(y.value() == 4.5);
  CHECK(y.d(0) == 3.0);
}

TEST_CASE("precedence and associativity") {
  CHECK(value_of("-x1^2", {{"x1", 3.0}}) == 9.0);  // unary minus binds tighter than ^
  CHECK(value_of("-2^2") == 4.0);
  CHECK(value_of("2^3^2") == 512.0);
  CHECK(value_of("1-2-3") == -4.0);
  CHECK(value_of("8/4/2") == 1.0);
  CHECK(value_of("2+3*4") == 14.0);
  CHECK(value_of("2*3^2") == 18.0);
  CHECK(value_of("(2+3)*4") == 20.0);
  CHECK(value_of("pi") == M_PI);
  CHECK(value_of("e") == M_E);
  CHECK(value_of("pow(2, 10)") == 1024.0);
}

TEST_CASE("syntax errors carry byte offsets") {
  const Error implicit = error_of("2x1");
  CHECK(implicit.code() == ErrorCode::SyntaxError);
  CHECK(implicit.offset() == 1);
  const Error dangling = error_of("x1 +");
  CHECK(dangling.code() == ErrorCode::SyntaxError);
  CHECK(dangling.offset() == 4);
  CHECK(error_of("(x1").code() == ErrorCode::SyntaxError);
  CHECK(error_of("x1)").code() == ErrorCode::SyntaxError);
  CHECK(error_of("").code() == ErrorCode::SyntaxError);
  CHECK(error_of("sin x1").code() == ErrorCode::SyntaxError);
  const Error utf = error_of("x1 + \xce\xb3");
  CHECK(utf.code() == ErrorCode::SyntaxError);
  CHECK(utf.offset() == 5);
}

TEST_CASE("unknown identifiers are named") {
  const Error e = error_of("0.5*gamma*x1");
  CHECK(e.code() == ErrorCode::UnknownIdentifier);
  CHECK(std::string(e.what()).find("gamma") != std::string::npos);
  CHECK(e.offset() == 4);
  CHECK(error_of("foo(x1)").code() == ErrorCode::UnknownIdentifier);
  Symbols two;
  two.n = 2;
  CHECK(error_of("x3", two).code() == ErrorCode::UnknownIdentifier);
  CHECK_NOTHROW(parse("x2", two));
  CHECK(error_of("x0").code() == ErrorCode::UnknownIdentifier);
}

TEST_CASE("evaluation errors") {
  const Ast ast = parse("x1 + y1", Symbols{-1, {"y1"}});
  Env<double> env;
  env.variables["x1"] = 1.0;
  try {
    eval(ast, env);
    FAIL("expected UnboundVariable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnboundVariable);
  }
  try {
    value_of("1 + 1/(x1-1)", {{"x1", 1.0}});
    FAIL("expected division error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
    CHECK(e.offset() == 4);  // span of the division subexpression
  }
  try {
    value_of("2*log(x1)", {{"x1", -1.0}});
    FAIL("expected log error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
    CHECK(e.offset() == 2);
  }
}

TEST_CASE("parse print parse is idempotent on the corpus") {
  const Symbols s{-1, {"gamma"}};
  for (const auto& text : corpus()) {
    CAPTURE(text);
    const Ast a = parse(text, s);
    const std::string p1 = print(a);
    const Ast b = parse(p1, s);
    CHECK(print(b) == p1);
    Env<double> env;
    env.variables = {{"x1", 0.3}, {"x2", -0.4}, {"u", 0.7}, {"w", 0.2}};
    env.parameters = {{"gamma", 0.2}};
    const double va = eval(a, env);
    const double vb = eval(b, env);
    CHECK(va == vb);
  }
}

TEST_CASE("dual value part equals real evaluation bit for bit") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (const auto& text : corpus()) {
    const Ast ast = parse(text, Symbols{-1, {"gamma"}});
    for (int k = 0; k < 100; ++k) {
      std::vector<double> p{U(rng), U(rng), U(rng), U(rng)};
      Env<double> er;
      Env<Dual> ed;
      const auto seeded = seed(p);
      for (int i = 0; i < 4; ++i) {
        er.variables[kVars[i]] = p[static_cast<std::size_t>(i)];
        ed.variables[kVars[i]] = seeded[static_cast<std::size_t>(i)];
      }
      er.parameters = ed.parameters = {{"gamma", 0.2}};
      double r = 0.0;
      try {
        r = eval(ast, er);
      } catch (const Error&) {
        CHECK_THROWS_AS(eval(ast, ed), Error);
        continue;
      }
      const double d = eval(ast, ed).value();
      if (d != r) FAIL_CHECK(text << " real " << r << " dual " << d);
    }
  }
}

TEST_CASE("500 random expressions: autodiff against central differences") {
  Generator g(2024);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    const std::string text = g.expression(4);
    const Ast ast = parse(text);
    const std::vector<double> p{U(rng), U(rng), U(rng), U(rng)};
    const Dual y = eval_at<Dual>(ast, seed(p));
    for (std::size_t i = 0; i < 4; ++i) {
      std::vector<double> pp = p, pm = p;
      pp[i] += 1e-6;
      pm[i] -= 1e-6;
      const double fd = (eval_at<double>(ast, pp) - eval_at<double>(ast, pm)) / 2e-6;
      const double gap = std::abs(fd - y.d(i));
      worst = std::max(worst, gap);
      if (gap > 1e-6) FAIL_CHECK(text << " d/d" << kVars[i] << " autodiff " << y.d(i) << " fd " << fd);
    }
  }
  MESSAGE("worst gap " << worst);
}

TEST_CASE("reserved names") {
  for (const char* r : {"u", "w", "x1", "pi", "e", "sin", "pow"}) CHECK(is_reserved_name(r));
  for (const char* ok : {"gamma", "omega", "k"}) CHECK_FALSE(is_reserved_name(ok));
}
