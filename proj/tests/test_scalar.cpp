#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "eisenhart/scalar.hpp"

using namespace eisenhart;

namespace {

double central(const std::function<double(double)>& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

}  // namespace

TEST_CASE("seed gives unit gradients") {
  const std::vector<double> p{0.0, 0.0, 0.0};
  const auto s = seed(p);
  REQUIRE(s.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(s[j].value() == 0.0);
    CHECK(s[j].dim() == 3);
    for (std::size_t k = 0; k < 3; ++k) CHECK(s[j].d(k) == (j == k ? 1.0 : 0.0));
  }
}

TEST_CASE("seed rejects non-finite entries") {
  const std::vector<double> nan{1.0, std::numeric_limits<double>::quiet_NaN()};
  const std::vector<double> inf{std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(seed(nan), Error);
  try {
    seed(inf);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
  }
}

TEST_CASE("square at 3") {
  const std::vector<double> p{3.0};
  const auto x = seed(p);
  const Dual y = x[0] * x[0];
  CHECK(y.value() == 9.0);
  CHECK(y.d(0) == 6.0);
}

TEST_CASE("exp(gamma u) x against finite differences") {
  const double gamma = 0.2;
  const std::vector<double> p{1.0, 2.0, 0.0};
  auto f = [&](std::span<const Dual> c) { return scalar::exp(gamma * c[1]) * c[0]; };
  const auto g = gradient(f, p);
  CHECK(g[1] == doctest::Approx(0.2 * std::exp(0.4)).epsilon(1e-15));
  const double fd = central([&](double u) { return std::exp(gamma * u) * 1.0; }, 2.0);
  CHECK(std::abs(g[1] - fd) < 1e-8);
  CHECK(g[2] == 0.0);
}

TEST_CASE("gradient examples") {
  const std::vector<double> p{2.0, 0.5, 0.1};
  CHECK(gradient([](std::span<const Dual>) { return Dual(4.0); }, p) == std::vector<double>{0.0, 0.0, 0.0});
  const auto gv = gradient([](std::span<const Dual> c) { return 0.5 * c[0] * c[0]; }, p);
  CHECK(gv[0] == 2.0);

  // 1/2 h xdot^2 with h = e^{gamma u}: the u-derivative picks up gamma.
  const double gamma = 0.3, xdot = 1.7;
  auto kinetic = [&](std::span<const Dual> c) { return 0.5 * scalar::exp(gamma * c[1]) * xdot * xdot; };
  const auto gk = gradient(kinetic, p);
  const double fd = central([&](double u) { return 0.5 * std::exp(gamma * u) * xdot * xdot; }, 0.5);
  CHECK(std::abs(gk[1] - fd) < 1e-8);
  CHECK(gk[1] == doctest::Approx(gamma * 0.5 * std::exp(gamma * 0.5) * xdot * xdot).epsilon(1e-14));
}

TEST_CASE("Leibniz and quotient rules") {
  const std::vector<double> p{1.3, -0.7};
  const auto c = seed(p);
  const Dual a = c[0] * c[0] + 2.0 * c[1];
  const Dual b = c[1] - 0.5 * c[0];
  const Dual prod = a * b;
  for (std::size_t i = 0; i < 2; ++i) CHECK(prod.d(i) == doctest::Approx(a.value() * b.d(i) + b.value() * a.d(i)));
  const Dual q = a / b;
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(q.d(i) == doctest::Approx((a.d(i) * b.value() - a.value() * b.d(i)) / (b.value() * b.value())));
}

TEST_CASE("chain rule for every elementary function") {
  struct Case {
    const char* name;
    std::function<Dual(const Dual&)> fd;
    std::function<double(double)> fr;
    double at;
  };
  const std::vector<Case> cases{
      {"exp", [](const Dual& x) { return scalar::exp(x); }, [](double x) { return std::exp(x); }, 0.7},
      {"log", [](const Dual& x) { return scalar::log(x); }, [](double x) { return std::log(x); }, 1.9},
      {"sin", [](const Dual& x) { return scalar::sin(x); }, [](double x) { return std::sin(x); }, 0.4},
      {"cos", [](const Dual& x) { return scalar::cos(x); }, [](double x) { return std::cos(x); }, 0.4},
      {"tan", [](const Dual& x) { return scalar::tan(x); }, [](double x) { return std::tan(x); }, 0.3},
      {"sinh", [](const Dual& x) { return scalar::sinh(x); }, [](double x) { return std::sinh(x); }, -0.6},
      {"cosh", [](const Dual& x) { return scalar::cosh(x); }, [](double x) { return std::cosh(x); }, -0.6},
      {"tanh", [](const Dual& x) { return scalar::tanh(x); }, [](double x) { return std::tanh(x); }, 0.8},
      {"sqrt", [](const Dual& x) { return scalar::sqrt(x); }, [](double x) { return std::sqrt(x); }, 2.5},
      {"abs", [](const Dual& x) { return scalar::abs(x); }, [](double x) { return std::abs(x); }, -1.5},
      {"pow const", [](const Dual& x) { return scalar::pow(x, Dual(2.5)); }, [](double x) { return std::pow(x, 2.5); },
       1.2},
      {"pow var", [](const Dual& x) { return scalar::pow(Dual(1.7), x); }, [](double x) { return std::pow(1.7, x); },
       0.9},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    const std::vector<double> p{c.at};
    const Dual y = c.fd(seed(p)[0]);
    CHECK(y.value() == c.fr(c.at));
    CHECK(std::abs(y.d(0) - central(c.fr, c.at)) < 1e-7);
  }
}

TEST_CASE("pow with both arguments varying") {
  const std::vector<double> p{1.4, 0.6};
  const auto c = seed(p);
  const Dual y = scalar::pow(c[0], c[1]);
  CHECK(std::abs(y.d(0) - central([](double x) { return std::pow(x, 0.6); }, 1.4)) < 1e-8);
  CHECK(std::abs(y.d(1) - central([](double e) { return std::pow(1.4, e); }, 0.6)) < 1e-8);
}

TEST_CASE("real instantiation agrees with 64-bit reference") {
  for (double x : {0.1, 0.5, 1.0, 2.0, 3.5}) {
    CHECK(scalar::exp(x) == std::exp(x));
    CHECK(scalar::sin(x) == std::sin(x));
    CHECK(scalar::log(x) == std::log(x));
    CHECK(scalar::sqrt(x) == std::sqrt(x));
    CHECK(scalar::pow(x, 1.5) == std::pow(x, 1.5));
  }
}

TEST_CASE("sqrt and log reject non-positive arguments") {
  for (double bad : {0.0, -1.0}) {
    CHECK_THROWS_AS(scalar::sqrt(bad), Error);
    CHECK_THROWS_AS(scalar::log(bad), Error);
    CHECK_THROWS_AS(scalar::sqrt(Dual(bad)), Error);
    try {
      scalar::log(Dual(bad));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonFinite);
    }
  }
}

TEST_CASE("overflow is reported as NonFinite") {
  CHECK_THROWS_AS(scalar::exp(1000.0), Error);
  CHECK_THROWS_AS(scalar::cosh(Dual(1000.0)), Error);
}

TEST_CASE("constants combine with any dimension") {
  const std::vector<double> p{1.0, 2.0, 3.0};
  const auto c = seed(p);
  const Dual k = Dual(5.0);
  const Dual y = k * c[2] + k;
  CHECK(y.dim() == 3);
  CHECK(y.d(2) == 5.0);
  CHECK(y.value() == 20.0);
}
