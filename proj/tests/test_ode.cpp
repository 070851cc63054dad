#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eisenhart/error.hpp"
#include "eisenhart/ode.hpp"

using namespace eisenhart;
using eisenhart::ode::Config;

namespace {

void decay(double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = -y; }

void rotation(double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
  dy.resize(2);
  dy << y(1), -y(0);
}

Eigen::VectorXd v1(double a) { return Eigen::VectorXd::Constant(1, a); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::ConfigError;
}

}  // namespace

TEST_CASE("exponential decay at default tolerance") {
  const auto sol = ode::integrate(decay, 0.0, v1(1.0), 5.0, Config{});
  CHECK(sol.t_end() == 5.0);
  for (const auto& s : sol.samples()) CHECK(std::abs(s.y(0) - std::exp(-s.t)) <= 1e-10);
  for (double t = 0.0; t <= 5.0; t += 0.137) CHECK(std::abs(sol.component(t, 0) - std::exp(-t)) <= 1e-8);
}

TEST_CASE("harmonic rotation over many periods") {
  Eigen::VectorXd y0(2);
  y0 << 1.0, 0.0;
  const auto sol = ode::integrate(rotation, 0.0, y0, 20 * M_PI, Config{});
  const auto& last = sol.samples().back();
  CHECK(std::abs(last.y(0) - 1.0) <= 1e-8);
  CHECK(std::abs(last.y(1)) <= 1e-8);
}

TEST_CASE("dense output reproduces nodes exactly and is strictly increasing") {
  const auto sol = ode::integrate(decay, 0.0, v1(2.0), 3.0, Config{});
  const auto& s = sol.samples();
  REQUIRE(s.size() > 3);
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(sol.component(s[k].t, 0) == s[k].y(0));
    CHECK(sol.component_derivative(s[k].t, 0) == s[k].dy(0));
    if (k > 0) {
      CHECK(s[k].t > s[k - 1].t);
      CHECK(s[k].step == doctest::Approx(s[k].t - s[k - 1].t));
    }
  }
}

TEST_CASE("tighter tolerance gives smaller error") {
  auto err = [](double rtol) {
    Config c;
    c.rtol = rtol;
    c.atol = rtol * 1e-2;
    return std::abs(ode::integrate(decay, 0.0, v1(1.0), 4.0, c).samples().back().y(0) - std::exp(-4.0));
  };
  CHECK(err(1e-10) < err(1e-6));
}

TEST_CASE("max_step is honoured") {
  Config c;
  c.max_step = 0.05;
  const auto sol = ode::integrate(decay, 0.0, v1(1.0), 1.0, c);
  for (const auto& s : sol.samples()) CHECK(s.step <= 0.05 + 1e-15);
}

TEST_CASE("stop condition ends the run at the first accepted step that satisfies it") {
  const auto sol = ode::integrate(decay, 0.0, v1(1.0), std::numeric_limits<double>::infinity(), Config{},
                                  [](const ode::Sample& s) { return s.y(0) < 0.5; });
  const auto& s = sol.samples();
  CHECK(s.back().y(0) < 0.5);
  CHECK(s[s.size() - 2].y(0) >= 0.5);
}

TEST_CASE("error conditions") {
  Config few;
  few.max_steps = 3;
  CHECK(code_of([&] { ode::integrate(decay, 0.0, v1(1.0), 100.0, few); }) == ErrorCode::StepLimitExceeded);

  // y' = y^2 from 1 blows up at t = 1.
  auto riccati = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = y.array().square(); };
  const ErrorCode blow = code_of([&] { ode::integrate(riccati, 0.0, v1(1.0), 2.0, Config{}); });
  CHECK((blow == ErrorCode::BlowUp || blow == ErrorCode::StepLimitExceeded));

  Config bad;
  bad.rtol = 0.0;
  CHECK(code_of([&] { ode::integrate(decay, 0.0, v1(1.0), 1.0, bad); }) == ErrorCode::ConfigError);
  CHECK(code_of([&] { ode::integrate(decay, 1.0, v1(1.0), 0.0, Config{}); }) == ErrorCode::ConfigError);
  CHECK(code_of([&] { ode::integrate(decay, 0.0, v1(NAN), 1.0, Config{}); }) == ErrorCode::NonFinite);
}
