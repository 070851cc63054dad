#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "support.hpp"

using namespace eisenhart;
using namespace testing_support;

namespace {

SymmetryGenerator gen1(const std::string& dx, const std::string& du, const std::string& dw,
                       const Parameters& p = {}) {
  return SymmetryGenerator::from_expressions("g", 1, {dx}, du, dw, p);
}

double max_of(const std::array<double, 5>& a) { return *std::max_element(a.begin(), a.end()); }

std::vector<Point> cloud(int n, int count = 100) {
  std::vector<Point> pts;
  for (const auto& s : halton_states(n, count, 1, 1, 0, 2, 0, 1)) pts.push_back(Point{s.x, s.u, s.w});
  return pts;
}

// Deliberately non-symmetric generators.
std::vector<SymmetryGenerator> non_symmetries(int n) {
  std::vector<std::string> dx(static_cast<std::size_t>(n), "0");
  std::vector<SymmetryGenerator> out;
  dx[0] = "x1^2";
  out.push_back(SymmetryGenerator::from_expressions("square", n, dx, "0", "0"));
  dx[0] = "0";
  out.push_back(SymmetryGenerator::from_expressions("uw", n, dx, "w", "u"));
  dx[0] = "sin(u)";
  out.push_back(SymmetryGenerator::from_expressions("wobble", n, dx, "0.3*x1", "0"));
  return out;
}

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

TEST_CASE("Killing residual examples") {
  const Point p{vec({0.4}), 0.3, 0.8};
  const auto k1 = killing_residual(BrinkmannMetric(damped_action_dependent(0.2).system), gen1("0", "1", "0"), p);
  CHECK(k1.residual <= 1e-10);
  CHECK(k1.lambda == 0.0);
  const auto k2 = killing_residual(BrinkmannMetric(harmonic_oscillator(1).system), gen1("0", "0", "1"), p);
  CHECK(k2.residual <= 1e-10);
  CHECK(k2.lambda == 0.0);
  const auto k3 =
      killing_residual(BrinkmannMetric(harmonic_oscillator(1).system), gen1("x1", "0", "0"), Point{vec({1.0}), 0, 0});
  CHECK(k3.residual > 0.1);
}

TEST_CASE("symmetry condition examples") {
  const auto du = gen1("0", "1", "0");
  const auto dw = gen1("0", "0", "1");
  const auto da = damped_action_dependent(0.2).system;
  const auto dt = damped_time_dependent(0.2).system;
  double worst_dt = 0.0;
  for (const auto& rs : halton_states(1, 50, 1, 1, 0, 2, -1, 1)) {
    CHECK(symmetry_condition_residual(da, du, rs) <= 1e-12);
    worst_dt = std::max(worst_dt, symmetry_condition_residual(dt, du, rs));
    CHECK(symmetry_condition_residual(dt, dw, rs) <= 1e-12);
    CHECK(symmetry_condition_residual(harmonic_oscillator(1).system, dw, rs) <= 1e-12);
    CHECK(symmetry_condition_residual(free_particle(1).system, dw, rs) <= 1e-12);
  }
  CHECK(worst_dt > 1e-3);
}

TEST_CASE("degreewise identities examples") {
  const auto da = damped_action_dependent(0.2).system;
  for (const Point& p : cloud(1, 20)) CHECK(max_of(degreewise_identities(da, gen1("0", "1", "0"), p)) <= 1e-12);
  const auto first = degreewise_identities(da, gen1("0", "w", "0"), Point{vec({0.2}), 0.1, 0.5});
  CHECK(first[0] == 1.0);
  for (const auto& g : non_symmetries(1)) {
    CAPTURE(g.name);
    double worst = 0.0;
    for (const Point& p : cloud(1, 20)) worst = std::max(worst, max_of(degreewise_identities(da, g, p)));
    CHECK(worst > 1e-3);
  }
}

TEST_CASE("degreewise identities and conformal Killing property agree on the catalog") {
  for (const auto& e : all_systems()) {
    const BrinkmannMetric m(e.system);
    auto gens = e.generators;
    for (auto& g : non_symmetries(e.system.n)) gens.push_back(g);
    for (const auto& g : gens) {
      CAPTURE(e.system.name);
      CAPTURE(g.name);
      double deg = 0.0, kill = 0.0, sym = 0.0;
      for (const Point& p : cloud(e.system.n)) {
        deg = std::max(deg, max_of(degreewise_identities(e.system, g, p)));
        kill = std::max(kill, killing_residual(m, g, p).residual);
      }
      for (const auto& rs : halton_states(e.system.n, 100, 1, 1, 0, 2, 0, 1))
        sym = std::max(sym, symmetry_condition_residual(e.system, g, rs));
      const bool symmetric = deg <= 1e-10;
      CHECK(symmetric == (kill <= 1e-8));
      CHECK(symmetric == (sym <= 1e-10));
    }
  }
}

TEST_CASE("affine charge examples") {
  const auto ho = harmonic_oscillator(1).system;
  const BrinkmannMetric m(ho);
  const auto gs = lift_state(ho, state({0.7}, {0.2}, 0, 0), 1.6);
  CHECK(affine_charge(m, gen1("0", "0", "1"), gs) == doctest::Approx(-1.6).epsilon(1e-15));
  CHECK(affine_charge(m, gen1("0", "0", "0"), gs) == 0.0);
  const auto traj = integrate_geodesic(m, gs, {0, 10});
  const double c0 = affine_charge(m, gen1("0", "1", "0"), gs);
  for (const auto& s : traj.samples) CHECK(std::abs(affine_charge(m, gen1("0", "1", "0"), s.state) - c0) <= 1e-9);
}

TEST_CASE("Noether charge examples") {
  const auto ho = harmonic_oscillator(1).system;
  const auto traj = integrate_herglotz(ho, state({0.5}, {0.3}, 0, 0), {0, 10});
  const auto du = gen1("0", "1", "0");
  for (const auto& s : traj.samples) {
    const double E = 0.5 * s.xp(0) * s.xp(0) + 0.5 * s.x(0) * s.x(0);
    CHECK(noether_charge(ho, du, s.state()) == doctest::Approx(-E).epsilon(1e-14));
    CHECK(std::abs(noether_charge(ho, du, s.state()) + 0.5 * 0.3 * 0.3 + 0.5 * 0.5 * 0.5) <= 1e-10);
  }
  const auto free = free_particle(1).system;
  CHECK(noether_charge(free, gen1("1", "0", "0"), state({0.2}, {1.25}, 0, 0)) == 1.25);

  const auto da = damped_action_dependent(0.2).system;
  const auto td = integrate_herglotz(da, state({1.0}, {0.0}, 0, 0), {0, 10});
  const double q0 = noether_charge(da, du, td.samples.front().state());
  CHECK(q0 == doctest::Approx(-0.5));
  double drift = 0.0;
  for (const auto& s : td.samples) drift = std::max(drift, std::abs(noether_charge(da, du, s.state()) - q0));
  CHECK(drift > 0.1);
}

TEST_CASE("affine charge equals udot times Noether charge") {
  for (const auto& e : all_systems()) {
    const BrinkmannMetric m(e.system);
    auto gens = e.generators;
    for (auto& g : non_symmetries(e.system.n)) gens.push_back(g);
    for (const auto& rs : halton_states(e.system.n, 20, 1, 1, 0, 2, 0, 1))
      for (double udot : {0.5, 1.0, 2.0}) {
        const auto gs = lift_state(e.system, rs, udot);
        for (const auto& g : gens) {
          const double a = affine_charge(m, g, gs);
          const double q = noether_charge(e.system, g, rs);
          CHECK(std::abs(a - udot * q) <= 1e-10 * std::max(1.0, std::abs(a)));
        }
      }
  }
}

TEST_CASE("sigma derivative of the affine charge matches the integrating-factor form") {
  // d/dsigma (K.xdot) = udot^2 e^{int dL/dw} d/du (e^{-int dL/dw} Q) = udot dQ/dsigma - udot^2 dL/dw Q
  for (const auto& e : all_systems()) {
    CAPTURE(e.system.name);
    const BrinkmannMetric m(e.system);
    const int n = e.system.n;
    const ReducedState rs0 = halton_states(n, 2, 1, 1, 0, 1, 0, 1)[1];
    // Tight run: the oracle differentiates the dense interpolant.
    IntegratorConfig tight;
    tight.rtol = 1e-13;
    tight.atol = 1e-15;
    const auto traj = integrate_geodesic(m, lift_state(e.system, rs0, 1.2), {0, 2}, tight);
    auto gens = e.generators;
    gens.push_back(non_symmetries(n)[2]);
    for (const auto& g : gens) {
      auto reduced = [&](double s) {
        const GeodesicState gs = traj.state_at(s);
        const double ud = gs.velocity(n);
        return ReducedState{gs.point.x, gs.velocity.head(n) / ud, gs.point.u, gs.point.w};
      };
      auto affine = [&](double s) { return affine_charge(m, g, traj.state_at(s)); };
      auto Q = [&](double s) { return noether_charge(e.system, g, reduced(s)); };
      const double h = 1e-3;
      double worst = 0.0;
      for (double s = 0.2; s < 1.85; s += 0.15) {
        const double lhs = (-affine(s + 2 * h) + 8 * affine(s + h) - 8 * affine(s - h) + affine(s - 2 * h)) / (12 * h);
        const double dQ = (-Q(s + 2 * h) + 8 * Q(s + h) - 8 * Q(s - h) + Q(s - 2 * h)) / (12 * h);
        const double ud = traj.state_at(s).velocity(n);
        const double rhs = ud * dQ - ud * ud * reduced_lagrangian_dw(e.system, reduced(s)) * Q(s);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
      CAPTURE(g.name);
      CHECK(worst <= 1e-6);
    }
  }
}

TEST_CASE("nonlocal charge examples") {
  const double gamma = 0.2;
  const auto da = damped_action_dependent(gamma).system;
  const auto traj = integrate_herglotz(da, state({1.0}, {0.0}, 0, 0), {0, 10});
  const auto nl = nonlocal_charge(da, gen1("0", "1", "0"), traj);
  REQUIRE(nl.value.size() == traj.samples.size());
  for (std::size_t k = 0; k < nl.value.size(); ++k) {
    const auto& s = traj.samples[k];
    const double closed = -std::exp(gamma * s.u) * (0.5 * s.xp(0) * s.xp(0) + 0.5 * s.x(0) * s.x(0) + gamma * s.w);
    CHECK(std::abs(nl.value[k] - closed) <= 1e-8);
    CHECK(std::abs(nl.value[k] - nl.value.front()) <= 1e-6);
    CHECK(nl.exponent[k] == doctest::Approx(-gamma * s.u).epsilon(1e-12));
  }

  const auto ho = damped_action_dependent(0.0).system;
  const auto t0 = integrate_herglotz(ho, state({1.0}, {0.5}, 0, 0), {0, 10});
  const auto n0 = nonlocal_charge(ho, gen1("0", "1", "0"), t0);
  for (std::size_t k = 0; k < n0.value.size(); ++k) CHECK(n0.value[k] == n0.local[k]);

  const auto bad = nonlocal_charge(da, gen1("x1", "0", "0"), traj);
  double drift = 0.0;
  for (double v : bad.value) drift = std::max(drift, std::abs(v - bad.value.front()));
  CHECK(drift > 1e-2);
}

TEST_CASE("nonlocal charge for the damped-action w generator") {
  const double gamma = 0.2;
  const auto e = damped_action_dependent(gamma);
  const auto traj = integrate_herglotz(e.system, state({0.3}, {-0.6}, 0.5, 0.2), {0.5, 8});
  const auto nl = nonlocal_charge(e.system, e.generator("dw"), traj);
  for (double v : nl.value) CHECK(std::abs(v - nl.value.front()) <= 1e-6);
}

TEST_CASE("transform rule examples") {
  const double gamma = 0.2;
  const auto dt = damped_time_dependent(gamma).system;
  const auto da = damped_action_dependent(gamma).system;
  const auto id = TransformSpec::from_expressions(1, "u", {"x1"}, "w");
  double wrong = 0.0;
  for (const auto& rs : halton_states(1, 50, 1, 1, 0, 2, -1, 1)) {
    CHECK(transform_rule_check(dt, dt, id, rs) == 0.0);
    CHECK(transform_rule_check(dt, da, damped_transform(gamma), rs) <= 1e-12);
    wrong = std::max(wrong, transform_rule_check(dt, da, damped_transform(-gamma), rs));
  }
  CHECK(wrong > 1e-2);
  const auto singular = TransformSpec::from_expressions(1, "u", {"x1"}, "0*w");
  CHECK(code_of([&] { transform_rule_check(dt, da, singular, state({0.1}, {0.2}, 0.3, 0.4)); }) ==
        ErrorCode::SingularJacobian);
}

TEST_CASE("conformal flow gap for the damped pair") {
  const double gamma = 0.2;
  const BrinkmannMetric a(damped_time_dependent(gamma).system);
  const BrinkmannMetric b(damped_action_dependent(gamma).system);
  const auto cm = damped_conformal_map(gamma);
  const auto gs0 = lift_state(a.system(), state({1.0}, {0.0}, 0, 0), 1.0);
  const auto gap = conformal_flow_gap(a, b, cm.phi, gs0, 10.0);
  CHECK(gap.x <= 1e-6);
  CHECK(gap.w <= 1e-6);
}
