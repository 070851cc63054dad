#pragma once

// Null geodesics of the lifted metric and the reduced Herglotz flow, plus
// the residual checks tying the two descriptions together.

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

#include "eisenhart/geometry.hpp"
#include "eisenhart/ode.hpp"

namespace eisenhart {

/// Reduced state: position, dx/du, time u and action w.
struct ReducedState {
  Eigen::VectorXd x;
  Eigen::VectorXd xp;
  double u = 0.0;
  double w = 0.0;

  int n() const noexcept { return static_cast<int>(x.size()); }
};

/// Full-space state with velocities d/dsigma in coordinate order
/// (x^1..x^n, u, w).
struct GeodesicState {
  Point point;
  Eigen::VectorXd velocity;
  double sigma = 0.0;

  /// (coords, velocity) as one vector of length 2(n+2).
  Eigen::VectorXd packed() const;
  static GeodesicState unpack(const Eigen::Ref<const Eigen::VectorXd>& y, double sigma);
};

using IntegratorConfig = ode::Config;

struct GeodesicSample {
  GeodesicState state;
  Eigen::VectorXd acceleration;
  double null_residual = 0.0;
  double step = 0.0;
};

struct Trajectory {
  int n = 0;
  std::vector<GeodesicSample> samples;
  std::size_t rejected_steps = 0;
  ode::DenseSolution dense;  // over sigma, state packed as GeodesicState::packed()

  GeodesicState state_at(double sigma) const;
};

struct ReducedSample {
  double u = 0.0;
  double sigma = 0.0;  // geodesic parameter; equals u for direct Herglotz runs
  Eigen::VectorXd x;
  Eigen::VectorXd xp;
  double w = 0.0;
  double null_residual = 0.0;

  ReducedState state() const { return ReducedState{x, xp, u, w}; }
};

struct ReducedTrajectory {
  int n = 0;
  std::vector<ReducedSample> samples;
  std::size_t rejected_steps = 0;
  /// Dense output over u with state (x, xp, w); present for Herglotz runs.
  std::optional<ode::DenseSolution> dense;

  /// Interpolated state; requires `dense`.
  ReducedState state_at(double u) const;
};

struct Interval {
  double from = 0.0;
  double to = 0.0;
};

/// L = 1/2 h_ij x'^i x'^j + A_i x'^i - V at the reduced state.
double reduced_lagrangian(const HerglotzSystem& system, const ReducedState& rs);

/// dL/dw at the reduced state.
double reduced_lagrangian_dw(const HerglotzSystem& system, const ReducedState& rs);

/// Null lift: xdot = x' udot0, udot = udot0, wdot = udot0 L. Throws
/// NonPositiveUdot unless udot0 > 0.
GeodesicState lift_state(const HerglotzSystem& system, const ReducedState& rs, double udot0 = 1.0);

/// 1/2 g(xdot, xdot) = 1/2 h xdot xdot + A xdot udot - V udot^2 - udot wdot.
double null_residual(const BrinkmannMetric& metric, const GeodesicState& gs);

/// Geodesic acceleration -Gamma^mu_{nu rho} xdot^nu xdot^rho.
Eigen::VectorXd geodesic_rhs(const BrinkmannMetric& metric, const GeodesicState& gs);

Trajectory integrate_geodesic(const BrinkmannMetric& metric, const GeodesicState& gs0, Interval sigma_span,
                              const IntegratorConfig& config = {});

/// Integrates until the first accepted step with u >= u_end.
Trajectory integrate_geodesic_until_u(const BrinkmannMetric& metric, const GeodesicState& gs0, double u_end,
                                      const IntegratorConfig& config = {});

/// Reduction at the accepted steps: x' = xdot / udot. Throws
/// MonotonicityViolation if udot <= 0 at any sample.
ReducedTrajectory reduce_trajectory(const Trajectory& traj);

/// Reduction at prescribed u values found by root-finding u(sigma) = target
/// on the dense output (bisection refined by Newton, tolerance 1e-13).
ReducedTrajectory reduce_trajectory(const Trajectory& traj, std::span<const double> u_targets);

struct HerglotzDerivative {
  Eigen::VectorXd xpp;
  double wp = 0.0;
};

/// Herglotz equations solved for x'' together with w' = L.
HerglotzDerivative herglotz_rhs(const HerglotzSystem& system, const ReducedState& rs);

ReducedTrajectory integrate_herglotz(const HerglotzSystem& system, const ReducedState& rs0, Interval u_span,
                                     const IntegratorConfig& config = {});

/// max over samples of | uddot / udot^2 + dL/dw |.
double u_equation_residual(const BrinkmannMetric& metric, const Trajectory& traj);

/// Pointwise version of u_equation_residual.
double u_equation_residual(const BrinkmannMetric& metric, const GeodesicSample& sample);

/// Residual of the w geodesic equation when wddot is replaced by the
/// sigma-derivative of the constraint value udot * L along the flow.
double w_equation_residual(const BrinkmannMetric& metric, const Trajectory& traj);
double w_equation_residual(const BrinkmannMetric& metric, const GeodesicSample& sample);

/// Euler defect xdot . dLt/dxdot + udot dLt/dudot - Lt for
/// Lt = 1/2 h xdot xdot / udot + A xdot - V udot, with xdot = x' udot.
double homogeneity_residual(const HerglotzSystem& system, const ReducedState& rs, double udot);

/// Euler degree-1 defect of an arbitrary velocity function `f`, which maps
/// a span of velocity duals to a Dual.
template <class F>
double euler_homogeneity_defect(F&& f, std::span<const double> velocities) {
  const std::vector<Dual> v = seed(velocities);
  const Dual value = f(std::span<const Dual>(v));
  double euler = 0.0;
  for (std::size_t k = 0; k < velocities.size(); ++k) euler += velocities[k] * value.d(k);
  return std::abs(euler - value.value());
}

}  // namespace eisenhart
