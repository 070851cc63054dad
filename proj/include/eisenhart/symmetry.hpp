#pragma once

// Point symmetries of the reduced dynamics, their lifts to conformal
// Killing vectors, and the associated (local and nonlocal) charges.

#include <array>
#include <string>
#include <vector>

#include "eisenhart/dynamics.hpp"
#include "eisenhart/geometry.hpp"

namespace eisenhart {

/// Infinitesimal transformation x -> x + dx, u -> u + du, w -> w + dw.
struct SymmetryGenerator {
  std::string name;
  std::vector<Field> dx;  // n
  Field du;
  Field dw;

  int n() const noexcept { return static_cast<int>(dx.size()); }
  /// K = dx^i d_i + du d_u + dw d_w.
  VectorField as_vector_field() const;

  /// Empty `dx` means dx = 0; empty strings mean zero components.
  static SymmetryGenerator from_expressions(std::string name, int n, const std::vector<std::string>& dx,
                                            const std::string& du, const std::string& dw,
                                            const Parameters& parameters = {});
};

/// Point transformation (t, q, S) -> (t', q', S'). Fields are written in
/// the coordinate names u (time), x1..xn (positions) and w (action).
struct TransformSpec {
  Field t;
  std::vector<Field> q;
  Field S;

  static TransformSpec from_expressions(int n, const std::string& t, const std::vector<std::string>& q,
                                        const std::string& S, const Parameters& parameters = {});
};

struct KillingResult {
  double residual = 0.0;  // max | nabla_(mu K_nu) sym - lambda g |
  double lambda = 0.0;
};

KillingResult killing_residual(const BrinkmannMetric& metric, const SymmetryGenerator& gen, const Point& point);

/// Infinitesimal symmetry condition of L at the state, with dw/du = L
/// substituted. Zero iff `gen` is a symmetry there.
double symmetry_condition_residual(const HerglotzSystem& system, const SymmetryGenerator& gen,
                                   const ReducedState& rs);

/// The five velocity-degree identities, in order of decreasing degree:
///   [0] d_w du
///   [1] h_il d_w dx^l - d_i du
///   [2] the h_ij identity (second degree)
///   [3] the A_i identity (first degree)
///   [4] the V identity (zero degree)
/// Each entry is the max absolute residual over its free indices.
std::array<double, 5> degreewise_identities(const HerglotzSystem& system, const SymmetryGenerator& gen,
                                            const Point& point);

/// K_mu dx^mu/dsigma = g_{mu nu} K^mu xdot^nu.
double affine_charge(const BrinkmannMetric& metric, const SymmetryGenerator& gen, const GeodesicState& gs);

/// Q = (h_ij x'^j + A_i) dx^i - (1/2 h_ij x'^i x'^j + V) du - dw.
double noether_charge(const HerglotzSystem& system, const SymmetryGenerator& gen, const ReducedState& rs);

struct NonlocalCharge {
  std::vector<double> u;
  std::vector<double> local;     // Q at each sample
  std::vector<double> exponent;  // int_{u0}^{u} dL/dw du'
  std::vector<double> value;     // exp(-exponent) Q
};

/// exp(-int dL/dw du) Q along the trajectory. The integral is cumulative
/// Simpson over the sample grid, with midpoint states taken from the cubic
/// Hermite interpolant of the reduced flow.
NonlocalCharge nonlocal_charge(const HerglotzSystem& system, const SymmetryGenerator& gen,
                               const ReducedTrajectory& traj);

/// | L' dt'/dt - (dS'/dS L + dS'/dq qdot + dS'/dt) | with L' = dst evaluated
/// at the image state. Throws SingularJacobian when the map degenerates.
double transform_rule_check(const HerglotzSystem& source, const HerglotzSystem& target, const TransformSpec& transform,
                            const ReducedState& rs);

struct ConformalFlowGap {
  double x = 0.0;  // max |x_B - Phi_x(x_A)| over the comparison grid
  double w = 0.0;  // max |w_B - Phi_w(x_A)|
};

/// Integrate-then-map versus map-then-integrate for null geodesics of two
/// conformally related metrics. The A geodesic starts from `gs0`; the B
/// geodesic from its image under `phi`. Both are reduced on the accepted u
/// grid of the A run (mapped through phi) up to `u_end`.
ConformalFlowGap conformal_flow_gap(const BrinkmannMetric& metric_a, const BrinkmannMetric& metric_b,
                                    const CoordinateMap& phi, const GeodesicState& gs0, double u_end,
                                    const IntegratorConfig& config = {});

}  // namespace eisenhart
