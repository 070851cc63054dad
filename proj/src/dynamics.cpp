#include "eisenhart/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace eisenhart {

namespace {

std::vector<double> coords_of(const Eigen::VectorXd& x, double u, double w) {
  std::vector<double> c(static_cast<std::size_t>(x.size()) + 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) c[static_cast<std::size_t>(i)] = x(i);
  c[static_cast<std::size_t>(x.size())] = u;
  c[static_cast<std::size_t>(x.size()) + 1] = w;
  return c;
}

void require_reduced(const HerglotzSystem& system, const ReducedState& rs) {
  if (rs.x.size() != system.n || rs.xp.size() != system.n)
    throw Error(ErrorCode::DimensionMismatch, "reduced state dimension does not match system n = " +
                                                  std::to_string(system.n));
  bool ok = std::isfinite(rs.u) && std::isfinite(rs.w) && rs.x.allFinite() && rs.xp.allFinite();
  if (!ok) throw Error(ErrorCode::NonFinite, "reduced state has non-finite entries");
}

// L and dL/dw from Dual-evaluated system values at a given x'.
struct LagrangianParts {
  double value = 0.0;
  double dw = 0.0;
};

LagrangianParts lagrangian_parts(const SystemValues<Dual>& v, const Eigen::VectorXd& xp) {
  const int n = v.n;
  const auto iw = static_cast<std::size_t>(n + 1);
  LagrangianParts out;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Dual& hij = v.h_at(i, j);
      out.value += 0.5 * hij.value() * xp(i) * xp(j);
      out.dw += 0.5 * hij.d(iw) * xp(i) * xp(j);
    }
    out.value += v.A[static_cast<std::size_t>(i)].value() * xp(i);
    out.dw += v.A[static_cast<std::size_t>(i)].d(iw) * xp(i);
  }
  out.value -= v.V.value();
  out.dw -= v.V.d(iw);
  return out;
}

SystemValues<double> plain(const SystemValues<Dual>& v) {
  SystemValues<double> out;
  out.n = v.n;
  for (const Dual& e : v.h) out.h.push_back(e.value());
  for (const Dual& e : v.A) out.A.push_back(e.value());
  out.V = v.V.value();
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// States

Eigen::VectorXd GeodesicState::packed() const {
  const Eigen::VectorXd c = point.coords();
  Eigen::VectorXd y(c.size() + velocity.size());
  y << c, velocity;
  return y;
}

GeodesicState GeodesicState::unpack(const Eigen::Ref<const Eigen::VectorXd>& y, double sigma) {
  const Eigen::Index d = y.size() / 2;
  return GeodesicState{Point::from_coords(y.head(d)), y.tail(d), sigma};
}

GeodesicState Trajectory::state_at(double sigma) const { return GeodesicState::unpack(dense.state(sigma), sigma); }

ReducedState ReducedTrajectory::state_at(double u) const {
  if (!dense) throw Error(ErrorCode::ConfigError, "reduced trajectory has no dense output");
  const Eigen::VectorXd y = dense->state(u);
  return ReducedState{y.head(n), y.segment(n, n), u, y(2 * n)};
}

// ---------------------------------------------------------------------------
// Lagrangian, lift, constraint

double reduced_lagrangian(const HerglotzSystem& system, const ReducedState& rs) {
  require_reduced(system, rs);
  const auto c = coords_of(rs.x, rs.u, rs.w);
  const auto v = evaluate_system<double>(system, c);
  double L = -v.V;
  for (int i = 0; i < system.n; ++i) {
    for (int j = 0; j < system.n; ++j) L += 0.5 * v.h_at(i, j) * rs.xp(i) * rs.xp(j);
    L += v.A[static_cast<std::size_t>(i)] * rs.xp(i);
  }
  return L;
}

double reduced_lagrangian_dw(const HerglotzSystem& system, const ReducedState& rs) {
  require_reduced(system, rs);
  const auto c = coords_of(rs.x, rs.u, rs.w);
  const auto seeded = seed(c);
  return lagrangian_parts(evaluate_system<Dual>(system, seeded), rs.xp).dw;
}

GeodesicState lift_state(const HerglotzSystem& system, const ReducedState& rs, double udot0) {
  if (!(udot0 > 0.0) || !std::isfinite(udot0)) {
    std::ostringstream os;
    os << "lift requires udot0 > 0, got " << udot0;
    throw Error(ErrorCode::NonPositiveUdot, os.str());
  }
  const double L = reduced_lagrangian(system, rs);
  const int n = system.n;
  GeodesicState gs;
  gs.point = Point{rs.x, rs.u, rs.w};
  gs.velocity.resize(n + 2);
  gs.velocity.head(n) = rs.xp * udot0;
  gs.velocity(n) = udot0;
  gs.velocity(n + 1) = udot0 * L;
  gs.sigma = 0.0;
  return gs;
}

double null_residual(const BrinkmannMetric& metric, const GeodesicState& gs) {
  const int n = metric.n();
  const auto c = coords_of(gs.point.x, gs.point.u, gs.point.w);
  const auto v = evaluate_system<double>(metric.system(), c);
  const Eigen::VectorXd& q = gs.velocity;
  const double udot = q(n);
  const double wdot = q(n + 1);
  double L = -v.V * udot * udot - udot * wdot;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) L += 0.5 * v.h_at(i, j) * q(i) * q(j);
    L += v.A[static_cast<std::size_t>(i)] * q(i) * udot;
  }
  return L;
}

// ---------------------------------------------------------------------------
// Geodesic flow

Eigen::VectorXd geodesic_rhs(const BrinkmannMetric& metric, const GeodesicState& gs) {
  const int d = metric.dim();
  const auto c = coords_of(gs.point.x, gs.point.u, gs.point.w);
  const auto seeded = seed(c);
  const auto values = evaluate_system<Dual>(metric.system(), seeded);
  const std::vector<Dual> g = metric.assemble(values);
  const Eigen::MatrixXd ginv = brinkmann_inverse(plain(values));
  const Eigen::VectorXd& v = gs.velocity;

  // Gamma_{s nu rho} v^nu v^rho = v^nu v^rho d_nu g_{s rho} - 1/2 v^nu v^rho d_s g_{nu rho}
  Eigen::VectorXd contracted = Eigen::VectorXd::Zero(d);
  for (int s = 0; s < d; ++s) {
    double acc = 0.0;
    for (int nu = 0; nu < d; ++nu) {
      if (v(nu) == 0.0) continue;
      for (int rho = 0; rho < d; ++rho) {
        const double vv = v(nu) * v(rho);
        acc += vv * g[static_cast<std::size_t>(s * d + rho)].d(static_cast<std::size_t>(nu));
        acc -= 0.5 * vv * g[static_cast<std::size_t>(nu * d + rho)].d(static_cast<std::size_t>(s));
      }
    }
    contracted(s) = acc;
  }
  return -(ginv * contracted);
}

namespace {

GeodesicSample make_sample(const BrinkmannMetric& metric, const ode::Sample& s) {
  GeodesicSample out;
  out.state = GeodesicState::unpack(s.y, s.t);
  const Eigen::Index d = s.y.size() / 2;
  out.acceleration = s.dy.tail(d);
  out.null_residual = null_residual(metric, out.state);
  out.step = s.step;
  return out;
}

Trajectory run_geodesic(const BrinkmannMetric& metric, const GeodesicState& gs0, double sigma_end,
                        const IntegratorConfig& config, const ode::StopCondition& stop) {
  const int d = metric.dim();
  if (gs0.point.n() != metric.n() || gs0.velocity.size() != d)
    throw Error(ErrorCode::DimensionMismatch, "geodesic state dimension does not match metric");
  auto rhs = [&](double sigma, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const GeodesicState gs = GeodesicState::unpack(y, sigma);
    dy.resize(y.size());
    dy.head(d) = gs.velocity;
    dy.tail(d) = geodesic_rhs(metric, gs);
  };
  Trajectory traj;
  traj.n = metric.n();
  traj.dense = ode::integrate(rhs, gs0.sigma, gs0.packed(), sigma_end, config, stop);
  traj.rejected_steps = traj.dense.rejected_steps();
  traj.samples.reserve(traj.dense.samples().size());
  for (const ode::Sample& s : traj.dense.samples()) traj.samples.push_back(make_sample(metric, s));
  return traj;
}

}  // namespace

Trajectory integrate_geodesic(const BrinkmannMetric& metric, const GeodesicState& gs0, Interval sigma_span,
                              const IntegratorConfig& config) {
  if (!(sigma_span.to > sigma_span.from))
    throw Error(ErrorCode::ConfigError, "sigma span must be increasing");
  GeodesicState start = gs0;
  start.sigma = sigma_span.from;
  return run_geodesic(metric, start, sigma_span.to, config, {});
}

Trajectory integrate_geodesic_until_u(const BrinkmannMetric& metric, const GeodesicState& gs0, double u_end,
                                      const IntegratorConfig& config) {
  const int n = metric.n();
  if (!(u_end > gs0.point.u)) throw Error(ErrorCode::ConfigError, "u_end must exceed the initial u");
  if (!(gs0.velocity(n) > 0.0)) {
    std::ostringstream os;
    os << "udot must be positive to reach u_end, got " << gs0.velocity(n);
    throw Error(ErrorCode::NonPositiveUdot, os.str());
  }
  auto stop = [n, u_end](const ode::Sample& s) {
    if (!(s.y(n + 2 + n) > 0.0)) {
      std::ostringstream os;
      os << "udot became non-positive at sigma = " << s.t;
      throw Error(ErrorCode::MonotonicityViolation, os.str());
    }
    return s.y(n) >= u_end;
  };
  return run_geodesic(metric, gs0, std::numeric_limits<double>::infinity(), config, stop);
}

// ---------------------------------------------------------------------------
// Reduction

namespace {

void require_monotone(const Trajectory& traj) {
  const int n = traj.n;
  for (const GeodesicSample& s : traj.samples) {
    if (!(s.state.velocity(n) > 0.0)) {
      std::ostringstream os;
      os.precision(17);
      os << "udot <= 0 at sigma = " << s.state.sigma << "; reduction to u is undefined";
      throw Error(ErrorCode::MonotonicityViolation, os.str());
    }
  }
}

ReducedSample reduced_from(const GeodesicState& gs, double null_res) {
  const int n = gs.point.n();
  const double udot = gs.velocity(n);
  ReducedSample r;
  r.u = gs.point.u;
  r.sigma = gs.sigma;
  r.x = gs.point.x;
  r.xp = gs.velocity.head(n) / udot;
  r.w = gs.point.w;
  r.null_residual = null_res;
  return r;
}

}  // namespace

ReducedTrajectory reduce_trajectory(const Trajectory& traj) {
  require_monotone(traj);
  ReducedTrajectory out;
  out.n = traj.n;
  out.rejected_steps = traj.rejected_steps;
  for (const GeodesicSample& s : traj.samples) out.samples.push_back(reduced_from(s.state, s.null_residual));
  return out;
}

ReducedTrajectory reduce_trajectory(const Trajectory& traj, std::span<const double> u_targets) {
  require_monotone(traj);
  const int n = traj.n;
  const auto& nodes = traj.dense.samples();
  const Eigen::Index iu = n;
  ReducedTrajectory out;
  out.n = n;
  out.rejected_steps = traj.rejected_steps;
  if (nodes.empty()) return out;
  const double u_first = nodes.front().y(iu);
  const double u_last = nodes.back().y(iu);
  const double slack = 1e-12 * std::max(1.0, std::abs(u_last));

  for (double target : u_targets) {
    if (target < u_first - slack || target > u_last + slack) {
      std::ostringstream os;
      os.precision(17);
      os << "u = " << target << " lies outside the trajectory range [" << u_first << ", " << u_last << "]";
      throw Error(ErrorCode::ConfigError, os.str());
    }
    target = std::clamp(target, u_first, u_last);
    // Step containing the target.
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), target,
                                     [iu](double v, const ode::Sample& s) { return v < s.y(iu); });
    std::size_t k = it == nodes.begin() ? 0 : static_cast<std::size_t>(std::distance(nodes.begin(), it)) - 1;
    double sigma = 0.0;
    if (k + 1 >= nodes.size() || nodes[k].y(iu) == target) {
      k = std::min(k, nodes.size() - 1);
      sigma = nodes[k].t;
    } else {
      double lo = nodes[k].t;
      double hi = nodes[k + 1].t;
      for (int i = 0; i < 8; ++i) {
        const double mid = 0.5 * (lo + hi);
        (traj.dense.component(mid, iu) < target ? lo : hi) = mid;
      }
      sigma = 0.5 * (lo + hi);
      for (int i = 0; i < 50; ++i) {
        const double f = traj.dense.component(sigma, iu) - target;
        const double df = traj.dense.component_derivative(sigma, iu);
        if (!(df > 0.0)) break;
        double next = sigma - f / df;
        if (next < lo || next > hi) next = 0.5 * (lo + hi);
        (f < 0.0 ? lo : hi) = sigma;
        const double delta = std::abs(next - sigma);
        sigma = next;
        if (delta < 1e-13) break;
      }
    }
    GeodesicState gs = traj.state_at(sigma);
    if (!(gs.velocity(n) > 0.0)) {
      std::ostringstream os;
      os.precision(17);
      os << "udot <= 0 at sigma = " << sigma << "; reduction to u is undefined";
      throw Error(ErrorCode::MonotonicityViolation, os.str());
    }
    ReducedSample r = reduced_from(gs, 0.0);
    r.u = target;
    out.samples.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Herglotz flow

HerglotzDerivative herglotz_rhs(const HerglotzSystem& system, const ReducedState& rs) {
  require_reduced(system, rs);
  const int n = system.n;
  const auto iu = static_cast<std::size_t>(n);
  const auto iw = static_cast<std::size_t>(n + 1);
  const auto c = coords_of(rs.x, rs.u, rs.w);
  const auto seeded = seed(c);
  const auto v = evaluate_system<Dual>(system, seeded);
  const Eigen::VectorXd& xp = rs.xp;
  const LagrangianParts L = lagrangian_parts(v, xp);

  auto h = [&](int i, int j) -> const Dual& { return v.h_at(i, j); };
  auto A = [&](int i) -> const Dual& { return v.A[static_cast<std::size_t>(i)]; };
  auto dk = [](const Dual& f, int k) { return f.d(static_cast<std::size_t>(k)); };

  Eigen::VectorXd b(n);
  for (int k = 0; k < n; ++k) {
    double p = A(k).value();
    double dp_u = dk(A(k), n);
    double dp_w = A(k).d(iw);
    double gamma_term = 0.0;
    double f_term = 0.0;
    for (int i = 0; i < n; ++i) {
      p += h(i, k).value() * xp(i);
      dp_u += h(i, k).d(iu) * xp(i);
      dp_w += h(i, k).d(iw) * xp(i);
      // F_ik = d_i A_k - d_k A_i
      f_term += (dk(A(k), i) - dk(A(i), k)) * xp(i);
      for (int j = 0; j < n; ++j) {
        const double gamma_kij = 0.5 * (dk(h(k, j), i) + dk(h(k, i), j) - dk(h(i, j), k));
        gamma_term += gamma_kij * xp(i) * xp(j);
      }
    }
    b(k) = -gamma_term - dk(v.V, k) - f_term - dp_u - dp_w * L.value + p * L.dw;
  }
  const Eigen::MatrixXd hinv = inverse_h(plain(v));
  return HerglotzDerivative{hinv * b, L.value};
}

ReducedTrajectory integrate_herglotz(const HerglotzSystem& system, const ReducedState& rs0, Interval u_span,
                                     const IntegratorConfig& config) {
  require_reduced(system, rs0);
  if (!(u_span.to > u_span.from)) throw Error(ErrorCode::ConfigError, "u span must be increasing");
  const int n = system.n;
  auto rhs = [&](double u, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const ReducedState rs{y.head(n), y.segment(n, n), u, y(2 * n)};
    const HerglotzDerivative der = herglotz_rhs(system, rs);
    dy.resize(y.size());
    dy.head(n) = rs.xp;
    dy.segment(n, n) = der.xpp;
    dy(2 * n) = der.wp;
  };
  Eigen::VectorXd y0(2 * n + 1);
  y0 << rs0.x, rs0.xp, rs0.w;
  ReducedTrajectory out;
  out.n = n;
  out.dense = ode::integrate(rhs, u_span.from, y0, u_span.to, config);
  out.rejected_steps = out.dense->rejected_steps();
  const BrinkmannMetric metric(system);
  for (const ode::Sample& s : out.dense->samples()) {
    ReducedSample r;
    r.u = s.t;
    r.sigma = s.t;
    r.x = s.y.head(n);
    r.xp = s.y.segment(n, n);
    r.w = s.y(2 * n);
    GeodesicState lifted;
    lifted.point = Point{r.x, r.u, r.w};
    lifted.velocity.resize(n + 2);
    lifted.velocity << r.xp, 1.0, s.dy(2 * n);
    r.null_residual = null_residual(metric, lifted);
    out.samples.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Residual checks

double u_equation_residual(const BrinkmannMetric& metric, const GeodesicSample& sample) {
  const int n = metric.n();
  const GeodesicState& gs = sample.state;
  const double udot = gs.velocity(n);
  if (udot == 0.0) throw Error(ErrorCode::ZeroUdot, "u equation residual undefined at udot = 0");
  const ReducedState rs{gs.point.x, gs.velocity.head(n) / udot, gs.point.u, gs.point.w};
  const double dLdw = reduced_lagrangian_dw(metric.system(), rs);
  return std::abs(sample.acceleration(n) / (udot * udot) + dLdw);
}

double u_equation_residual(const BrinkmannMetric& metric, const Trajectory& traj) {
  double worst = 0.0;
  for (const GeodesicSample& s : traj.samples) worst = std::max(worst, u_equation_residual(metric, s));
  return worst;
}

double w_equation_residual(const BrinkmannMetric& metric, const GeodesicSample& sample) {
  const int n = metric.n();
  const int d = n + 2;
  const GeodesicState& gs = sample.state;
  const Eigen::VectorXd& v = gs.velocity;
  const Eigen::VectorXd& a = sample.acceleration;
  const auto c = coords_of(gs.point.x, gs.point.u, gs.point.w);
  const auto iu = static_cast<std::size_t>(n);

  // Explicit u-partials: 1/2 d_u h xdot xdot + d_u A xdot udot - d_u V udot^2.
  const auto seeded = seed(c);
  const auto vp = evaluate_system<Dual>(metric.system(), seeded);
  const double udot = v(n);
  double partials = -vp.V.d(iu) * udot * udot;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) partials += 0.5 * vp.h_at(i, j).d(iu) * v(i) * v(j);
    partials += vp.A[static_cast<std::size_t>(i)].d(iu) * v(i) * udot;
  }

  // Tangent duals: coordinates move with velocity, velocities with the
  // geodesic acceleration (x and u components).
  std::vector<Dual> tc(static_cast<std::size_t>(d));
  std::vector<Dual> tv(static_cast<std::size_t>(d));
  for (int m = 0; m < d; ++m) {
    const double dc[1] = {v(m)};
    const double dv[1] = {a(m)};
    tc[static_cast<std::size_t>(m)] = Dual::with_gradient(c[static_cast<std::size_t>(m)], dc);
    tv[static_cast<std::size_t>(m)] = Dual::with_gradient(v(m), dv);
  }
  const auto vt = evaluate_system<Dual>(metric.system(), tc);
  const Dual& ud = tv[iu];
  Dual P = -2.0 * vt.V * ud;             // A_i xdot^i - 2 V udot
  Dual wdot_c = -vt.V * ud;              // udot L(x, xdot/udot, u, w)
  for (int i = 0; i < n; ++i) {
    const Dual& Ai = vt.A[static_cast<std::size_t>(i)];
    P += Ai * tv[static_cast<std::size_t>(i)];
    wdot_c += Ai * tv[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j)
      wdot_c += 0.5 * vt.h_at(i, j) * tv[static_cast<std::size_t>(i)] * tv[static_cast<std::size_t>(j)] / ud;
  }
  return std::abs(wdot_c.d(0) + partials - P.d(0));
}

double w_equation_residual(const BrinkmannMetric& metric, const Trajectory& traj) {
  double worst = 0.0;
  for (const GeodesicSample& s : traj.samples) worst = std::max(worst, w_equation_residual(metric, s));
  return worst;
}

double homogeneity_residual(const HerglotzSystem& system, const ReducedState& rs, double udot) {
  require_reduced(system, rs);
  if (udot == 0.0 || !std::isfinite(udot)) throw Error(ErrorCode::ZeroUdot, "homogeneity residual requires udot != 0");
  const int n = system.n;
  const auto c = coords_of(rs.x, rs.u, rs.w);
  const auto v = evaluate_system<double>(system, c);
  std::vector<double> vel(static_cast<std::size_t>(n + 1));
  for (int i = 0; i < n; ++i) vel[static_cast<std::size_t>(i)] = rs.xp(i) * udot;
  vel[static_cast<std::size_t>(n)] = udot;
  return euler_homogeneity_defect(
      [&](std::span<const Dual> q) {
        const Dual& ud = q[static_cast<std::size_t>(n)];
        Dual Lt = -v.V * ud;
        for (int i = 0; i < n; ++i) {
          Lt += v.A[static_cast<std::size_t>(i)] * q[static_cast<std::size_t>(i)];
          for (int j = 0; j < n; ++j)
            Lt += 0.5 * v.h_at(i, j) * q[static_cast<std::size_t>(i)] * q[static_cast<std::size_t>(j)] / ud;
        }
        return Lt;
      },
      vel);
}

}  // namespace eisenhart
