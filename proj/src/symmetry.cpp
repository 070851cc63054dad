#include "eisenhart/symmetry.hpp"

#include <algorithm>
#include <cmath>
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

void require_generator(int n, const SymmetryGenerator& gen) {
  if (gen.n() != n)
    throw Error(ErrorCode::DimensionMismatch, "generator '" + gen.name + "' has " + std::to_string(gen.n()) +
                                                  " x-components, system has n = " + std::to_string(n));
}

// Generator components over duals, wrapped as FieldEvalError.
struct GeneratorDuals {
  std::vector<Dual> dx;
  Dual du;
  Dual dw;
};

GeneratorDuals eval_generator(const SymmetryGenerator& gen, std::span<const Dual> coords) {
  try {
    GeneratorDuals out;
    for (const Field& f : gen.dx) out.dx.push_back(f(coords));
    out.du = gen.du(coords);
    out.dw = gen.dw(coords);
    return out;
  } catch (const Error& e) {
    throw Error(ErrorCode::FieldEvalError, "generator '" + gen.name + "': " + e.what(), e.offset());
  }
}

Field parse_or_zero(const std::string& text, int n, const Parameters& parameters) {
  if (text.empty()) return Field{};
  return Field::parse(text, n, parameters);
}

}  // namespace

VectorField SymmetryGenerator::as_vector_field() const {
  VectorField K;
  K.name = name;
  K.components = dx;
  K.components.push_back(du);
  K.components.push_back(dw);
  return K;
}

SymmetryGenerator SymmetryGenerator::from_expressions(std::string name, int n, const std::vector<std::string>& dx,
                                                      const std::string& du, const std::string& dw,
                                                      const Parameters& parameters) {
  SymmetryGenerator g;
  g.name = std::move(name);
  if (!dx.empty() && static_cast<int>(dx.size()) != n)
    throw Error(ErrorCode::DimensionMismatch, "generator '" + g.name + "': dx must have n = " + std::to_string(n) +
                                                  " entries, got " + std::to_string(dx.size()));
  for (int i = 0; i < n; ++i)
    g.dx.push_back(dx.empty() ? Field{} : parse_or_zero(dx[static_cast<std::size_t>(i)], n, parameters));
  g.du = parse_or_zero(du, n, parameters);
  g.dw = parse_or_zero(dw, n, parameters);
  return g;
}

TransformSpec TransformSpec::from_expressions(int n, const std::string& t, const std::vector<std::string>& q,
                                              const std::string& S, const Parameters& parameters) {
  if (static_cast<int>(q.size()) != n)
    throw Error(ErrorCode::DimensionMismatch, "transform needs n = " + std::to_string(n) + " position maps");
  TransformSpec spec;
  spec.t = Field::parse(t, n, parameters);
  for (const auto& e : q) spec.q.push_back(Field::parse(e, n, parameters));
  spec.S = Field::parse(S, n, parameters);
  return spec;
}

KillingResult killing_residual(const BrinkmannMetric& metric, const SymmetryGenerator& gen, const Point& point) {
  require_generator(metric.n(), gen);
  const VectorField K = gen.as_vector_field();
  const Eigen::MatrixXd S = covariant_sym_grad(metric, K, point);
  const Eigen::MatrixXd g = metric_eval(metric, point);
  const Eigen::MatrixXd ginv = metric_inverse(metric, point);
  KillingResult out;
  out.lambda = ginv.cwiseProduct(S).sum() / static_cast<double>(metric.dim());
  out.residual = (S - out.lambda * g).cwiseAbs().maxCoeff();
  return out;
}

double symmetry_condition_residual(const HerglotzSystem& system, const SymmetryGenerator& gen,
                                   const ReducedState& rs) {
  const int n = system.n;
  require_generator(n, gen);
  const auto iu = static_cast<std::size_t>(n);
  const auto iw = static_cast<std::size_t>(n + 1);
  const auto c = coords_of(rs.x, rs.u, rs.w);
  const auto seeded = seed(c);
  const auto v = evaluate_system<Dual>(system, seeded);
  const GeneratorDuals k = eval_generator(gen, seeded);
  const Eigen::VectorXd& xp = rs.xp;

  // L with x' held fixed: its gradient holds d_k L, d_u L, d_w L.
  Dual L = -v.V;
  std::vector<double> p(static_cast<std::size_t>(n), 0.0);  // dL/dx'^k
  for (int i = 0; i < n; ++i) {
    L += v.A[static_cast<std::size_t>(i)] * xp(i);
    p[static_cast<std::size_t>(i)] += v.A[static_cast<std::size_t>(i)].value();
    for (int j = 0; j < n; ++j) {
      L += 0.5 * xp(i) * xp(j) * v.h_at(i, j);
      p[static_cast<std::size_t>(i)] += v.h_at(i, j).value() * xp(j);
    }
  }
  const double wdot = L.value();
  auto total = [&](const Dual& f) {
    double acc = f.d(iu) + wdot * f.d(iw);
    for (int l = 0; l < n; ++l) acc += xp(l) * f.d(static_cast<std::size_t>(l));
    return acc;
  };

  const double du_dot = total(k.du);
  double r = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    r += L.d(ui) * k.dx[ui].value();
    r += p[ui] * (total(k.dx[ui]) - xp(i) * du_dot);
  }
  r += L.d(iu) * k.du.value();
  r += L.d(iw) * k.dw.value();
  r += L.value() * du_dot;
  r -= total(k.dw);
  return std::abs(r);
}

std::array<double, 5> degreewise_identities(const HerglotzSystem& system, const SymmetryGenerator& gen,
                                            const Point& point) {
  const int n = system.n;
  require_generator(n, gen);
  const auto c = coords_of(point.x, point.u, point.w);
  const auto seeded = seed(c);
  const auto v = evaluate_system<Dual>(system, seeded);
  const GeneratorDuals k = eval_generator(gen, seeded);
  const int iu = n;
  const int iw = n + 1;
  auto d = [](const Dual& f, int index) { return f.d(static_cast<std::size_t>(index)); };
  auto h = [&](int i, int j) -> const Dual& { return v.h_at(i, j); };
  auto A = [&](int i) -> const Dual& { return v.A[static_cast<std::size_t>(i)]; };
  auto dx = [&](int i) -> const Dual& { return k.dx[static_cast<std::size_t>(i)]; };
  const Dual& du = k.du;
  const Dual& dw = k.dw;
  const Dual& V = v.V;

  std::array<double, 5> r{};
  r[0] = std::abs(d(du, iw));

  for (int i = 0; i < n; ++i) {
    double acc = -d(du, i);
    for (int l = 0; l < n; ++l) acc += h(i, l).value() * d(dx(l), iw);
    r[1] = std::max(r[1], std::abs(acc));
  }

  double A_dw_dx = 0.0;  // A_k d_w dx^k
  for (int l = 0; l < n; ++l) A_dw_dx += A(l).value() * d(dx(l), iw);

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double hij = h(i, j).value();
      double acc = du.value() * d(h(i, j), iu) - d(du, iu) * hij;
      acc += dw.value() * d(h(i, j), iw) - d(dw, iw) * hij;
      acc += A_dw_dx * hij;
      acc += d(du, i) * A(j).value() + d(du, j) * A(i).value();
      for (int l = 0; l < n; ++l) {
        acc += h(i, l).value() * d(dx(l), j) + h(j, l).value() * d(dx(l), i);
        acc += dx(l).value() * d(h(i, j), l);
      }
      r[2] = std::max(r[2], std::abs(acc));
    }
  }

  for (int i = 0; i < n; ++i) {
    const double Ai = A(i).value();
    double acc = dw.value() * d(A(i), iw) - d(dw, iw) * Ai;
    acc += du.value() * d(A(i), iu) - 2.0 * V.value() * d(du, i) - d(dw, i);
    for (int l = 0; l < n; ++l) {
      acc += d(A(i), l) * dx(l).value() + A(l).value() * d(dx(l), i);
      acc += h(i, l).value() * d(dx(l), iu);
      acc += Ai * A(l).value() * d(dx(l), iw);
    }
    r[3] = std::max(r[3], std::abs(acc));
  }

  double zero = -du.value() * d(V, iu) - d(du, iu) * V.value() - dw.value() * d(V, iw) - d(dw, iu) +
                V.value() * d(dw, iw);
  for (int l = 0; l < n; ++l) {
    zero -= dx(l).value() * d(V, l);
    zero += A(l).value() * d(dx(l), iu) - A(l).value() * d(dx(l), iw) * V.value();
  }
  r[4] = std::abs(zero);
  return r;
}

double affine_charge(const BrinkmannMetric& metric, const SymmetryGenerator& gen, const GeodesicState& gs) {
  require_generator(metric.n(), gen);
  const auto c = coords_of(gs.point.x, gs.point.u, gs.point.w);
  const Eigen::MatrixXd g = metric_eval(metric, gs.point);
  const VectorField K = gen.as_vector_field();
  std::vector<double> k;
  try {
    k = K(std::span<const double>(c));
  } catch (const Error& e) {
    throw Error(ErrorCode::FieldEvalError, "generator '" + gen.name + "': " + e.what(), e.offset());
  }
  const Eigen::Map<const Eigen::VectorXd> kv(k.data(), static_cast<Eigen::Index>(k.size()));
  return kv.dot(g * gs.velocity);
}

double noether_charge(const HerglotzSystem& system, const SymmetryGenerator& gen, const ReducedState& rs) {
  const int n = system.n;
  require_generator(n, gen);
  const auto c = coords_of(rs.x, rs.u, rs.w);
  const auto v = evaluate_system<double>(system, c);
  const std::span<const double> cs(c);
  double q = 0.0;
  double kinetic = 0.0;
  try {
    for (int i = 0; i < n; ++i) {
      double p = v.A[static_cast<std::size_t>(i)];
      for (int j = 0; j < n; ++j) {
        p += v.h_at(i, j) * rs.xp(j);
        kinetic += 0.5 * v.h_at(i, j) * rs.xp(i) * rs.xp(j);
      }
      q += p * gen.dx[static_cast<std::size_t>(i)](cs);
    }
    q -= (kinetic + v.V) * gen.du(cs);
    q -= gen.dw(cs);
  } catch (const Error& e) {
    throw Error(ErrorCode::FieldEvalError, "generator '" + gen.name + "': " + e.what(), e.offset());
  }
  return q;
}

NonlocalCharge nonlocal_charge(const HerglotzSystem& system, const SymmetryGenerator& gen,
                               const ReducedTrajectory& traj) {
  NonlocalCharge out;
  const auto& s = traj.samples;
  if (s.empty()) return out;
  const int n = traj.n;

  // Node derivatives of the reduced flow y = (x, x', w).
  auto node_state = [&](const ReducedSample& r) {
    Eigen::VectorXd y(2 * n + 1);
    y << r.x, r.xp, r.w;
    return y;
  };
  auto node_derivative = [&](const ReducedSample& r) {
    const HerglotzDerivative der = herglotz_rhs(system, r.state());
    Eigen::VectorXd dy(2 * n + 1);
    dy << r.xp, der.xpp, der.wp;
    return dy;
  };
  auto dLdw_at = [&](const Eigen::VectorXd& y, double u) {
    return reduced_lagrangian_dw(system, ReducedState{y.head(n), y.segment(n, n), u, y(2 * n)});
  };

  Eigen::VectorXd y_prev = node_state(s.front());
  Eigen::VectorXd dy_prev = node_derivative(s.front());
  double f_prev = dLdw_at(y_prev, s.front().u);
  double exponent = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k > 0) {
      const Eigen::VectorXd y = node_state(s[k]);
      const Eigen::VectorXd dy = node_derivative(s[k]);
      const double h = s[k].u - s[k - 1].u;
      const Eigen::VectorXd y_mid = 0.5 * (y_prev + y) + (h / 8.0) * (dy_prev - dy);
      const double f_mid = dLdw_at(y_mid, s[k - 1].u + 0.5 * h);
      const double f = dLdw_at(y, s[k].u);
      exponent += h / 6.0 * (f_prev + 4.0 * f_mid + f);
      y_prev = y;
      dy_prev = dy;
      f_prev = f;
    }
    const double q = noether_charge(system, gen, s[k].state());
    out.u.push_back(s[k].u);
    out.local.push_back(q);
    out.exponent.push_back(exponent);
    out.value.push_back(std::exp(-exponent) * q);
  }
  return out;
}

double transform_rule_check(const HerglotzSystem& source, const HerglotzSystem& target, const TransformSpec& transform,
                            const ReducedState& rs) {
  const int n = source.n;
  if (target.n != n || static_cast<int>(transform.q.size()) != n)
    throw Error(ErrorCode::DimensionMismatch, "transform check: systems and map must share n");
  const auto iu = static_cast<std::size_t>(n);
  const auto iw = static_cast<std::size_t>(n + 1);
  const auto c = coords_of(rs.x, rs.u, rs.w);
  const auto seeded = seed(c);

  Dual t_new;
  std::vector<Dual> q_new;
  Dual S_new;
  try {
    t_new = transform.t(std::span<const Dual>(seeded));
    for (const Field& f : transform.q) q_new.push_back(f(std::span<const Dual>(seeded)));
    S_new = transform.S(std::span<const Dual>(seeded));
  } catch (const Error& e) {
    throw Error(ErrorCode::FieldEvalError, std::string("transform: ") + e.what(), e.offset());
  }

  Eigen::MatrixXd J(n + 2, n + 2);
  for (int i = 0; i < n; ++i)
    for (int m = 0; m < n + 2; ++m) J(i, m) = q_new[static_cast<std::size_t>(i)].d(static_cast<std::size_t>(m));
  for (int m = 0; m < n + 2; ++m) {
    J(n, m) = t_new.d(static_cast<std::size_t>(m));
    J(n + 1, m) = S_new.d(static_cast<std::size_t>(m));
  }
  const double det = J.determinant();
  if (!(std::abs(det) > 1e-14)) {
    std::ostringstream os;
    os << "transform Jacobian is singular (det = " << det << ")";
    throw Error(ErrorCode::SingularJacobian, os.str());
  }

  const double L = reduced_lagrangian(source, rs);
  // Total derivative along (qdot, 1, Sdot = L).
  auto total = [&](const Dual& f) {
    double acc = f.d(iu) + L * f.d(iw);
    for (int l = 0; l < n; ++l) acc += rs.xp(l) * f.d(static_cast<std::size_t>(l));
    return acc;
  };
  const double dt_new = total(t_new);
  if (!(std::abs(dt_new) > 1e-14)) throw Error(ErrorCode::SingularJacobian, "transform has dt'/dt = 0 at the state");

  ReducedState image;
  image.x.resize(n);
  image.xp.resize(n);
  for (int i = 0; i < n; ++i) {
    image.x(i) = q_new[static_cast<std::size_t>(i)].value();
    image.xp(i) = total(q_new[static_cast<std::size_t>(i)]) / dt_new;
  }
  image.u = t_new.value();
  image.w = S_new.value();
  const double L_new = reduced_lagrangian(target, image);

  double rhs = S_new.d(iw) * L + S_new.d(iu);
  for (int l = 0; l < n; ++l) rhs += S_new.d(static_cast<std::size_t>(l)) * rs.xp(l);
  return std::abs(L_new * dt_new - rhs);
}

ConformalFlowGap conformal_flow_gap(const BrinkmannMetric& metric_a, const BrinkmannMetric& metric_b,
                                    const CoordinateMap& phi, const GeodesicState& gs0, double u_end,
                                    const IntegratorConfig& config) {
  const int n = metric_a.n();
  const int d = n + 2;
  if (metric_b.n() != n || static_cast<int>(phi.components.size()) != d)
    throw Error(ErrorCode::DimensionMismatch, "conformal flow: metrics and map must share dimension");

  auto map_point = [&](const Eigen::VectorXd& c, std::vector<Dual>* jet) {
    const auto seeded = seed(std::span<const double>(c.data(), static_cast<std::size_t>(d)));
    std::vector<Dual> out;
    try {
      out = phi(std::span<const Dual>(seeded));
    } catch (const Error& e) {
      throw Error(ErrorCode::FieldEvalError, std::string("coordinate map: ") + e.what(), e.offset());
    }
    if (jet) *jet = out;
    Eigen::VectorXd image(d);
    for (int m = 0; m < d; ++m) image(m) = out[static_cast<std::size_t>(m)].value();
    return image;
  };

  std::vector<Dual> jet;
  const Eigen::VectorXd c0 = gs0.point.coords();
  const Eigen::VectorXd image0 = map_point(c0, &jet);
  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(d);
  for (int m = 0; m < d; ++m)
    for (int k = 0; k < d; ++k) v0(m) += jet[static_cast<std::size_t>(m)].d(static_cast<std::size_t>(k)) * gs0.velocity(k);
  const GeodesicState gsb{Point::from_coords(image0), v0, gs0.sigma};

  const Trajectory ta = integrate_geodesic_until_u(metric_a, gs0, u_end, config);
  std::vector<double> grid;
  for (const auto& s : ta.samples)
    if (s.state.point.u <= u_end) grid.push_back(s.state.point.u);
  if (grid.empty() || grid.back() < u_end) grid.push_back(u_end);
  const ReducedTrajectory ra = reduce_trajectory(ta, grid);

  std::vector<Eigen::VectorXd> images;
  std::vector<double> targets;
  for (const auto& s : ra.samples) {
    const Eigen::VectorXd image = map_point(Point{s.x, s.u, s.w}.coords(), nullptr);
    targets.push_back(image(n));
    images.push_back(image);
  }
  const double ub_end = *std::max_element(targets.begin(), targets.end());
  const Trajectory tb = integrate_geodesic_until_u(metric_b, gsb, ub_end, config);
  const ReducedTrajectory rb = reduce_trajectory(tb, targets);

  ConformalFlowGap gap;
  for (std::size_t k = 0; k < images.size(); ++k) {
    gap.x = std::max(gap.x, (rb.samples[k].x - images[k].head(n)).cwiseAbs().maxCoeff());
    gap.w = std::max(gap.w, std::abs(rb.samples[k].w - images[k](n + 1)));
  }
  return gap;
}

}  // namespace eisenhart
