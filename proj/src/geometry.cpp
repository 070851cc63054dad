#include "eisenhart/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace eisenhart {

// ---------------------------------------------------------------------------
// Field

Field Field::parse(std::string_view text, int n, const Parameters& parameters) {
  expr::Symbols symbols;
  symbols.n = n;
  for (const auto& [name, value] : parameters) symbols.parameters.insert(name);

  Field f;
  f.n_ = n;
  f.ast_ = std::make_shared<const expr::Ast>(expr::parse(text, symbols));
  for (const expr::Variable& v : f.ast_->variables()) {
    switch (v.kind) {
      case expr::VariableKind::X:
        f.slots_.push_back(v.x_index);
        f.parameters_.push_back(0.0);
        break;
      case expr::VariableKind::U:
        f.slots_.push_back(n);
        f.parameters_.push_back(0.0);
        break;
      case expr::VariableKind::W:
        f.slots_.push_back(n + 1);
        f.parameters_.push_back(0.0);
        break;
      case expr::VariableKind::Parameter:
        f.slots_.push_back(-1);
        f.parameters_.push_back(parameters.find(v.name)->second);
        break;
    }
  }
  return f;
}

Field Field::constant(double value, int n) {
  Field f;
  f.constant_ = value;
  f.n_ = n;
  return f;
}

template <Scalar T>
T Field::operator()(std::span<const T> coords) const {
  if (ast_ == nullptr) return T(constant_);
  EISENHART_ASSERT(static_cast<int>(coords.size()) == n_ + 2, "field evaluated with wrong coordinate count");
  return expr::evaluate<T>(*ast_, [&](int index) -> T {
    const int slot = slots_[static_cast<std::size_t>(index)];
    return slot >= 0 ? coords[static_cast<std::size_t>(slot)] : T(parameters_[static_cast<std::size_t>(index)]);
  });
}

template double Field::operator()(std::span<const double>) const;
template Dual Field::operator()(std::span<const Dual>) const;

std::string Field::source() const {
  if (ast_ != nullptr) return ast_->source();
  std::ostringstream os;
  os.precision(17);
  os << constant_;
  return os.str();
}

// ---------------------------------------------------------------------------
// HerglotzSystem

HerglotzSystem HerglotzSystem::from_expressions(std::string name, int n, const std::vector<std::string>& h,
                                                const std::vector<std::string>& A, const std::string& V,
                                                const Parameters& parameters) {
  if (n < 1) throw Error(ErrorCode::DimensionMismatch, "system dimension n must be at least 1");
  if (n + 2 > static_cast<int>(Dual::kMaxDim))
    throw Error(ErrorCode::DimensionMismatch,
                "system dimension n = " + std::to_string(n) + " exceeds the supported maximum " +
                    std::to_string(Dual::kMaxDim - 2));
  const auto nn = static_cast<std::size_t>(n);
  HerglotzSystem s;
  s.name = std::move(name);
  s.n = n;
  if (h.size() == 1) {
    const Field diag = Field::parse(h[0], n, parameters);
    s.h.assign(nn * nn, Field{});
    for (std::size_t i = 0; i < nn; ++i) s.h[i * nn + i] = diag;
  } else if (h.size() == nn * nn) {
    for (const auto& e : h) s.h.push_back(Field::parse(e, n, parameters));
  } else {
    throw Error(ErrorCode::DimensionMismatch, "h must have 1 or n*n = " + std::to_string(nn * nn) +
                                                  " entries, got " + std::to_string(h.size()));
  }
  if (A.empty()) {
    s.A.assign(nn, Field{});
  } else if (A.size() == nn) {
    for (const auto& e : A) s.A.push_back(Field::parse(e, n, parameters));
  } else {
    throw Error(ErrorCode::DimensionMismatch,
                "A must have n = " + std::to_string(n) + " entries, got " + std::to_string(A.size()));
  }
  s.V = Field::parse(V, n, parameters);
  return s;
}

namespace {

template <Scalar T>
T eval_wrapped(const Field& f, std::span<const T> coords, const char* what, int i, int j = -1) {
  try {
    return f(coords);
  } catch (const Error& e) {
    std::string label = what;
    if (i >= 0) label += "[" + std::to_string(i + 1) + "]";
    if (j >= 0) label += "[" + std::to_string(j + 1) + "]";
    throw Error(ErrorCode::FieldEvalError, label + ": " + e.what(), e.offset());
  }
}

}  // namespace

template <Scalar T>
SystemValues<T> evaluate_system(const HerglotzSystem& system, std::span<const T> coords) {
  const int n = system.n;
  EISENHART_ASSERT(static_cast<int>(coords.size()) == n + 2, "system evaluated with wrong coordinate count");
  SystemValues<T> out;
  out.n = n;
  out.h.resize(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const Field& fij = system.h[static_cast<std::size_t>(i * n + j)];
      const Field& fji = system.h[static_cast<std::size_t>(j * n + i)];
      T hij = eval_wrapped(fij, coords, "h", i, j);
      if (i != j && fij.source() != fji.source()) {
        const T hji = eval_wrapped(fji, coords, "h", j, i);
        const double gap = std::abs(real_part(hij) - real_part(hji));
        if (gap > 1e-12 * std::max(1.0, std::abs(real_part(hij))))
          throw Error(ErrorCode::AsymmetricMetric, "h is not symmetric: |h[" + std::to_string(i + 1) + "][" +
                                                       std::to_string(j + 1) + "] - h[" + std::to_string(j + 1) +
                                                       "][" + std::to_string(i + 1) + "]| = " + std::to_string(gap));
        hij = (hij + hji) * T(0.5);
      }
      out.h[static_cast<std::size_t>(i * n + j)] = hij;
      out.h[static_cast<std::size_t>(j * n + i)] = hij;
    }
  }
  out.A.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.A.push_back(eval_wrapped(system.A[static_cast<std::size_t>(i)], coords, "A", i));
  out.V = eval_wrapped(system.V, coords, "V", -1);
  return out;
}

template SystemValues<double> evaluate_system(const HerglotzSystem&, std::span<const double>);
template SystemValues<Dual> evaluate_system(const HerglotzSystem&, std::span<const Dual>);

// ---------------------------------------------------------------------------
// Point and metric

Eigen::VectorXd Point::coords() const {
  Eigen::VectorXd c(x.size() + 2);
  c.head(x.size()) = x;
  c(x.size()) = u;
  c(x.size() + 1) = w;
  return c;
}

Point Point::from_coords(const Eigen::Ref<const Eigen::VectorXd>& coords) {
  EISENHART_ASSERT(coords.size() >= 3, "coordinate vector needs at least n + 2 = 3 entries");
  const auto n = coords.size() - 2;
  return Point{coords.head(n), coords(n), coords(n + 1)};
}

BrinkmannMetric::BrinkmannMetric(HerglotzSystem system) : system_(std::move(system)) {}

template <Scalar T>
std::vector<T> BrinkmannMetric::assemble(const SystemValues<T>& values) const {
  const int n = values.n;
  const int d = n + 2;
  const int iu = n;
  const int iw = n + 1;
  std::vector<T> g(static_cast<std::size_t>(d * d), T(0.0));
  auto at = [&](int r, int c) -> T& { return g[static_cast<std::size_t>(r * d + c)]; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) at(i, j) = values.h_at(i, j);
    at(i, iu) = values.A[static_cast<std::size_t>(i)];
    at(iu, i) = values.A[static_cast<std::size_t>(i)];
  }
  at(iu, iu) = T(-2.0) * values.V;
  at(iu, iw) = T(-1.0);
  at(iw, iu) = T(-1.0);
  return g;
}

template std::vector<double> BrinkmannMetric::assemble(const SystemValues<double>&) const;
template std::vector<Dual> BrinkmannMetric::assemble(const SystemValues<Dual>&) const;

namespace {

void require_finite(const Point& p) {
  bool ok = std::isfinite(p.u) && std::isfinite(p.w);
  for (Eigen::Index i = 0; i < p.x.size(); ++i) ok = ok && std::isfinite(p.x(i));
  if (!ok) throw Error(ErrorCode::NonFinite, "point has non-finite coordinates");
}

void require_dim(const BrinkmannMetric& metric, const Point& p) {
  if (p.n() != metric.n())
    throw Error(ErrorCode::DimensionMismatch, "point has " + std::to_string(p.n()) + " x-coordinates, metric has n = " +
                                                  std::to_string(metric.n()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::MatrixXd to_matrix(const std::vector<double>& flat, int d) {
  Eigen::MatrixXd m(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) m(r, c) = flat[static_cast<std::size_t>(r * d + c)];
  return m;
}

}  // namespace

Eigen::MatrixXd metric_eval(const BrinkmannMetric& metric, const Point& point) {
  require_dim(metric, point);
  require_finite(point);
  const auto coords = to_std(point.coords());
  const auto values = evaluate_system<double>(metric.system(), coords);
  return to_matrix(metric.assemble(values), metric.dim());
}

MetricJet metric_jet(const BrinkmannMetric& metric, const Point& point) {
  require_dim(metric, point);
  require_finite(point);
  const int d = metric.dim();
  const auto coords = to_std(point.coords());
  const std::vector<Dual> seeded = seed(coords);
  const auto values = evaluate_system<Dual>(metric.system(), seeded);
  const std::vector<Dual> g = metric.assemble(values);
  MetricJet jet;
  jet.g.resize(d, d);
  jet.dg.assign(static_cast<std::size_t>(d), Eigen::MatrixXd::Zero(d, d));
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      const Dual& e = g[static_cast<std::size_t>(r * d + c)];
      jet.g(r, c) = e.value();
      for (int k = 0; k < d; ++k) jet.dg[static_cast<std::size_t>(k)](r, c) = e.d(static_cast<std::size_t>(k));
    }
  }
  return jet;
}

Eigen::MatrixXd inverse_h(const SystemValues<double>& values) {
  const int n = values.n;
  Eigen::MatrixXd h(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h(i, j) = values.h_at(i, j);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(h);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14) || !std::isfinite(lu.determinant()) || lu.determinant() == 0.0) {
    std::ostringstream os;
    os << "h block is singular (reciprocal condition estimate " << rcond << ", condition ~ "
       << (rcond > 0 ? 1.0 / rcond : INFINITY) << ")";
    throw Error(ErrorCode::SingularMetric, os.str());
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
  const double smallest = eig.eigenvalues().cwiseAbs().minCoeff();
  if (smallest < 1e-8) {
    std::ostringstream os;
    os << "h block nearly singular: smallest eigenvalue magnitude " << smallest;
    warn(os.str());
  }
  return lu.inverse();
}

Eigen::MatrixXd brinkmann_inverse(const SystemValues<double>& values) {
  const int n = values.n;
  const int d = n + 2;
  const Eigen::MatrixXd hinv = inverse_h(values);
  Eigen::VectorXd A(n);
  for (int i = 0; i < n; ++i) A(i) = values.A[static_cast<std::size_t>(i)];
  const Eigen::VectorXd hA = hinv * A;
  Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(d, d);
  inv.topLeftCorner(n, n) = hinv;
  inv.block(0, n + 1, n, 1) = hA;
  inv.block(n + 1, 0, 1, n) = hA.transpose();
  inv(n, n + 1) = -1.0;
  inv(n + 1, n) = -1.0;
  inv(n + 1, n + 1) = 2.0 * values.V + A.dot(hA);
  return inv;
}

Eigen::MatrixXd metric_inverse(const BrinkmannMetric& metric, const Point& point) {
  require_dim(metric, point);
  require_finite(point);
  const auto coords = to_std(point.coords());
  return brinkmann_inverse(evaluate_system<double>(metric.system(), coords));
}

Christoffel christoffel(const MetricJet& jet, const Eigen::MatrixXd& inverse) {
  const int d = static_cast<int>(jet.g.rows());
  // First kind: Gamma_{s nu rho} = 1/2 (d_nu g_{s rho} + d_rho g_{s nu} - d_s g_{nu rho}).
  std::vector<double> first(static_cast<std::size_t>(d * d * d), 0.0);
  auto f = [&](int s, int nu, int rho) -> double& { return first[static_cast<std::size_t>((s * d + nu) * d + rho)]; };
  for (int s = 0; s < d; ++s)
    for (int nu = 0; nu < d; ++nu)
      for (int rho = nu; rho < d; ++rho)
        f(s, nu, rho) = 0.5 * (jet.dg[static_cast<std::size_t>(nu)](s, rho) +
                               jet.dg[static_cast<std::size_t>(rho)](s, nu) - jet.dg[static_cast<std::size_t>(s)](nu, rho));
  Christoffel gamma(d);
  for (int mu = 0; mu < d; ++mu) {
    for (int nu = 0; nu < d; ++nu) {
      for (int rho = nu; rho < d; ++rho) {
        double acc = 0.0;
        for (int s = 0; s < d; ++s) acc += inverse(mu, s) * f(s, nu, rho);
        gamma.at(mu, nu, rho) = acc;
        gamma.at(mu, rho, nu) = acc;
      }
    }
  }
  return gamma;
}

Christoffel christoffel(const BrinkmannMetric& metric, const Point& point) {
  const MetricJet jet = metric_jet(metric, point);
  return christoffel(jet, metric_inverse(metric, point));
}

Eigen::MatrixXd covariant_sym_grad(const BrinkmannMetric& metric, const VectorField& K, const Point& point) {
  require_dim(metric, point);
  require_finite(point);
  const int d = metric.dim();
  if (static_cast<int>(K.components.size()) != d)
    throw Error(ErrorCode::DimensionMismatch, "vector field has " + std::to_string(K.components.size()) +
                                                  " components, expected " + std::to_string(d));
  const auto coords = to_std(point.coords());
  const std::vector<Dual> seeded = seed(coords);
  const auto values = evaluate_system<Dual>(metric.system(), seeded);
  const std::vector<Dual> g = metric.assemble(values);
  std::vector<Dual> k_up;
  try {
    k_up = K(std::span<const Dual>(seeded));
  } catch (const Error& e) {
    throw Error(ErrorCode::FieldEvalError, "vector field " + K.name + ": " + e.what(), e.offset());
  }

  // Lowered components K_nu = g_{nu s} K^s as duals carry d_mu K_nu.
  std::vector<Dual> k_low(static_cast<std::size_t>(d));
  for (int nu = 0; nu < d; ++nu) {
    Dual acc(0.0);
    for (int s = 0; s < d; ++s) acc += g[static_cast<std::size_t>(nu * d + s)] * k_up[static_cast<std::size_t>(s)];
    k_low[static_cast<std::size_t>(nu)] = acc;
  }

  MetricJet jet;
  jet.g.resize(d, d);
  jet.dg.assign(static_cast<std::size_t>(d), Eigen::MatrixXd::Zero(d, d));
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      const Dual& e = g[static_cast<std::size_t>(r * d + c)];
      jet.g(r, c) = e.value();
      for (int k = 0; k < d; ++k) jet.dg[static_cast<std::size_t>(k)](r, c) = e.d(static_cast<std::size_t>(k));
    }
  SystemValues<double> plain;
  plain.n = values.n;
  for (const Dual& v : values.h) plain.h.push_back(v.value());
  for (const Dual& v : values.A) plain.A.push_back(v.value());
  plain.V = values.V.value();
  const Christoffel gamma = christoffel(jet, brinkmann_inverse(plain));

  Eigen::MatrixXd nabla(d, d);
  for (int mu = 0; mu < d; ++mu) {
    for (int nu = 0; nu < d; ++nu) {
      double conn = 0.0;
      for (int s = 0; s < d; ++s) conn += gamma(s, mu, nu) * k_low[static_cast<std::size_t>(s)].value();
      nabla(mu, nu) = k_low[static_cast<std::size_t>(nu)].d(static_cast<std::size_t>(mu)) - conn;
    }
  }
  return nabla + nabla.transpose();
}

double conformal_factor(const BrinkmannMetric& metric, const VectorField& K, const Point& point) {
  const Eigen::MatrixXd S = covariant_sym_grad(metric, K, point);
  const Eigen::MatrixXd ginv = metric_inverse(metric, point);
  return (ginv.cwiseProduct(S)).sum() / static_cast<double>(metric.dim());
}

double conformal_factor_closed_form(const BrinkmannMetric& metric, const VectorField& K, const Point& point) {
  require_dim(metric, point);
  const int n = metric.n();
  const auto coords = to_std(point.coords());
  const std::vector<Dual> seeded = seed(coords);
  const std::vector<Dual> k = K(std::span<const Dual>(seeded));
  const auto values = evaluate_system<double>(metric.system(), coords);
  const auto iu = static_cast<std::size_t>(n);
  const auto iw = static_cast<std::size_t>(n + 1);
  double lambda = k[iu].d(iu) + k[iw].d(iw);
  for (int i = 0; i < n; ++i) lambda -= values.A[static_cast<std::size_t>(i)] * k[static_cast<std::size_t>(i)].d(iw);
  return lambda;
}

double conformal_pullback_check(const BrinkmannMetric& metric_a, const BrinkmannMetric& metric_b,
                                const CoordinateMap& phi, const Point& point, const Field& omega) {
  require_dim(metric_a, point);
  const int d = metric_a.dim();
  if (metric_b.dim() != d || static_cast<int>(phi.components.size()) != d)
    throw Error(ErrorCode::DimensionMismatch, "conformal pullback: metrics and map must share dimension");
  const auto coords = to_std(point.coords());
  const std::vector<Dual> seeded = seed(coords);
  std::vector<Dual> image;
  try {
    image = phi(std::span<const Dual>(seeded));
  } catch (const Error& e) {
    throw Error(ErrorCode::FieldEvalError, std::string("coordinate map: ") + e.what(), e.offset());
  }
  Eigen::MatrixXd J(d, d);
  Eigen::VectorXd mapped(d);
  for (int a = 0; a < d; ++a) {
    mapped(a) = image[static_cast<std::size_t>(a)].value();
    for (int mu = 0; mu < d; ++mu) J(a, mu) = image[static_cast<std::size_t>(a)].d(static_cast<std::size_t>(mu));
  }
  const Eigen::MatrixXd gb = metric_eval(metric_b, Point::from_coords(mapped));
  const Eigen::MatrixXd ga = metric_eval(metric_a, point);
  const double factor = omega(std::span<const double>(coords));
  return (J.transpose() * gb * J - factor * ga).cwiseAbs().maxCoeff();
}

}  // namespace eisenhart
