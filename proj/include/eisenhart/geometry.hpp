#pragma once

// Brinkmann metric assembled from reduced (Herglotz) data and the metric
// algebra built on it.
//
// Coordinates are ordered (x1..xn, u, w) everywhere: index i < n is x^{i+1},
// index n is u and index n+1 is w.
//
//   ds^2 = h_ij dx^i dx^j + 2 A_i dx^i du - 2 V du^2 - 2 du dw

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eisenhart/expr.hpp"
#include "eisenhart/scalar.hpp"

namespace eisenhart {

using Parameters = std::map<std::string, double, std::less<>>;

/// A compiled scalar expression over the n+2 coordinates. The default
/// constructed field is identically zero.
class Field {
 public:
  Field() = default;

  static Field parse(std::string_view text, int n, const Parameters& parameters = {});
  static Field constant(double value, int n);

  template <Scalar T>
  T operator()(std::span<const T> coords) const;

  bool is_zero() const noexcept { return ast_ == nullptr && constant_ == 0.0; }
  /// Source text; "0" for the zero field.
  std::string source() const;

 private:
  std::shared_ptr<const expr::Ast> ast_;
  std::vector<int> slots_;           // coordinate index per AST variable, -1 for parameters
  std::vector<double> parameters_;  // bound value per AST variable
  double constant_ = 0.0;
  int n_ = -1;
};

/// Ordered tuple of fields, one per coordinate.
struct FieldTuple {
  std::vector<Field> components;

  template <Scalar T>
  std::vector<T> operator()(std::span<const T> coords) const {
    std::vector<T> out;
    out.reserve(components.size());
    for (const Field& f : components) out.push_back(f(coords));
    return out;
  }
};

/// Vector field K = K^mu d_mu in coordinate order.
struct VectorField : FieldTuple {
  std::string name;
};

/// Coordinate map Phi: p -> (Phi^0(p), ..., Phi^{n+1}(p)).
struct CoordinateMap : FieldTuple {};

/// Reduced data (n, h_ij, A_i, V) of an action-dependent system.
struct HerglotzSystem {
  std::string name;
  int n = 0;
  std::vector<Field> h;  // n*n, row-major
  std::vector<Field> A;  // n
  Field V;

  int dim() const noexcept { return n + 2; }

  /// `h` holds n*n expressions (row-major) or a single expression meaning
  /// expr * identity. Empty `A` means A = 0.
  static HerglotzSystem from_expressions(std::string name, int n, const std::vector<std::string>& h,
                                         const std::vector<std::string>& A, const std::string& V,
                                         const Parameters& parameters = {});
};

/// h, A and V evaluated at one point, with h symmetrized.
template <Scalar T>
struct SystemValues {
  int n = 0;
  std::vector<T> h;
  std::vector<T> A;
  T V{};

  const T& h_at(int i, int j) const { return h[static_cast<std::size_t>(i * n + j)]; }
};

/// Throws FieldEvalError wrapping expression failures and AsymmetricMetric
/// when |h_ij - h_ji| exceeds 1e-12.
template <Scalar T>
SystemValues<T> evaluate_system(const HerglotzSystem& system, std::span<const T> coords);

struct Point {
  Eigen::VectorXd x;
  double u = 0.0;
  double w = 0.0;

  int n() const noexcept { return static_cast<int>(x.size()); }
  Eigen::VectorXd coords() const;
  static Point from_coords(const Eigen::Ref<const Eigen::VectorXd>& coords);
};

class BrinkmannMetric {
 public:
  explicit BrinkmannMetric(HerglotzSystem system);

  const HerglotzSystem& system() const noexcept { return system_; }
  int n() const noexcept { return system_.n; }
  int dim() const noexcept { return system_.n + 2; }

  /// Full metric (row-major, dim*dim) from already evaluated system values.
  template <Scalar T>
  std::vector<T> assemble(const SystemValues<T>& values) const;

 private:
  HerglotzSystem system_;
};

/// Metric and its first partial derivatives at one point.
struct MetricJet {
  Eigen::MatrixXd g;
  std::vector<Eigen::MatrixXd> dg;  // dg[k](mu, nu) = d_k g_{mu nu}
};

/// Christoffel symbols of the second kind, symmetric in the lower indices.
class Christoffel {
 public:
  explicit Christoffel(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim * dim * dim), 0.0) {}

  int dim() const noexcept { return dim_; }
  double operator()(int mu, int nu, int rho) const { return data_[index(mu, nu, rho)]; }
  double& at(int mu, int nu, int rho) { return data_[index(mu, nu, rho)]; }

 private:
  std::size_t index(int mu, int nu, int rho) const {
    return static_cast<std::size_t>((mu * dim_ + nu) * dim_ + rho);
  }
  int dim_;
  std::vector<double> data_;
};

Eigen::MatrixXd metric_eval(const BrinkmannMetric& metric, const Point& point);

MetricJet metric_jet(const BrinkmannMetric& metric, const Point& point);

/// Inverse via the Brinkmann block structure:
///   g^{ij} = h^{ij}, g^{iw} = h^{ij} A_j, g^{uw} = -1,
///   g^{ww} = 2V + A_i h^{ij} A_j, g^{iu} = g^{uu} = 0.
/// Throws SingularMetric (with a condition estimate) when h is singular.
Eigen::MatrixXd metric_inverse(const BrinkmannMetric& metric, const Point& point);

/// Same, from values that are already known.
Eigen::MatrixXd brinkmann_inverse(const SystemValues<double>& values);

/// Inverse of the h block; warns when its smallest eigenvalue magnitude is
/// below 1e-8 and throws SingularMetric when it is numerically singular.
Eigen::MatrixXd inverse_h(const SystemValues<double>& values);

Christoffel christoffel(const BrinkmannMetric& metric, const Point& point);
Christoffel christoffel(const MetricJet& jet, const Eigen::MatrixXd& inverse);

/// nabla_mu K_nu + nabla_nu K_mu.
Eigen::MatrixXd covariant_sym_grad(const BrinkmannMetric& metric, const VectorField& K, const Point& point);

/// lambda = g^{mu nu} (nabla_mu K_nu + nabla_nu K_mu) / (n + 2).
double conformal_factor(const BrinkmannMetric& metric, const VectorField& K, const Point& point);

/// lambda = d_u K^u + d_w K^w - A_i d_w K^i, valid when K satisfies the
/// symmetry identities.
double conformal_factor_closed_form(const BrinkmannMetric& metric, const VectorField& K, const Point& point);

/// max | DPhi^T g_B(Phi(p)) DPhi - Omega(p) g_A(p) |.
double conformal_pullback_check(const BrinkmannMetric& metric_a, const BrinkmannMetric& metric_b,
                                const CoordinateMap& phi, const Point& point, const Field& omega);

}  // namespace eisenhart
