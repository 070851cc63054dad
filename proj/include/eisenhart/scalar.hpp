#pragma once

// Scalar kernel: real numbers and first-order forward-mode duals behind one
// set of checked elementary functions.

#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "eisenhart/error.hpp"

namespace eisenhart {

/// Value plus gradient with respect to a fixed set of seeded coordinates.
///
/// A dual with dimension 0 is a constant and combines with duals of any
/// dimension. Two duals of different non-zero dimension never meet in
/// correct code; doing so aborts.
class Dual {
 public:
  static constexpr std::size_t kMaxDim = 16;

  constexpr Dual() = default;
  constexpr Dual(double value) : value_(value) {}  // NOLINT: constants promote

  static Dual variable(double value, std::size_t dim, std::size_t index);
  static Dual with_gradient(double value, std::span<const double> grad);

  double value() const noexcept { return value_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> grad() const noexcept { return {grad_.data(), dim_}; }
  /// Partial derivative along seed `i`; zero for constants.
  double d(std::size_t i) const noexcept { return i < dim_ ? grad_[i] : 0.0; }
  bool is_finite() const noexcept;

  Dual operator-() const noexcept;
  Dual& operator+=(const Dual& rhs);
  Dual& operator-=(const Dual& rhs);
  Dual& operator*=(const Dual& rhs);
  Dual& operator/=(const Dual& rhs);

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend Dual operator/(Dual a, const Dual& b) { return a /= b; }

  friend bool operator<(const Dual& a, const Dual& b) { return a.value_ < b.value_; }
  friend bool operator>(const Dual& a, const Dual& b) { return a.value_ > b.value_; }
  friend bool operator<=(const Dual& a, const Dual& b) { return a.value_ <= b.value_; }
  friend bool operator>=(const Dual& a, const Dual& b) { return a.value_ >= b.value_; }

  /// f(value) with gradient scaled by f'(value): the chain rule step shared
  /// by all unary functions.
  Dual chain(double f, double df) const noexcept;

 private:
  std::size_t unify(const Dual& other);

  double value_ = 0.0;
  std::size_t dim_ = 0;
  std::array<double, kMaxDim> grad_{};
};

template <class T>
concept Scalar = std::same_as<T, double> || std::same_as<T, Dual>;

inline double real_part(double x) noexcept { return x; }
inline double real_part(const Dual& x) noexcept { return x.value(); }

/// Checked elementary functions. `sqrt` and `log` reject non-positive
/// arguments and every function rejects non-finite results with
/// ErrorCode::NonFinite.
namespace scalar {

double exp(double x);
double log(double x);
double sin(double x);
double cos(double x);
double tan(double x);
double sinh(double x);
double cosh(double x);
double tanh(double x);
double sqrt(double x);
double abs(double x);
double pow(double base, double exponent);

Dual exp(const Dual& x);
Dual log(const Dual& x);
Dual sin(const Dual& x);
Dual cos(const Dual& x);
Dual tan(const Dual& x);
Dual sinh(const Dual& x);
Dual cosh(const Dual& x);
Dual tanh(const Dual& x);
Dual sqrt(const Dual& x);
Dual abs(const Dual& x);
Dual pow(const Dual& base, const Dual& exponent);

}  // namespace scalar

/// Seeds one dual per coordinate: entry j carries value point[j] and the
/// j-th unit gradient.
std::vector<Dual> seed(std::span<const double> point);

/// Forward-mode gradient of `f`, which maps a span of seeded duals to a Dual.
template <class F>
std::vector<double> gradient(F&& f, std::span<const double> point) {
  const std::vector<Dual> seeded = seed(point);
  const Dual out = f(std::span<const Dual>(seeded));
  if (!out.is_finite()) throw Error(ErrorCode::NonFinite, "gradient: non-finite result");
  std::vector<double> g(point.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = out.d(i);
  return g;
}

}  // namespace eisenhart
