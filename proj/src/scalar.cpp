#include "eisenhart/scalar.hpp"

#include <string>

namespace eisenhart {

Dual Dual::variable(double value, std::size_t dim, std::size_t index) {
  EISENHART_ASSERT(dim <= kMaxDim, "Dual seed dimension exceeds capacity");
  EISENHART_ASSERT(index < dim, "Dual seed index out of range");
  Dual out(value);
  out.dim_ = dim;
  out.grad_[index] = 1.0;
  return out;
}

Dual Dual::with_gradient(double value, std::span<const double> grad) {
  EISENHART_ASSERT(grad.size() <= kMaxDim, "Dual seed dimension exceeds capacity");
  Dual out(value);
  out.dim_ = grad.size();
  for (std::size_t i = 0; i < grad.size(); ++i) out.grad_[i] = grad[i];
  return out;
}

bool Dual::is_finite() const noexcept {
  if (!std::isfinite(value_)) return false;
  for (std::size_t i = 0; i < dim_; ++i)
    if (!std::isfinite(grad_[i])) return false;
  return true;
}

std::size_t Dual::unify(const Dual& other) {
  if (other.dim_ == 0) return dim_;
  if (dim_ == 0) {
    dim_ = other.dim_;
    return dim_;
  }
  EISENHART_ASSERT(dim_ == other.dim_, "mixed-dimension Dual arithmetic");
  return dim_;
}

Dual Dual::operator-() const noexcept {
  Dual out = *this;
  out.value_ = -value_;
  for (std::size_t i = 0; i < dim_; ++i) out.grad_[i] = -grad_[i];
  return out;
}

Dual& Dual::operator+=(const Dual& rhs) {
  const std::size_t n = unify(rhs);
  value_ += rhs.value_;
  for (std::size_t i = 0; i < n && i < rhs.dim_; ++i) grad_[i] += rhs.grad_[i];
  return *this;
}

Dual& Dual::operator-=(const Dual& rhs) {
  const std::size_t n = unify(rhs);
  value_ -= rhs.value_;
  for (std::size_t i = 0; i < n && i < rhs.dim_; ++i) grad_[i] -= rhs.grad_[i];
  return *this;
}

Dual& Dual::operator*=(const Dual& rhs) {
  const std::size_t n = unify(rhs);
  for (std::size_t i = 0; i < n; ++i) grad_[i] = value_ * rhs.d(i) + rhs.value_ * grad_[i];
  value_ *= rhs.value_;
  return *this;
}

Dual& Dual::operator/=(const Dual& rhs) {
  const std::size_t n = unify(rhs);
  const double q = value_ / rhs.value_;
  for (std::size_t i = 0; i < n; ++i) grad_[i] = (grad_[i] - q * rhs.d(i)) / rhs.value_;
  value_ = q;
  return *this;
}

Dual Dual::chain(double f, double df) const noexcept {
  Dual out = *this;
  out.value_ = f;
  for (std::size_t i = 0; i < dim_; ++i) out.grad_[i] = df * grad_[i];
  return out;
}

namespace scalar {
namespace {

double finite(double v, const char* fn) {
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, std::string(fn) + ": non-finite result");
  return v;
}

Dual finite(const Dual& v, const char* fn) {
  if (!v.is_finite()) throw Error(ErrorCode::NonFinite, std::string(fn) + ": non-finite result");
  return v;
}

void require_positive(double x, const char* fn) {
  if (!(x > 0.0))
    throw Error(ErrorCode::NonFinite, std::string(fn) + ": argument must be positive, got " + std::to_string(x));
}

}  // namespace

double exp(double x) { return finite(std::exp(x), "exp"); }
double log(double x) {
  require_positive(x, "log");
  return finite(std::log(x), "log");
}
double sin(double x) { return finite(std::sin(x), "sin"); }
double cos(double x) { return finite(std::cos(x), "cos"); }
double tan(double x) { return finite(std::tan(x), "tan"); }
double sinh(double x) { return finite(std::sinh(x), "sinh"); }
double cosh(double x) { return finite(std::cosh(x), "cosh"); }
double tanh(double x) { return finite(std::tanh(x), "tanh"); }
double sqrt(double x) {
  require_positive(x, "sqrt");
  return finite(std::sqrt(x), "sqrt");
}
double abs(double x) { return std::abs(x); }
double pow(double base, double exponent) { return finite(std::pow(base, exponent), "pow"); }

Dual exp(const Dual& x) {
  const double e = std::exp(x.value());
  return finite(x.chain(e, e), "exp");
}
Dual log(const Dual& x) {
  require_positive(x.value(), "log");
  return finite(x.chain(std::log(x.value()), 1.0 / x.value()), "log");
}
Dual sin(const Dual& x) { return finite(x.chain(std::sin(x.value()), std::cos(x.value())), "sin"); }
Dual cos(const Dual& x) { return finite(x.chain(std::cos(x.value()), -std::sin(x.value())), "cos"); }
Dual tan(const Dual& x) {
  const double t = std::tan(x.value());
  return finite(x.chain(t, 1.0 + t * t), "tan");
}
Dual sinh(const Dual& x) { return finite(x.chain(std::sinh(x.value()), std::cosh(x.value())), "sinh"); }
Dual cosh(const Dual& x) { return finite(x.chain(std::cosh(x.value()), std::sinh(x.value())), "cosh"); }
Dual tanh(const Dual& x) {
  const double t = std::tanh(x.value());
  return finite(x.chain(t, 1.0 - t * t), "tanh");
}
Dual sqrt(const Dual& x) {
  require_positive(x.value(), "sqrt");
  const double s = std::sqrt(x.value());
  return finite(x.chain(s, 0.5 / s), "sqrt");
}
Dual abs(const Dual& x) {
  const double v = x.value();
  const double sign = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
  return x.chain(std::abs(v), sign);
}

Dual pow(const Dual& base, const Dual& exponent) {
  const double b = base.value();
  const double p = exponent.value();
  const double value = std::pow(b, p);
  // d(b^p) = p b^(p-1) db + b^p log(b) dp; the second term only exists
  // when the exponent actually varies.
  Dual out = base.chain(value, base.dim() == 0 ? 0.0 : p * std::pow(b, p - 1.0));
  bool exponent_varies = false;
  for (double g : exponent.grad()) exponent_varies = exponent_varies || g != 0.0;
  if (exponent_varies) {
    require_positive(b, "pow (variable exponent)");
    out += Dual::with_gradient(0.0, exponent.grad()) * (value * std::log(b));
  }
  return finite(out, "pow");
}

}  // namespace scalar

std::vector<Dual> seed(std::span<const double> point) {
  std::vector<Dual> out;
  out.reserve(point.size());
  for (std::size_t j = 0; j < point.size(); ++j) {
    if (!std::isfinite(point[j]))
      throw Error(ErrorCode::NonFinite, "seed: coordinate " + std::to_string(j) + " is not finite");
    out.push_back(Dual::variable(point[j], point.size(), j));
  }
  return out;
}

}  // namespace eisenhart
