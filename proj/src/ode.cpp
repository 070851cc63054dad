#include "eisenhart/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eisenhart/error.hpp"

namespace eisenhart::ode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

// PI controller constants (Hairer & Wanner, DOPRI5 defaults).
constexpr double kBeta = 0.04;
constexpr double kAlpha = 0.2 - kBeta * 0.75;
constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;

double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                  const Config& cfg) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double r = err(i) / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(err.size(), 1)));
}

double initial_step(const Rhs& f, double t0, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0,
                    double span, const Config& cfg) {
  auto scaled_norm = [&](const Eigen::VectorXd& v) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double sc = cfg.atol + cfg.rtol * std::abs(y0(i));
      acc += (v(i) / sc) * (v(i) / sc);
    }
    return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(v.size(), 1)));
  };
  const double d0 = scaled_norm(y0);
  const double d1 = scaled_norm(f0);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min({h0, span, cfg.max_step});
  Eigen::VectorXd f1(y0.size());
  f(t0 + h0, y0 + h0 * f0, f1);
  const double d2 = scaled_norm(f1 - f0) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
  return std::min({100.0 * h0, h1, span, cfg.max_step});
}

bool finite_and_bounded(const Eigen::VectorXd& y, double bound) {
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (!std::isfinite(y(i)) || std::abs(y(i)) > bound) return false;
  return true;
}

}  // namespace

std::size_t DenseSolution::locate(double t) const {
  const auto n = samples_.size();
  if (n < 2 || t <= samples_.front().t) return 0;
  if (t >= samples_.back().t) return n - 2;
  const auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                                   [](double v, const Sample& s) { return v < s.t; });
  return static_cast<std::size_t>(std::distance(samples_.begin(), it)) - 1;
}

double DenseSolution::component(double t, Eigen::Index i) const {
  if (samples_.size() == 1) return samples_.front().y(i);
  const std::size_t k = locate(t);
  const Sample& a = samples_[k];
  const Sample& b = samples_[k + 1];
  const double h = b.t - a.t;
  const double s = (t - a.t) / h;
  if (s == 0.0) return a.y(i);
  if (s == 1.0) return b.y(i);
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * a.y(i) + h10 * h * a.dy(i) + h01 * b.y(i) + h11 * h * b.dy(i);
}

double DenseSolution::component_derivative(double t, Eigen::Index i) const {
  if (samples_.size() == 1) return samples_.front().dy(i);
  const std::size_t k = locate(t);
  const Sample& a = samples_[k];
  const Sample& b = samples_[k + 1];
  const double h = b.t - a.t;
  const double s = (t - a.t) / h;
  if (s == 0.0) return a.dy(i);
  if (s == 1.0) return b.dy(i);
  const double s2 = s * s;
  const double d00 = (6 * s2 - 6 * s) / h;
  const double d10 = 3 * s2 - 4 * s + 1;
  const double d01 = (-6 * s2 + 6 * s) / h;
  const double d11 = 3 * s2 - 2 * s;
  return d00 * a.y(i) + d10 * a.dy(i) + d01 * b.y(i) + d11 * b.dy(i);
}

Eigen::VectorXd DenseSolution::state(double t) const {
  const Eigen::Index m = samples_.front().y.size();
  Eigen::VectorXd out(m);
  for (Eigen::Index i = 0; i < m; ++i) out(i) = component(t, i);
  return out;
}

Eigen::VectorXd DenseSolution::derivative(double t) const {
  const Eigen::Index m = samples_.front().y.size();
  Eigen::VectorXd out(m);
  for (Eigen::Index i = 0; i < m; ++i) out(i) = component_derivative(t, i);
  return out;
}

DenseSolution integrate(const Rhs& f, double t0, const Eigen::VectorXd& y0, double t1, const Config& cfg,
                        const StopCondition& stop) {
  if (!(cfg.rtol > 0.0) || !(cfg.atol > 0.0))
    throw Error(ErrorCode::ConfigError, "integrator tolerances must be positive");
  if (!(t1 > t0)) throw Error(ErrorCode::ConfigError, "integration span must be increasing");
  if (!finite_and_bounded(y0, cfg.blow_up)) throw Error(ErrorCode::NonFinite, "initial state is not finite");

  const Eigen::Index m = y0.size();
  DenseSolution sol;
  Eigen::VectorXd k1(m), k2(m), k3(m), k4(m), k5(m), k6(m), k7(m), ytmp(m), ynew(m), err(m);
  f(t0, y0, k1);
  sol.push(Sample{t0, y0, k1, 0.0});
  if (stop && stop(sol.samples().back())) return sol;

  const double span = std::isfinite(t1) ? t1 - t0 : 1.0;
  double h = initial_step(f, t0, y0, k1, span, cfg);
  double t = t0;
  Eigen::VectorXd y = y0;
  double err_old = 1e-4;
  bool last_rejected = false;
  std::size_t rejected = 0;
  long steps = 0;

  while (t < t1) {
    if (++steps > cfg.max_steps) {
      std::ostringstream os;
      os << "step limit " << cfg.max_steps << " exceeded at t = " << t;
      throw Error(ErrorCode::StepLimitExceeded, os.str());
    }
    h = std::min(h, cfg.max_step);
    bool final_step = false;
    // Stretch the last step slightly rather than leave a sliver behind.
    if (t + 1.01 * h >= t1) {
      h = t1 - t;
      final_step = true;
    }
    if (h <= 1e-14 * std::max(1.0, std::abs(t))) {
      std::ostringstream os;
      os << "step size underflow (h = " << h << ") at t = " << t;
      throw Error(ErrorCode::StepLimitExceeded, os.str());
    }

    ytmp = y + h * a21 * k1;
    f(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    const double tnew = final_step ? t1 : t + h;
    f(tnew, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(tnew, ynew, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double en = error_norm(err, y, ynew, cfg);
    if (!std::isfinite(en)) {
      ++rejected;
      h *= kMinFactor;
      last_rejected = true;
      continue;
    }
    if (en <= 1.0) {
      if (!finite_and_bounded(ynew, cfg.blow_up)) {
        std::ostringstream os;
        os << "state norm exceeded " << cfg.blow_up << " at t = " << tnew;
        throw Error(ErrorCode::BlowUp, os.str());
      }
      double fac = en == 0.0 ? kMaxFactor
                             : kSafety * std::pow(en, -kAlpha) * std::pow(err_old, kBeta);
      fac = std::clamp(fac, kMinFactor, kMaxFactor);
      if (last_rejected) fac = std::min(fac, 1.0);
      err_old = std::max(en, 1e-4);
      t = tnew;
      y = ynew;
      k1 = k7;
      sol.push(Sample{t, y, k1, h});
      last_rejected = false;
      if (stop && stop(sol.samples().back())) break;
      h *= fac;
    } else {
      ++rejected;
      h *= std::max(kMinFactor, kSafety * std::pow(en, -kAlpha));
      last_rejected = true;
    }
  }
  sol.set_rejected(rejected);
  return sol;
}

}  // namespace eisenhart::ode
