#pragma once

// Adaptive Dormand-Prince 5(4) integrator with proportional-integral step
// control and cubic Hermite dense output.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace eisenhart::ode {

struct Config {
  double rtol = 1e-10;
  double atol = 1e-12;
  long max_steps = 1'000'000;
  double max_step = std::numeric_limits<double>::infinity();
  double blow_up = 1e12;
};

/// One accepted node: time, state and derivative.
struct Sample {
  double t = 0.0;
  Eigen::VectorXd y;
  Eigen::VectorXd dy;
  double step = 0.0;  // size of the step that produced this node (0 for the first)
};

using Rhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy)>;
/// Returns true to stop after the given accepted sample.
using StopCondition = std::function<bool(const Sample&)>;

/// Piecewise cubic Hermite interpolant through accepted nodes.
class DenseSolution {
 public:
  const std::vector<Sample>& samples() const noexcept { return samples_; }
  std::size_t rejected_steps() const noexcept { return rejected_; }
  double t_begin() const { return samples_.front().t; }
  double t_end() const { return samples_.back().t; }

  /// Index of the step [t_k, t_{k+1}] containing t, clamped to the ends.
  std::size_t locate(double t) const;

  /// State and its derivative at t; exact at nodes.
  Eigen::VectorXd state(double t) const;
  Eigen::VectorXd derivative(double t) const;
  double component(double t, Eigen::Index i) const;
  double component_derivative(double t, Eigen::Index i) const;

  void push(Sample s) { samples_.push_back(std::move(s)); }
  void set_rejected(std::size_t r) { rejected_ = r; }

 private:
  std::vector<Sample> samples_;
  std::size_t rejected_ = 0;
};

/// Integrates dy/dt = f(t, y) from t0 to t1 (t1 > t0, possibly infinite
/// when `stop` is given). Throws StepLimitExceeded or BlowUp.
DenseSolution integrate(const Rhs& f, double t0, const Eigen::VectorXd& y0, double t1, const Config& config,
                        const StopCondition& stop = {});

}  // namespace eisenhart::ode
