#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "eisenhart/scenario.hpp"
#include "eisenhart/symmetry.hpp"
#include "eisenhart/systems.hpp"

namespace testing_support {

using namespace eisenhart;

inline CatalogEntry curved_system() {
  CustomSystemConfig c;
  c.name = "curved";
  c.n = 1;
  c.h = {"1+x1^2"};
  c.V = "0.5*x1^2";
  return custom_system(c);
}

inline CatalogEntry general_system() {
  CustomSystemConfig c;
  c.name = "general";
  c.n = 2;
  c.h = {"exp(0.05*w)", "0.1", "0.1", "1+0.1*x1^2"};
  c.A = {"-0.3*x2", "0.3*x1+0.1*w"};
  c.V = "0.5*(x1^2+x2^2)+0.1*sin(u)*x1+0.05*w";
  return custom_system(c);
}

inline CatalogEntry w_dependent_system() {
  CustomSystemConfig c;
  c.name = "w-dependent";
  c.n = 1;
  c.h = {"1+0.1*w"};
  c.V = "0";
  return custom_system(c);
}

/// Catalog entries plus custom systems covering curved, gauge and
/// w-dependent data.
inline std::vector<CatalogEntry> all_systems() {
  return {free_particle(2),
          harmonic_oscillator(1.0),
          damped_time_dependent(0.2),
          damped_action_dependent(0.2),
          curved_system(),
          general_system(),
          w_dependent_system()};
}

inline bool w_independent(const CatalogEntry& e) {
  return e.system.name == "free" || e.system.name == "harmonic" || e.system.name == "damped-time" ||
         e.system.name == "curved";
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out(i++) = d;
  return out;
}

inline ReducedState state(std::initializer_list<double> x, std::initializer_list<double> xp, double u, double w) {
  return ReducedState{vec(x), vec(xp), u, w};
}

/// Deterministic reduced states in a box from the Halton sequence.
inline std::vector<ReducedState> halton_states(int n, int count, double xr = 1.0, double vr = 1.0, double ulo = 0.0,
                                               double uhi = 2.0, double wlo = -1.0, double whi = 1.0) {
  std::vector<ReducedState> out;
  for (const auto& p : halton_cloud(2 * n + 2, count)) {
    ReducedState s;
    s.x.resize(n);
    s.xp.resize(n);
    for (int i = 0; i < n; ++i) {
      s.x(i) = xr * (2 * p[static_cast<std::size_t>(i)] - 1);
      s.xp(i) = vr * (2 * p[static_cast<std::size_t>(n + i)] - 1);
    }
    s.u = ulo + (uhi - ulo) * p[static_cast<std::size_t>(2 * n)];
    s.w = wlo + (whi - wlo) * p[static_cast<std::size_t>(2 * n + 1)];
    out.push_back(s);
  }
  return out;
}

/// Fourth order central difference of f along coordinate k.
inline Eigen::MatrixXd fd4(const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& p,
                           int k, double h) {
  auto at = [&](double s) {
    Eigen::VectorXd q = p;
    q(k) += s;
    return f(q);
  };
  return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
}

/// max over samples of |null residual|.
inline double max_null(const Trajectory& t) {
  double r = 0.0;
  for (const auto& s : t.samples) r = std::max(r, std::abs(s.null_residual));
  return r;
}

inline std::vector<double> u_grid(const ReducedTrajectory& t) {
  std::vector<double> g;
  for (const auto& s : t.samples) g.push_back(s.u);
  return g;
}

inline double x_gap(const ReducedTrajectory& a, const ReducedTrajectory& b) {
  double gap = 0.0;
  for (std::size_t k = 0; k < a.samples.size(); ++k)
    gap = std::max(gap, (a.samples[k].x - b.samples[k].x).cwiseAbs().maxCoeff());
  return gap;
}

}  // namespace testing_support
