#pragma once

// Ready-made systems with their known symmetry generators and reference
// solutions.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eisenhart/error.hpp"
#include "eisenhart/geometry.hpp"
#include "eisenhart/scalar.hpp"
#include "eisenhart/symmetry.hpp"

namespace eisenhart {

struct CatalogEntry {
  HerglotzSystem system;
  std::vector<SymmetryGenerator> generators;
  /// x1(u) for a given initial state, when known in closed form.
  std::function<double(const ReducedState& initial, double u)> closed_form;
  std::string notes;

  /// Throws ConfigError listing the known generator names.
  const SymmetryGenerator& generator(std::string_view name) const;
};

CatalogEntry free_particle(int n);
CatalogEntry harmonic_oscillator(double omega);

/// L = e^{gamma u} (1/2 |x'|^2 - V).
CatalogEntry damped_time_dependent(double gamma, const std::string& potential = "0.5*x1^2", int n = 1);

/// L = 1/2 |x'|^2 - V - gamma w.
CatalogEntry damped_action_dependent(double gamma, const std::string& potential = "0.5*x1^2", int n = 1);

struct ConformalMap {
  CoordinateMap phi;  // (x, u, w) -> (x, u, e^{-gamma u} w)
  Field omega;        // e^{-gamma u}
};

ConformalMap damped_conformal_map(double gamma, int n = 1);

/// (t, q, S) -> (t, q, e^{-gamma t} S).
TransformSpec damped_transform(double gamma, int n = 1);

/// Underdamped solution of x'' + gamma x' + x = 0. Throws
/// OverdampedUnsupported unless |gamma| < 2.
template <Scalar T>
T closed_form_damped(double x0, double v0, double gamma, const T& u) {
  if (!(std::abs(gamma) < 2.0))
    throw Error(ErrorCode::OverdampedUnsupported, "closed form needs |gamma| < 2 (underdamped)");
  const double wd = std::sqrt(1.0 - gamma * gamma / 4.0);
  using scalar::cos;
  using scalar::exp;
  using scalar::sin;
  const T envelope = exp(-0.5 * gamma * u);
  return envelope * (x0 * cos(wd * u) + ((v0 + 0.5 * gamma * x0) / wd) * sin(wd * u));
}

struct GeneratorSpec {
  std::string name;
  std::vector<std::string> dx;
  std::string du;
  std::string dw;
};

struct CustomSystemConfig {
  std::string name = "custom";
  int n = 1;
  std::vector<std::string> h;
  std::vector<std::string> A;
  std::string V = "0";
  Parameters parameters;
  std::vector<GeneratorSpec> generators;
};

CatalogEntry custom_system(const CustomSystemConfig& config);

/// "free", "harmonic", "damped-time", "damped-action", "custom".
const std::vector<std::string>& catalog_names();

struct CatalogListing {
  std::string name;
  std::string description;
  std::vector<std::string> parameters;
  std::vector<std::string> generators;
};

std::vector<CatalogListing> catalog_listing();

/// Builds a named catalog entry (not "custom"). Missing parameters raise
/// ConfigError naming the key. `potential` overrides the damped potential.
CatalogEntry catalog_entry(const std::string& name, const Parameters& parameters, int n,
                           const std::optional<std::string>& potential = std::nullopt);

}  // namespace eisenhart
