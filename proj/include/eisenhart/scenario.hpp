#pragma once

// JSON scenarios: validation, the run pipeline (lift, geodesic, reduction
// and direct Herglotz integration) and named checks.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eisenhart/dynamics.hpp"
#include "eisenhart/systems.hpp"

namespace eisenhart {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Coordinate box of the deterministic check cloud.
struct Bounds {
  Range x{-1.0, 1.0};
  Range xp{-1.0, 1.0};
  Range u{0.0, 2.0};
  Range w{-1.0, 1.0};
};

struct Scenario {
  std::string system;
  Parameters params;
  std::optional<std::string> potential;
  std::optional<CustomSystemConfig> custom;
  ReducedState initial;
  double udot0 = 1.0;
  Interval span;
  IntegratorConfig integrator;
  std::vector<std::string> checks;
  std::string out_dir = "out";
  Bounds bounds;
  std::filesystem::path base_dir;  // directory of the scenario file
};

/// Parses and validates a scenario document. `label` prefixes messages.
/// Throws ConfigError (or an expression error) with the key path.
Scenario parse_scenario(std::string_view json_text, const std::string& label = "scenario");

Scenario load_scenario(const std::filesystem::path& path);

CatalogEntry build_entry(const Scenario& scenario);

struct ReportRow {
  std::string check;
  std::string status;  // "pass", "fail" or "info"
  double residual = 0.0;
  double tol = 0.0;
  double seconds = 0.0;
  std::string certifies;
  std::map<std::string, double> extra;

  std::string to_json() const;
};

struct Report {
  std::vector<ReportRow> rows;

  bool all_passed() const;
  std::string to_jsonl() const;
};

/// Names accepted in `checks`; "<gen>" is a generator name of the system.
const std::vector<std::string>& check_names();

/// Fixed Halton cloud (bases 2, 3, 5, ...; indices 1..count) in [0,1)^dim.
std::vector<std::vector<double>> halton_cloud(int dim, int count = 100);

/// Runs the integration pipeline, writes geodesic.csv, herglotz.csv and
/// report.jsonl under `out_dir` (created if needed) and returns the report.
Report run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir);

/// Evaluates the named checks (the scenario's own list when empty).
Report check_scenario(const Scenario& scenario, const std::vector<std::string>& checks = {});

/// Trajectory CSV text with the documented columns.
std::string trajectory_csv(const HerglotzSystem& system, const ReducedTrajectory& traj,
                           const std::vector<const SymmetryGenerator*>& charges,
                           const std::vector<const SymmetryGenerator*>& nonlocal_charges);

}  // namespace eisenhart
