#include "eisenhart/eisenhart.h"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <exception>
#include <limits>
#include <new>
#include <string>

#include "eisenhart/scenario.hpp"

struct eh_system {
  eisenhart::HerglotzSystem system;
  eisenhart::BrinkmannMetric metric;
};

struct eh_trajectory {
  int n = 0;
  std::vector<std::vector<double>> rows;
};

struct eh_scenario {
  eisenhart::Scenario scenario;
};

namespace {

using namespace eisenhart;

thread_local std::string last_error;
thread_local long last_offset = -1;

eh_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite: return EH_ERR_NON_FINITE;
    case ErrorCode::SyntaxError: return EH_ERR_SYNTAX;
    case ErrorCode::UnknownIdentifier: return EH_ERR_UNKNOWN_IDENTIFIER;
    case ErrorCode::UnboundVariable: return EH_ERR_UNBOUND_VARIABLE;
    case ErrorCode::FieldEvalError: return EH_ERR_FIELD_EVAL;
    case ErrorCode::AsymmetricMetric: return EH_ERR_ASYMMETRIC_METRIC;
    case ErrorCode::SingularMetric: return EH_ERR_SINGULAR_METRIC;
    case ErrorCode::SingularJacobian: return EH_ERR_SINGULAR_JACOBIAN;
    case ErrorCode::NonPositiveUdot: return EH_ERR_NON_POSITIVE_UDOT;
    case ErrorCode::ZeroUdot: return EH_ERR_ZERO_UDOT;
    case ErrorCode::StepLimitExceeded: return EH_ERR_STEP_LIMIT;
    case ErrorCode::BlowUp: return EH_ERR_BLOW_UP;
    case ErrorCode::MonotonicityViolation: return EH_ERR_MONOTONICITY;
    case ErrorCode::OverdampedUnsupported: return EH_ERR_OVERDAMPED;
    case ErrorCode::DimensionMismatch: return EH_ERR_DIMENSION;
    case ErrorCode::ConfigError: return EH_ERR_CONFIG;
    case ErrorCode::IoError: return EH_ERR_IO;
  }
  return EH_ERR_INTERNAL;
}

eh_status fail(eh_status status, std::string message, long offset = -1) {
  last_error = std::move(message);
  last_offset = offset;
  return status;
}

template <class F>
eh_status guarded(F&& f) {
  try {
    last_error.clear();
    last_offset = -1;
    f();
    return EH_OK;
  } catch (const Error& e) {
    return fail(status_of(e.code()), e.what(), e.offset() == Error::npos ? -1 : static_cast<long>(e.offset()));
  } catch (const std::bad_alloc&) {
    return fail(EH_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(EH_ERR_INTERNAL, e.what());
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

Parameters parse_params(const char* params_json) {
  Parameters p;
  if (!params_json || !*params_json) return p;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(params_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("params: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "params: expected an object");
  for (const auto& item : j.items()) {
    if (!item.value().is_number()) throw Error(ErrorCode::ConfigError, "params." + item.key() + ": expected a number");
    p[item.key()] = item.value().get<double>();
  }
  return p;
}

IntegratorConfig to_config(const eh_integrator_config* c) {
  IntegratorConfig cfg;
  if (!c) return cfg;
  cfg.rtol = c->rtol;
  cfg.atol = c->atol;
  cfg.max_steps = static_cast<long>(c->max_steps);
  cfg.max_step = c->max_step > 0.0 ? c->max_step : std::numeric_limits<double>::infinity();
  return cfg;
}

ReducedState reduced(int n, const double* x, const double* xp, double u, double w) {
  ReducedState rs;
  rs.x = Eigen::Map<const Eigen::VectorXd>(x, n);
  rs.xp = Eigen::Map<const Eigen::VectorXd>(xp, n);
  rs.u = u;
  rs.w = w;
  return rs;
}

eh_trajectory* to_handle(const ReducedTrajectory& traj) {
  auto* out = new eh_trajectory;
  out->n = traj.n;
  for (const auto& s : traj.samples) {
    std::vector<double> row{s.u, s.sigma};
    for (int i = 0; i < traj.n; ++i) row.push_back(s.x(i));
    for (int i = 0; i < traj.n; ++i) row.push_back(s.xp(i));
    row.push_back(s.w);
    row.push_back(s.null_residual);
    out->rows.push_back(std::move(row));
  }
  return out;
}

#define EH_REQUIRE(cond, what) \
  if (!(cond)) return fail(EH_ERR_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* eh_version(void) { return "1.0.0"; }

const char* eh_status_name(eh_status status) {
  switch (status) {
    case EH_OK: return "ok";
    case EH_ERR_NON_FINITE: return "NonFinite";
    case EH_ERR_SYNTAX: return "SyntaxError";
    case EH_ERR_UNKNOWN_IDENTIFIER: return "UnknownIdentifier";
    case EH_ERR_UNBOUND_VARIABLE: return "UnboundVariable";
    case EH_ERR_FIELD_EVAL: return "FieldEvalError";
    case EH_ERR_ASYMMETRIC_METRIC: return "AsymmetricMetric";
    case EH_ERR_SINGULAR_METRIC: return "SingularMetric";
    case EH_ERR_SINGULAR_JACOBIAN: return "SingularJacobian";
    case EH_ERR_NON_POSITIVE_UDOT: return "NonPositiveUdot";
    case EH_ERR_ZERO_UDOT: return "ZeroUdot";
    case EH_ERR_STEP_LIMIT: return "StepLimitExceeded";
    case EH_ERR_BLOW_UP: return "BlowUp";
    case EH_ERR_MONOTONICITY: return "MonotonicityViolation";
    case EH_ERR_OVERDAMPED: return "OverdampedUnsupported";
    case EH_ERR_DIMENSION: return "DimensionMismatch";
    case EH_ERR_CONFIG: return "ConfigError";
    case EH_ERR_IO: return "IoError";
    case EH_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case EH_ERR_INTERNAL: return "Internal";
  }
  return "unknown";
}

int eh_status_is_config(eh_status status) {
  switch (status) {
    case EH_ERR_SYNTAX:
    case EH_ERR_UNKNOWN_IDENTIFIER:
    case EH_ERR_UNBOUND_VARIABLE:
    case EH_ERR_DIMENSION:
    case EH_ERR_CONFIG:
    case EH_ERR_IO:
    case EH_ERR_OVERDAMPED:
    case EH_ERR_INVALID_ARGUMENT:
      return 1;
    default:
      return 0;
  }
}

const char* eh_last_error(void) { return last_error.c_str(); }

long eh_last_error_offset(void) { return last_offset; }

void eh_string_free(char* s) { std::free(s); }

eh_integrator_config eh_integrator_default(void) {
  const IntegratorConfig d;
  return eh_integrator_config{d.rtol, d.atol, static_cast<size_t>(d.max_steps), 0.0};
}

eh_status eh_system_create_catalog(const char* name, const char* params_json, int n, eh_system** out) {
  EH_REQUIRE(name && out, "name and out must be non-null");
  *out = nullptr;
  return guarded([&] {
    CatalogEntry e = catalog_entry(name, parse_params(params_json), n);
    BrinkmannMetric metric(e.system);
    *out = new eh_system{std::move(e.system), std::move(metric)};
  });
}

eh_status eh_system_create_custom(int n, const char* const* h, size_t h_count, const char* const* A,
                                  size_t A_count, const char* V, const char* params_json, eh_system** out) {
  EH_REQUIRE(out && (h || h_count == 0) && (A || A_count == 0), "null array with non-zero count");
  *out = nullptr;
  return guarded([&] {
    CustomSystemConfig cfg;
    cfg.n = n;
    for (size_t i = 0; i < h_count; ++i) cfg.h.emplace_back(h[i] ? h[i] : "");
    for (size_t i = 0; i < A_count; ++i) cfg.A.emplace_back(A[i] ? A[i] : "");
    cfg.V = V ? V : "0";
    cfg.parameters = parse_params(params_json);
    CatalogEntry e = custom_system(cfg);
    BrinkmannMetric metric(e.system);
    *out = new eh_system{std::move(e.system), std::move(metric)};
  });
}

void eh_system_free(eh_system* system) { delete system; }

int eh_system_n(const eh_system* system) { return system ? system->system.n : 0; }

eh_status eh_metric_eval(const eh_system* system, const double* coords, double* g_out) {
  EH_REQUIRE(system && coords && g_out, "null argument");
  return guarded([&] {
    const int d = system->metric.dim();
    const Point p = Point::from_coords(Eigen::Map<const Eigen::VectorXd>(coords, d));
    const Eigen::MatrixXd g = metric_eval(system->metric, p);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) g_out[i * d + j] = g(i, j);
  });
}

eh_status eh_lift_state(const eh_system* system, const double* x, const double* xp, double u, double w,
                        double udot0, double* velocity_out) {
  EH_REQUIRE(system && x && xp && velocity_out, "null argument");
  return guarded([&] {
    const GeodesicState gs = lift_state(system->system, reduced(system->system.n, x, xp, u, w), udot0);
    for (Eigen::Index i = 0; i < gs.velocity.size(); ++i) velocity_out[i] = gs.velocity(i);
  });
}

eh_status eh_null_residual(const eh_system* system, const double* coords, const double* velocity, double* out) {
  EH_REQUIRE(system && coords && velocity && out, "null argument");
  return guarded([&] {
    const int d = system->metric.dim();
    GeodesicState gs;
    gs.point = Point::from_coords(Eigen::Map<const Eigen::VectorXd>(coords, d));
    gs.velocity = Eigen::Map<const Eigen::VectorXd>(velocity, d);
    *out = null_residual(system->metric, gs);
  });
}

eh_status eh_integrate_herglotz(const eh_system* system, const double* x, const double* xp, double u0, double w0,
                                double u1, const eh_integrator_config* config, eh_trajectory** out) {
  EH_REQUIRE(system && x && xp && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    const ReducedTrajectory t = integrate_herglotz(system->system, reduced(system->system.n, x, xp, u0, w0),
                                                   Interval{u0, u1}, to_config(config));
    *out = to_handle(t);
  });
}

eh_status eh_integrate_lifted(const eh_system* system, const double* x, const double* xp, double u0, double w0,
                              double udot0, double u1, const eh_integrator_config* config, eh_trajectory** out) {
  EH_REQUIRE(system && x && xp && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    const GeodesicState gs = lift_state(system->system, reduced(system->system.n, x, xp, u0, w0), udot0);
    const Trajectory t = integrate_geodesic_until_u(system->metric, gs, u1, to_config(config));
    *out = to_handle(reduce_trajectory(t));
  });
}

void eh_trajectory_free(eh_trajectory* traj) { delete traj; }

size_t eh_trajectory_size(const eh_trajectory* traj) { return traj ? traj->rows.size() : 0; }

size_t eh_trajectory_columns(const eh_trajectory* traj) {
  return traj ? static_cast<size_t>(2 * traj->n + 4) : 0;
}

eh_status eh_trajectory_row(const eh_trajectory* traj, size_t index, double* row_out) {
  EH_REQUIRE(traj && row_out, "null argument");
  EH_REQUIRE(index < traj->rows.size(), "row index out of range");
  std::memcpy(row_out, traj->rows[index].data(), traj->rows[index].size() * sizeof(double));
  return EH_OK;
}

eh_status eh_scenario_load(const char* path, eh_scenario** out) {
  EH_REQUIRE(path && out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new eh_scenario{load_scenario(path)}; });
}

void eh_scenario_free(eh_scenario* scenario) { delete scenario; }

eh_status eh_scenario_run(const eh_scenario* scenario, const char* out_dir, char** report_out, int* all_passed) {
  EH_REQUIRE(scenario, "null scenario");
  if (report_out) *report_out = nullptr;
  return guarded([&] {
    const Scenario& sc = scenario->scenario;
    std::filesystem::path dir = out_dir ? std::filesystem::path(out_dir) : sc.base_dir / sc.out_dir;
    const Report r = run_scenario(sc, dir);
    if (all_passed) *all_passed = r.all_passed() ? 1 : 0;
    if (report_out) *report_out = duplicate(r.to_jsonl());
  });
}

eh_status eh_scenario_check(const eh_scenario* scenario, const char* const* checks, size_t count, char** report_out,
                            int* all_passed) {
  EH_REQUIRE(scenario && (checks || count == 0), "null argument");
  if (report_out) *report_out = nullptr;
  return guarded([&] {
    std::vector<std::string> names;
    for (size_t i = 0; i < count; ++i) names.emplace_back(checks[i]);
    const Report r = check_scenario(scenario->scenario, names);
    if (all_passed) *all_passed = r.all_passed() ? 1 : 0;
    if (report_out) *report_out = duplicate(r.to_jsonl());
  });
}

eh_status eh_catalog_list(int json, char** out) {
  EH_REQUIRE(out, "null argument");
  *out = nullptr;
  return guarded([&] {
    const auto listing = catalog_listing();
    std::string text;
    if (json) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& e : listing)
        arr.push_back({{"name", e.name},
                       {"description", e.description},
                       {"parameters", e.parameters},
                       {"generators", e.generators}});
      text = arr.dump(2) + "\n";
    } else {
      for (const auto& e : listing) {
        text += e.name + "\n  " + e.description + "\n  parameters:";
        if (e.parameters.empty()) text += " none";
        for (const auto& p : e.parameters) text += " " + p;
        text += "\n  generators:";
        for (const auto& g : e.generators) text += " " + g;
        text += "\n";
      }
      text += "checks:";
      for (const auto& c : check_names()) text += " " + c;
      text += "\n";
    }
    *out = duplicate(text);
  });
}

}  // extern "C"
