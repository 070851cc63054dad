#ifndef EISENHART_H
#define EISENHART_H

/* C interface to the eisenhart library.
 *
 * Every fallible call returns an eh_status; on failure the message is
 * available from eh_last_error() on the same thread. Strings returned
 * through char** are owned by the caller and freed with eh_string_free. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define EH_API __declspec(dllexport)
#else
#define EH_API __attribute__((visibility("default")))
#endif

typedef enum eh_status {
  EH_OK = 0,
  EH_ERR_NON_FINITE,
  EH_ERR_SYNTAX,
  EH_ERR_UNKNOWN_IDENTIFIER,
  EH_ERR_UNBOUND_VARIABLE,
  EH_ERR_FIELD_EVAL,
  EH_ERR_ASYMMETRIC_METRIC,
  EH_ERR_SINGULAR_METRIC,
  EH_ERR_SINGULAR_JACOBIAN,
  EH_ERR_NON_POSITIVE_UDOT,
  EH_ERR_ZERO_UDOT,
  EH_ERR_STEP_LIMIT,
  EH_ERR_BLOW_UP,
  EH_ERR_MONOTONICITY,
  EH_ERR_OVERDAMPED,
  EH_ERR_DIMENSION,
  EH_ERR_CONFIG,
  EH_ERR_IO,
  EH_ERR_INVALID_ARGUMENT,
  EH_ERR_INTERNAL
} eh_status;

typedef struct eh_system eh_system;
typedef struct eh_trajectory eh_trajectory;
typedef struct eh_scenario eh_scenario;

typedef struct eh_integrator_config {
  double rtol;
  double atol;
  size_t max_steps;
  double max_step; /* <= 0 means unbounded */
} eh_integrator_config;

EH_API const char* eh_version(void);
EH_API const char* eh_status_name(eh_status status);
/* 1 for malformed input (exit code 2), 0 otherwise. */
EH_API int eh_status_is_config(eh_status status);
EH_API const char* eh_last_error(void);
/* Byte offset into expression text, or -1. */
EH_API long eh_last_error_offset(void);
EH_API void eh_string_free(char* s);

EH_API eh_integrator_config eh_integrator_default(void);

/* name is one of the catalog names except "custom"; params_json is an
 * object of numbers such as {"gamma": 0.2} (may be NULL). */
EH_API eh_status eh_system_create_catalog(const char* name, const char* params_json, int n, eh_system** out);
/* h holds 1 or n*n expressions, A holds 0 or n. */
EH_API eh_status eh_system_create_custom(int n, const char* const* h, size_t h_count, const char* const* A,
                                         size_t A_count, const char* V, const char* params_json, eh_system** out);
EH_API void eh_system_free(eh_system* system);
EH_API int eh_system_n(const eh_system* system);

/* coords: n+2 values (x1..xn, u, w); g_out: (n+2)^2 values, row-major. */
EH_API eh_status eh_metric_eval(const eh_system* system, const double* coords, double* g_out);
/* velocity_out: n+2 values. */
EH_API eh_status eh_lift_state(const eh_system* system, const double* x, const double* xp, double u, double w,
                               double udot0, double* velocity_out);
EH_API eh_status eh_null_residual(const eh_system* system, const double* coords, const double* velocity,
                                  double* out);

/* Rows of a trajectory: u, sigma, x1..xn, xp1..xpn, w, null_residual. */
EH_API eh_status eh_integrate_herglotz(const eh_system* system, const double* x, const double* xp, double u0,
                                       double w0, double u1, const eh_integrator_config* config,
                                       eh_trajectory** out);
/* Null geodesic from the lift, reduced at its accepted steps. */
EH_API eh_status eh_integrate_lifted(const eh_system* system, const double* x, const double* xp, double u0,
                                     double w0, double udot0, double u1, const eh_integrator_config* config,
                                     eh_trajectory** out);
EH_API void eh_trajectory_free(eh_trajectory* traj);
EH_API size_t eh_trajectory_size(const eh_trajectory* traj);
EH_API size_t eh_trajectory_columns(const eh_trajectory* traj);
EH_API eh_status eh_trajectory_row(const eh_trajectory* traj, size_t index, double* row_out);

EH_API eh_status eh_scenario_load(const char* path, eh_scenario** out);
EH_API void eh_scenario_free(eh_scenario* scenario);
/* out_dir may be NULL to use the scenario's out_dir (relative to the file).
 * report_out receives the JSON lines report; all_passed may be NULL. */
EH_API eh_status eh_scenario_run(const eh_scenario* scenario, const char* out_dir, char** report_out,
                                 int* all_passed);
EH_API eh_status eh_scenario_check(const eh_scenario* scenario, const char* const* checks, size_t count,
                                   char** report_out, int* all_passed);

/* Catalog listing as text or, with json != 0, a JSON array. */
EH_API eh_status eh_catalog_list(int json, char** out);

#ifdef __cplusplus
}
#endif

#endif
