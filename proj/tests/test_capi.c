/* Exercises the C header from a C translation unit. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "eisenhart/eisenhart.h"

static int failures = 0;

#define EXPECT(cond)                                               \
  do {                                                             \
    if (!(cond)) {                                                 \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                  \
    }                                                              \
  } while (0)

static void test_errors(void) {
  eh_system* s = NULL;
  EXPECT(eh_system_create_catalog("damped-action", NULL, 1, &s) == EH_ERR_CONFIG);
  EXPECT(s == NULL);
  EXPECT(strstr(eh_last_error(), "gamma") != NULL);
  EXPECT(eh_status_is_config(EH_ERR_CONFIG));
  EXPECT(!eh_status_is_config(EH_ERR_BLOW_UP));
  EXPECT(strcmp(eh_status_name(EH_ERR_SYNTAX), "SyntaxError") == 0);
  EXPECT(eh_system_create_catalog(NULL, NULL, 1, &s) == EH_ERR_INVALID_ARGUMENT);

  const char* h[] = {"1+*x1"};
  EXPECT(eh_system_create_custom(1, h, 1, NULL, 0, "0", NULL, &s) == EH_ERR_SYNTAX);
  EXPECT(eh_last_error_offset() == 2);
}

static void test_metric_and_lift(void) {
  eh_system* s = NULL;
  EXPECT(eh_system_create_catalog("damped-action", "{\"gamma\": 0.2}", 1, &s) == EH_OK);
  EXPECT(eh_system_n(s) == 1);

  const double coords[3] = {0.0, 0.0, 3.0};
  double g[9];
  EXPECT(eh_metric_eval(s, coords, g) == EH_OK);
  EXPECT(fabs(g[4] + 1.2) < 1e-15);
  EXPECT(g[5] == -1.0 && g[7] == -1.0 && g[8] == 0.0);

  const double x[1] = {1.0}, xp[1] = {0.0};
  double v[3];
  EXPECT(eh_lift_state(s, x, xp, 0.0, 0.0, 1.0, v) == EH_OK);
  EXPECT(v[0] == 0.0 && v[1] == 1.0 && v[2] == -0.5);
  const double at[3] = {1.0, 0.0, 0.0};
  double L = 1.0;
  EXPECT(eh_null_residual(s, at, v, &L) == EH_OK);
  EXPECT(fabs(L) < 1e-14);
  EXPECT(eh_lift_state(s, x, xp, 0.0, 0.0, 0.0, v) == EH_ERR_NON_POSITIVE_UDOT);
  eh_system_free(s);
}

static void test_trajectories(void) {
  eh_system* s = NULL;
  EXPECT(eh_system_create_catalog("damped-action", "{\"gamma\": 0.2}", 1, &s) == EH_OK);
  eh_integrator_config cfg = eh_integrator_default();
  EXPECT(cfg.rtol == 1e-10);
  const double x[1] = {1.0}, xp[1] = {0.0};
  eh_trajectory* a = NULL;
  eh_trajectory* b = NULL;
  EXPECT(eh_integrate_herglotz(s, x, xp, 0.0, 0.0, 10.0, &cfg, &a) == EH_OK);
  EXPECT(eh_integrate_lifted(s, x, xp, 0.0, 0.0, 1.0, 10.0, &cfg, &b) == EH_OK);
  EXPECT(eh_trajectory_columns(a) == 6);
  EXPECT(eh_trajectory_size(a) > 10);

  /* Compare the last Herglotz row with the closed form. */
  double row[6];
  EXPECT(eh_trajectory_row(a, eh_trajectory_size(a) - 1, row) == EH_OK);
  const double wd = sqrt(1.0 - 0.01);
  const double exact = exp(-0.1 * row[0]) * (cos(wd * row[0]) + (0.1 / wd) * sin(wd * row[0]));
  EXPECT(row[0] == 10.0);
  EXPECT(fabs(row[2] - exact) < 1e-8);
  EXPECT(eh_trajectory_row(a, eh_trajectory_size(a), row) == EH_ERR_INVALID_ARGUMENT);

  EXPECT(eh_trajectory_row(b, 0, row) == EH_OK);
  EXPECT(row[1] == 0.0 && row[2] == 1.0);
  eh_trajectory_free(a);
  eh_trajectory_free(b);
  eh_system_free(s);
}

static void test_catalog_list(void) {
  char* text = NULL;
  EXPECT(eh_catalog_list(0, &text) == EH_OK);
  EXPECT(strstr(text, "damped-action") != NULL);
  eh_string_free(text);
  EXPECT(eh_catalog_list(1, &text) == EH_OK);
  EXPECT(text[0] == '[');
  eh_string_free(text);
}

int main(void) {
  EXPECT(strlen(eh_version()) > 0);
  test_errors();
  test_metric_and_lift();
  test_trajectories();
  test_catalog_list();
  eh_system_free(NULL);
  eh_trajectory_free(NULL);
  if (failures) fprintf(stderr, "%d failures\n", failures);
  else printf("all C API checks passed\n");
  return failures ? 1 : 0;
}
