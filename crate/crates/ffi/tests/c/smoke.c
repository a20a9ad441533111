#include <math.h>
#include <stdio.h>
#include <string.h>
#include "lecam.h"

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      const char *e = lecam_last_error();                             \
      fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond, e ? e : "-"); \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  double masses[3] = {0.25, 0.5, 0.25};
  LecamMeasure *b = NULL, *bb = NULL;
  CHECK(lecam_measure_grid(-1.0, 1.0, masses, 3, &b) == LECAM_STATUS_OK);
  CHECK(lecam_convolve(b, b, &bb) == LECAM_STATUS_OK);
  size_t n = 0;
  CHECK(lecam_measure_len(bb, &n) == LECAM_STATUS_OK && n == 5);
  double x[5], w[5];
  CHECK(lecam_measure_points(bb, x, w, 5) == LECAM_STATUS_OK);
  CHECK(x[0] == -2.0 && fabs(w[2] - 0.375) < 1e-15);

  double t[3] = {-1.0, 0.0, 1.0}, re[3], im[3];
  CHECK(lecam_measure_charfn(b, t, 3, re, im) == LECAM_STATUS_OK);
  double expect = 0.5 + 0.5 * cos(1.0);
  CHECK(fabs(re[0] - expect) < 1e-12 && fabs(im[2]) < 1e-12 && re[1] == 1.0);

  int holds = -1;
  LecamMeasure *nu = NULL;
  CHECK(lecam_check_spread(bb, b, 3.0, 1e-3, &holds, &nu) == LECAM_STATUS_OK && holds == 1 && nu);
  double tv = 1.0;
  CHECK(lecam_distance_tv(nu, b, &tv) == LECAM_STATUS_OK && tv < 1e-9);

  double bad[2] = {0.5, -0.5};
  LecamMeasure *m = NULL;
  CHECK(lecam_measure_grid(0.0, 1.0, bad, 2, &m) != LECAM_STATUS_OK && m == NULL);
  CHECK(lecam_last_error() != NULL);

  LecamOutcome *o = NULL;
  CHECK(lecam_scenario_run("{\"scenario\":\"kernel\"}", &o) == LECAM_STATUS_OK);
  CHECK(lecam_outcome_passed(o) == 1);
  char *report = NULL;
  CHECK(lecam_outcome_report_json(o, &report) == LECAM_STATUS_OK && strstr(report, "kernel_tv"));
  lecam_string_free(report);
  lecam_outcome_free(o);
  CHECK(lecam_scenario_run("{\"scenario\":\"kernel\",\"bogus\":1}", &o) == LECAM_STATUS_CONFIG);

  lecam_measure_free(nu);
  lecam_measure_free(bb);
  lecam_measure_free(b);
  printf("ok %s\n", lecam_version());
  return 0;
}
