#include <math.h>
#include <stdio.h>
#include <string.h>

#include "ampenc.h"

#define CHECK(cond)                                              \
    do {                                                         \
        if (!(cond)) {                                           \
            fprintf(stderr, "check failed line %d: %s\n", __LINE__, #cond); \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(void) {
    AmpencConfig *cfg = ampenc_config_new(AMPENC_SOLVER_FIXED_POINT);
    CHECK(cfg != NULL);
    CHECK(ampenc_config_set_steps(cfg, 2) == AMPENC_STATUS_OK);

    AmpencReport *report = NULL;
    CHECK(ampenc_solve(cfg, &report) == AMPENC_STATUS_OK);
    CHECK(ampenc_report_len(report) == 3);
    double re[2], im[2];
    CHECK(ampenc_report_iterate(report, 2, re, im, 2) == AMPENC_STATUS_OK);
    CHECK(fabs(re[0] - 0.71875) < 1e-12 && fabs(re[1] - 0.96875) < 1e-12);

    AmpencStepInfo info;
    CHECK(ampenc_report_step(report, 1, &info) == AMPENC_STATUS_OK);
    CHECK(info.gate_count == 154);

    char *json = NULL;
    CHECK(ampenc_report_to_json(report, &json) == AMPENC_STATUS_OK);
    CHECK(strstr(json, "\"schema\": \"ampenc-run-report\"") != NULL);
    ampenc_string_free(json);
    ampenc_report_free(report);

    CHECK(ampenc_config_set_problem(cfg, "missing-problem") == AMPENC_STATUS_OK);
    CHECK(ampenc_solve(cfg, &report) == AMPENC_STATUS_CONFIG);
    CHECK(strstr(ampenc_last_error_message(), "missing-problem") != NULL);
    ampenc_config_free(cfg);

    printf("ampenc %s ok\n", ampenc_version());
    return 0;
}
