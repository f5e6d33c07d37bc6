/* Exercises the C interface from plain C. */
#include <pcbeam/pcbeam.h>

#include <math.h>
#include <stdio.h>
#include <string.h>

static int failures = 0;

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                               \
        }                                                             \
    } while (0)

static int warnings_seen = 0;
static void count_warning(const char* msg, void* user)
{
    (void)msg;
    ++*(int*)user;
}

int main(void)
{
    double v = 0.0;
    CHECK(strlen(pcb_version()) > 0);

    CHECK(pcb_detector_factor(1.0, 1.0, &v) == PCB_OK);
    /* tau_s = T: 1 - (1 - e^{-2}) / 2 */
    CHECK(fabs(v - (0.5 + 0.5 * exp(-2.0))) < 1e-14);
    CHECK(pcb_detector_factor(-1.0, 1.0, &v) == PCB_ERROR_CONFIG);
    CHECK(strlen(pcb_last_error()) > 0);

    CHECK(pcb_chi_ratio_gaussian(1e8, 1.0, 1.0, 1.0, 0.5, 2, &v) == PCB_OK);
    CHECK(fabs(v - 0.2) < 1e-6);
    CHECK(pcb_chi_ratio_gaussian(1.0, 1.0, 1.0, 1.0, 1.5, 2, &v) == PCB_ERROR_CONFIG);
    CHECK(strstr(pcb_last_error(), "theta must lie in (0,1]") != NULL);
    CHECK(pcb_chi_ratio_bessel(0.0, 1.0, 1.0, 1.0, 0.5, &v) == PCB_OK);
    CHECK(v == 1.0);

    const double m[9] = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    CHECK(pcb_permanent(m, 3, &v) == PCB_OK);
    CHECK(fabs(v - 450.0) < 1e-12);
    CHECK(pcb_permanent(m, 11, &v) == PCB_ERROR_RANGE);
    CHECK(pcb_permanent(NULL, 3, &v) == PCB_ERROR_CONFIG);

    pcb_config* cfg = NULL;
    CHECK(pcb_config_parse("{\"schema_version\": 1, \"source\": {\"theta\": 1.5}}", "", &cfg) == PCB_ERROR_CONFIG);
    CHECK(cfg == NULL);
    CHECK(strstr(pcb_last_error(), "theta must lie in (0,1]") != NULL);
    CHECK(pcb_config_parse("{\"schema_version\": 1, \"colour\": 3}", "", &cfg) == PCB_ERROR_CONFIG);
    CHECK(strstr(pcb_last_error(), "colour") != NULL);

    const char* text = "{\"schema_version\": 1, \"dimension\": 2,"
                       " \"source\": {\"theta\": 0.5},"
                       " \"analytic\": {\"detector_T\": 2.0,"
                       "   \"sweep\": {\"parameter\": \"sigma_m2_z3\", \"values\": [0.1, 1.0, 10.0]}}}";
    CHECK(pcb_config_parse(text, "", &cfg) == PCB_OK);
    CHECK(cfg != NULL);
    CHECK(strcmp(pcb_config_validate_suite(cfg), "analytic") == 0);
    CHECK(pcb_run_analytic(cfg, "") == PCB_ERROR_CONFIG);
    CHECK(pcb_run_analytic(cfg, "/nonexistent-dir/curve.csv") == PCB_ERROR_CONFIG);
    CHECK(pcb_run_mc(cfg, "/tmp/pcbeam_smoke_mc.csv") == PCB_ERROR_CONFIG);
    pcb_config_free(cfg);

    pcb_set_warning_handler(count_warning, &warnings_seen);
    pcb_set_warning_handler(NULL, NULL);

    if (failures == 0)
        printf("capi smoke: all checks passed\n");
    return failures == 0 ? 0 : 1;
}
