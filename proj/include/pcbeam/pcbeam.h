/* Partially coherent beams in random media: C interface.
 *
 * All functions return a pcb_status. On failure the message of the last
 * error on the calling thread is available from pcb_last_error(). Handles
 * are opaque and must be released with their _free function.
 */
#ifndef PCBEAM_H
#define PCBEAM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define PCB_API __declspec(dllexport)
#else
#define PCB_API __attribute__((visibility("default")))
#endif

typedef enum {
    PCB_OK = 0,
    PCB_ERROR_CONFIG = 1,
    PCB_ERROR_NUMERIC = 2,
    PCB_ERROR_VALIDATION = 3,
    PCB_ERROR_RANGE = 4, /* request outside the implemented range */
    PCB_ERROR_INTERNAL = 5
} pcb_status;

typedef struct pcb_config pcb_config;

PCB_API const char* pcb_version(void);
/* Message of the last failure on this thread, "" if none. */
PCB_API const char* pcb_last_error(void);

/* Warnings (boundary leakage, clamped spectra, ...) go to stderr unless a
 * handler is installed. Passing NULL restores the default. */
typedef void (*pcb_warning_fn)(const char* message, void* user);
PCB_API void pcb_set_warning_handler(pcb_warning_fn fn, void* user);

/* ---- configuration ---------------------------------------------------- */

PCB_API pcb_status pcb_config_load(const char* path, pcb_config** out);
/* Parses JSON text; relative file references resolve against base_dir. */
PCB_API pcb_status pcb_config_parse(const char* json_text, const char* base_dir, pcb_config** out);
PCB_API void pcb_config_free(pcb_config* config);
PCB_API pcb_status pcb_config_set_seed(pcb_config* config, uint64_t seed);
/* 0 selects the hardware concurrency. */
PCB_API pcb_status pcb_config_set_threads(pcb_config* config, int threads);
/* Suite named in the config's validate section ("analytic" by default). */
PCB_API const char* pcb_config_validate_suite(const pcb_config* config);

/* ---- commands ------------------------------------------------------------
 * Output paths are checked before any computation. The curve commands also
 * write an SVG plot next to the CSV. */

PCB_API pcb_status pcb_run_analytic(const pcb_config* config, const char* out_csv);
PCB_API pcb_status pcb_run_figure(const pcb_config* config, const char* out_csv);
/* When the config sets experiment.acceptance, a second-moment pass share
 * below 95% returns PCB_ERROR_VALIDATION after the CSV is written. */
PCB_API pcb_status pcb_run_mc(const pcb_config* config, const char* out_csv);
/* suite: "analytic", "mc" or "all". perturb != 0 runs the harness self-test
 * in which every check must fail. The report table goes to out_report and,
 * when echo != 0, to stdout as criteria finish. Returns PCB_ERROR_VALIDATION
 * when any criterion fails. */
PCB_API pcb_status pcb_run_validate(const char* suite, int perturb, int threads, uint64_t seed,
                                    const char* out_report, int echo);

/* ---- scalar evaluations ---------------------------------------------- */

/* F_T for the exponential source kernel. */
PCB_API pcb_status pcb_detector_factor(double tau_s, double T, double* out);
PCB_API pcb_status pcb_chi_ratio_gaussian(double z, double sigma_m2, double r0, double rw, double theta, int dim,
                                          double* out);
PCB_API pcb_status pcb_chi_ratio_bessel(double z, double sigma_m2, double r0, double rw, double theta,
                                        double* out);
/* Permanent of a row-major p x p real matrix, p <= 10. */
PCB_API pcb_status pcb_permanent(const double* matrix, int p, double* out);

#ifdef __cplusplus
}
#endif

#endif
