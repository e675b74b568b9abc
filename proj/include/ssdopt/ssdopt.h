/* C interface to the ssdopt library. All functions return a status code; on failure
 * ssdopt_last_error() describes the problem for the calling thread. */
#ifndef SSDOPT_H
#define SSDOPT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ssdopt_status {
    SSDOPT_OK = 0,
    SSDOPT_INVALID_ARGUMENT = 1,
    SSDOPT_CONFIG = 2,
    SSDOPT_IO = 3,
    SSDOPT_SIMULATION = 4,
    SSDOPT_CONDITIONING = 5,
    SSDOPT_CHECKPOINT = 6,
    SSDOPT_UNSUPPORTED = 7,
    SSDOPT_LOCKED = 8,
    SSDOPT_INTERNAL = 9
} ssdopt_status;

const char* ssdopt_last_error(void);
const char* ssdopt_status_name(ssdopt_status status);
const char* ssdopt_version(void);

typedef void (*ssdopt_message_fn)(const char* message, void* user_data);

typedef struct ssdopt_options {
    int has_seed;
    uint64_t seed;
    int has_iterations;
    int64_t iterations; /* run: total; resume: additional */
    int has_n_per_eval;
    int64_t n_per_eval;
    int64_t n_verify;
    int64_t baseline_count;
    double baseline_confidence;
    int workers;
    const char* out_dir; /* may be NULL for resume/verify */
    const char* const* nominal_labels;
    const double* nominal_values;
    size_t n_nominals;
    ssdopt_message_fn on_message;
    void* user_data;
} ssdopt_options;

/* Fills defaults: n_verify 100000, baseline_count 50, baseline_confidence 0.975, workers 1. */
void ssdopt_options_init(ssdopt_options* options);

ssdopt_status ssdopt_cmd_run(const char* config_path, const ssdopt_options* options);
ssdopt_status ssdopt_cmd_resume(const char* checkpoint_path, const ssdopt_options* options);
ssdopt_status ssdopt_cmd_baseline(const char* config_path, const ssdopt_options* options);
ssdopt_status ssdopt_cmd_verify(const char* run_path, const ssdopt_options* options);

/* In-memory runs. */
typedef struct ssdopt_run ssdopt_run;

/* Parses a JSON config and evaluates the initial design. */
ssdopt_status ssdopt_run_create(const char* config_json, ssdopt_run** out);
/* One iteration; *advanced is 0 when the sample cap stopped it. */
ssdopt_status ssdopt_run_step(ssdopt_run* run, int* advanced);
ssdopt_status ssdopt_run_checkpoint(const ssdopt_run* run, const char* path);
ssdopt_status ssdopt_run_resume(const char* checkpoint_path, ssdopt_run** out);
void ssdopt_run_destroy(ssdopt_run* run);

ssdopt_status ssdopt_run_iteration(const ssdopt_run* run, int64_t* iteration);
ssdopt_status ssdopt_run_dimensions(const ssdopt_run* run, size_t* design_dims, size_t* objectives);
/* Copies up to `capacity` values; *length receives the full length. */
ssdopt_status ssdopt_run_trajectory(const ssdopt_run* run, double* values, size_t capacity, size_t* length);
ssdopt_status ssdopt_run_set_size(const ssdopt_run* run, size_t* size);
/* point has design_dims entries, objectives has `objectives` entries. */
ssdopt_status ssdopt_run_set_member(const ssdopt_run* run, size_t index, double* point, double* objectives);

/* Pure helpers. points is row-major count x dim. */
ssdopt_status ssdopt_hypervolume(const double* points, size_t count, size_t dim, const double* reference,
                                 double* out);
/* out receives count x dim values, row-major. */
ssdopt_status ssdopt_sobol(int dim, int64_t count, double* out);

#ifdef __cplusplus
}
#endif

#endif
