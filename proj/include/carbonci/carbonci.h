#ifndef CARBONCI_H
#define CARBONCI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define CCI_API __declspec(dllexport)
#else
#  define CCI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Values are stable across releases. */
typedef enum cci_status {
    CCI_OK = 0,
    CCI_INVALID_ARGUMENT = 1,
    CCI_EMPTY_OVERLAP = 2,
    CCI_OUT_OF_RANGE = 3,
    CCI_PARSE_ERROR = 4,
    CCI_GAP_TOO_LARGE = 5,
    CCI_ZERO_GENERATION = 6,
    CCI_MISSING_FACTOR = 7,
    CCI_INCONSISTENT_HORIZON = 8,
    CCI_VALUE_OUT_OF_UNIT_RANGE = 9,
    CCI_INSUFFICIENT_HISTORY = 10,
    CCI_ZERO_TRUTH_VALUE = 11,
    CCI_LENGTH_MISMATCH = 12,
    CCI_HORIZON_MISMATCH = 13,
    CCI_TRUTH_MISSING = 14,
    CCI_DATE_OUT_OF_STUDY_RANGE = 15,
    CCI_EMPTY_INPUT = 16,
    CCI_EMPTY_WINDOW = 17,
    CCI_WINDOW_TOO_SMALL = 18,
    CCI_LAG_LENGTH_MISMATCH = 19,
    CCI_ALIGNMENT_ERROR = 20,
    CCI_ALPHA_MISMATCH = 21,
    CCI_INSUFFICIENT_DAYS = 22,
    CCI_EMPTY_TEST_SPLIT = 23,
    CCI_CONFIG_ERROR = 24,
    CCI_IO_ERROR = 25,
    CCI_INTERNAL_ERROR = 99
} cci_status;

/* Symbolic name of a status, e.g. "WindowTooSmall". Never NULL. */
CCI_API const char* cci_status_name(cci_status status);

/* Message of the last failing call on this thread; "" after success. */
CCI_API const char* cci_last_error(void);

typedef struct cci_interval {
    double lower;
    double upper;
    double alpha;
} cci_interval;

/* ---- engine functions ---- */

/* Type-1 quantile: the ceil(p*n)-th smallest value (rank clamped to [1, n]). */
CCI_API cci_status cci_empirical_quantile(const double* values, size_t n, double p, double* out);

/* [y_hat + q(alpha/2), y_hat + q(1 - alpha/2)] over the residuals. */
CCI_API cci_status cci_split_conformal_interval(double y_hat, const double* residuals, size_t n, double alpha,
                                                cci_interval* out);

CCI_API cci_status cci_mape(const double* pred, const double* truth, size_t n, double* out_percent);

/* Intervals and truths aligned hour by hour. Percent of closed-interval hits. */
CCI_API cci_status cci_coverage(const cci_interval* intervals, const double* truth, size_t n, double* out_percent);

typedef struct cci_breakdown {
    double coverage;
    double t_cov_p_cov;
    double t_cov_p_uncov;
    double t_uncov_p_cov;
    double t_uncov_p_uncov;
    size_t n;
} cci_breakdown;

CCI_API cci_status cci_breakdown_compute(const cci_interval* intervals, const double* truth, const double* points,
                                         size_t n, cci_breakdown* out);

/* Grams CO2eq for a normalized power trace scaled by peak_mw against hourly intensity (g/kWh). */
CCI_API cci_status cci_emissions_grams(const double* normalized_power, const double* ci, size_t n, double peak_mw,
                                       double* out_grams);

CCI_API cci_status cci_tons_delta(double percent_increase, double base_grams, double* out_tons);

typedef enum cci_policy_kind {
    CCI_POLICY_POINT = 0,
    CCI_POLICY_DOMINANCE = 1,
    CCI_POLICY_OVERLAP = 2
} cci_policy_kind;

/* *out_shift is 1 when the workload should move to the target option. */
CCI_API cci_status cci_decide_shift(double source_pred, cci_interval source_ci, double target_pred,
                                    cci_interval target_ci, cci_policy_kind policy, double theta, int* out_shift);

/* ---- streaming SPCI ---- */

typedef struct cci_spci cci_spci;

typedef struct cci_spci_config {
    double alpha;
    size_t window_capacity;
    int lag_window;
    int n_trees;
    int max_depth; /* -1 unlimited, 0 root only */
    int min_leaf_size;
    int bootstrap;
    int threads;
    int beta_grid_size;
    int refit_stride;
    uint64_t seed;
} cci_spci_config;

CCI_API cci_spci_config cci_spci_config_default(void);

/* Needs at least window_capacity initial residuals; the most recent ones are kept. */
CCI_API cci_status cci_spci_create(const cci_spci_config* config, const double* initial_residuals, size_t n,
                                   cci_spci** out);
/* Interval for the next hour given its point forecast. */
CCI_API cci_status cci_spci_predict(cci_spci* spci, double point_forecast, cci_interval* out);
/* Feeds back the truth for the most recently predicted hour. */
CCI_API cci_status cci_spci_observe(cci_spci* spci, double truth);
CCI_API void cci_spci_destroy(cci_spci* spci);

/* ---- pipeline ---- */

typedef struct cci_pipeline cci_pipeline;

typedef enum cci_shift_mode {
    CCI_MODE_TEMPORAL = 0,
    CCI_MODE_SPATIAL = 1
} cci_shift_mode;

CCI_API cci_status cci_pipeline_open(const char* config_path, cci_pipeline** out);
CCI_API void cci_pipeline_close(cci_pipeline* p);

CCI_API cci_status cci_pipeline_set_workspace(cci_pipeline* p, const char* dir);
/* NULL or "" selects every configured region. */
CCI_API cci_status cci_pipeline_set_region(cci_pipeline* p, const char* code);
CCI_API cci_status cci_pipeline_clear_alphas(cci_pipeline* p);
CCI_API cci_status cci_pipeline_add_alpha(cci_pipeline* p, double alpha);
/* "point", "dominance" or "overlap:THETA". */
CCI_API cci_status cci_pipeline_set_policy(cci_pipeline* p, const char* policy);
CCI_API cci_status cci_pipeline_set_seed(cci_pipeline* p, uint64_t seed);
CCI_API cci_status cci_pipeline_set_mode(cci_pipeline* p, cci_shift_mode mode);

CCI_API cci_status cci_pipeline_ingest(cci_pipeline* p);
CCI_API cci_status cci_pipeline_forecast(cci_pipeline* p);
CCI_API cci_status cci_pipeline_run(cci_pipeline* p);
CCI_API cci_status cci_pipeline_shift(cci_pipeline* p);
/* Text stays valid until the next call on `p`. */
CCI_API cci_status cci_pipeline_report(cci_pipeline* p, const char** out_text);

#ifdef __cplusplus
}
#endif

#endif
