#ifndef ANFIS_ANFIS_H
#define ANFIS_ANFIS_H

/*
 * C interface to the ANFIS pressure-gradient library.
 *
 * Every object is an opaque handle released with its matching *_free call.
 * Functions return an anfis_status; on failure a human-readable message for
 * the calling thread is available from anfis_last_error() until the next
 * failing call on that thread. Strings returned by accessor functions are
 * owned by the handle they came from and stay valid until that handle is
 * freed or the same accessor is called again.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ANFIS_BUILDING_LIBRARY)
#    define ANFIS_API __declspec(dllexport)
#  else
#    define ANFIS_API __declspec(dllimport)
#  endif
#else
#  define ANFIS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum anfis_status {
  ANFIS_OK = 0,
  ANFIS_ERR_NULL_ARGUMENT = 1,
  ANFIS_ERR_PARAMETER_DOMAIN = 2,
  ANFIS_ERR_CONFIGURATION = 3,
  ANFIS_ERR_SHAPE = 4,
  ANFIS_ERR_RULE_EXPLOSION = 5,
  ANFIS_ERR_PARSE = 6,
  ANFIS_ERR_VERSION = 7,
  ANFIS_ERR_INVARIANT = 8,
  ANFIS_ERR_DATA = 9,
  ANFIS_ERR_DOMAIN = 10,
  ANFIS_ERR_SELECTION = 11,
  ANFIS_ERR_IO = 12,
  ANFIS_ERR_SUMMARY = 13,
  ANFIS_ERR_INTERNAL = 99
} anfis_status;

typedef struct anfis_dataset anfis_dataset;
typedef struct anfis_model anfis_model;
typedef struct anfis_trace anfis_trace;
typedef struct anfis_sweep_report anfis_sweep_report;

ANFIS_API const char *anfis_version(void);
ANFIS_API const char *anfis_last_error(void);
ANFIS_API const char *anfis_status_name(anfis_status status);

/* ---- data generation ---------------------------------------------------- */

typedef struct anfis_grid_spec {
  int n_r;
  int n_theta;
  int n_z;
  const double *velocities; /* strictly increasing, m/s */
  size_t n_velocities;
} anfis_grid_spec;

typedef struct anfis_surrogate_params {
  double radius;
  double height;
  double v_ref;
  double eps0;
  double exponent;
  double rho_liquid;
  double rho_gas;
  double gravity;
  double noise_sd;
  uint64_t seed;
} anfis_surrogate_params;

/* Defaults: 10 x 12 x 10 nodes at five velocities (6000 rows). The velocity
 * array points at static storage. */
ANFIS_API void anfis_grid_spec_default(anfis_grid_spec *grid);
ANFIS_API void anfis_surrogate_params_default(anfis_surrogate_params *params);

/* Parses a JSON config document with optional "grid" and "surrogate" objects
 * over the defaults. Velocities are copied into caller storage of capacity
 * velocity_capacity; n_velocities reports the count. */
ANFIS_API anfis_status anfis_generation_config_parse(const char *json_text, anfis_grid_spec *grid,
                                                     double *velocity_storage, size_t velocity_capacity,
                                                     anfis_surrogate_params *params);

ANFIS_API anfis_status anfis_surrogate_dpdz(double x, double y, double z, double v,
                                            const anfis_surrogate_params *params, double *out);

ANFIS_API anfis_status anfis_dataset_generate(const anfis_grid_spec *grid, const anfis_surrogate_params *params,
                                              anfis_dataset **out);
ANFIS_API anfis_status anfis_dataset_generate_midpoints(const anfis_grid_spec *grid,
                                                        const anfis_surrogate_params *params, anfis_dataset **out);

/* ---- datasets ------------------------------------------------------------ */

ANFIS_API anfis_status anfis_dataset_load_csv(const char *path, anfis_dataset **out);
ANFIS_API anfis_status anfis_dataset_write_csv(const anfis_dataset *ds, const char *path);
ANFIS_API size_t anfis_dataset_rows(const anfis_dataset *ds);
ANFIS_API size_t anfis_dataset_cols(const anfis_dataset *ds);
ANFIS_API const char *anfis_dataset_column_name(const anfis_dataset *ds, size_t col);
ANFIS_API const char *anfis_dataset_column_unit(const anfis_dataset *ds, size_t col);
ANFIS_API anfis_status anfis_dataset_value(const anfis_dataset *ds, size_t row, size_t col, double *out);
ANFIS_API anfis_status anfis_dataset_split(const anfis_dataset *ds, double train_frac, uint64_t seed,
                                           anfis_dataset **train, anfis_dataset **test);
ANFIS_API void anfis_dataset_free(anfis_dataset *ds);

/* ---- models -------------------------------------------------------------- */

typedef struct anfis_train_config {
  int epochs;
  double initial_step;
  double step_increase;
  double step_decrease;
  double ridge_lambda;
  uint64_t seed;
  int normalize_inputs; /* boolean */
} anfis_train_config;

/* Defaults: 700 epochs, step 0.01 (x1.1 / x0.9), ridge 1e-8, min-max scaling. */
ANFIS_API void anfis_train_config_default(anfis_train_config *config);

typedef struct anfis_model_spec {
  const char *const *inputs; /* column names */
  size_t n_inputs;
  const char *output;
  int mf_count;
  const char *family; /* gbell, gauss, gauss2, dsig, psig, tri */
  size_t max_rules;   /* 0 selects the default of 10000 */
} anfis_model_spec;

/* Builds a grid-partition model whose input ranges come from `data` and trains
 * it on every row of `data`. `trace` may be NULL. */
ANFIS_API anfis_status anfis_model_train(const anfis_dataset *data, const anfis_model_spec *spec,
                                         const anfis_train_config *config, anfis_model **model,
                                         anfis_trace **trace);

ANFIS_API anfis_status anfis_model_load(const char *path, anfis_model **out);
ANFIS_API anfis_status anfis_model_save(const anfis_model *model, const char *path);
ANFIS_API void anfis_model_free(anfis_model *model);

ANFIS_API size_t anfis_model_n_inputs(const anfis_model *model);
ANFIS_API size_t anfis_model_rule_count(const anfis_model *model);
ANFIS_API const char *anfis_model_input_name(const anfis_model *model, size_t index);
ANFIS_API const char *anfis_model_output_name(const anfis_model *model);

/* Provenance block of the model file, as compact JSON text. */
ANFIS_API const char *anfis_model_provenance_json(const anfis_model *model);
/* Merges the top-level keys of a JSON object into the provenance block. */
ANFIS_API anfis_status anfis_model_provenance_merge(anfis_model *model, const char *json_object);

/* Row-major points (n_points x n_inputs, raw data units) -> n_points outputs. */
ANFIS_API anfis_status anfis_model_predict(const anfis_model *model, const double *points, size_t n_points,
                                           size_t n_inputs, double *out);

/* Reads the model's input columns from points_csv and writes them plus the
 * predicted output column to out_csv, preserving row order. */
ANFIS_API anfis_status anfis_model_predict_csv(const anfis_model *model, const char *points_csv,
                                               const char *out_csv);

typedef struct anfis_metrics {
  double r2_determination;
  double r2_pearson;
  double rmse;
  double mae;
  size_t n;
  int degenerate;
} anfis_metrics;

/* Scores the model on the rows of `data` (needs the model's input and output
 * columns). */
ANFIS_API anfis_status anfis_model_evaluate(const anfis_model *model, const anfis_dataset *data,
                                            anfis_metrics *out);

/* ---- training traces ------------------------------------------------------ */

ANFIS_API size_t anfis_trace_length(const anfis_trace *trace);
ANFIS_API int anfis_trace_best_epoch(const anfis_trace *trace);
ANFIS_API anfis_status anfis_trace_record(const anfis_trace *trace, size_t index, int *epoch, double *train_rmse,
                                          double *step);
ANFIS_API anfis_status anfis_trace_write_csv(const anfis_trace *trace, const char *path);
ANFIS_API void anfis_trace_free(anfis_trace *trace);

/* ---- sweeps ---------------------------------------------------------------- */

/* spec_json: sweep spec document (NULL or "{}" for defaults). jobs <= 1 runs
 * sequentially. */
ANFIS_API anfis_status anfis_sweep_run(const anfis_dataset *data, const char *spec_json, unsigned jobs,
                                       anfis_sweep_report **out);
ANFIS_API size_t anfis_sweep_report_cell_count(const anfis_sweep_report *report);
ANFIS_API anfis_status anfis_sweep_report_write_csv(const anfis_sweep_report *report, const char *path,
                                                    int include_timing);
/* Trend summary (best held-out R^2 per input count and per input/MF count). */
ANFIS_API anfis_status anfis_sweep_report_summary_json(anfis_sweep_report *report, const char **out);
ANFIS_API void anfis_sweep_report_free(anfis_sweep_report *report);

#ifdef __cplusplus
}
#endif

#endif /* ANFIS_ANFIS_H */
