#ifndef MAEBOUND_H
#define MAEBOUND_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define MB_API __attribute__((visibility("default")))
#else
#define MB_API
#endif

/* Every fallible call returns a status. On failure a message is available
 * from mb_last_error() on the same thread until the next call. Output
 * parameters are written only on success. */
typedef enum mb_status {
  MB_OK = 0,
  MB_ERR_PARAMETER = 1,
  MB_ERR_DIMENSION = 2,
  MB_ERR_SHAPE = 3,
  MB_ERR_NUMERIC = 4,
  MB_ERR_FORMAT = 5,
  MB_ERR_IO = 6,
  MB_ERR_MODE = 7,
  MB_ERR_CAPABILITY = 8,
  MB_ERR_CONFIG = 9,
  MB_ERR_NULL_ARGUMENT = 10,
  MB_ERR_INTERNAL = 11
} mb_status;

typedef struct mb_network mb_network;
typedef struct mb_dataset mb_dataset;
typedef struct mb_trainlog mb_trainlog;

MB_API const char* mb_version(void);
MB_API const char* mb_last_error(void);
MB_API const char* mb_status_name(mb_status status);
/* Releases strings returned through char** outputs. */
MB_API void mb_string_free(char* s);

/* ---- networks ---------------------------------------------------------- */

/* Gaussian(0, 1/fan_in) init followed by row renormalization. */
MB_API mb_status mb_network_create(size_t input_dim, size_t output_dim, const size_t* hidden_widths,
                                   size_t hidden_count, double sharpness, int bias, uint64_t seed,
                                   mb_network** out);
MB_API mb_status mb_network_load(const char* path, mb_network** out);
MB_API mb_status mb_network_save(const mb_network* net, const char* path);
MB_API void mb_network_free(mb_network* net);
/* depth = number of weight matrices */
MB_API mb_status mb_network_dims(const mb_network* net, size_t* input_dim, size_t* output_dim, size_t* depth);
/* e.g. "784-64-128-784" */
MB_API mb_status mb_network_describe(const mb_network* net, char** out);
MB_API mb_status mb_network_forward(const mb_network* net, const double* x, size_t x_len, double* y, size_t y_len);
MB_API mb_status mb_network_renormalize(mb_network* net, double lambda_hidden, int measure_top);
MB_API mb_status mb_network_norm_budget(const mb_network* net, double* lambda, double* lambda_prime);

/* ---- datasets ---------------------------------------------------------- */

MB_API mb_status mb_dataset_synthetic(size_t d, size_t q, size_t n, uint64_t teacher_seed, uint64_t noise_seed,
                                      double noise_variance, mb_dataset** out);
/* Images [first, first + count) of an IDX image file (optionally gzipped),
 * corrupted with additive Gaussian noise and scaled into the unit ball. */
MB_API mb_status mb_dataset_from_idx(const char* path, size_t first, size_t count, double noise_variance,
                                     uint64_t seed, mb_dataset** out);
MB_API mb_status mb_dataset_split(const mb_dataset* ds, double test_fraction, uint64_t seed, mb_dataset** train,
                                  mb_dataset** test);
MB_API mb_status mb_dataset_load(const char* path, mb_dataset** out);
MB_API mb_status mb_dataset_save(const mb_dataset* ds, const char* path);
MB_API mb_status mb_dataset_shape(const mb_dataset* ds, size_t* count, size_t* input_dim, size_t* output_dim);
MB_API void mb_dataset_free(mb_dataset* ds);

/* ---- training ---------------------------------------------------------- */

typedef struct mb_train_options {
  double learning_rate;
  double momentum;
  size_t epochs;
  size_t batch_size;
  uint64_t seed;
  double lambda_hidden;
  int measure_top;           /* leave the top layer unnormalized */
  int mse_loss;              /* train on MSE instead of MAE */
  int renormalize_per_epoch; /* instead of after every step */
  int per_dimension_mae;
} mb_train_options;

MB_API void mb_train_options_default(mb_train_options* options);
/* Trains `net` in place. */
MB_API mb_status mb_train(mb_network* net, const mb_dataset* train, const mb_dataset* test,
                          const mb_train_options* options, mb_trainlog** log);
MB_API mb_status mb_evaluate_mae(const mb_network* net, const mb_dataset* ds, int per_dimension, double* out);
MB_API mb_status mb_trainlog_to_csv(const mb_trainlog* log, char** out);
MB_API mb_status mb_trainlog_from_csv(const char* csv, mb_trainlog** out);
MB_API mb_status mb_trainlog_summary(const mb_trainlog* log, size_t* epochs, double* initial_train_mae,
                                     double* final_train_mae, double* final_test_mae);
/* Writes <stem>_trainlog.csv and <stem>_curves.svg into dir. */
MB_API mb_status mb_emit_curves(const mb_trainlog* log, const char* dir, const char* stem);
MB_API void mb_trainlog_free(mb_trainlog* log);

/* ---- bounds ------------------------------------------------------------ */

typedef struct mb_bound_inputs {
  size_t q;
  size_t d;
  size_t N;
  size_t k; /* number of weight matrices */
  size_t n_k;
  double r;
  double lambda;
  double lambda_prime;
  double s;
  double delta;
  size_t min_hidden_width; /* 0: same as n_k */
  int validity_mode;
} mb_bound_inputs;

MB_API void mb_bound_inputs_default(mb_bound_inputs* in);
MB_API mb_status mb_estimation_error_bound(const mb_bound_inputs* in, double* out);
MB_API mb_status mb_hoeffding_deviation(size_t N, double delta, double* out);
MB_API mb_status mb_approximation_error_bound(double c, const mb_bound_inputs* in, double* out);
MB_API mb_status mb_optimization_error_bound(double mu, double M, double beta, double gamma, double* out);
/* Calibration record as JSON (keys c, b, b_clamped, ...). */
MB_API mb_status mb_calibrate(double mae1, double mae2, size_t l1, size_t l2, const mb_bound_inputs* in,
                              char** calibration_json);
/* AE/EE/OE/MAE_B report as JSON for the architecture in `in`. */
MB_API mb_status mb_bound_report(const char* calibration_json, const mb_bound_inputs* in, int include_hoeffding,
                                 char** report_json);

/* ---- orchestration ----------------------------------------------------- */

/* Runs the experiment described by a config file. seed_override and out_dir
 * may be NULL. report_json may be NULL when only the files are wanted. */
MB_API mb_status mb_experiment_run(const char* config_path, const uint64_t* seed_override, const char* out_dir,
                                   char** report_json);
/* Built-in Rademacher check suite as JSON lines. */
MB_API mb_status mb_rademacher_suite(uint64_t seed, size_t draws, char** jsonl);

#ifdef __cplusplus
}
#endif

#endif /* MAEBOUND_H */
