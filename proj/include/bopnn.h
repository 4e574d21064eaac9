/* bopnn — bagged projected nearest-neighbour classification.
 *
 * C interface to the shared library. All objects are opaque handles that
 * must be released with the matching *_free function. Functions return
 * BOPNN_OK on success; on failure they return a status code and leave a
 * human-readable message in bopnn_last_error() (thread-local).
 *
 * Labels are integers in 1..K; bopnn_*_class_name maps them back to the
 * class strings from the training file. Returned const char* pointers
 * stay valid until the owning handle is freed.
 */
#ifndef BOPNN_H
#define BOPNN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BOPNN_API __declspec(dllexport)
#else
#define BOPNN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bopnn_status {
  BOPNN_OK = 0,
  BOPNN_E_INVALID_ARGUMENT = 1,
  BOPNN_E_NOT_POSITIVE_DEFINITE = 2,
  BOPNN_E_CONVERGENCE = 3,
  BOPNN_E_DEGENERATE_INPUT = 4,
  BOPNN_E_INSUFFICIENT_POINTS = 5,
  BOPNN_E_SINGLE_CLASS = 6,
  BOPNN_E_EMPTY_ENSEMBLE = 7,
  BOPNN_E_PROJECTION_DISABLED = 8,
  BOPNN_E_INDEX_OUT_OF_RANGE = 9,
  BOPNN_E_PARSE = 10,
  BOPNN_E_MISSING_VALUE = 11,
  BOPNN_E_UNKNOWN_TARGET = 12,
  BOPNN_E_SCHEMA_MISMATCH = 13,
  BOPNN_E_TOO_SMALL = 14,
  BOPNN_E_VERSION_MISMATCH = 15,
  BOPNN_E_CORRUPT_FILE = 16,
  BOPNN_E_NO_OOB_POINTS = 17,
  BOPNN_E_IO = 18,
  BOPNN_E_INTERNAL = 19,
} bopnn_status;

typedef struct bopnn_dataset bopnn_dataset;
typedef struct bopnn_model bopnn_model;
typedef struct bopnn_tune_result bopnn_tune_result;

/* Library version string, e.g. "1.0.0". */
BOPNN_API const char* bopnn_version(void);

/* Message for the most recent failure on this thread ("" if none). */
BOPNN_API const char* bopnn_last_error(void);

/* ------------------------------------------------------------------ */
/* Datasets                                                            */

/* Loads a CSV (.csv) or tab-separated (.tsv) file with a header row.
 * target_column NULL or "" selects the last column. categorical_columns
 * (may be NULL when n_categorical is 0) forces columns to be one-hot
 * encoded even when their values look numeric. */
BOPNN_API bopnn_status bopnn_dataset_load(const char* path, const char* target_column,
                                          const char* const* categorical_columns,
                                          size_t n_categorical, bopnn_dataset** out);

/* Re-encodes a file with a fitted model's schema; columns are matched by
 * header name. With require_target = 0 the target column may be absent,
 * in which case labels are unavailable. */
BOPNN_API bopnn_status bopnn_dataset_load_for_model(const char* path, const bopnn_model* m,
                                                    int require_target, bopnn_dataset** out);

BOPNN_API void bopnn_dataset_free(bopnn_dataset* ds);

BOPNN_API size_t bopnn_dataset_num_rows(const bopnn_dataset* ds);
BOPNN_API size_t bopnn_dataset_num_features(const bopnn_dataset* ds);
BOPNN_API int32_t bopnn_dataset_num_classes(const bopnn_dataset* ds);
/* Label of a row in 1..K, or 0 when the dataset carries no labels. */
BOPNN_API int32_t bopnn_dataset_label(const bopnn_dataset* ds, size_t row);
BOPNN_API const char* bopnn_dataset_class_name(const bopnn_dataset* ds, int32_t label);

/* 70/30 train/test split, shuffled by (seed, rep_index); the training
 * side is capped at 7000 rows and the test side at 3000. */
BOPNN_API bopnn_status bopnn_dataset_split(const bopnn_dataset* ds, uint64_t seed,
                                           uint32_t rep_index, bopnn_dataset** train,
                                           bopnn_dataset** test);

/* Benchmark repetition count for a dataset of n rows. */
BOPNN_API uint32_t bopnn_repetitions_for(size_t n);

/* ------------------------------------------------------------------ */
/* Fitting                                                             */

typedef struct bopnn_hyperparams {
  int32_t k;                  /* neighbours; >= 1 */
  int32_t q0;                 /* covariates per model; 0 = floor(0.75 d) */
  int32_t q;                  /* discriminant dims kept; 0 = ceil(0.5 q0) */
  int32_t num_models;         /* ensemble size B */
  double pi_b;                /* bag fraction in (0, 1] */
  int32_t projection_enabled; /* 0 disables the discriminant step */
  int32_t balanced;           /* equal class weights in the scatter matrices */
  int32_t z_score;            /* standardize features on training statistics */
  uint64_t seed;
} bopnn_hyperparams;

/* Defaults: k=3, q0/q derived, B=100, pi_b=0.63, projection on, seed=1. */
BOPNN_API void bopnn_hyperparams_init(bopnn_hyperparams* hp);

/* Fits an ensemble. threads controls parallel model fitting only; the
 * result is identical for every thread count. */
BOPNN_API bopnn_status bopnn_fit(const bopnn_dataset* ds, const bopnn_hyperparams* hp,
                                 int32_t threads, bopnn_model** out);

typedef struct bopnn_tune_options {
  int32_t n_draws;            /* random search size, default 30 */
  int32_t num_models;         /* B per trial, default 100 */
  double pi_b;                /* default 0.63 */
  int32_t projection_enabled; /* default 1 */
  int32_t balanced;           /* default 0 */
  int32_t z_score;            /* default 0 */
  uint64_t seed;              /* default 1 */
} bopnn_tune_options;

BOPNN_API void bopnn_tune_options_init(bopnn_tune_options* opts);

/* Random hyperparameter search scored by out-of-bag accuracy. */
BOPNN_API bopnn_status bopnn_tune(const bopnn_dataset* ds, const bopnn_tune_options* opts,
                                  int32_t threads, bopnn_tune_result** out);

BOPNN_API size_t bopnn_tune_num_trials(const bopnn_tune_result* tr);
/* oob is -1 for trials whose fit failed. */
BOPNN_API bopnn_status bopnn_tune_trial(const bopnn_tune_result* tr, size_t index,
                                        bopnn_hyperparams* hp_out, double* oob_out);
BOPNN_API size_t bopnn_tune_best_index(const bopnn_tune_result* tr);
BOPNN_API void bopnn_tune_result_free(bopnn_tune_result* tr);

/* ------------------------------------------------------------------ */
/* Models                                                              */

BOPNN_API bopnn_status bopnn_model_save(const bopnn_model* m, const char* path);
BOPNN_API bopnn_status bopnn_model_load(const char* path, bopnn_model** out);
BOPNN_API void bopnn_model_free(bopnn_model* m);

BOPNN_API int32_t bopnn_model_num_classes(const bopnn_model* m);
BOPNN_API size_t bopnn_model_num_features(const bopnn_model* m);
BOPNN_API bopnn_status bopnn_model_hyperparams(const bopnn_model* m, bopnn_hyperparams* out);
/* Out-of-bag accuracy, or NaN when no point was ever out of bag. */
BOPNN_API double bopnn_model_oob_accuracy(const bopnn_model* m);
BOPNN_API const char* bopnn_model_class_name(const bopnn_model* m, int32_t label);
/* Encoded feature names, "column" or "column=level"; j in [0, d). */
BOPNN_API const char* bopnn_model_feature_name(const bopnn_model* m, size_t j);

/* Class probabilities for every row; probs must hold n_rows * K doubles
 * (row-major). The dataset must be encoded with this model's schema. */
BOPNN_API bopnn_status bopnn_predict(const bopnn_model* m, const bopnn_dataset* ds,
                                     double* probs);
/* Most probable label per row (ties toward the smallest label). */
BOPNN_API bopnn_status bopnn_classify(const bopnn_model* m, const bopnn_dataset* ds,
                                      int32_t* labels);

/* Per-feature importance scores; out must hold d doubles. Requires a
 * model fitted with the projection enabled. */
BOPNN_API bopnn_status bopnn_variable_importance(const bopnn_model* m, double* out);

/* Coordinates of the rows in the ensemble's aggregate discriminant view;
 * coords must hold n_rows * view_dims doubles (row-major). */
BOPNN_API bopnn_status bopnn_project(const bopnn_model* m, const bopnn_dataset* ds,
                                     int32_t view_dims, double* coords);

/* ------------------------------------------------------------------ */
/* Model selection helpers and comparison statistics                   */

/* Plug-in bag fraction for bagged 1-NN; clamped to 0.9 when >= 1. */
BOPNN_API double bopnn_plugin_bag_fraction(int32_t dimension, int32_t k_hat);

/* k in [1..k_max] maximizing leave-one-out accuracy (ties: smallest k). */
BOPNN_API bopnn_status bopnn_loocv_best_k(const bopnn_dataset* ds, int32_t k_max,
                                          int32_t* best_k);

/* Paired Wilcoxon signed-rank test on a - b; two-sided p-value. Exact
 * enumeration for up to 20 nonzero differences, then a tie-corrected
 * normal approximation. */
BOPNN_API bopnn_status bopnn_wilcoxon_signed_rank(const double* a, const double* b, size_t n,
                                                  double* w_plus, double* p_value);

/* Per-method scores from an accuracy table (num_methods x num_splits,
 * row-major): the split-wise min-max standardization averaged over
 * splits, and the studentized analogue. Either output may be NULL. */
BOPNN_API bopnn_status bopnn_standardized_scores(const double* accuracies, size_t num_methods,
                                                 size_t num_splits, double* minmax_scores,
                                                 double* student_scores);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BOPNN_H */
