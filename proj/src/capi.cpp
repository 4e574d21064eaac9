#include "bopnn.h"

#include <cmath>
#include <cstring>
#include <string>

#include "dataset.hpp"
#include "evalstats.hpp"
#include "model.hpp"
#include "persist.hpp"

// extern "C" surface. Exceptions from the core are caught at this
// boundary and turned into status codes plus a thread-local message.

namespace {

thread_local std::string g_last_error;

bopnn_status status_from(bopnn::ErrorCode code) {
  return static_cast<bopnn_status>(static_cast<int>(code));
}

template <typename Fn>
bopnn_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return BOPNN_OK;
  } catch (const bopnn::Error& e) {
    g_last_error = e.what();
    return status_from(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BOPNN_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return BOPNN_E_INTERNAL;
  }
}

bopnn_status invalid(const char* msg) {
  g_last_error = msg;
  return BOPNN_E_INVALID_ARGUMENT;
}

bopnn::model::HyperParams to_core(const bopnn_hyperparams& hp) {
  bopnn::model::HyperParams out;
  out.k = hp.k;
  out.subset_size = hp.q0;
  out.subspace_dim = hp.q;
  out.num_models = hp.num_models;
  out.bag_fraction = hp.pi_b;
  out.projection_enabled = hp.projection_enabled != 0;
  out.balanced = hp.balanced != 0;
  out.z_score = hp.z_score != 0;
  out.seed = hp.seed;
  return out;
}

bopnn_hyperparams from_core(const bopnn::model::HyperParams& hp) {
  bopnn_hyperparams out;
  out.k = hp.k;
  out.q0 = hp.subset_size;
  out.q = hp.subspace_dim;
  out.num_models = hp.num_models;
  out.pi_b = hp.bag_fraction;
  out.projection_enabled = hp.projection_enabled ? 1 : 0;
  out.balanced = hp.balanced ? 1 : 0;
  out.z_score = hp.z_score ? 1 : 0;
  out.seed = hp.seed;
  return out;
}

}  // namespace

struct bopnn_dataset {
  bopnn::dataio::LabeledDataset ds;
};

struct bopnn_model {
  bopnn::model::Ensemble ensemble;
  std::vector<std::string> feature_names;  // cached for stable pointers

  void refresh_names() {
    feature_names = bopnn::dataio::feature_names(ensemble.schema);
  }
};

struct bopnn_tune_result {
  bopnn::model::TuneResult result;
};

extern "C" {

const char* bopnn_version(void) { return "1.0.0"; }

const char* bopnn_last_error(void) { return g_last_error.c_str(); }

bopnn_status bopnn_dataset_load(const char* path, const char* target_column,
                                const char* const* categorical_columns, size_t n_categorical,
                                bopnn_dataset** out) {
  if (!path || !out) return invalid("path and out must not be null");
  return guarded([&] {
    std::vector<std::string> cats;
    for (size_t i = 0; i < n_categorical; ++i) cats.emplace_back(categorical_columns[i]);
    auto* handle = new bopnn_dataset{
        bopnn::dataio::load_table(path, target_column ? target_column : "", cats)};
    *out = handle;
  });
}

bopnn_status bopnn_dataset_load_for_model(const char* path, const bopnn_model* m,
                                          int require_target, bopnn_dataset** out) {
  if (!path || !m || !out) return invalid("path, model and out must not be null");
  return guarded([&] {
    auto* handle = new bopnn_dataset{bopnn::dataio::encode_with_schema(
        path, m->ensemble.schema, m->ensemble.class_names, m->ensemble.target_name,
        require_target != 0)};
    *out = handle;
  });
}

void bopnn_dataset_free(bopnn_dataset* ds) { delete ds; }

size_t bopnn_dataset_num_rows(const bopnn_dataset* ds) { return ds ? ds->ds.size() : 0; }

size_t bopnn_dataset_num_features(const bopnn_dataset* ds) { return ds ? ds->ds.dim() : 0; }

int32_t bopnn_dataset_num_classes(const bopnn_dataset* ds) {
  return ds ? ds->ds.num_classes() : 0;
}

int32_t bopnn_dataset_label(const bopnn_dataset* ds, size_t row) {
  if (!ds || !ds->ds.has_labels() || row >= ds->ds.size()) return 0;
  return ds->ds.y[row];
}

const char* bopnn_dataset_class_name(const bopnn_dataset* ds, int32_t label) {
  if (!ds || label < 1 || label > ds->ds.num_classes()) return nullptr;
  return ds->ds.class_names[static_cast<size_t>(label) - 1].c_str();
}

bopnn_status bopnn_dataset_split(const bopnn_dataset* ds, uint64_t seed, uint32_t rep_index,
                                 bopnn_dataset** train, bopnn_dataset** test) {
  if (!ds || !train || !test) return invalid("dataset and outputs must not be null");
  return guarded([&] {
    auto [tr, te] = bopnn::dataio::split(ds->ds, bopnn::dataio::SplitPlan{}, rep_index, seed);
    *train = new bopnn_dataset{std::move(tr)};
    *test = new bopnn_dataset{std::move(te)};
  });
}

uint32_t bopnn_repetitions_for(size_t n) {
  return static_cast<uint32_t>(bopnn::dataio::repetitions_for(n));
}

void bopnn_hyperparams_init(bopnn_hyperparams* hp) {
  if (!hp) return;
  *hp = from_core(bopnn::model::HyperParams{});
}

bopnn_status bopnn_fit(const bopnn_dataset* ds, const bopnn_hyperparams* hp, int32_t threads,
                       bopnn_model** out) {
  if (!ds || !hp || !out) return invalid("dataset, hyperparams and out must not be null");
  return guarded([&] {
    auto* handle = new bopnn_model{
        bopnn::model::fit_ensemble(ds->ds, to_core(*hp), threads), {}};
    handle->refresh_names();
    *out = handle;
  });
}

void bopnn_tune_options_init(bopnn_tune_options* opts) {
  if (!opts) return;
  bopnn::model::TuneOptions d;
  opts->n_draws = d.n_draws;
  opts->num_models = d.num_models;
  opts->pi_b = d.bag_fraction;
  opts->projection_enabled = d.projection_enabled ? 1 : 0;
  opts->balanced = d.balanced ? 1 : 0;
  opts->z_score = d.z_score ? 1 : 0;
  opts->seed = d.seed;
}

bopnn_status bopnn_tune(const bopnn_dataset* ds, const bopnn_tune_options* opts,
                        int32_t threads, bopnn_tune_result** out) {
  if (!ds || !opts || !out) return invalid("dataset, options and out must not be null");
  return guarded([&] {
    bopnn::model::TuneOptions o;
    o.n_draws = opts->n_draws;
    o.num_models = opts->num_models;
    o.bag_fraction = opts->pi_b;
    o.projection_enabled = opts->projection_enabled != 0;
    o.balanced = opts->balanced != 0;
    o.z_score = opts->z_score != 0;
    o.seed = opts->seed;
    o.threads = threads;
    *out = new bopnn_tune_result{bopnn::model::tune(ds->ds, o)};
  });
}

size_t bopnn_tune_num_trials(const bopnn_tune_result* tr) {
  return tr ? tr->result.trials.size() : 0;
}

bopnn_status bopnn_tune_trial(const bopnn_tune_result* tr, size_t index,
                              bopnn_hyperparams* hp_out, double* oob_out) {
  if (!tr || index >= tr->result.trials.size()) return invalid("trial index out of range");
  if (hp_out) *hp_out = from_core(tr->result.trials[index].hp);
  if (oob_out) *oob_out = tr->result.trials[index].oob;
  return BOPNN_OK;
}

size_t bopnn_tune_best_index(const bopnn_tune_result* tr) {
  return tr ? tr->result.chosen : 0;
}

void bopnn_tune_result_free(bopnn_tune_result* tr) { delete tr; }

bopnn_status bopnn_model_save(const bopnn_model* m, const char* path) {
  if (!m || !path) return invalid("model and path must not be null");
  return guarded([&] { bopnn::dataio::save_model(m->ensemble, path); });
}

bopnn_status bopnn_model_load(const char* path, bopnn_model** out) {
  if (!path || !out) return invalid("path and out must not be null");
  return guarded([&] {
    auto* handle = new bopnn_model{bopnn::dataio::load_model(path), {}};
    handle->refresh_names();
    *out = handle;
  });
}

void bopnn_model_free(bopnn_model* m) { delete m; }

int32_t bopnn_model_num_classes(const bopnn_model* m) {
  return m ? m->ensemble.num_classes : 0;
}

size_t bopnn_model_num_features(const bopnn_model* m) {
  return m ? m->ensemble.dim : 0;
}

bopnn_status bopnn_model_hyperparams(const bopnn_model* m, bopnn_hyperparams* out) {
  if (!m || !out) return invalid("model and out must not be null");
  *out = from_core(m->ensemble.hp);
  return BOPNN_OK;
}

double bopnn_model_oob_accuracy(const bopnn_model* m) {
  if (!m || !m->ensemble.oob_accuracy) return std::nan("");
  return *m->ensemble.oob_accuracy;
}

const char* bopnn_model_class_name(const bopnn_model* m, int32_t label) {
  if (!m || label < 1 || label > m->ensemble.num_classes) return nullptr;
  return m->ensemble.class_names[static_cast<size_t>(label) - 1].c_str();
}

const char* bopnn_model_feature_name(const bopnn_model* m, size_t j) {
  if (!m || j >= m->feature_names.size()) return nullptr;
  return m->feature_names[j].c_str();
}

bopnn_status bopnn_predict(const bopnn_model* m, const bopnn_dataset* ds, double* probs) {
  if (!m || !ds || !probs) return invalid("model, dataset and probs must not be null");
  if (ds->ds.dim() != m->ensemble.dim) {
    g_last_error = "dataset dimension does not match the model";
    return BOPNN_E_SCHEMA_MISMATCH;
  }
  return guarded([&] {
    const size_t k = static_cast<size_t>(m->ensemble.num_classes);
    for (size_t i = 0; i < ds->ds.size(); ++i) {
      const std::vector<double> p = bopnn::model::predict(m->ensemble, ds->ds.x.row(i));
      std::memcpy(probs + i * k, p.data(), k * sizeof(double));
    }
  });
}

bopnn_status bopnn_classify(const bopnn_model* m, const bopnn_dataset* ds, int32_t* labels) {
  if (!m || !ds || !labels) return invalid("model, dataset and labels must not be null");
  if (ds->ds.dim() != m->ensemble.dim) {
    g_last_error = "dataset dimension does not match the model";
    return BOPNN_E_SCHEMA_MISMATCH;
  }
  return guarded([&] {
    for (size_t i = 0; i < ds->ds.size(); ++i)
      labels[i] = bopnn::model::classify(m->ensemble, ds->ds.x.row(i));
  });
}

bopnn_status bopnn_variable_importance(const bopnn_model* m, double* out) {
  if (!m || !out) return invalid("model and out must not be null");
  return guarded([&] {
    const std::vector<double> imp = bopnn::model::variable_importance(m->ensemble);
    std::memcpy(out, imp.data(), imp.size() * sizeof(double));
  });
}

bopnn_status bopnn_project(const bopnn_model* m, const bopnn_dataset* ds, int32_t view_dims,
                           double* coords) {
  if (!m || !ds || !coords) return invalid("model, dataset and coords must not be null");
  if (view_dims < 1) return invalid("view_dims must be >= 1");
  if (ds->ds.dim() != m->ensemble.dim) {
    g_last_error = "dataset dimension does not match the model";
    return BOPNN_E_SCHEMA_MISMATCH;
  }
  return guarded([&] {
    const bopnn::linalg::Matrix c = bopnn::model::project_for_view(
        m->ensemble, ds->ds.x, static_cast<size_t>(view_dims));
    std::memcpy(coords, c.data().data(), c.data().size() * sizeof(double));
  });
}

double bopnn_plugin_bag_fraction(int32_t dimension, int32_t k_hat) {
  if (dimension < 1 || k_hat < 1) return std::nan("");
  return bopnn::model::plugin_bag_fraction(dimension, k_hat);
}

bopnn_status bopnn_loocv_best_k(const bopnn_dataset* ds, int32_t k_max, int32_t* best_k) {
  if (!ds || !best_k) return invalid("dataset and best_k must not be null");
  return guarded([&] { *best_k = bopnn::model::loocv_best_k(ds->ds, k_max); });
}

bopnn_status bopnn_wilcoxon_signed_rank(const double* a, const double* b, size_t n,
                                        double* w_plus, double* p_value) {
  if (!a || !b || n == 0) return invalid("need two nonempty samples");
  return guarded([&] {
    const bopnn::stats::WilcoxonResult r = bopnn::stats::wilcoxon_signed_rank(
        std::vector<double>(a, a + n), std::vector<double>(b, b + n));
    if (w_plus) *w_plus = r.w_plus;
    if (p_value) *p_value = r.p_value;
  });
}

bopnn_status bopnn_standardized_scores(const double* accuracies, size_t num_methods,
                                       size_t num_splits, double* minmax_scores,
                                       double* student_scores) {
  if (!accuracies) return invalid("accuracies must not be null");
  return guarded([&] {
    bopnn::linalg::Matrix acc(num_methods, num_splits);
    std::copy(accuracies, accuracies + num_methods * num_splits, acc.data().begin());
    if (minmax_scores) {
      const bopnn::linalg::Matrix s = bopnn::stats::standardize_minmax(acc);
      for (size_t m = 0; m < num_methods; ++m)
        minmax_scores[m] = bopnn::stats::dataset_score(s, m);
    }
    if (student_scores) {
      const bopnn::linalg::Matrix s = bopnn::stats::standardize_student(acc);
      for (size_t m = 0; m < num_methods; ++m)
        student_scores[m] = bopnn::stats::dataset_score(s, m);
    }
  });
}

}  // extern "C"
