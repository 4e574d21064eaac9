#include "model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "rng.hpp"

namespace bopnn::model {

using dataio::LabeledDataset;
using linalg::Matrix;

HyperParams resolve_hyperparams(HyperParams hp, std::size_t d) {
  if (d == 0) fail(ErrorCode::kInvalidArgument, "dataset has no features");
  if (hp.subset_size == 0)
    hp.subset_size = std::max(1, static_cast<int>(std::floor(0.75 * static_cast<double>(d))));
  if (hp.subspace_dim == 0) hp.subspace_dim = (hp.subset_size + 1) / 2;
  if (!hp.projection_enabled) hp.subspace_dim = hp.subset_size;

  if (hp.k < 1) fail(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (hp.num_models < 1) fail(ErrorCode::kInvalidArgument, "need at least one model");
  if (hp.bag_fraction <= 0.0 || hp.bag_fraction > 1.0)
    fail(ErrorCode::kInvalidArgument, "bag fraction must lie in (0, 1]");
  if (hp.subset_size < 1 || static_cast<std::size_t>(hp.subset_size) > d)
    fail(ErrorCode::kInvalidArgument, "covariate subset size out of range");
  if (hp.subspace_dim < 1 || hp.subspace_dim > hp.subset_size)
    fail(ErrorCode::kInvalidArgument, "subspace dimension out of range");
  return hp;
}

BaseModel fit_base(const LabeledDataset& ds, const HyperParams& hp, int model_index) {
  const std::size_t n = ds.size();
  const std::size_t d = ds.dim();
  const std::size_t q0 = static_cast<std::size_t>(hp.subset_size);
  const std::size_t n_bag =
      static_cast<std::size_t>(std::floor(hp.bag_fraction * static_cast<double>(n)));
  if (n_bag < 2) fail(ErrorCode::kInsufficientPoints, "bag would hold fewer than two points");

  rng::SplitMix64 stream(
      rng::substream(hp.seed, rng::kCtxModelFit, static_cast<std::uint64_t>(model_index)));

  // Redraw the bag until it spans at least two classes.
  BaseModel m;
  bool ok = false;
  for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
    m.inbag = stream.sample_without_replacement(n, n_bag);
    int first = ds.y[m.inbag.front()];
    for (std::size_t i : m.inbag)
      if (ds.y[i] != first) {
        ok = true;
        break;
      }
  }
  if (!ok) fail(ErrorCode::kSingleClassSample, "bag collapsed to a single class");

  m.subset = stream.sample_without_replacement(d, q0);

  Matrix restricted(n_bag, q0);
  m.bag.labels.resize(n_bag);
  for (std::size_t i = 0; i < n_bag; ++i) {
    const double* src = ds.x.row(m.inbag[i]);
    double* dst = restricted.row(i);
    for (std::size_t j = 0; j < q0; ++j) dst[j] = src[m.subset[j]];
    m.bag.labels[i] = ds.y[m.inbag[i]];
  }
  m.bag.num_classes = ds.num_classes();

  if (hp.projection_enabled) {
    neighbors::PointSet view{restricted, m.bag.labels, ds.num_classes()};
    const subspace::ScatterPair sc =
        subspace::scatter_pair(view, static_cast<std::size_t>(hp.k), hp.balanced);
    subspace::DiscriminantBasis db = subspace::discriminant_basis(
        sc, m.subset, static_cast<std::size_t>(hp.subspace_dim));
    m.bag.points = linalg::matmul(restricted, db.basis);
    m.basis = std::move(db.basis);
    m.values = std::move(db.values);
  } else {
    m.bag.points = std::move(restricted);
  }
  return m;
}

std::vector<double> predict_base(const BaseModel& m, const double* x, int k, int num_classes) {
  const std::size_t q0 = m.subset.size();
  std::vector<double> restricted(q0);
  for (std::size_t j = 0; j < q0; ++j) restricted[j] = x[m.subset[j]];

  const std::size_t k_eff =
      std::min<std::size_t>(static_cast<std::size_t>(k), m.bag.size());
  if (!m.projected())
    return neighbors::vote_distribution(m.bag, restricted.data(), k_eff, num_classes);

  const std::size_t q = m.basis.cols();
  std::vector<double> z(q, 0.0);
  for (std::size_t j = 0; j < q0; ++j) {
    const double rj = restricted[j];
    const double* bj = m.basis.row(j);
    for (std::size_t l = 0; l < q; ++l) z[l] += rj * bj[l];
  }
  return neighbors::vote_distribution(m.bag, z.data(), k_eff, num_classes);
}

namespace {

// Runs fn(i) for i in [0, count) across `threads` workers. Work items are
// handed out through an atomic counter; fn must only touch its own slot.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

int argmax_label(const std::vector<double>& probs) {
  std::size_t arg = 0;
  for (std::size_t c = 1; c < probs.size(); ++c)
    if (probs[c] > probs[arg]) arg = c;
  return static_cast<int>(arg) + 1;
}

double oob_accuracy_impl(const Ensemble& e, const Matrix& x, const std::vector<int>& y,
                         int threads) {
  const std::size_t n = x.rows();
  const std::size_t num_models = e.models.size();

  // Bag membership lookup, one byte per (model, point).
  std::vector<std::vector<std::uint8_t>> in_bag(num_models, std::vector<std::uint8_t>(n, 0));
  for (std::size_t b = 0; b < num_models; ++b)
    for (std::size_t i : e.models[b].inbag) in_bag[b][i] = 1;

  std::vector<std::uint8_t> scored(n, 0);
  std::vector<std::uint8_t> correct(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<double> acc(static_cast<std::size_t>(e.num_classes), 0.0);
    std::size_t used = 0;
    for (std::size_t b = 0; b < num_models; ++b) {
      if (in_bag[b][i]) continue;
      const std::vector<double> p = predict_base(e.models[b], x.row(i), e.hp.k, e.num_classes);
      for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += p[c];
      ++used;
    }
    if (used == 0) return;
    scored[i] = 1;
    correct[i] = argmax_label(acc) == y[i] ? 1 : 0;
  });

  std::size_t n_scored = 0;
  std::size_t n_correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    n_scored += scored[i];
    n_correct += correct[i];
  }
  if (n_scored == 0)
    fail(ErrorCode::kNoOobPoints, "every training point is inside every bag");
  return static_cast<double>(n_correct) / static_cast<double>(n_scored);
}

}  // namespace

Ensemble fit_ensemble(const LabeledDataset& ds, HyperParams hp, int threads) {
  if (!ds.has_labels()) fail(ErrorCode::kInvalidArgument, "training data has no labels");
  if (ds.size() < 2) fail(ErrorCode::kInsufficientPoints, "need at least two training points");
  hp = resolve_hyperparams(hp, ds.dim());

  Ensemble e;
  e.hp = hp;
  e.num_classes = ds.num_classes();
  e.dim = ds.dim();
  e.schema = ds.schema;
  e.class_names = ds.class_names;
  e.target_name = ds.target_name;

  const LabeledDataset* fit_ds = &ds;
  LabeledDataset scaled;
  if (hp.z_score) {
    e.scaler = dataio::fit_scaler(ds.x);
    scaled = ds;
    dataio::apply_scaler(*e.scaler, scaled.x);
    fit_ds = &scaled;
  }

  const std::size_t num_models = static_cast<std::size_t>(hp.num_models);
  e.models.resize(num_models);
  std::vector<std::exception_ptr> errors(num_models);
  parallel_for(num_models, threads, [&](std::size_t b) {
    try {
      e.models[b] = fit_base(*fit_ds, hp, static_cast<int>(b) + 1);
    } catch (...) {
      errors[b] = std::current_exception();
    }
  });
  for (const std::exception_ptr& err : errors)
    if (err) std::rethrow_exception(err);

  const std::size_t n_bag =
      static_cast<std::size_t>(std::floor(hp.bag_fraction * static_cast<double>(ds.size())));
  if (n_bag < ds.size()) {
    try {
      e.oob_accuracy = oob_accuracy_impl(e, fit_ds->x, fit_ds->y, threads);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kNoOobPoints) throw;
    }
  }
  return e;
}

std::vector<double> predict(const Ensemble& e, const double* x) {
  std::vector<double> point(x, x + e.dim);
  if (e.scaler) dataio::apply_scaler(*e.scaler, point.data(), e.dim);

  std::vector<double> acc(static_cast<std::size_t>(e.num_classes), 0.0);
  for (const BaseModel& m : e.models) {
    const std::vector<double> p = predict_base(m, point.data(), e.hp.k, e.num_classes);
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += p[c];
  }
  const double inv = 1.0 / static_cast<double>(e.models.size());
  for (double& v : acc) v *= inv;
  return acc;
}

int classify(const Ensemble& e, const double* x) { return argmax_label(predict(e, x)); }

double oob_accuracy(const Ensemble& e, const LabeledDataset& ds, int threads) {
  if (ds.size() == 0 || !ds.has_labels())
    fail(ErrorCode::kInvalidArgument, "oob_accuracy needs the labeled training set");
  if (e.scaler) {
    Matrix x = ds.x;
    dataio::apply_scaler(*e.scaler, x);
    return oob_accuracy_impl(e, x, ds.y, threads);
  }
  return oob_accuracy_impl(e, ds.x, ds.y, threads);
}

TuneResult tune(const LabeledDataset& ds, const TuneOptions& opts) {
  if (opts.n_draws < 1) fail(ErrorCode::kInvalidArgument, "need at least one tuning draw");
  const std::size_t d = ds.dim();
  if (d == 0) fail(ErrorCode::kInvalidArgument, "dataset has no features");

  const double root = std::sqrt(static_cast<double>(d));
  const std::int64_t lo = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(root)));
  const std::int64_t hi = std::max(
      lo, std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(10.0 * root)),
                                 static_cast<std::int64_t>(d)));

  rng::SplitMix64 draws(rng::substream(opts.seed, rng::kCtxTuneDraws, 0));
  TuneResult result;
  result.trials.reserve(static_cast<std::size_t>(opts.n_draws));

  for (int t = 0; t < opts.n_draws; ++t) {
    HyperParams hp;
    hp.k = static_cast<int>(draws.uniform_int(1, 5));
    hp.subset_size = static_cast<int>(draws.uniform_int(lo, hi));
    if (opts.projection_enabled) {
      const std::int64_t q_lo = (hp.subset_size + 1) / 2;
      hp.subspace_dim = static_cast<int>(draws.uniform_int(q_lo, hp.subset_size));
    } else {
      hp.subspace_dim = hp.subset_size;
    }
    hp.num_models = opts.num_models;
    hp.bag_fraction = opts.bag_fraction;
    hp.projection_enabled = opts.projection_enabled;
    hp.balanced = opts.balanced;
    hp.z_score = opts.z_score;
    hp.seed = rng::substream(opts.seed, rng::kCtxTrialFit, static_cast<std::uint64_t>(t));

    double oob = -1.0;
    try {
      const Ensemble e = fit_ensemble(ds, hp, opts.threads);
      oob = e.oob_accuracy.value_or(-1.0);
    } catch (const Error&) {
      // recorded as a failed trial
    }
    result.trials.push_back({hp, oob});
  }

  double best = -1.0;
  std::size_t chosen = result.trials.size();
  for (std::size_t t = 0; t < result.trials.size(); ++t) {
    if (result.trials[t].oob >= 0.0 && result.trials[t].oob > best) {
      best = result.trials[t].oob;
      chosen = t;
    }
  }
  if (chosen == result.trials.size())
    fail(ErrorCode::kDegenerateInput, "every tuning trial failed");
  result.chosen = chosen;
  return result;
}

double plugin_bag_fraction(int dimension, int k_hat) {
  if (dimension < 1 || k_hat < 1)
    fail(ErrorCode::kInvalidArgument, "plugin_bag_fraction needs positive arguments");
  const double p = static_cast<double>(dimension);
  const double g = std::tgamma(2.0 + 2.0 / p);
  const double fraction = std::pow(2.0 * g * g, p / (p + 4.0)) / static_cast<double>(k_hat);
  return fraction >= 1.0 ? 0.9 : fraction;
}

int loocv_best_k(const LabeledDataset& ds, int k_max) {
  const std::size_t n = ds.size();
  if (n < 2 || !ds.has_labels())
    fail(ErrorCode::kInsufficientPoints, "leave-one-out needs at least two labeled points");
  if (k_max < 1) fail(ErrorCode::kInvalidArgument, "k_max must be >= 1");
  const std::size_t k_cap = std::min<std::size_t>(static_cast<std::size_t>(k_max), n - 1);
  const int num_classes = ds.num_classes();

  neighbors::PointSet ps{ds.x, ds.y, num_classes};
  std::vector<std::vector<int>> neighbour_labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<std::size_t> nn = neighbors::knn_indices(ps, ds.x.row(i), k_cap, i);
    neighbour_labels[i].reserve(k_cap);
    for (std::size_t idx : nn) neighbour_labels[i].push_back(ds.y[idx]);
  }

  std::vector<std::vector<int>> counts(n, std::vector<int>(static_cast<std::size_t>(num_classes), 0));
  int best_k = 1;
  double best_acc = -1.0;
  for (std::size_t k = 1; k <= k_cap; ++k) {
    std::size_t n_correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      counts[i][static_cast<std::size_t>(neighbour_labels[i][k - 1] - 1)] += 1;
      std::size_t arg = 0;
      for (std::size_t c = 1; c < counts[i].size(); ++c)
        if (counts[i][c] > counts[i][arg]) arg = c;
      if (static_cast<int>(arg) + 1 == ds.y[i]) ++n_correct;
    }
    const double acc = static_cast<double>(n_correct) / static_cast<double>(n);
    if (acc > best_acc) {
      best_acc = acc;
      best_k = static_cast<int>(k);
    }
  }
  return best_k;
}

std::vector<double> variable_importance(const Ensemble& e) {
  if (!e.hp.projection_enabled)
    fail(ErrorCode::kProjectionDisabled, "importance needs a projected ensemble");
  std::vector<double> total(e.dim, 0.0);
  for (const BaseModel& m : e.models) {
    const std::vector<double> part = subspace::importance_contribution(m.discriminant(), e.dim);
    for (std::size_t j = 0; j < e.dim; ++j) total[j] += part[j];
  }
  const double inv = 1.0 / static_cast<double>(e.models.size());
  for (double& v : total) v *= inv;
  return total;
}

linalg::Matrix project_for_view(const Ensemble& e, const Matrix& x, std::size_t view_dims) {
  if (!e.hp.projection_enabled)
    fail(ErrorCode::kProjectionDisabled, "projection view needs a projected ensemble");
  if (x.cols() != e.dim) fail(ErrorCode::kInvalidArgument, "points have the wrong dimension");

  Matrix points = x;
  if (e.scaler) dataio::apply_scaler(*e.scaler, points);

  std::vector<subspace::DiscriminantBasis> bases;
  bases.reserve(e.models.size());
  for (const BaseModel& m : e.models) bases.push_back(m.discriminant());
  std::vector<const subspace::DiscriminantBasis*> refs;
  refs.reserve(bases.size());
  for (const subspace::DiscriminantBasis& b : bases) refs.push_back(&b);
  const linalg::SymMatrix proj = subspace::ensemble_projection(refs, e.dim);

  const std::size_t n = points.rows();
  Matrix mapped(n, e.dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = points.row(i);
    double* mi = mapped.row(i);
    for (std::size_t j = 0; j < e.dim; ++j) {
      double acc = 0.0;
      for (std::size_t l = 0; l < e.dim; ++l) acc += proj(j, l) * xi[l];
      mi[j] = acc;
    }
  }

  const linalg::EigenBasis pca = linalg::pca_basis(mapped, view_dims);

  std::vector<double> mean(e.dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* mi = mapped.row(i);
    for (std::size_t j = 0; j < e.dim; ++j) mean[j] += mi[j];
  }
  for (double& v : mean) v /= static_cast<double>(n);

  Matrix coords(n, view_dims);
  for (std::size_t i = 0; i < n; ++i) {
    const double* mi = mapped.row(i);
    for (std::size_t v = 0; v < view_dims; ++v) {
      double acc = 0.0;
      for (std::size_t j = 0; j < e.dim; ++j) acc += (mi[j] - mean[j]) * pca.vectors(j, v);
      coords(i, v) = acc;
    }
  }
  return coords;
}

}  // namespace bopnn::model
