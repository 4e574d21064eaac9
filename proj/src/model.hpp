#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dataset.hpp"
#include "neighbors.hpp"
#include "subspace.hpp"

// Bagged projected nearest-neighbour ensembles. Each base model draws a
// bootstrap sample (without replacement) and a covariate subset, fits a
// discriminant subspace from the neighbour scatter matrices, and votes
// with kNN in the projected coordinates. The ensemble averages the class
// distributions of its members.
//
// The ablation variants need no separate code paths:
//   bagged kNN without the discriminant step : projection_enabled = false
//   bagged 1-NN with tuned bag fraction      : projection off, k = 1
//   bagged 1-NN with the plug-in fraction    : as above, bag_fraction from
//                                              plugin_bag_fraction()
//   single kNN                               : num_models = 1, bag_fraction = 1

namespace bopnn::model {

inline constexpr std::uint64_t kDefaultSeed = 1;

struct HyperParams {
  int k = 3;
  int subset_size = 0;    // covariates per model (q0); 0 -> floor(0.75 d), min 1
  int subspace_dim = 0;   // discriminant dims kept (q); 0 -> ceil(0.5 q0)
  int num_models = 100;   // B
  double bag_fraction = 0.63;  // share of training points per model
  bool projection_enabled = true;
  bool balanced = false;  // equal class weights in the scatter matrices
  bool z_score = false;
  std::uint64_t seed = kDefaultSeed;
};

// Fills the derived defaults and validates against the ambient dimension.
HyperParams resolve_hyperparams(HyperParams hp, std::size_t d);

struct BaseModel {
  std::vector<std::size_t> subset;  // sorted ambient column indices, size q0
  linalg::Matrix basis;             // q0 x q; 0x0 when projection is disabled
  std::vector<double> values;       // eigenvalues for the kept directions
  std::vector<std::size_t> inbag;   // sorted training-row indices, size floor(pi*n)
  neighbors::PointSet bag;          // inbag points in model coordinates + labels

  bool projected() const { return basis.cols() > 0; }
  subspace::DiscriminantBasis discriminant() const { return {subset, basis, values}; }
};

struct Ensemble {
  std::vector<BaseModel> models;
  int num_classes = 0;
  std::size_t dim = 0;
  HyperParams hp;
  std::optional<double> oob_accuracy;  // absent when no point was ever out of bag
  std::vector<dataio::ColumnSchema> schema;
  std::vector<std::string> class_names;
  std::string target_name;
  std::optional<dataio::Scaler> scaler;
};

// Fits the model_index-th base model (1-based; the index seeds the model's
// private random stream). The bag is redrawn up to 100 times when it holds
// fewer than two classes.
BaseModel fit_base(const dataio::LabeledDataset& ds, const HyperParams& hp, int model_index);

// Class distribution voted by one base model; x is a full ambient point
// (already scaled when z-scoring is active). k is clamped to the bag size.
std::vector<double> predict_base(const BaseModel& m, const double* x, int k, int num_classes);

// Fits num_models base models (in parallel when threads > 1; results do
// not depend on the thread count) and fills the out-of-bag accuracy.
Ensemble fit_ensemble(const dataio::LabeledDataset& ds, HyperParams hp, int threads = 1);

// Mean of the member distributions.
std::vector<double> predict(const Ensemble& e, const double* x);

// Mode of predict(); ties resolve to the smallest label.
int classify(const Ensemble& e, const double* x);

// Accuracy over training points scored only by models whose bag excludes
// them. Points contained in every bag are skipped; throws kNoOobPoints if
// that leaves nothing to score.
double oob_accuracy(const Ensemble& e, const dataio::LabeledDataset& ds, int threads = 1);

struct TuneOptions {
  int n_draws = 30;
  int num_models = 100;
  double bag_fraction = 0.63;
  bool projection_enabled = true;
  bool balanced = false;
  bool z_score = false;
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
};

struct TuneTrial {
  HyperParams hp;
  double oob;  // -1 marks a failed fit
};

struct TuneResult {
  std::vector<TuneTrial> trials;
  std::size_t chosen = 0;  // earliest trial with maximal OOB accuracy
};

// Random search over k ~ U{1..5}, q0 ~ U{floor(sqrt(d))..min(floor(10
// sqrt(d)), d)} and q|q0 ~ U{ceil(0.5 q0)..q0}, scored by OOB accuracy.
TuneResult tune(const dataio::LabeledDataset& ds, const TuneOptions& opts);

// Asymptotically motivated bag fraction for bagged 1-NN, clamped to 0.9
// when the formula exceeds one. `dimension` is the ambient dimension.
double plugin_bag_fraction(int dimension, int k_hat);

// k in [1..k_max] maximizing leave-one-out accuracy; ties take the
// smallest k.
int loocv_best_k(const dataio::LabeledDataset& ds, int k_max);

// Per-feature scores: mean over models of the eigenvalue-weighted squared
// basis loadings, embedded in ambient coordinates.
std::vector<double> variable_importance(const Ensemble& e);

// Rows of x mapped through the averaged ensemble projection and expressed
// in the top principal directions of the projected cloud.
linalg::Matrix project_for_view(const Ensemble& e, const linalg::Matrix& x,
                                std::size_t view_dims = 2);

}  // namespace bopnn::model
