// bopnn command-line front end. Everything goes through the C API in
// bopnn.h; this file only parses flags, shuttles buffers and writes the
// report files. All primary outputs are byte-identical for a given seed
// and flag set, independent of --threads.

#include <bopnn.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

int exit_code_for(bopnn_status st) {
  switch (st) {
    case BOPNN_OK:
      return kExitOk;
    case BOPNN_E_INVALID_ARGUMENT:
    case BOPNN_E_INSUFFICIENT_POINTS:
    case BOPNN_E_SINGLE_CLASS:
    case BOPNN_E_PROJECTION_DISABLED:
    case BOPNN_E_PARSE:
    case BOPNN_E_MISSING_VALUE:
    case BOPNN_E_UNKNOWN_TARGET:
    case BOPNN_E_SCHEMA_MISMATCH:
    case BOPNN_E_TOO_SMALL:
    case BOPNN_E_VERSION_MISMATCH:
    case BOPNN_E_CORRUPT_FILE:
    case BOPNN_E_IO:
      return kExitUsage;
    default:
      return kExitInternal;
  }
}

struct CliError {
  int code;
  std::string message;
};

void check(bopnn_status st, const std::string& context) {
  if (st == BOPNN_OK) return;
  throw CliError{exit_code_for(st), context + ": " + bopnn_last_error()};
}

// Shortest round-trip decimal, so report files are stable byte-for-byte.
std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

struct DatasetHandle {
  bopnn_dataset* ptr = nullptr;
  ~DatasetHandle() { bopnn_dataset_free(ptr); }
};

struct ModelHandle {
  bopnn_model* ptr = nullptr;
  ~ModelHandle() { bopnn_model_free(ptr); }
};

struct TuneHandle {
  bopnn_tune_result* ptr = nullptr;
  ~TuneHandle() { bopnn_tune_result_free(ptr); }
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError{kExitUsage, "cannot write " + path};
  return out;
}

std::string path_stem(const std::string& path) {
  const std::size_t slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  const std::size_t dot = name.find_last_of('.');
  if (dot != std::string::npos && dot > 0) name.resize(dot);
  return name;
}

struct Options {
  std::string input;
  std::string target;
  std::string variant = "bopnn";
  std::string model_path;
  std::string out;
  std::vector<std::string> categoricals;
  int k = 0;  // 0 = not set
  int q0 = 0;
  int q = 0;
  int num_models = 100;
  double pi_b = 0.63;
  bool pi_b_given = false;
  bool k_given = false;
  bool balanced = false;
  bool no_projection = false;
  bool z_score = false;
  bool run_tune = false;
  std::uint64_t seed = 1;
  int threads = 1;
  int trials = 30;
  int view_dims = 2;
};

constexpr int kDefaultLoocvCap = 20;

DatasetHandle load_input(const Options& opt) {
  std::vector<const char*> cats;
  for (const std::string& c : opt.categoricals) cats.push_back(c.c_str());
  DatasetHandle ds;
  check(bopnn_dataset_load(opt.input.c_str(), opt.target.empty() ? nullptr : opt.target.c_str(),
                           cats.empty() ? nullptr : cats.data(), cats.size(), &ds.ptr),
        "loading " + opt.input);
  return ds;
}

// Resolves one variant into concrete hyperparameters. The adaptive
// variants (bopnn, bopnn-noproj) may be tuned separately; the 1-NN bags
// fix k = 1 and use the full covariate set.
bopnn_hyperparams variant_hyperparams(const std::string& variant, const Options& opt,
                                      const bopnn_dataset* ds) {
  bopnn_hyperparams hp;
  bopnn_hyperparams_init(&hp);
  hp.num_models = opt.num_models;
  hp.pi_b = opt.pi_b;
  hp.balanced = opt.balanced ? 1 : 0;
  hp.z_score = opt.z_score ? 1 : 0;
  hp.seed = opt.seed;
  if (opt.k > 0) hp.k = opt.k;
  if (opt.q0 > 0) hp.q0 = opt.q0;
  if (opt.q > 0) hp.q = opt.q;
  if (opt.no_projection) hp.projection_enabled = 0;

  const int d = static_cast<int>(bopnn_dataset_num_features(ds));
  if (variant == "bopnn") {
    // flags as given
  } else if (variant == "bopnn-noproj") {
    hp.projection_enabled = 0;
  } else if (variant == "bnn" || variant == "bnn-inf") {
    hp.projection_enabled = 0;
    hp.k = 1;
    hp.q0 = d;
    hp.q = d;
    if (variant == "bnn-inf") {
      int k_hat = 0;
      check(bopnn_loocv_best_k(ds, opt.k_given ? opt.k : kDefaultLoocvCap, &k_hat),
            "leave-one-out search");
      hp.pi_b = bopnn_plugin_bag_fraction(d, k_hat);
    }
  } else if (variant == "knn") {
    hp.projection_enabled = 0;
    hp.num_models = 1;
    hp.pi_b = 1.0;
    hp.q0 = d;
    hp.q = d;
    if (!opt.k_given) {
      int best_k = 0;
      check(bopnn_loocv_best_k(ds, kDefaultLoocvCap, &best_k), "leave-one-out search");
      hp.k = best_k;
    }
  } else {
    throw CliError{kExitUsage, "unknown variant '" + variant + "'"};
  }
  return hp;
}

// Fits one variant on a training set, applying the per-variant selection
// protocol (OOB random search, OOB grid over the bag fraction, or
// leave-one-out for k).
ModelHandle fit_variant(const std::string& variant, const Options& opt,
                        const bopnn_dataset* train, int tune_draws) {
  ModelHandle model;
  if ((variant == "bopnn" || variant == "bopnn-noproj") && tune_draws > 0) {
    bopnn_tune_options topts;
    bopnn_tune_options_init(&topts);
    topts.n_draws = tune_draws;
    topts.num_models = opt.num_models;
    topts.pi_b = opt.pi_b;
    topts.projection_enabled = (variant == "bopnn" && !opt.no_projection) ? 1 : 0;
    topts.balanced = opt.balanced ? 1 : 0;
    topts.z_score = opt.z_score ? 1 : 0;
    topts.seed = opt.seed;
    TuneHandle tr;
    check(bopnn_tune(train, &topts, opt.threads, &tr.ptr), "tuning " + variant);
    bopnn_hyperparams best;
    check(bopnn_tune_trial(tr.ptr, bopnn_tune_best_index(tr.ptr), &best, nullptr),
          "reading tuning result");
    check(bopnn_fit(train, &best, opt.threads, &model.ptr), "fitting " + variant);
    return model;
  }

  bopnn_hyperparams hp = variant_hyperparams(variant, opt, train);
  if (variant == "bnn" && !opt.pi_b_given) {
    // OOB grid over the bag fraction.
    double best_oob = -1.0;
    bopnn_hyperparams best = hp;
    for (int g = 1; g <= 9; ++g) {
      hp.pi_b = 0.1 * g;
      ModelHandle cand;
      if (bopnn_fit(train, &hp, opt.threads, &cand.ptr) != BOPNN_OK) continue;
      const double oob = bopnn_model_oob_accuracy(cand.ptr);
      if (!std::isnan(oob) && oob > best_oob) {
        best_oob = oob;
        best = hp;
      }
    }
    if (best_oob < 0.0) throw CliError{kExitInternal, "bag fraction grid search failed"};
    hp = best;
  }
  check(bopnn_fit(train, &hp, opt.threads, &model.ptr), "fitting " + variant);
  return model;
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

double dataset_accuracy(const bopnn_model* model, const bopnn_dataset* ds) {
  const size_t n = bopnn_dataset_num_rows(ds);
  std::vector<int32_t> pred(n);
  check(bopnn_classify(model, ds, pred.data()), "classifying");
  size_t hits = 0;
  for (size_t i = 0; i < n; ++i)
    if (pred[i] == bopnn_dataset_label(ds, i)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(n);
}

// ---------------------------------------------------------------- train

int cmd_train(const Options& opt) {
  const auto started = std::chrono::steady_clock::now();
  DatasetHandle ds = load_input(opt);

  ModelHandle model =
      fit_variant(opt.variant, opt, ds.ptr, opt.run_tune ? opt.trials : 0);

  const std::string out = opt.out.empty() ? "model.bopnn.json" : opt.out;
  check(bopnn_model_save(model.ptr, out.c_str()), "saving model");

  bopnn_hyperparams hp;
  bopnn_model_hyperparams(model.ptr, &hp);
  const double oob = bopnn_model_oob_accuracy(model.ptr);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;

  std::cout << "variant=" << opt.variant << "\n"
            << "n=" << bopnn_dataset_num_rows(ds.ptr) << "\n"
            << "d=" << bopnn_dataset_num_features(ds.ptr) << "\n"
            << "classes=" << bopnn_dataset_num_classes(ds.ptr) << "\n"
            << "k=" << hp.k << "\n"
            << "q0=" << hp.q0 << "\n"
            << "q=" << hp.q << "\n"
            << "B=" << hp.num_models << "\n"
            << "pi_b=" << fmt(hp.pi_b) << "\n"
            << "oob_accuracy=" << fmt(oob) << "\n"
            << "wall_time_seconds=" << fmt(elapsed.count()) << "\n"
            << "model_file=" << out << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- tune

int cmd_tune(const Options& opt) {
  DatasetHandle ds = load_input(opt);

  bopnn_tune_options topts;
  bopnn_tune_options_init(&topts);
  topts.n_draws = opt.trials;
  topts.num_models = opt.num_models;
  topts.pi_b = opt.pi_b;
  topts.projection_enabled = (opt.no_projection || opt.variant == "bopnn-noproj") ? 0 : 1;
  topts.balanced = opt.balanced ? 1 : 0;
  topts.z_score = opt.z_score ? 1 : 0;
  topts.seed = opt.seed;

  TuneHandle tr;
  check(bopnn_tune(ds.ptr, &topts, opt.threads, &tr.ptr), "tuning");

  const std::string out = opt.out.empty() ? "model.bopnn.json" : opt.out;
  const std::string trials_path = out + ".trials.csv";
  {
    std::ofstream csv = open_output(trials_path);
    csv << "trial,k,q0,q,oob\n";
    for (size_t t = 0; t < bopnn_tune_num_trials(tr.ptr); ++t) {
      bopnn_hyperparams hp;
      double oob;
      bopnn_tune_trial(tr.ptr, t, &hp, &oob);
      csv << t << ',' << hp.k << ',' << hp.q0 << ',' << hp.q << ',' << fmt(oob) << "\n";
    }
  }

  const size_t best = bopnn_tune_best_index(tr.ptr);
  bopnn_hyperparams best_hp;
  double best_oob;
  bopnn_tune_trial(tr.ptr, best, &best_hp, &best_oob);

  ModelHandle model;
  check(bopnn_fit(ds.ptr, &best_hp, opt.threads, &model.ptr), "fitting best trial");
  check(bopnn_model_save(model.ptr, out.c_str()), "saving model");

  std::cout << "trials=" << bopnn_tune_num_trials(tr.ptr) << "\n"
            << "best_trial=" << best << "\n"
            << "k=" << best_hp.k << "\n"
            << "q0=" << best_hp.q0 << "\n"
            << "q=" << best_hp.q << "\n"
            << "oob_accuracy=" << fmt(best_oob) << "\n"
            << "trials_file=" << trials_path << "\n"
            << "model_file=" << out << "\n";
  return kExitOk;
}

// -------------------------------------------------------------- predict

int cmd_predict(const Options& opt) {
  ModelHandle model;
  check(bopnn_model_load(opt.model_path.c_str(), &model.ptr), "loading model");

  DatasetHandle ds;
  check(bopnn_dataset_load_for_model(opt.input.c_str(), model.ptr, 0, &ds.ptr),
        "encoding " + opt.input);

  const size_t n = bopnn_dataset_num_rows(ds.ptr);
  const size_t num_classes = static_cast<size_t>(bopnn_model_num_classes(model.ptr));
  std::vector<double> probs(n * num_classes);
  check(bopnn_predict(model.ptr, ds.ptr, probs.data()), "predicting");

  const std::string out = opt.out.empty() ? "predictions.csv" : opt.out;
  std::ofstream csv = open_output(out);
  csv << "id,predicted_label";
  for (size_t c = 1; c <= num_classes; ++c) csv << ",prob_" << c;
  csv << "\n";
  for (size_t i = 0; i < n; ++i) {
    size_t arg = 0;
    for (size_t c = 1; c < num_classes; ++c)
      if (probs[i * num_classes + c] > probs[i * num_classes + arg]) arg = c;
    csv << (i + 1) << ','
        << bopnn_model_class_name(model.ptr, static_cast<int32_t>(arg) + 1);
    for (size_t c = 0; c < num_classes; ++c) csv << ',' << fmt(probs[i * num_classes + c]);
    csv << "\n";
  }
  std::cout << "rows=" << n << "\npredictions_file=" << out << "\n";
  return kExitOk;
}

// ----------------------------------------------------------- importance

int cmd_importance(const Options& opt) {
  ModelHandle model;
  check(bopnn_model_load(opt.model_path.c_str(), &model.ptr), "loading model");

  const size_t d = bopnn_model_num_features(model.ptr);
  std::vector<double> importance(d);
  check(bopnn_variable_importance(model.ptr, importance.data()), "computing importance");

  const std::string out = opt.out.empty() ? "importance.csv" : opt.out;
  std::ofstream csv = open_output(out);
  csv << "variable,importance\n";
  for (size_t j = 0; j < d; ++j)
    csv << bopnn_model_feature_name(model.ptr, j) << ',' << fmt(importance[j]) << "\n";
  std::cout << "variables=" << d << "\nimportance_file=" << out << "\n";
  return kExitOk;
}

// -------------------------------------------------------------- project

int cmd_project(const Options& opt) {
  ModelHandle model;
  check(bopnn_model_load(opt.model_path.c_str(), &model.ptr), "loading model");

  DatasetHandle ds;
  check(bopnn_dataset_load_for_model(opt.input.c_str(), model.ptr, 0, &ds.ptr),
        "encoding " + opt.input);

  const size_t n = bopnn_dataset_num_rows(ds.ptr);
  const size_t v = static_cast<size_t>(opt.view_dims);
  std::vector<double> coords(n * v);
  check(bopnn_project(model.ptr, ds.ptr, opt.view_dims, coords.data()), "projecting");

  const std::string out = opt.out.empty() ? "projection.csv" : opt.out;
  std::ofstream csv = open_output(out);
  csv << "id";
  for (size_t c = 1; c <= v; ++c) csv << ",pc" << c;
  csv << ",label\n";
  for (size_t i = 0; i < n; ++i) {
    csv << (i + 1);
    for (size_t c = 0; c < v; ++c) csv << ',' << fmt(coords[i * v + c]);
    const int32_t label = bopnn_dataset_label(ds.ptr, i);
    const char* name = label > 0 ? bopnn_dataset_class_name(ds.ptr, label) : "";
    csv << ',' << name << "\n";
  }
  std::cout << "rows=" << n << "\nprojection_file=" << out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- bench

int cmd_bench(const Options& opt) {
  const std::vector<std::string> variants = split_csv_list(opt.variant);
  if (variants.size() < 2)
    throw CliError{kExitUsage, "bench needs at least two comma-separated variants"};

  DatasetHandle full = load_input(opt);
  const size_t n = bopnn_dataset_num_rows(full.ptr);
  const uint32_t reps = bopnn_repetitions_for(n);
  const std::string dataset_name = path_stem(opt.input);

  const size_t m = variants.size();
  std::vector<double> acc(m * reps, 0.0);  // method-major

  for (uint32_t rep = 0; rep < reps; ++rep) {
    DatasetHandle train, test;
    check(bopnn_dataset_split(full.ptr, opt.seed, rep, &train.ptr, &test.ptr), "splitting");
    for (size_t v = 0; v < m; ++v) {
      ModelHandle model = fit_variant(variants[v], opt, train.ptr, opt.trials);
      acc[v * reps + rep] = dataset_accuracy(model.ptr, test.ptr);
    }
    std::cerr << "rep " << (rep + 1) << "/" << reps << " done\n";
  }

  const std::string prefix = opt.out.empty() ? "bench_" : opt.out;
  {
    std::ofstream csv = open_output(prefix + "accuracies.csv");
    csv << "dataset,method,rep,accuracy\n";
    for (size_t v = 0; v < m; ++v)
      for (uint32_t rep = 0; rep < reps; ++rep)
        csv << dataset_name << ',' << variants[v] << ',' << rep << ','
            << fmt(acc[v * reps + rep]) << "\n";
  }
  {
    std::vector<double> minmax(m), student(m);
    check(bopnn_standardized_scores(acc.data(), m, reps, minmax.data(), student.data()),
          "standardizing accuracies");
    std::ofstream csv = open_output(prefix + "scores.csv");
    csv << "dataset,method,score_minmax,score_student\n";
    for (size_t v = 0; v < m; ++v)
      csv << dataset_name << ',' << variants[v] << ',' << fmt(minmax[v]) << ','
          << fmt(student[v]) << "\n";
  }
  {
    std::ofstream csv = open_output(prefix + "wilcoxon.csv");
    csv << "dataset,method_a,method_b,w_plus,p_value\n";
    for (size_t a = 0; a < m; ++a) {
      for (size_t b = a + 1; b < m; ++b) {
        double w_plus, p_value;
        check(bopnn_wilcoxon_signed_rank(acc.data() + a * reps, acc.data() + b * reps, reps,
                                         &w_plus, &p_value),
              "wilcoxon test");
        csv << dataset_name << ',' << variants[a] << ',' << variants[b] << ',' << fmt(w_plus)
            << ',' << fmt(p_value) << "\n";
      }
    }
  }
  std::cout << "dataset=" << dataset_name << "\nreps=" << reps << "\nvariants=" << m << "\n"
            << "output_prefix=" << prefix << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bagged projected nearest-neighbour classifier"};
  app.require_subcommand(1);

  Options opt;

  auto add_data_flags = [&](CLI::App* cmd) {
    cmd->add_option("--input", opt.input, "input CSV/TSV file")->required();
    cmd->add_option("--target", opt.target, "target column name (default: last column)");
    cmd->add_option("--categorical", opt.categoricals,
                    "columns to force-encode as categorical");
  };
  auto add_fit_flags = [&](CLI::App* cmd) {
    cmd->add_option("--variant", opt.variant,
                    "bopnn | bopnn-noproj | bnn | bnn-inf | knn");
    cmd->add_option("--k", opt.k,
                    "neighbours (knn: fixes k, bnn-inf: caps the LOOCV search)");
    cmd->add_option("--q0", opt.q0, "covariates sampled per model");
    cmd->add_option("--q", opt.q, "discriminant dimensions kept");
    cmd->add_option("--B", opt.num_models, "ensemble size")->capture_default_str();
    cmd->add_option("--pi-b", opt.pi_b, "bag fraction")->capture_default_str();
    cmd->add_flag("--balanced", opt.balanced, "equal class weights in the scatter matrices");
    cmd->add_flag("--no-projection", opt.no_projection, "skip the discriminant step");
    cmd->add_flag("--z-score", opt.z_score, "standardize features on training statistics");
    cmd->add_option("--seed", opt.seed, "random seed")->capture_default_str();
    cmd->add_option("--threads", opt.threads, "worker threads for model fitting")->capture_default_str();
  };

  CLI::App* train = app.add_subcommand("train", "fit a model and write a model file");
  add_data_flags(train);
  add_fit_flags(train);
  train->add_flag("--tune", opt.run_tune, "random-search hyperparameters first");
  train->add_option("--trials", opt.trials, "tuning draws when --tune is given")->capture_default_str();
  train->add_option("--out", opt.out, "model file (default model.bopnn.json)");

  CLI::App* tune = app.add_subcommand("tune", "random-search hyperparameters by OOB accuracy");
  add_data_flags(tune);
  add_fit_flags(tune);
  tune->add_option("--trials", opt.trials, "number of random draws")->capture_default_str();
  tune->add_option("--out", opt.out, "model file for the winning trial");

  CLI::App* predict = app.add_subcommand("predict", "class probabilities for new points");
  predict->add_option("--input", opt.input, "input CSV/TSV file")->required();
  predict->add_option("--model", opt.model_path, "fitted model file")->required();
  predict->add_option("--out", opt.out, "predictions CSV (default predictions.csv)");

  CLI::App* importance = app.add_subcommand("importance", "per-feature importance scores");
  importance->add_option("--model", opt.model_path, "fitted model file")->required();
  importance->add_option("--out", opt.out, "importance CSV (default importance.csv)");

  CLI::App* project = app.add_subcommand("project", "2-D view of the ensemble subspace");
  project->add_option("--input", opt.input, "input CSV/TSV file")->required();
  project->add_option("--model", opt.model_path, "fitted model file")->required();
  project->add_option("--view-dims", opt.view_dims, "projection dimensions")->capture_default_str();
  project->add_option("--out", opt.out, "coordinates CSV (default projection.csv)");

  CLI::App* bench = app.add_subcommand("bench", "repeated-split comparison of variants");
  add_data_flags(bench);
  add_fit_flags(bench);
  bench->add_option("--trials", opt.trials, "tuning draws per split for adaptive variants")
      ->capture_default_str();
  bench->add_option("--out", opt.out, "output file prefix (default bench_)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  opt.k_given = train->count("--k") + tune->count("--k") + bench->count("--k") > 0;
  opt.pi_b_given = train->count("--pi-b") + tune->count("--pi-b") + bench->count("--pi-b") > 0;

  try {
    if (train->parsed()) return cmd_train(opt);
    if (tune->parsed()) return cmd_tune(opt);
    if (predict->parsed()) return cmd_predict(opt);
    if (importance->parsed()) return cmd_importance(opt);
    if (project->parsed()) return cmd_project(opt);
    if (bench->parsed()) return cmd_bench(opt);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
