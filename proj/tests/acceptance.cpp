// Acceptance suite: one self-contained check per release criterion,
// printed as a single PASS/FAIL line each. Returns nonzero when any
// check fails. Thresholds are fixed here, not tunable from outside.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "evalstats.hpp"
#include "model.hpp"
#include "persist.hpp"
#include "subspace.hpp"
#include "testutil.hpp"

using bopnn::dataio::LabeledDataset;
using bopnn::linalg::Matrix;
using bopnn::linalg::SymMatrix;
using bopnn::model::Ensemble;
using bopnn::model::HyperParams;
using testutil::Rand;

namespace {

struct Check {
  std::string name;
  std::function<std::string()> run;  // "" on success, reason on failure
};

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// The reference synthetic task: two class-separating gaussian dimensions
// plus eighteen pure-noise dimensions, 600 points.
LabeledDataset reference_synthetic(std::uint64_t seed) {
  Rand rnd(seed);
  return testutil::informative_noise_dataset(rnd, 600, 18);
}

double test_accuracy(const Ensemble& e, const LabeledDataset& test) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i)
    if (bopnn::model::classify(e, test.x.row(i)) == test.y[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

// ------------------------------------------------------------------ //

std::string check_knn_reduction() {
  const auto start = std::chrono::steady_clock::now();
  Rand rnd(101);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = static_cast<std::size_t>(rnd.uniform_int(30, 200));
    const std::size_t d = static_cast<std::size_t>(rnd.uniform_int(1, 10));
    const int classes = static_cast<int>(rnd.uniform_int(2, 4));
    const int k = static_cast<int>(rnd.uniform_int(1, 5));
    const auto ps = testutil::random_point_set(rnd, n, d, classes, trial % 2 == 0);
    const LabeledDataset ds = testutil::dataset_from(ps);

    HyperParams hp;
    hp.k = k;
    hp.subset_size = static_cast<int>(d);
    hp.subspace_dim = static_cast<int>(d);
    hp.num_models = 1;
    hp.bag_fraction = 1.0;
    hp.projection_enabled = false;
    const Ensemble e = bopnn::model::fit_ensemble(ds, hp);

    std::vector<double> query(d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) query[j] = ds.x(i, j);
      if (bopnn::model::classify(e, query.data()) !=
          testutil::brute_force_knn_classify(ds.x, ds.y, classes, query.data(), k))
        return "mismatch on a training point (trial " + std::to_string(trial) + ")";
    }
    for (int q = 0; q < 30; ++q) {
      for (double& v : query) v = 4.0 * rnd.gaussian();
      if (bopnn::model::classify(e, query.data()) !=
          testutil::brute_force_knn_classify(ds.x, ds.y, classes, query.data(), k))
        return "mismatch on a random query (trial " + std::to_string(trial) + ")";
    }
  }
  const double secs = elapsed_seconds(start);
  if (secs >= 10.0) return "took " + fmt(secs) + "s (budget 10s)";
  return "";
}

std::string check_scatter_oracle() {
  // hand case: duplicated points, zero in-scatter
  {
    bopnn::neighbors::PointSet ps;
    ps.points = Matrix(4, 2);
    ps.points(2, 0) = ps.points(2, 1) = 1.0;
    ps.points(3, 0) = ps.points(3, 1) = 1.0;
    ps.labels = {1, 1, 2, 2};
    ps.num_classes = 2;
    const auto sc = bopnn::subspace::scatter_pair(ps, 1, false);
    for (double v : sc.sigma_in.data())
      if (v != 0.0) return "duplicated-points case: sigma_in not zero";
    for (double v : sc.sigma_out.data())
      if (std::abs(v - 1.0) > 1e-15) return "duplicated-points case: sigma_out != all-ones";
  }

  Rand rnd(102);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = static_cast<std::size_t>(rnd.uniform_int(10, 60));
    const std::size_t d = static_cast<std::size_t>(rnd.uniform_int(1, 6));
    const int classes = static_cast<int>(rnd.uniform_int(2, 4));
    const std::size_t k = static_cast<std::size_t>(rnd.uniform_int(1, 4));
    const auto ps = testutil::random_point_set(rnd, n, d, classes, trial % 4 == 0);
    for (bool balanced : {false, true}) {
      const auto sc = bopnn::subspace::scatter_pair(ps, k, balanced);
      const auto ref = testutil::scatter_oracle(ps, k, balanced);
      if (testutil::max_abs_diff(sc.sigma_in, ref.sigma_in) > 1e-12)
        return "sigma_in deviates beyond 1e-12 (trial " + std::to_string(trial) + ")";
      if (testutil::max_abs_diff(sc.sigma_out, ref.sigma_out) > 1e-12)
        return "sigma_out deviates beyond 1e-12 (trial " + std::to_string(trial) + ")";
      if (sc.n_used_in != ref.n_used_in || sc.n_used_out != ref.n_used_out)
        return "contributing-point counts deviate";
    }
  }
  return "";
}

std::string check_eigen_residuals() {
  Rand rnd(103);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = static_cast<std::size_t>(rnd.uniform_int(1, 30));
    const SymMatrix sigma_in = testutil::random_psd(rnd, dim, 0.2);
    const SymMatrix sigma_out = testutil::random_psd(rnd, dim, 0.0);
    const auto gs = bopnn::subspace::solve_discriminant(sigma_out, sigma_in);
    const double budget = 1e-8 * sigma_out.frobenius_norm();
    for (std::size_t j = 0; j < dim; ++j) {
      double norm2 = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        double av = 0.0, bv = 0.0;
        for (std::size_t l = 0; l < dim; ++l) {
          av += sigma_out(i, l) * gs.basis.vectors(l, j);
          bv += (sigma_in(i, l) + (i == l ? gs.ridge : 0.0)) * gs.basis.vectors(l, j);
        }
        const double r = av - gs.basis.values[j] * bv;
        norm2 += r * r;
      }
      if (std::sqrt(norm2) > budget)
        return "pair " + std::to_string(j) + " residual " + fmt(std::sqrt(norm2)) +
               " > " + fmt(budget) + " (trial " + std::to_string(trial) + ")";
    }
  }
  return "";
}

std::string check_adaptive_benefit() {
  const auto start = std::chrono::steady_clock::now();
  const LabeledDataset ds = reference_synthetic(104);
  double gap_sum = 0.0;
  for (std::uint32_t rep = 0; rep < 10; ++rep) {
    const auto [train, test] = bopnn::dataio::split(ds, {}, rep, 104);

    bopnn::model::TuneOptions with_projection;
    with_projection.seed = 104 + rep;
    with_projection.threads = 4;
    const auto tuned = bopnn::model::tune(train, with_projection);
    const Ensemble proj =
        bopnn::model::fit_ensemble(train, tuned.trials[tuned.chosen].hp, 4);

    bopnn::model::TuneOptions without_projection = with_projection;
    without_projection.projection_enabled = false;
    const auto tuned_plain = bopnn::model::tune(train, without_projection);
    const Ensemble plain =
        bopnn::model::fit_ensemble(train, tuned_plain.trials[tuned_plain.chosen].hp, 4);

    gap_sum += test_accuracy(proj, test) - test_accuracy(plain, test);
  }
  const double mean_gap = gap_sum / 10.0;
  const double secs = elapsed_seconds(start);
  std::string note = " (mean gap " + fmt(mean_gap) + ", " + fmt(secs) + "s)";
  if (secs >= 300.0) return "took " + fmt(secs) + "s (budget 300s)" + note;
  if (mean_gap < 0.03) return "projected advantage " + fmt(mean_gap) + " < 0.03" + note;
  std::printf("       mean accuracy gap %.4f in %.1fs\n", mean_gap, secs);
  return "";
}

std::string check_oob_fidelity() {
  const LabeledDataset ds = reference_synthetic(105);
  double total = 0.0;
  for (std::uint32_t seed = 0; seed < 10; ++seed) {
    const auto [train, test] = bopnn::dataio::split(ds, {}, seed, 105);
    HyperParams hp;
    hp.k = 3;
    hp.subset_size = 15;
    hp.subspace_dim = 8;
    hp.num_models = 100;
    hp.seed = 105 + seed;
    const Ensemble e = bopnn::model::fit_ensemble(train, hp, 4);
    if (!e.oob_accuracy) return "out-of-bag accuracy unavailable";
    total += std::abs(*e.oob_accuracy - test_accuracy(e, test));
  }
  const double mean_err = total / 10.0;
  std::printf("       mean |oob - test| = %.4f\n", mean_err);
  if (mean_err > 0.05) return "mean |oob - test| = " + fmt(mean_err) + " > 0.05";
  return "";
}

std::string check_importance_separation() {
  int separated = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LabeledDataset ds = reference_synthetic(106 + seed);
    HyperParams hp;
    hp.k = 3;
    hp.subset_size = 15;
    hp.subspace_dim = 8;
    hp.num_models = 100;
    hp.seed = 206 + seed;
    const Ensemble e = bopnn::model::fit_ensemble(ds, hp, 4);
    const std::vector<double> imp = bopnn::model::variable_importance(e);

    // sum identity against the ensemble's eigenvalue mass
    double total = 0.0;
    for (double v : imp) total += v;
    double expect = 0.0;
    for (const auto& m : e.models)
      for (double v : m.values) expect += v;
    expect /= static_cast<double>(e.models.size());
    if (std::abs(total - expect) > 1e-10 * (1.0 + std::abs(expect)))
      return "importance sum identity violated (seed " + std::to_string(seed) + ")";

    const double informative = 0.5 * (imp[0] + imp[1]);
    double worst_noise = 0.0;
    for (std::size_t j = 2; j < imp.size(); ++j) worst_noise = std::max(worst_noise, imp[j]);
    if (informative > worst_noise) ++separated;
  }
  std::printf("       informative dims beat noise in %d/10 runs\n", separated);
  if (separated < 9) return "separation held in only " + std::to_string(separated) + "/10 runs";
  return "";
}

std::string check_plugin_formula() {
  if (std::abs(bopnn::model::plugin_bag_fraction(2, 4) - 0.5) > 1e-12)
    return "plugin(2,4) != 0.5";
  if (std::abs(bopnn::model::plugin_bag_fraction(4, 2) - 0.93999) > 1e-5)
    return "plugin(4,2) = " + fmt(bopnn::model::plugin_bag_fraction(4, 2)) +
           " not within 1e-5 of 0.93999";
  for (int p = 1; p <= 10; ++p)
    if (bopnn::model::plugin_bag_fraction(p, 1) != 0.9)
      return "plugin(" + std::to_string(p) + ",1) != 0.9";
  return "";
}

std::string check_wilcoxon() {
  using bopnn::stats::wilcoxon_signed_rank;
  const auto r = wilcoxon_signed_rank({1, 2, 3, 4, 5}, {0, 0, 0, 0, 0});
  if (r.w_plus != 15.0) return "W+ = " + fmt(r.w_plus) + " != 15";
  if (std::abs(r.p_value - 0.0625) > 1e-12) return "p = " + fmt(r.p_value) + " != 0.0625";

  const auto zero = wilcoxon_signed_rank({0.3, 0.3}, {0.3, 0.3});
  if (zero.w_plus != 0.0 || zero.p_value != 1.0) return "all-zero case wrong";

  Rand rnd(108);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> a(12), b(12);
    for (std::size_t i = 0; i < 12; ++i) {
      a[i] = rnd.uniform();
      b[i] = rnd.uniform();
    }
    const auto ab = wilcoxon_signed_rank(a, b);
    const auto ba = wilcoxon_signed_rank(b, a);
    const double n = static_cast<double>(ab.n_nonzero);
    if (std::abs(ab.p_value - ba.p_value) > 1e-12) return "p changes when sides swap";
    if (std::abs(ab.w_plus + ba.w_plus - n * (n + 1.0) / 2.0) > 1e-9)
      return "W+ does not reflect to n(n+1)/2 - W+";
  }
  return "";
}

std::string check_standardizations() {
  Rand rnd(109);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t methods = static_cast<std::size_t>(rnd.uniform_int(2, 9));
    const std::size_t splits = static_cast<std::size_t>(rnd.uniform_int(1, 16));
    Matrix acc(methods, splits);
    for (auto& v : acc.data()) v = rnd.uniform();
    const Matrix mm = bopnn::stats::standardize_minmax(acc);
    const Matrix st = bopnn::stats::standardize_student(acc);
    for (std::size_t t = 0; t < splits; ++t) {
      double lo = 1.0, hi = 0.0, mean = 0.0;
      for (std::size_t m = 0; m < methods; ++m) {
        if (mm(m, t) < 0.0 || mm(m, t) > 1.0) return "min-max value escapes [0,1]";
        lo = std::min(lo, mm(m, t));
        hi = std::max(hi, mm(m, t));
        mean += st(m, t);
      }
      if (lo != 0.0 || hi != 1.0) return "min-max column misses an endpoint";
      mean /= static_cast<double>(methods);
      if (std::abs(mean) > 1e-12) return "studentized column mean " + fmt(mean);
      double ss = 0.0;
      for (std::size_t m = 0; m < methods; ++m) ss += (st(m, t) - mean) * (st(m, t) - mean);
      if (std::abs(std::sqrt(ss / static_cast<double>(methods - 1)) - 1.0) > 1e-12)
        return "studentized column sd deviates from 1";
    }
  }
  return "";
}

std::string check_determinism() {
  Rand rnd(110);
  const LabeledDataset ds = testutil::blobs_dataset(rnd, 150);
  HyperParams hp;
  hp.num_models = 30;
  hp.subset_size = 2;
  hp.subspace_dim = 1;
  hp.seed = 4242;

  const auto tmp = std::filesystem::temp_directory_path();
  std::vector<std::string> contents;
  for (int threads : {1, 2, 8}) {
    const Ensemble e = bopnn::model::fit_ensemble(ds, hp, threads);
    const std::string path =
        (tmp / ("det_" + std::to_string(threads) + ".bopnn.json")).string();
    bopnn::dataio::save_model(e, path);
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    contents.push_back(buf.str());
    std::remove(path.c_str());
  }
  if (contents[0].empty()) return "model file came out empty";
  if (contents[0] != contents[1]) return "1-thread and 2-thread files differ";
  if (contents[0] != contents[2]) return "1-thread and 8-thread files differ";
  return "";
}

std::string check_ensemble_projection() {
  Rand rnd(111);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = static_cast<std::size_t>(rnd.uniform_int(40, 90));
    const std::size_t d = static_cast<std::size_t>(rnd.uniform_int(3, 8));
    const auto ps = testutil::random_point_set(rnd, n, d, 2);
    const LabeledDataset ds = testutil::dataset_from(ps);

    HyperParams hp;
    hp.k = static_cast<int>(rnd.uniform_int(1, 3));
    hp.subset_size = static_cast<int>(rnd.uniform_int(2, static_cast<std::int64_t>(d)));
    hp.subspace_dim = static_cast<int>(rnd.uniform_int(1, hp.subset_size));
    hp.num_models = static_cast<int>(rnd.uniform_int(5, 30));
    hp.seed = 300 + static_cast<std::uint64_t>(trial);
    const Ensemble e = bopnn::model::fit_ensemble(ds, hp);

    std::vector<bopnn::subspace::DiscriminantBasis> bases;
    for (const auto& m : e.models) bases.push_back(m.discriminant());
    std::vector<const bopnn::subspace::DiscriminantBasis*> refs;
    for (const auto& b : bases) refs.push_back(&b);
    const SymMatrix p = bopnn::subspace::ensemble_projection(refs, d);

    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        if (std::abs(p(i, j) - p(j, i)) > 1e-12) return "projection is not symmetric";

    const auto eig = bopnn::linalg::sym_eigen(p);
    if (eig.values.back() < -1e-9)
      return "minimum eigenvalue " + fmt(eig.values.back()) + " < -1e-9";
    if (std::abs(p.trace() - static_cast<double>(hp.subspace_dim)) > 1e-9)
      return "trace " + fmt(p.trace()) + " != q = " + std::to_string(hp.subspace_dim);
  }
  return "";
}

}  // namespace

int main() {
  const std::vector<Check> checks = {
      {"kNN reduction matches brute force exactly", check_knn_reduction},
      {"scatter matrices match the double-loop reference", check_scatter_oracle},
      {"generalized eigenpairs satisfy the residual bound", check_eigen_residuals},
      {"discriminant step beats the unprojected bag", check_adaptive_benefit},
      {"out-of-bag accuracy tracks held-out accuracy", check_oob_fidelity},
      {"importance separates informative from noise dims", check_importance_separation},
      {"plug-in bag fraction formula", check_plugin_formula},
      {"wilcoxon signed-rank statistics", check_wilcoxon},
      {"accuracy standardization column properties", check_standardizations},
      {"byte-identical model files across thread counts", check_determinism},
      {"ensemble projection is a symmetric PSD average", check_ensemble_projection},
  };

  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    std::string reason;
    try {
      reason = checks[i].run();
    } catch (const std::exception& e) {
      reason = std::string("exception: ") + e.what();
    }
    if (reason.empty()) {
      std::printf("[PASS] criterion %zu: %s\n", i + 1, checks[i].name.c_str());
    } else {
      std::printf("[FAIL] criterion %zu: %s: %s\n", i + 1, checks[i].name.c_str(),
                  reason.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
