#include "subspace.hpp"

#include <algorithm>
#include <cmath>

namespace bopnn::subspace {

using linalg::Matrix;
using linalg::SymMatrix;

namespace {

void add_outer_difference(SymMatrix& acc, const double* a, const double* b, std::size_t m,
                          std::vector<double>& diff) {
  for (std::size_t j = 0; j < m; ++j) diff[j] = a[j] - b[j];
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t l = j; l < m; ++l) acc.add(j, l, diff[j] * diff[l]);
}

}  // namespace

ScatterPair scatter_pair(const neighbors::PointSet& ps, std::size_t k, bool balanced) {
  if (!ps.has_labels()) fail(ErrorCode::kInvalidArgument, "scatter_pair needs labels");
  if (k == 0) fail(ErrorCode::kInvalidArgument, "scatter_pair needs k >= 1");
  const std::size_t n = ps.size();
  const std::size_t m = ps.dim();
  const int num_classes = ps.num_classes;

  std::vector<std::size_t> class_size(static_cast<std::size_t>(num_classes), 0);
  for (int label : ps.labels) class_size[static_cast<std::size_t>(label - 1)] += 1;
  const int classes_present =
      static_cast<int>(std::count_if(class_size.begin(), class_size.end(),
                                     [](std::size_t c) { return c > 0; }));
  if (classes_present < 2)
    fail(ErrorCode::kSingleClassSample, "scatter_pair needs at least two classes");

  // Per-class accumulators; pooled totals are formed at the end so the
  // balanced and unbalanced modes share one pass.
  std::vector<SymMatrix> in_acc(class_size.size(), SymMatrix(m));
  std::vector<SymMatrix> out_acc(class_size.size(), SymMatrix(m));
  std::vector<std::size_t> in_count(class_size.size(), 0);
  std::vector<std::size_t> out_count(class_size.size(), 0);

  using DistIdx = std::pair<double, std::size_t>;
  std::vector<DistIdx> same;
  std::vector<DistIdx> other;
  std::vector<double> diff(m);
  same.reserve(n);
  other.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const int label = ps.labels[i];
    const std::size_t c = static_cast<std::size_t>(label - 1);
    const double* xi = ps.points.row(i);

    same.clear();
    other.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d2 = neighbors::squared_distance(ps.points.row(j), xi, m);
      if (ps.labels[j] == label)
        same.emplace_back(d2, j);
      else
        other.emplace_back(d2, j);
    }

    if (!same.empty()) {
      const std::size_t k_in = std::min(k, same.size());
      std::nth_element(same.begin(), same.begin() + static_cast<long>(k_in - 1), same.end());
      add_outer_difference(in_acc[c], xi, ps.points.row(same[k_in - 1].second), m, diff);
      in_count[c] += 1;
    }
    const std::size_t k_out = std::min(k, other.size());
    std::nth_element(other.begin(), other.begin() + static_cast<long>(k_out - 1), other.end());
    add_outer_difference(out_acc[c], xi, ps.points.row(other[k_out - 1].second), m, diff);
    out_count[c] += 1;
  }

  ScatterPair sc;
  sc.sigma_in = SymMatrix(m);
  sc.sigma_out = SymMatrix(m);
  for (std::size_t c = 0; c < class_size.size(); ++c) {
    sc.n_used_in += in_count[c];
    sc.n_used_out += out_count[c];
  }

  auto combine = [&](std::vector<SymMatrix>& acc, const std::vector<std::size_t>& counts,
                     std::size_t total, SymMatrix& dest) {
    if (balanced) {
      std::size_t contributing_classes = 0;
      for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] > 0) ++contributing_classes;
      for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) continue;
        acc[c].scale(1.0 / static_cast<double>(counts[c]));
        for (std::size_t j = 0; j < m; ++j)
          for (std::size_t l = j; l < m; ++l) dest.add(j, l, acc[c](j, l));
      }
      dest.scale(1.0 / static_cast<double>(contributing_classes));
    } else {
      for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) continue;
        for (std::size_t j = 0; j < m; ++j)
          for (std::size_t l = j; l < m; ++l) dest.add(j, l, acc[c](j, l));
      }
      if (total > 0) dest.scale(1.0 / static_cast<double>(total));
    }
  };
  combine(in_acc, in_count, sc.n_used_in, sc.sigma_in);
  combine(out_acc, out_count, sc.n_used_out, sc.sigma_out);
  return sc;
}

GeneralizedSolve solve_discriminant(const SymMatrix& sigma_out, const SymMatrix& sigma_in) {
  const std::size_t dim = sigma_in.dim();
  const double tr = sigma_in.trace();
  // Absolute fallback keeps the ridge meaningful when sigma_in is exactly
  // zero (all duplicated points).
  const double eps0 = tr > 0.0 ? 1e-8 * tr / static_cast<double>(dim) : 1e-8;

  double ridge = 0.0;
  for (int attempt = 0; attempt < 5; ++attempt) {
    try {
      GeneralizedSolve gs;
      gs.basis = linalg::generalized_eigen(sigma_out, sigma_in, ridge);
      gs.ridge = ridge;
      return gs;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNotPositiveDefinite || attempt == 4) throw;
      ridge = (ridge == 0.0) ? eps0 : ridge * 10.0;
    }
  }
  fail(ErrorCode::kInternal, "unreachable");
}

DiscriminantBasis discriminant_basis(const ScatterPair& sc, std::vector<std::size_t> subset,
                                     std::size_t q) {
  const std::size_t dim = sc.sigma_in.dim();
  if (sc.sigma_out.dim() != dim)
    fail(ErrorCode::kInvalidArgument, "scatter matrices have mismatched dims");
  if (q == 0 || q > dim) fail(ErrorCode::kInvalidArgument, "q out of range");
  if (subset.size() != dim)
    fail(ErrorCode::kInvalidArgument, "subset size must match scatter dim");

  const GeneralizedSolve gs = solve_discriminant(sc.sigma_out, sc.sigma_in);

  DiscriminantBasis db;
  db.subset = std::move(subset);
  db.values.assign(gs.basis.values.begin(), gs.basis.values.begin() + static_cast<long>(q));
  db.basis = Matrix(dim, q);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < q; ++j) db.basis(i, j) = gs.basis.vectors(i, j);
  return db;
}

std::vector<double> importance_contribution(const DiscriminantBasis& db, std::size_t d) {
  for (std::size_t idx : db.subset)
    if (idx >= d) fail(ErrorCode::kIndexOutOfRange, "subset index outside ambient dim");

  std::vector<double> out(d, 0.0);
  const std::size_t q0 = db.basis.rows();
  const std::size_t q = db.basis.cols();
  for (std::size_t r = 0; r < q0; ++r) {
    double acc = 0.0;
    for (std::size_t l = 0; l < q; ++l) acc += db.values[l] * db.basis(r, l) * db.basis(r, l);
    out[db.subset[r]] = acc;
  }
  return out;
}

SymMatrix ensemble_projection(const std::vector<const DiscriminantBasis*>& bases,
                              std::size_t d) {
  if (bases.empty()) fail(ErrorCode::kEmptyEnsemble, "ensemble_projection of empty list");
  SymMatrix p(d);
  for (const DiscriminantBasis* db : bases) {
    const std::size_t q0 = db->basis.rows();
    const std::size_t q = db->basis.cols();
    for (std::size_t idx : db->subset)
      if (idx >= d) fail(ErrorCode::kIndexOutOfRange, "subset index outside ambient dim");
    for (std::size_t r = 0; r < q0; ++r) {
      for (std::size_t s = r; s < q0; ++s) {
        double acc = 0.0;
        for (std::size_t l = 0; l < q; ++l) acc += db->basis(r, l) * db->basis(s, l);
        // subset is sorted, so (r <= s) already lands in the upper triangle
        p.add(db->subset[r], db->subset[s], acc);
      }
    }
  }
  p.scale(1.0 / static_cast<double>(bases.size()));
  return p;
}

}  // namespace bopnn::subspace
