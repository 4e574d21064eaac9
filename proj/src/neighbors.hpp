#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "linalg.hpp"

// Exact brute-force nearest-neighbour queries. Comparisons use squared
// Euclidean distances; every tie is broken by ascending point index, which
// makes all query results deterministic.

namespace bopnn::neighbors {

struct PointSet {
  linalg::Matrix points;    // n x m
  std::vector<int> labels;  // empty, or length n with values in 1..K
  int num_classes = 0;      // K; 0 when unlabeled

  std::size_t size() const { return points.rows(); }
  std::size_t dim() const { return points.cols(); }
  bool has_labels() const { return !labels.empty(); }
};

inline double squared_distance(const double* a, const double* b, std::size_t m) {
  double sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double d = a[j] - b[j];
    sum += d * d;
  }
  return sum;
}

// Indices of the k nearest points to the query, sorted by
// (squared distance, index) ascending. `exclude` removes one point from
// consideration (used for self-exclusion).
std::vector<std::size_t> knn_indices(const PointSet& ps, const double* query,
                                     std::size_t k,
                                     std::optional<std::size_t> exclude = std::nullopt);

// Index of the k-th nearest point sharing the label of point i, i excluded.
std::size_t kth_same_class(const PointSet& ps, std::size_t i, std::size_t k);

// Index of the k-th nearest point with a label different from point i's.
std::size_t kth_other_class(const PointSet& ps, std::size_t i, std::size_t k);

// Class proportions among the k nearest points to the query. Length
// num_classes, entries count/k.
std::vector<double> vote_distribution(const PointSet& ps, const double* query,
                                      std::size_t k, int num_classes);

}  // namespace bopnn::neighbors
