#include "neighbors.hpp"

#include <algorithm>

namespace bopnn::neighbors {

namespace {

using DistIdx = std::pair<double, std::size_t>;

// k-th smallest (distance, index) pair among candidates; 1-based k.
std::size_t kth_of(std::vector<DistIdx>& candidates, std::size_t k) {
  std::nth_element(candidates.begin(), candidates.begin() + static_cast<long>(k - 1),
                   candidates.end());
  return candidates[k - 1].second;
}

}  // namespace

std::vector<std::size_t> knn_indices(const PointSet& ps, const double* query,
                                     std::size_t k, std::optional<std::size_t> exclude) {
  const std::size_t n = ps.size();
  const std::size_t m = ps.dim();
  const std::size_t usable = n - (exclude.has_value() ? 1 : 0);
  if (k == 0 || k > usable)
    fail(ErrorCode::kInsufficientPoints, "k exceeds usable point count");

  std::vector<DistIdx> dist;
  dist.reserve(usable);
  for (std::size_t i = 0; i < n; ++i) {
    if (exclude && *exclude == i) continue;
    dist.emplace_back(squared_distance(ps.points.row(i), query, m), i);
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());

  std::vector<std::size_t> out(k);
  for (std::size_t j = 0; j < k; ++j) out[j] = dist[j].second;
  return out;
}

std::size_t kth_same_class(const PointSet& ps, std::size_t i, std::size_t k) {
  if (!ps.has_labels()) fail(ErrorCode::kInvalidArgument, "point set has no labels");
  const std::size_t n = ps.size();
  const std::size_t m = ps.dim();
  const int label = ps.labels[i];
  const double* xi = ps.points.row(i);

  std::vector<DistIdx> candidates;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i || ps.labels[j] != label) continue;
    candidates.emplace_back(squared_distance(ps.points.row(j), xi, m), j);
  }
  if (k == 0 || candidates.size() < k)
    fail(ErrorCode::kInsufficientPoints, "class too small for k-th same-class neighbour");
  return kth_of(candidates, k);
}

std::size_t kth_other_class(const PointSet& ps, std::size_t i, std::size_t k) {
  if (!ps.has_labels()) fail(ErrorCode::kInvalidArgument, "point set has no labels");
  const std::size_t n = ps.size();
  const std::size_t m = ps.dim();
  const int label = ps.labels[i];
  const double* xi = ps.points.row(i);

  std::vector<DistIdx> candidates;
  for (std::size_t j = 0; j < n; ++j) {
    if (ps.labels[j] == label) continue;
    candidates.emplace_back(squared_distance(ps.points.row(j), xi, m), j);
  }
  if (k == 0 || candidates.size() < k)
    fail(ErrorCode::kInsufficientPoints, "not enough out-of-class points for k-th neighbour");
  return kth_of(candidates, k);
}

std::vector<double> vote_distribution(const PointSet& ps, const double* query,
                                      std::size_t k, int num_classes) {
  if (!ps.has_labels()) fail(ErrorCode::kInvalidArgument, "point set has no labels");
  const std::vector<std::size_t> nn = knn_indices(ps, query, k);

  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t idx : nn) counts[static_cast<std::size_t>(ps.labels[idx] - 1)] += 1;

  std::vector<double> probs(static_cast<std::size_t>(num_classes));
  for (std::size_t c = 0; c < probs.size(); ++c)
    probs[c] = static_cast<double>(counts[c]) / static_cast<double>(k);
  return probs;
}

}  // namespace bopnn::neighbors
