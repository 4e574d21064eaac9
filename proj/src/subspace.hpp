#pragma once

#include <cstddef>
#include <vector>

#include "linalg.hpp"
#include "neighbors.hpp"

// Neighbour scatter matrices and the discriminant subspace solved from
// them, plus the reductions back to ambient coordinates (variable
// importance and the averaged ensemble projection).

namespace bopnn::subspace {

struct ScatterPair {
  linalg::SymMatrix sigma_in;   // mean outer product of k-th same-class differences
  linalg::SymMatrix sigma_out;  // same for other-class differences
  std::size_t n_used_in = 0;    // points that contributed to sigma_in
  std::size_t n_used_out = 0;
};

struct DiscriminantBasis {
  std::vector<std::size_t> subset;  // ambient column indices, strictly increasing
  linalg::Matrix basis;             // q0 x q, unit-norm columns
  std::vector<double> values;       // length q, non-increasing, >= 0
};

// Builds both scatter matrices in one pass over the points. Per point, k
// is clamped to class_size-1 for the same-class neighbour and to the
// out-of-class count for the other-class neighbour; points whose class has
// a single member are dropped from sigma_in. Balanced mode averages
// per-class means with equal class weight instead of pooling over points.
ScatterPair scatter_pair(const neighbors::PointSet& ps, std::size_t k, bool balanced);

// Ridge escalation for near-singular sigma_in: attempts ridge 0 first,
// then 1e-8*trace/dim escalated tenfold three times before giving up.
struct GeneralizedSolve {
  linalg::EigenBasis basis;
  double ridge = 0.0;  // the ridge that succeeded
};
GeneralizedSolve solve_discriminant(const linalg::SymMatrix& sigma_out,
                                    const linalg::SymMatrix& sigma_in);

// Top-q generalized eigenpairs of (sigma_out, sigma_in), tagged with the
// ambient subset they live in.
DiscriminantBasis discriminant_basis(const ScatterPair& sc,
                                     std::vector<std::size_t> subset, std::size_t q);

// diag(V V^T) with V = basis * diag(values)^{1/2}, scattered into ambient
// positions; zero outside the subset.
std::vector<double> importance_contribution(const DiscriminantBasis& db, std::size_t d);

// Mean of the ambient-embedded U U^T matrices across models.
linalg::SymMatrix ensemble_projection(const std::vector<const DiscriminantBasis*>& bases,
                                      std::size_t d);

}  // namespace bopnn::subspace
