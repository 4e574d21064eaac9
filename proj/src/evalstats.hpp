#pragma once

#include <cstddef>
#include <vector>

#include "linalg.hpp"

// Accuracy summaries over a methods-by-splits table and the paired
// Wilcoxon signed-rank test used for method comparisons.

namespace bopnn::stats {

// Fraction of positions where pred equals truth.
double accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

// Per-column affine map onto [0, 1]. Columns where every method ties get
// the neutral value 0.5.
linalg::Matrix standardize_minmax(const linalg::Matrix& acc);

// Per-column studentization (sd with divisor M-1). All-tie columns get 0.
linalg::Matrix standardize_student(const linalg::Matrix& acc);

// Mean of one method's standardized values across splits.
double dataset_score(const linalg::Matrix& standardized, std::size_t method);

enum class WilcoxonMethod {
  kAuto,    // exact when at most 20 nonzero differences, else normal
  kExact,   // full enumeration of sign assignments
  kNormal,  // tie-corrected normal approximation with continuity correction
};

struct WilcoxonResult {
  double w_plus = 0.0;   // sum of ranks of positive differences
  double p_value = 1.0;  // two-sided
  std::size_t n_nonzero = 0;
};

// Paired test on a - b. Zero differences are dropped; tied magnitudes get
// mid-ranks. All-zero input returns W+ = 0, p = 1.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b,
                                    WilcoxonMethod method = WilcoxonMethod::kAuto);

}  // namespace bopnn::stats
