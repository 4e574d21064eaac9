#include "evalstats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace bopnn::stats {

using linalg::Matrix;

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size() || pred.empty())
    fail(ErrorCode::kInvalidArgument, "accuracy needs equal-length nonempty label vectors");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

namespace {

void require_tensor(const Matrix& acc) {
  if (acc.rows() < 2 || acc.cols() < 1)
    fail(ErrorCode::kInvalidArgument, "standardization needs at least two methods");
}

}  // namespace

Matrix standardize_minmax(const Matrix& acc) {
  require_tensor(acc);
  const std::size_t methods = acc.rows();
  const std::size_t splits = acc.cols();
  Matrix out(methods, splits);
  for (std::size_t t = 0; t < splits; ++t) {
    double mn = acc(0, t);
    double mx = acc(0, t);
    for (std::size_t m = 1; m < methods; ++m) {
      mn = std::min(mn, acc(m, t));
      mx = std::max(mx, acc(m, t));
    }
    if (mx == mn) {
      for (std::size_t m = 0; m < methods; ++m) out(m, t) = 0.5;
    } else {
      for (std::size_t m = 0; m < methods; ++m) out(m, t) = (acc(m, t) - mn) / (mx - mn);
    }
  }
  return out;
}

Matrix standardize_student(const Matrix& acc) {
  require_tensor(acc);
  const std::size_t methods = acc.rows();
  const std::size_t splits = acc.cols();
  Matrix out(methods, splits);
  for (std::size_t t = 0; t < splits; ++t) {
    double mn = acc(0, t);
    double mx = acc(0, t);
    double mean = 0.0;
    for (std::size_t m = 0; m < methods; ++m) {
      mean += acc(m, t);
      mn = std::min(mn, acc(m, t));
      mx = std::max(mx, acc(m, t));
    }
    mean /= static_cast<double>(methods);
    if (mx == mn) {
      for (std::size_t m = 0; m < methods; ++m) out(m, t) = 0.0;
      continue;
    }
    double ss = 0.0;
    for (std::size_t m = 0; m < methods; ++m) {
      const double c = acc(m, t) - mean;
      ss += c * c;
    }
    const double sd = std::sqrt(ss / static_cast<double>(methods - 1));
    for (std::size_t m = 0; m < methods; ++m) out(m, t) = (acc(m, t) - mean) / sd;
  }
  return out;
}

double dataset_score(const Matrix& standardized, std::size_t method) {
  if (method >= standardized.rows())
    fail(ErrorCode::kIndexOutOfRange, "method index out of range");
  if (standardized.cols() == 0) fail(ErrorCode::kInvalidArgument, "no splits to average");
  double sum = 0.0;
  for (std::size_t t = 0; t < standardized.cols(); ++t) sum += standardized(method, t);
  return sum / static_cast<double>(standardized.cols());
}

namespace {

// Gaussian upper tail.
double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// Exact tail probabilities of the null rank-sum distribution by dynamic
// programming over doubled ranks (doubling keeps mid-ranks integral).
std::pair<double, double> exact_tails(const std::vector<std::int64_t>& ranks2,
                                      std::int64_t w2) {
  const std::int64_t total = std::accumulate(ranks2.begin(), ranks2.end(), std::int64_t{0});
  std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
  ways[0] = 1.0;
  for (std::int64_t r : ranks2)
    for (std::int64_t s = total; s >= r; --s)
      ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - r)];

  const double denom = std::ldexp(1.0, static_cast<int>(ranks2.size()));
  double ge = 0.0;
  double le = 0.0;
  for (std::int64_t s = 0; s <= total; ++s) {
    if (s >= w2) ge += ways[static_cast<std::size_t>(s)];
    if (s <= w2) le += ways[static_cast<std::size_t>(s)];
  }
  return {ge / denom, le / denom};
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b,
                                    WilcoxonMethod method) {
  if (a.size() != b.size() || a.empty())
    fail(ErrorCode::kInvalidArgument, "wilcoxon needs equal-length nonempty samples");

  struct Entry {
    double mag;
    bool positive;
  };
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) entries.push_back({std::abs(d), d > 0.0});
  }

  WilcoxonResult result;
  result.n_nonzero = entries.size();
  if (entries.empty()) return result;  // W+ = 0, p = 1

  std::sort(entries.begin(), entries.end(),
            [](const Entry& x, const Entry& y) { return x.mag < y.mag; });

  // Doubled mid-ranks: a tie group filling positions i..j (1-based) gets
  // rank (i + j) / 2, stored as i + j so everything stays integral.
  const std::size_t n = entries.size();
  std::vector<std::int64_t> ranks2(n);
  std::size_t start = 0;
  while (start < n) {
    std::size_t stop = start;
    while (stop + 1 < n && entries[stop + 1].mag == entries[start].mag) ++stop;
    const std::int64_t rank2 = static_cast<std::int64_t>(start + stop) + 2;
    for (std::size_t i = start; i <= stop; ++i) ranks2[i] = rank2;
    start = stop + 1;
  }

  std::int64_t w2 = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (entries[i].positive) w2 += ranks2[i];
  result.w_plus = static_cast<double>(w2) / 2.0;

  const bool exact = method == WilcoxonMethod::kExact ||
                     (method == WilcoxonMethod::kAuto && n <= 20);
  double one_sided;
  if (exact) {
    const auto [ge, le] = exact_tails(ranks2, w2);
    one_sided = std::min(ge, le);
  } else {
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    double tie_correction = 0.0;
    start = 0;
    while (start < n) {
      std::size_t stop = start;
      while (stop + 1 < n && ranks2[stop + 1] == ranks2[start]) ++stop;
      const double t = static_cast<double>(stop - start + 1);
      tie_correction += t * t * t - t;
      start = stop + 1;
    }
    const double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_correction / 48.0;
    const double sd = std::sqrt(variance);
    if (result.w_plus > mean) {
      one_sided = normal_sf((result.w_plus - 0.5 - mean) / sd);
    } else if (result.w_plus < mean) {
      one_sided = normal_sf((mean - result.w_plus - 0.5) / sd);
    } else {
      one_sided = 0.5;
    }
  }
  result.p_value = std::min(1.0, 2.0 * one_sided);
  return result;
}

}  // namespace bopnn::stats
