#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "linalg.hpp"

// Dataset ingestion and splitting. Input files are RFC-4180 CSV or
// tab-separated (picked by extension), UTF-8, header row mandatory.
// Categorical columns expand to one indicator column per category (no
// reference level is dropped) and the target column is label-encoded by
// first appearance. Missing values are rejected, never imputed.

namespace bopnn::dataio {

enum class ColumnKind { kNumeric, kCategorical };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  std::vector<std::string> categories;  // categorical only, first-appearance order
};

// Optional per-feature standardization fitted on training data.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> scale;  // sample sd; 1 where the column is constant
};

struct LabeledDataset {
  linalg::Matrix x;            // n x d, post-encoding
  std::vector<int> y;          // labels in 1..K; empty when the file had no target
  std::vector<ColumnSchema> schema;
  std::vector<std::string> class_names;  // size K
  std::string target_name;

  std::size_t size() const { return x.rows(); }
  std::size_t dim() const { return x.cols(); }
  int num_classes() const { return static_cast<int>(class_names.size()); }
  bool has_labels() const { return !y.empty(); }
};

// Expanded feature names, one per encoded column ("col" or "col=level").
std::vector<std::string> feature_names(const std::vector<ColumnSchema>& schema);

// Parses and encodes a training table. `target_column` empty selects the
// last column. Columns named in `categorical_columns` are forced
// categorical; other non-numeric columns are auto-classified categorical.
LabeledDataset load_table(const std::string& path, const std::string& target_column = "",
                          const std::vector<std::string>& categorical_columns = {});

// Re-encodes a file against an existing schema (for prediction inputs).
// Columns are matched by header name; extra columns are ignored. The
// target column is optional unless `require_target` is set.
LabeledDataset encode_with_schema(const std::string& path,
                                  const std::vector<ColumnSchema>& schema,
                                  const std::vector<std::string>& class_names,
                                  const std::string& target_name, bool require_target);

struct SplitPlan {
  double train_fraction = 0.7;
  std::size_t train_cap = 7000;
  std::size_t test_cap = 3000;
};

// Benchmark repetition schedule keyed on total sample size.
int repetitions_for(std::size_t n);

// Shuffles with a stream keyed on (seed, rep_index), splits 70/30, then
// applies the caps. Distinct rep_index values give distinct shuffles.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds,
                                                const SplitPlan& plan,
                                                std::uint32_t rep_index,
                                                std::uint64_t seed);

// Row subset preserving schema and class metadata.
LabeledDataset take_rows(const LabeledDataset& ds, const std::vector<std::size_t>& rows);

Scaler fit_scaler(const linalg::Matrix& x);
void apply_scaler(const Scaler& s, linalg::Matrix& x);
void apply_scaler(const Scaler& s, double* row, std::size_t d);

}  // namespace bopnn::dataio
