#include "dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "rng.hpp"

namespace bopnn::dataio {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorCode::kIoError, "read failure on " + path);
  return buf.str();
}

[[noreturn]] void parse_fail(const std::string& what, std::size_t row, std::size_t col) {
  fail(ErrorCode::kParseError,
       what + " at row " + std::to_string(row + 1) + ", column " + std::to_string(col + 1));
}

// RFC-4180 state machine. Rows end on LF or CRLF; quoted fields may hold
// delimiters, quotes ("" escape) and newlines.
std::vector<std::vector<std::string>> parse_delimited(const std::string& text, char delim) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  enum class State { kFieldStart, kUnquoted, kQuoted, kQuoteSeen };
  State state = State::kFieldStart;
  std::size_t line = 0;
  std::size_t col = 0;

  auto end_field = [&]() {
    row.push_back(std::move(field));
    field.clear();
    state = State::kFieldStart;
  };
  auto end_row = [&]() {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
    ++line;
    col = 0;
  };

  for (std::size_t pos = 0; pos < text.size(); ++pos) {
    const char ch = text[pos];
    const bool eol = ch == '\n' || (ch == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n');
    switch (state) {
      case State::kFieldStart:
        if (ch == '"') {
          state = State::kQuoted;
        } else if (ch == delim) {
          end_field();
        } else if (eol) {
          end_row();
          if (ch == '\r') ++pos;
        } else {
          field.push_back(ch);
          state = State::kUnquoted;
        }
        break;
      case State::kUnquoted:
        if (ch == delim) {
          end_field();
        } else if (eol) {
          end_row();
          if (ch == '\r') ++pos;
        } else {
          field.push_back(ch);
        }
        break;
      case State::kQuoted:
        if (ch == '"') {
          state = State::kQuoteSeen;
        } else {
          field.push_back(ch);
        }
        break;
      case State::kQuoteSeen:
        if (ch == '"') {
          field.push_back('"');
          state = State::kQuoted;
        } else if (ch == delim) {
          end_field();
        } else if (eol) {
          end_row();
          if (ch == '\r') ++pos;
        } else {
          parse_fail("stray quote", line, col);
        }
        break;
    }
    ++col;
  }
  if (state == State::kQuoted) parse_fail("unterminated quoted field", line, col);
  if (state != State::kFieldStart || !row.empty()) end_row();  // no trailing newline
  return rows;
}

bool parse_numeric(const std::string& field, double& out) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (begin != end && *begin == '+') ++begin;  // from_chars rejects a leading plus
  if (begin == end) return false;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

char delimiter_for(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".tsv") == 0 ? '\t' : ',';
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // data rows only
};

Table read_table(const std::string& path) {
  const auto rows = parse_delimited(read_file(path), delimiter_for(path));
  if (rows.empty()) fail(ErrorCode::kParseError, "empty file: " + path);
  Table t;
  t.header = rows.front();
  t.rows.assign(rows.begin() + 1, rows.end());
  const std::size_t ncols = t.header.size();
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    if (t.rows[r].size() != ncols)
      parse_fail("row has " + std::to_string(t.rows[r].size()) + " fields, expected " +
                     std::to_string(ncols),
                 r + 1, 0);
  std::vector<std::string> sorted = t.header;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    fail(ErrorCode::kParseError, "duplicate column name in header of " + path);
  return t;
}

void check_value_present(const std::string& field, std::size_t row, std::size_t col) {
  if (field.empty())
    fail(ErrorCode::kMissingValue, "missing value at row " + std::to_string(row + 2) +
                                       ", column " + std::to_string(col + 1));
}

}  // namespace

std::vector<std::string> feature_names(const std::vector<ColumnSchema>& schema) {
  std::vector<std::string> names;
  for (const ColumnSchema& c : schema) {
    if (c.kind == ColumnKind::kNumeric) {
      names.push_back(c.name);
    } else {
      for (const std::string& cat : c.categories) names.push_back(c.name + "=" + cat);
    }
  }
  return names;
}

LabeledDataset load_table(const std::string& path, const std::string& target_column,
                          const std::vector<std::string>& categorical_columns) {
  const Table t = read_table(path);
  const std::size_t ncols = t.header.size();
  const std::size_t n = t.rows.size();
  if (n < 2) fail(ErrorCode::kParseError, "need at least two data rows in " + path);

  std::size_t target = ncols - 1;
  if (!target_column.empty()) {
    const auto it = std::find(t.header.begin(), t.header.end(), target_column);
    if (it == t.header.end())
      fail(ErrorCode::kUnknownTarget, "target column '" + target_column + "' not found");
    target = static_cast<std::size_t>(it - t.header.begin());
  }

  std::vector<bool> declared(ncols, false);
  for (const std::string& name : categorical_columns) {
    const auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end())
      fail(ErrorCode::kInvalidArgument, "declared categorical column '" + name + "' not found");
    declared[static_cast<std::size_t>(it - t.header.begin())] = true;
  }

  LabeledDataset ds;
  ds.target_name = t.header[target];

  // Classify feature columns: declared categoricals stay categorical,
  // everything else is numeric iff every value parses as a double.
  // Non-finite values in numeric columns are rejected while filling.
  std::vector<ColumnKind> kinds(ncols, ColumnKind::kNumeric);
  for (std::size_t c = 0; c < ncols; ++c) {
    if (c == target) continue;
    bool numeric = !declared[c];
    for (std::size_t r = 0; r < n; ++r) {
      const std::string& field = t.rows[r][c];
      check_value_present(field, r, c);
      double v;
      if (numeric && !parse_numeric(field, v)) numeric = false;
    }
    kinds[c] = numeric ? ColumnKind::kNumeric : ColumnKind::kCategorical;
  }

  std::vector<std::size_t> offsets(ncols, 0);  // encoded column start per source column
  std::size_t d = 0;
  for (std::size_t c = 0; c < ncols; ++c) {
    if (c == target) continue;
    ColumnSchema col;
    col.name = t.header[c];
    col.kind = kinds[c];
    if (col.kind == ColumnKind::kCategorical) {
      for (std::size_t r = 0; r < n; ++r) {
        const std::string& field = t.rows[r][c];
        if (std::find(col.categories.begin(), col.categories.end(), field) ==
            col.categories.end())
          col.categories.push_back(field);
      }
    }
    offsets[c] = d;
    d += col.kind == ColumnKind::kNumeric ? 1 : col.categories.size();
    ds.schema.push_back(std::move(col));
  }

  for (std::size_t r = 0; r < n; ++r) {
    const std::string& field = t.rows[r][target];
    check_value_present(field, r, target);
    if (std::find(ds.class_names.begin(), ds.class_names.end(), field) == ds.class_names.end())
      ds.class_names.push_back(field);
  }

  ds.x = linalg::Matrix(n, d);
  ds.y.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t schema_idx = 0;
    for (std::size_t c = 0; c < ncols; ++c) {
      if (c == target) continue;
      const ColumnSchema& col = ds.schema[schema_idx++];
      const std::string& field = t.rows[r][c];
      if (col.kind == ColumnKind::kNumeric) {
        double v;
        parse_numeric(field, v);
        if (!std::isfinite(v))
          fail(ErrorCode::kMissingValue, "non-finite value at row " + std::to_string(r + 2) +
                                             ", column " + std::to_string(c + 1));
        ds.x(r, offsets[c]) = v;
      } else {
        const auto it = std::find(col.categories.begin(), col.categories.end(), field);
        ds.x(r, offsets[c] + static_cast<std::size_t>(it - col.categories.begin())) = 1.0;
      }
    }
    const auto it = std::find(ds.class_names.begin(), ds.class_names.end(), t.rows[r][target]);
    ds.y[r] = static_cast<int>(it - ds.class_names.begin()) + 1;
  }
  return ds;
}

LabeledDataset encode_with_schema(const std::string& path,
                                  const std::vector<ColumnSchema>& schema,
                                  const std::vector<std::string>& class_names,
                                  const std::string& target_name, bool require_target) {
  const Table t = read_table(path);
  const std::size_t n = t.rows.size();
  if (n == 0) fail(ErrorCode::kParseError, "no data rows in " + path);

  auto column_of = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - t.header.begin());
  };

  std::vector<std::size_t> source(schema.size());
  for (std::size_t s = 0; s < schema.size(); ++s) {
    const auto c = column_of(schema[s].name);
    if (!c) fail(ErrorCode::kSchemaMismatch, "input is missing column '" + schema[s].name + "'");
    source[s] = *c;
  }
  const auto target = column_of(target_name);
  if (require_target && !target)
    fail(ErrorCode::kSchemaMismatch, "input is missing target column '" + target_name + "'");

  LabeledDataset ds;
  ds.schema = schema;
  ds.class_names = class_names;
  ds.target_name = target_name;

  std::size_t d = 0;
  std::vector<std::size_t> offsets(schema.size());
  for (std::size_t s = 0; s < schema.size(); ++s) {
    offsets[s] = d;
    d += schema[s].kind == ColumnKind::kNumeric ? 1 : schema[s].categories.size();
  }

  ds.x = linalg::Matrix(n, d);
  if (target) ds.y.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t s = 0; s < schema.size(); ++s) {
      const ColumnSchema& col = schema[s];
      const std::string& field = t.rows[r][source[s]];
      check_value_present(field, r, source[s]);
      if (col.kind == ColumnKind::kNumeric) {
        double v;
        if (!parse_numeric(field, v))
          fail(ErrorCode::kSchemaMismatch, "column '" + col.name + "' expected numeric, got '" +
                                               field + "' at row " + std::to_string(r + 2));
        if (!std::isfinite(v))
          fail(ErrorCode::kMissingValue,
               "non-finite value in column '" + col.name + "' at row " + std::to_string(r + 2));
        ds.x(r, offsets[s]) = v;
      } else {
        const auto it = std::find(col.categories.begin(), col.categories.end(), field);
        if (it == col.categories.end())
          fail(ErrorCode::kSchemaMismatch, "unknown category '" + field + "' in column '" +
                                               col.name + "' at row " + std::to_string(r + 2));
        ds.x(r, offsets[s] + static_cast<std::size_t>(it - col.categories.begin())) = 1.0;
      }
    }
    if (target) {
      const std::string& field = t.rows[r][*target];
      check_value_present(field, r, *target);
      const auto it = std::find(class_names.begin(), class_names.end(), field);
      if (it == class_names.end())
        fail(ErrorCode::kSchemaMismatch,
             "unknown class '" + field + "' at row " + std::to_string(r + 2));
      ds.y[r] = static_cast<int>(it - class_names.begin()) + 1;
    }
  }
  return ds;
}

int repetitions_for(std::size_t n) {
  if (n < 500) return 50;
  if (n < 1000) return 20;
  if (n < 5000) return 10;
  return 5;
}

LabeledDataset take_rows(const LabeledDataset& ds, const std::vector<std::size_t>& rows) {
  LabeledDataset out;
  out.schema = ds.schema;
  out.class_names = ds.class_names;
  out.target_name = ds.target_name;
  out.x = linalg::Matrix(rows.size(), ds.dim());
  if (ds.has_labels()) out.y.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double* src = ds.x.row(rows[i]);
    std::copy(src, src + ds.dim(), out.x.row(i));
    if (ds.has_labels()) out.y[i] = ds.y[rows[i]];
  }
  return out;
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds, const SplitPlan& plan,
                                                std::uint32_t rep_index, std::uint64_t seed) {
  const std::size_t n = ds.size();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  rng::SplitMix64 stream(rng::substream(seed, rng::kCtxSplit, rep_index));
  stream.shuffle(perm);

  const std::size_t n_train_raw =
      static_cast<std::size_t>(std::floor(plan.train_fraction * static_cast<double>(n)));
  const std::size_t n_test_raw = n - n_train_raw;
  if (n_train_raw == 0 || n_test_raw == 0)
    fail(ErrorCode::kTooSmall, "dataset too small to split");

  const std::size_t n_train = std::min(n_train_raw, plan.train_cap);
  const std::size_t n_test = std::min(n_test_raw, plan.test_cap);

  std::vector<std::size_t> train_rows(perm.begin(), perm.begin() + static_cast<long>(n_train));
  std::vector<std::size_t> test_rows(
      perm.begin() + static_cast<long>(n_train_raw),
      perm.begin() + static_cast<long>(n_train_raw + n_test));
  return {take_rows(ds, train_rows), take_rows(ds, test_rows)};
}

Scaler fit_scaler(const linalg::Matrix& x) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n < 2) fail(ErrorCode::kTooSmall, "scaler needs at least two rows");
  Scaler s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.row(i);
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += xi[j];
  }
  for (double& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double c = xi[j] - s.mean[j];
      s.scale[j] += c * c;
    }
  }
  for (double& v : s.scale) {
    v = std::sqrt(v / static_cast<double>(n - 1));
    if (v == 0.0) v = 1.0;  // constant columns pass through unscaled
  }
  return s;
}

void apply_scaler(const Scaler& s, double* row, std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) row[j] = (row[j] - s.mean[j]) / s.scale[j];
}

void apply_scaler(const Scaler& s, linalg::Matrix& x) {
  for (std::size_t i = 0; i < x.rows(); ++i) apply_scaler(s, x.row(i), x.cols());
}

}  // namespace bopnn::dataio
