#include "persist.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bopnn::dataio {

using nlohmann::json;

std::uint32_t crc32(std::string_view bytes) {
  static const std::array<std::uint32_t, 256> table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int bit = 0; bit < 8; ++bit) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : (c >> 1);
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (unsigned char ch : bytes) crc = table[(crc ^ ch) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

namespace {

json matrix_to_json(const linalg::Matrix& m) { return json(m.data()); }

linalg::Matrix matrix_from_json(const json& j, std::size_t rows, std::size_t cols) {
  const auto flat = j.get<std::vector<double>>();
  if (flat.size() != rows * cols)
    fail(ErrorCode::kCorruptFile, "matrix payload has the wrong size");
  linalg::Matrix m(rows, cols);
  m.data() = flat;
  return m;
}

json ensemble_to_json(const model::Ensemble& e) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["hyperparams"] = {
      {"k", e.hp.k},
      {"q0", e.hp.subset_size},
      {"q", e.hp.subspace_dim},
      {"B", e.hp.num_models},
      {"pi_b", e.hp.bag_fraction},
      {"projection", e.hp.projection_enabled},
      {"balanced", e.hp.balanced},
      {"z_score", e.hp.z_score},
      {"seed", e.hp.seed},
  };
  j["num_classes"] = e.num_classes;
  j["dim"] = e.dim;
  j["class_names"] = e.class_names;
  j["target"] = e.target_name;

  json schema = json::array();
  for (const ColumnSchema& c : e.schema) {
    json col;
    col["name"] = c.name;
    col["kind"] = c.kind == ColumnKind::kNumeric ? "numeric" : "categorical";
    if (c.kind == ColumnKind::kCategorical) col["categories"] = c.categories;
    schema.push_back(std::move(col));
  }
  j["schema"] = std::move(schema);

  if (e.scaler) {
    j["scaler"] = {{"mean", e.scaler->mean}, {"scale", e.scaler->scale}};
  } else {
    j["scaler"] = nullptr;
  }
  if (e.oob_accuracy) {
    j["oob_accuracy"] = *e.oob_accuracy;
  } else {
    j["oob_accuracy"] = nullptr;
  }

  json models = json::array();
  for (const model::BaseModel& m : e.models) {
    json jm;
    jm["subset"] = m.subset;
    jm["basis"] = matrix_to_json(m.basis);
    jm["values"] = m.values;
    jm["inbag"] = m.inbag;
    jm["inbag_labels"] = m.bag.labels;
    jm["projected_points"] = matrix_to_json(m.bag.points);
    models.push_back(std::move(jm));
  }
  j["models"] = std::move(models);
  return j;
}

model::Ensemble ensemble_from_json(const json& j) {
  model::Ensemble e;
  const json& hp = j.at("hyperparams");
  e.hp.k = hp.at("k").get<int>();
  e.hp.subset_size = hp.at("q0").get<int>();
  e.hp.subspace_dim = hp.at("q").get<int>();
  e.hp.num_models = hp.at("B").get<int>();
  e.hp.bag_fraction = hp.at("pi_b").get<double>();
  e.hp.projection_enabled = hp.at("projection").get<bool>();
  e.hp.balanced = hp.at("balanced").get<bool>();
  e.hp.z_score = hp.at("z_score").get<bool>();
  e.hp.seed = hp.at("seed").get<std::uint64_t>();

  e.num_classes = j.at("num_classes").get<int>();
  e.dim = j.at("dim").get<std::size_t>();
  e.class_names = j.at("class_names").get<std::vector<std::string>>();
  e.target_name = j.at("target").get<std::string>();

  for (const json& col : j.at("schema")) {
    ColumnSchema c;
    c.name = col.at("name").get<std::string>();
    const std::string kind = col.at("kind").get<std::string>();
    if (kind == "numeric") {
      c.kind = ColumnKind::kNumeric;
    } else if (kind == "categorical") {
      c.kind = ColumnKind::kCategorical;
      c.categories = col.at("categories").get<std::vector<std::string>>();
    } else {
      fail(ErrorCode::kCorruptFile, "unknown column kind '" + kind + "'");
    }
    e.schema.push_back(std::move(c));
  }

  if (!j.at("scaler").is_null()) {
    Scaler s;
    s.mean = j.at("scaler").at("mean").get<std::vector<double>>();
    s.scale = j.at("scaler").at("scale").get<std::vector<double>>();
    if (s.mean.size() != e.dim || s.scale.size() != e.dim)
      fail(ErrorCode::kCorruptFile, "scaler has the wrong dimension");
    e.scaler = std::move(s);
  }
  if (!j.at("oob_accuracy").is_null()) e.oob_accuracy = j.at("oob_accuracy").get<double>();

  const std::size_t q0 = static_cast<std::size_t>(e.hp.subset_size);
  const std::size_t q = static_cast<std::size_t>(e.hp.subspace_dim);
  for (const json& jm : j.at("models")) {
    model::BaseModel m;
    m.subset = jm.at("subset").get<std::vector<std::size_t>>();
    m.inbag = jm.at("inbag").get<std::vector<std::size_t>>();
    m.bag.labels = jm.at("inbag_labels").get<std::vector<int>>();
    m.values = jm.at("values").get<std::vector<double>>();
    m.bag.num_classes = e.num_classes;
    if (m.subset.size() != q0) fail(ErrorCode::kCorruptFile, "subset has the wrong size");
    for (std::size_t idx : m.subset)
      if (idx >= e.dim) fail(ErrorCode::kCorruptFile, "subset index outside the ambient dim");
    for (std::size_t i = 1; i < m.inbag.size(); ++i)
      if (m.inbag[i] <= m.inbag[i - 1])
        fail(ErrorCode::kCorruptFile, "inbag indices not strictly increasing");
    if (e.hp.projection_enabled) {
      m.basis = matrix_from_json(jm.at("basis"), q0, q);
      m.bag.points = matrix_from_json(jm.at("projected_points"), m.inbag.size(), q);
    } else {
      if (!jm.at("basis").empty() || !m.values.empty())
        fail(ErrorCode::kCorruptFile, "unexpected basis in unprojected model");
      m.bag.points = matrix_from_json(jm.at("projected_points"), m.inbag.size(), q0);
    }
    if (m.bag.labels.size() != m.inbag.size())
      fail(ErrorCode::kCorruptFile, "label block has the wrong size");
    for (int label : m.bag.labels)
      if (label < 1 || label > e.num_classes)
        fail(ErrorCode::kCorruptFile, "label outside 1..K");
    e.models.push_back(std::move(m));
  }
  if (e.models.size() != static_cast<std::size_t>(e.hp.num_models))
    fail(ErrorCode::kCorruptFile, "model count does not match hyperparameters");
  return e;
}

}  // namespace

std::string model_to_bytes(const model::Ensemble& e) {
  json j = ensemble_to_json(e);
  j["crc32"] = crc32(j.dump());
  return j.dump(2) + "\n";
}

void save_model(const model::Ensemble& e, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path);
  out << model_to_bytes(e);
  if (!out) fail(ErrorCode::kIoError, "write failure on " + path);
}

model::Ensemble load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();

  json j = json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::kCorruptFile, "not a JSON document: " + path);

  if (!j.contains("format_version") || !j.at("format_version").is_number_integer())
    fail(ErrorCode::kCorruptFile, "missing format version");
  const int version = j.at("format_version").get<int>();
  if (version != kModelFormatVersion)
    fail(ErrorCode::kVersionMismatch,
         "model format version " + std::to_string(version) + " is not supported");

  if (!j.contains("crc32") || !j.at("crc32").is_number_unsigned())
    fail(ErrorCode::kCorruptFile, "missing checksum");
  const std::uint32_t stored = j.at("crc32").get<std::uint32_t>();
  j.erase("crc32");
  if (crc32(j.dump()) != stored) fail(ErrorCode::kCorruptFile, "checksum mismatch in " + path);

  try {
    return ensemble_from_json(j);
  } catch (const json::exception& e) {
    fail(ErrorCode::kCorruptFile, std::string("malformed model document: ") + e.what());
  }
}

}  // namespace bopnn::dataio
