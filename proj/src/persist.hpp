#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "model.hpp"

// Versioned model files. The document is JSON with sorted keys; its
// compact serialization (without the crc32 field) is the canonical byte
// string whose CRC-32 is stored alongside. Reals are written as shortest
// round-trip decimals, so save/load reproduces predictions bit-exactly.

namespace bopnn::dataio {

inline constexpr int kModelFormatVersion = 1;

// IEEE 802.3 CRC-32 (reflected 0xEDB88320).
std::uint32_t crc32(std::string_view bytes);

void save_model(const model::Ensemble& e, const std::string& path);
model::Ensemble load_model(const std::string& path);

// The exact bytes save_model would write; exposed so callers can compare
// models without touching the filesystem.
std::string model_to_bytes(const model::Ensemble& e);

}  // namespace bopnn::dataio
