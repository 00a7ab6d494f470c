#pragma once

#include <string>

#include "rbcx/index.hpp"

namespace rbcx {

/// Versioned little-endian "RBCX" container; lossless for every feature.
void save_index(const Index& idx, const std::string& path);
Index load_index(const std::string& path);

}  // namespace rbcx
