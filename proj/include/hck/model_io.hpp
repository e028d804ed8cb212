#pragma once

#include "hck/learner.hpp"

#include <string>

namespace hck {

/// Container: magic "HCKM", format version, structured-text header, then
/// length-checked binary sections (row-major 8-byte little-endian reals with
/// shape prefixes). load followed by predict is bit-identical to the
/// pre-save model.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace hck
