#pragma once

#include <string>

#include "adc/model.hpp"

namespace adc {

// Binary checkpoint: header (magic, version, config hash, class count) then
// each tensor as name / shape / float32 little-endian data, in the
// model_tensors order. save(load(f)) is byte-identical to f.
void save_checkpoint(const std::string& path, ModelParams& m);

// Rebuilds a model with `expected` config; fails if the file's config hash,
// class count, or any tensor name/shape disagrees.
ModelParams load_checkpoint(const std::string& path, const ModelConfig& expected);

}  // namespace adc
