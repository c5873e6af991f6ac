#pragma once

#include <string>
#include <vector>

#include "sqa/model.hpp"
#include "sqa/tensor.hpp"

namespace sqa {

// Checkpoint container: magic "SQAC", u32 version, u32 tensor count; per
// tensor u32 name length + UTF-8 name, u32 rank, u32 dims, 64-bit
// little-endian floats row-major. Round-trips are bit-exact.
struct NamedTensorData {
    std::string name;
    std::vector<int> shape;
    std::vector<double> data;
};

void save_checkpoint(const std::string& path, const std::vector<NamedParam>& tensors);
std::vector<NamedTensorData> load_checkpoint(const std::string& path);

// Writes the full model state (frozen + trainable) in named_tensors order.
void save_model(const std::string& path, ModelState& state);

// Rebuilds a state from config + checkpoint. Every expected tensor must be
// present with a matching shape, else IoError (checkpoint/config mismatch).
ModelState load_model(const std::string& path, const ModelConfig& config);

}  // namespace sqa
