#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqa/tensor.hpp"

namespace sqa {

// Speech feature container: magic "SQAF", u32 version, u32 n_frames,
// u32 dim, 32-bit little-endian floats row-major. Values are kept as f32 in
// memory so read then write is the identity on valid files.
struct FeatureMatrix {
    std::uint32_t n_frames = 0;
    std::uint32_t dim = 0;
    std::vector<float> values;

    Tensor to_tensor() const;  // widened to f64 at the model boundary
    static FeatureMatrix from_tensor(const Tensor& t);
};

void write_features(const std::string& path, const FeatureMatrix& m);

// max_frames guards against oversized payloads (paper-scale default 900);
// pass 0 to skip the cap. Corrupt magic or a short/overlong payload is
// always rejected.
FeatureMatrix read_features(const std::string& path, std::uint32_t max_frames = 900);

}  // namespace sqa
