#pragma once

#include <cstdint>

#include "sqa/tensor.hpp"

namespace sqa {

// Identical spec => identical noise realization.
struct NoiseSpec {
    double snr_db = 0.0;
    std::uint64_t seed = 0;
};

// Adds seeded Gaussian noise with variance P_s / 10^(snr_db/10) where P_s is
// the mean squared value of the clean features. All-zero features carry no
// signal power and raise SignalPowerError.
Tensor inject_noise(const Tensor& features, const NoiseSpec& spec);

}  // namespace sqa
