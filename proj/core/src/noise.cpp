#include "sqa/noise.hpp"

#include <cmath>

#include "sqa/error.hpp"
#include "sqa/rng.hpp"

namespace sqa {

Tensor inject_noise(const Tensor& features, const NoiseSpec& spec) {
    if (!std::isfinite(spec.snr_db)) throw ConfigError("inject_noise: snr_db must be finite");
    if (features.size() == 0) throw SignalPowerError("inject_noise: empty features");
    double power = 0.0;
    for (double v : features.data()) power += v * v;
    power /= static_cast<double>(features.size());
    if (power <= 0.0) {
        throw SignalPowerError("inject_noise: all-zero features have no signal power");
    }
    const double noise_std = std::sqrt(power / std::pow(10.0, spec.snr_db / 10.0));
    Rng rng(spec.seed);
    Tensor out = Tensor::from_data(features.shape(), features.data());
    for (double& v : out.data()) v += rng.normal(0.0, noise_std);
    return out;
}

}  // namespace sqa
