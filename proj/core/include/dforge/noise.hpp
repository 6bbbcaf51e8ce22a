#pragma once

#include <cstdint>

#include "dforge/image.hpp"

namespace dforge {

// AWGN parameters. sigma is expressed in 8-bit units: sigma = 50 adds noise of
// standard deviation 50/255 in the float domain.
struct NoiseSpec {
    double sigma = 50.0;
    bool clip = true;
    std::uint64_t seed = 0;
};

// out = img + (sigma/255) * Z with Z i.i.d. standard normal, one variate per
// sample index. Same (img, spec) always yields bit-identical output.
ImageF add_awgn(const ImageF& img, const NoiseSpec& spec);

// Blind noise-level estimate in 8-bit units: robust MAD on the finest diagonal
// Haar detail, sigma = 255 * median(|HH1|) / 0.6745, averaged over channels.
double estimate_sigma(const ImageF& img);

}  // namespace dforge
