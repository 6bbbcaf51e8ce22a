#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "dforge/filters.hpp"
#include "dforge/image.hpp"
#include "dforge/rng.hpp"

namespace testutil {

inline dforge::ImageF make_random(int h, int w, int c, std::uint64_t seed) {
    dforge::CounterRng rng(seed);
    dforge::ImageF img(h, w, c);
    for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = rng.uniform(i) * 0.999;
    return img;
}

inline dforge::ImageU8 make_random_u8(int h, int w, int c, std::uint64_t seed) {
    dforge::CounterRng rng(seed);
    dforge::ImageU8 img(h, w, c);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        img.data[i] = static_cast<std::uint8_t>(rng.bits(i) % 256);
    return img;
}

// Photographic-stand-in content: a few blurred noise octaves plus slow
// sinusoids, normalized into [0.05, 0.95]. Channels share a base field so
// luma-based stages see consistent structure.
inline dforge::ImageF make_natural(int h, int w, int c, std::uint64_t seed) {
    using dforge::ImageF;
    auto octave = [&](double sigma, std::uint64_t s) {
        ImageF noise(h, w, 1);
        dforge::CounterRng rng(seed * 1315423911u + s);
        for (std::size_t i = 0; i < noise.data.size(); ++i)
            noise.data[i] = rng.normal(i);
        return dforge::gaussian_blur(noise, sigma);
    };
    ImageF base(h, w, 1, 0.0);
    const double sigmas[] = {16.0, 4.0, 1.0};
    const double amps[] = {0.5, 0.25, 0.12};
    for (int k = 0; k < 3; ++k) {
        ImageF o = octave(sigmas[k], k);
        double lo = o.data[0], hi = o.data[0];
        for (double v : o.data) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double span = std::max(hi - lo, 1e-12);
        for (int r = 0; r < h; ++r)
            for (int cc = 0; cc < w; ++cc)
                base.at(r, cc, 0) += amps[k] * (o.at(r, cc, 0) - lo) / span;
    }
    for (int r = 0; r < h; ++r)
        for (int cc = 0; cc < w; ++cc)
            base.at(r, cc, 0) +=
                0.1 * std::sin(2 * std::numbers::pi * cc / 97.0) *
                std::cos(2 * std::numbers::pi * r / 61.0);

    double lo = base.data[0], hi = base.data[0];
    for (double v : base.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = std::max(hi - lo, 1e-12);

    ImageF img(h, w, c);
    dforge::CounterRng tint(seed + 77);
    for (int ch = 0; ch < c; ++ch) {
        const double gain = 0.85 + 0.1 * tint.uniform(ch);
        for (int r = 0; r < h; ++r)
            for (int cc = 0; cc < w; ++cc)
                img.at(r, cc, ch) =
                    0.05 + 0.9 * gain * (base.at(r, cc, 0) - lo) / span;
    }
    return img;
}

inline double max_abs_diff(const dforge::ImageF& a, const dforge::ImageF& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    return m;
}

}  // namespace testutil
