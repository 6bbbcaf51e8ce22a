#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dforge/errors.hpp"

namespace dforge {

// 8-bit raster, row-major, channel-interleaved. channels is 1 (gray) or 3 (RGB).
struct ImageU8 {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<std::uint8_t> data;

    ImageU8() = default;
    ImageU8(int h, int w, int c, std::uint8_t fill = 0);

    std::uint8_t& at(int r, int c, int ch) {
        return data[(static_cast<std::size_t>(r) * width + c) * channels + ch];
    }
    std::uint8_t at(int r, int c, int ch) const {
        return data[(static_cast<std::size_t>(r) * width + c) * channels + ch];
    }
    std::size_t sample_count() const { return data.size(); }
    bool same_shape(const ImageU8& other) const {
        return height == other.height && width == other.width && channels == other.channels;
    }
};

// Floating-point raster, same layout, nominal domain [0,1]. Values may leave
// [0,1] for unclipped noisy images; NaN/Inf are never valid.
struct ImageF {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    ImageF() = default;
    ImageF(int h, int w, int c, double fill = 0.0);

    double& at(int r, int c, int ch) {
        return data[(static_cast<std::size_t>(r) * width + c) * channels + ch];
    }
    double at(int r, int c, int ch) const {
        return data[(static_cast<std::size_t>(r) * width + c) * channels + ch];
    }
    std::size_t sample_count() const { return data.size(); }
    bool same_shape(const ImageF& other) const {
        return height == other.height && width == other.width && channels == other.channels;
    }
    bool is_finite() const;
};

// to_float divides by 255 exactly; to_u8 clamps to [0,1] and rounds half away
// from zero. The round trip u8 -> float -> u8 is lossless.
ImageF to_float(const ImageU8& img);
ImageU8 to_u8(const ImageF& img);

// The eight members of the dihedral group D4. HFlipRot90 means rot90 first,
// then hflip.
enum class GeomTransform {
    Identity,
    Rot90,
    Rot180,
    Rot270,
    HFlip,
    VFlip,
    HFlipRot90,
    HFlipRot270,
};

constexpr std::array<GeomTransform, 8> kAllTransforms = {
    GeomTransform::Identity,  GeomTransform::Rot90,      GeomTransform::Rot180,
    GeomTransform::Rot270,    GeomTransform::HFlip,      GeomTransform::VFlip,
    GeomTransform::HFlipRot90, GeomTransform::HFlipRot270,
};

GeomTransform inverse(GeomTransform g);
const char* to_string(GeomTransform g);

// Pure pixel permutation; odd rotations swap H and W.
ImageF apply_transform(const ImageF& img, GeomTransform g);

}  // namespace dforge
