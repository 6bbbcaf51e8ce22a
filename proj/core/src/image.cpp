#include "dforge/image.hpp"

#include <cmath>
#include <utility>

namespace dforge {

ImageU8::ImageU8(int h, int w, int c, std::uint8_t fill)
    : height(h), width(w), channels(c),
      data(static_cast<std::size_t>(h) * w * c, fill) {
    if (h < 0 || w < 0 || (c != 1 && c != 3))
        throw DataError("ImageU8: invalid shape");
}

ImageF::ImageF(int h, int w, int c, double fill)
    : height(h), width(w), channels(c),
      data(static_cast<std::size_t>(h) * w * c, fill) {
    if (h < 0 || w < 0 || (c != 1 && c != 3))
        throw DataError("ImageF: invalid shape");
}

bool ImageF::is_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

ImageF to_float(const ImageU8& img) {
    ImageF out(img.height, img.width, img.channels);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = img.data[i] / 255.0;
    return out;
}

ImageU8 to_u8(const ImageF& img) {
    if (!img.is_finite()) throw DataError("to_u8: non-finite sample");
    ImageU8 out(img.height, img.width, img.channels);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        double v = img.data[i];
        v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        out.data[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    return out;
}

GeomTransform inverse(GeomTransform g) {
    switch (g) {
        case GeomTransform::Rot90:  return GeomTransform::Rot270;
        case GeomTransform::Rot270: return GeomTransform::Rot90;
        default:                    return g;  // rotations by 0/180 and all reflections
    }
}

const char* to_string(GeomTransform g) {
    switch (g) {
        case GeomTransform::Identity:    return "identity";
        case GeomTransform::Rot90:       return "rot90";
        case GeomTransform::Rot180:      return "rot180";
        case GeomTransform::Rot270:      return "rot270";
        case GeomTransform::HFlip:       return "hflip";
        case GeomTransform::VFlip:       return "vflip";
        case GeomTransform::HFlipRot90:  return "hflip.rot90";
        case GeomTransform::HFlipRot270: return "hflip.rot270";
    }
    return "?";
}

namespace {

inline bool swaps_dims(GeomTransform g) {
    return g == GeomTransform::Rot90 || g == GeomTransform::Rot270 ||
           g == GeomTransform::HFlipRot90 || g == GeomTransform::HFlipRot270;
}

// Source coordinates in the input image for output pixel (r, c). H and W are
// the input dimensions. Rotations are counterclockwise.
inline std::pair<int, int> source_coords(GeomTransform g, int r, int c, int H, int W) {
    switch (g) {
        case GeomTransform::Identity:    return {r, c};
        case GeomTransform::Rot90:       return {c, W - 1 - r};
        case GeomTransform::Rot180:      return {H - 1 - r, W - 1 - c};
        case GeomTransform::Rot270:      return {H - 1 - c, r};
        case GeomTransform::HFlip:       return {r, W - 1 - c};
        case GeomTransform::VFlip:       return {H - 1 - r, c};
        case GeomTransform::HFlipRot90:  return {H - 1 - c, W - 1 - r};  // anti-transpose
        case GeomTransform::HFlipRot270: return {c, r};                  // transpose
    }
    return {r, c};
}

}  // namespace

ImageF apply_transform(const ImageF& img, GeomTransform g) {
    const int H = img.height, W = img.width, C = img.channels;
    const int oh = swaps_dims(g) ? W : H;
    const int ow = swaps_dims(g) ? H : W;
    ImageF out(oh, ow, C);
    for (int r = 0; r < oh; ++r) {
        for (int c = 0; c < ow; ++c) {
            auto [sr, sc] = source_coords(g, r, c, H, W);
            for (int ch = 0; ch < C; ++ch) out.at(r, c, ch) = img.at(sr, sc, ch);
        }
    }
    return out;
}

}  // namespace dforge
