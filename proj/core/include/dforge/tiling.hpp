#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dforge/image.hpp"

namespace dforge {

using DenoiseFn = std::function<ImageF(const ImageF&)>;

enum class BlendMode { Average, Linear };

const char* to_string(BlendMode m);
BlendMode blend_mode_from_string(const std::string& s);

// Sliding-window geometry. stride = patch - overlap.
struct TileSpec {
    int patch = 256;
    int stride = 208;
    BlendMode blend = BlendMode::Average;

    static TileSpec from_overlap(int patch, int overlap,
                                 BlendMode blend = BlendMode::Average);
    static TileSpec from_stride(int patch, int stride,
                                BlendMode blend = BlendMode::Average);
    int overlap() const { return patch - stride; }
};

// Anchor grid covering the full image: multiples of the stride plus a final
// anchor clamped to dim - patch, deduplicated.
struct TilePlan {
    std::vector<int> row_anchors;
    std::vector<int> col_anchors;
    int patch = 0;
    int height = 0;
    int width = 0;
};

TilePlan plan_tiles(int height, int width, const TileSpec& spec);

// Denoises every tile and stitches. Average mode divides the per-pixel sum by
// the coverage count; linear mode applies separable tent ramps across overlap
// margins and normalizes, so both modes form a partition of unity. Images
// smaller than the patch are denoised whole.
ImageF run_tiled(const DenoiseFn& denoiser, const ImageF& img, const TileSpec& spec);

// Patch-size tiers for high-resolution inputs: 896 / 768 / 512 by the smaller
// image dimension; nullopt means process the image whole.
std::optional<int> adaptive_patch_size(int height, int width);

}  // namespace dforge
