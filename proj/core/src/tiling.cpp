#include "dforge/tiling.hpp"

#include <algorithm>
#include <cmath>

namespace dforge {

const char* to_string(BlendMode m) {
    return m == BlendMode::Average ? "average" : "linear";
}

BlendMode blend_mode_from_string(const std::string& s) {
    if (s == "average") return BlendMode::Average;
    if (s == "linear") return BlendMode::Linear;
    throw DataError("unknown blend mode '" + s + "' (use average|linear)");
}

TileSpec TileSpec::from_overlap(int patch, int overlap, BlendMode blend) {
    if (patch < 1) throw DataError("TileSpec: patch must be >= 1");
    if (overlap < 0 || overlap >= patch)
        throw DataError("TileSpec: overlap must satisfy 0 <= overlap < patch");
    return {patch, patch - overlap, blend};
}

TileSpec TileSpec::from_stride(int patch, int stride, BlendMode blend) {
    if (patch < 1) throw DataError("TileSpec: patch must be >= 1");
    if (stride < 1 || stride > patch)
        throw DataError("TileSpec: stride must satisfy 1 <= stride <= patch");
    return {patch, stride, blend};
}

namespace {

std::vector<int> axis_anchors(int dim, int patch, int stride) {
    std::vector<int> anchors;
    for (int a = 0; a + patch <= dim; a += stride) anchors.push_back(a);
    const int last = dim - patch;
    if (anchors.empty() || anchors.back() != last) anchors.push_back(last);
    return anchors;
}

// Rising tent over a margin of m pixels: (k+1)/(m+1) at offset k. Two adjacent
// tiles sharing an overlap of m then sum to exactly 1 before normalization.
double tent(int offset, int patch, int m_low, int m_high) {
    double w = 1.0;
    if (offset < m_low) w = std::min(w, (offset + 1) / static_cast<double>(m_low + 1));
    const int from_end = patch - 1 - offset;
    if (from_end < m_high)
        w = std::min(w, (from_end + 1) / static_cast<double>(m_high + 1));
    return w;
}

}  // namespace

TilePlan plan_tiles(int height, int width, const TileSpec& spec) {
    if (spec.patch > std::min(height, width))
        throw DataError("plan_tiles: patch " + std::to_string(spec.patch) +
                        " exceeds image dimension " +
                        std::to_string(std::min(height, width)));
    TilePlan plan;
    plan.patch = spec.patch;
    plan.height = height;
    plan.width = width;
    plan.row_anchors = axis_anchors(height, spec.patch, spec.stride);
    plan.col_anchors = axis_anchors(width, spec.patch, spec.stride);
    return plan;
}

ImageF run_tiled(const DenoiseFn& denoiser, const ImageF& img, const TileSpec& spec) {
    const int H = img.height, W = img.width, C = img.channels;
    if (spec.patch > std::min(H, W)) return denoiser(img);  // whole-image fallback

    const TilePlan plan = plan_tiles(H, W, spec);
    const int P = plan.patch;
    const auto& rows = plan.row_anchors;
    const auto& cols = plan.col_anchors;

    // Margin of a tile = its overlap with the neighbouring tile on that side
    // (zero at the image border). Average mode uses flat weight 1.
    auto margins = [&](const std::vector<int>& anchors, std::size_t i) {
        const int lo = i == 0 ? 0 : anchors[i - 1] + P - anchors[i];
        const int hi = i + 1 == anchors.size() ? 0 : anchors[i] + P - anchors[i + 1];
        return std::pair<int, int>{std::clamp(lo, 0, P - 1), std::clamp(hi, 0, P - 1)};
    };

    ImageF acc(H, W, C, 0.0);
    ImageF weight(H, W, 1, 0.0);
    ImageF tile(P, P, C);

    for (std::size_t ri = 0; ri < rows.size(); ++ri) {
        const auto [rm_lo, rm_hi] = margins(rows, ri);
        for (std::size_t ci = 0; ci < cols.size(); ++ci) {
            const auto [cm_lo, cm_hi] = margins(cols, ci);
            const int r0 = rows[ri], c0 = cols[ci];

            for (int r = 0; r < P; ++r)
                for (int c = 0; c < P; ++c)
                    for (int ch = 0; ch < C; ++ch)
                        tile.at(r, c, ch) = img.at(r0 + r, c0 + c, ch);

            ImageF out;
            try {
                out = denoiser(tile);
            } catch (const std::exception& e) {
                throw DataError("tile at (" + std::to_string(r0) + "," +
                                std::to_string(c0) + "): " + e.what());
            }
            if (!out.same_shape(tile))
                throw DataError("tile at (" + std::to_string(r0) + "," +
                                std::to_string(c0) + "): denoiser changed shape");

            for (int r = 0; r < P; ++r) {
                const double wr = spec.blend == BlendMode::Linear
                                      ? tent(r, P, rm_lo, rm_hi)
                                      : 1.0;
                for (int c = 0; c < P; ++c) {
                    const double w =
                        wr * (spec.blend == BlendMode::Linear
                                  ? tent(c, P, cm_lo, cm_hi)
                                  : 1.0);
                    weight.at(r0 + r, c0 + c, 0) += w;
                    for (int ch = 0; ch < C; ++ch)
                        acc.at(r0 + r, c0 + c, ch) += w * out.at(r, c, ch);
                }
            }
        }
    }

    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            const double w = weight.at(r, c, 0);
            for (int ch = 0; ch < C; ++ch) acc.at(r, c, ch) /= w;
        }
    return acc;
}

std::optional<int> adaptive_patch_size(int height, int width) {
    const int m = std::min(height, width);
    if (m >= 896) return 896;
    if (m >= 768) return 768;
    if (m >= 512) return 512;
    return std::nullopt;
}

}  // namespace dforge
