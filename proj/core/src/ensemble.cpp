#include "dforge/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stack>

#include "dforge/filters.hpp"

namespace dforge {

ImageF self_ensemble(const DenoiseFn& denoiser, const ImageF& img) {
    ImageF acc(img.height, img.width, img.channels, 0.0);
    for (GeomTransform g : kAllTransforms) {
        ImageF restored;
        try {
            restored = apply_transform(denoiser(apply_transform(img, g)), inverse(g));
        } catch (const std::exception& e) {
            throw DataError(std::string("self_ensemble: denoiser failed under ") +
                            to_string(g) + ": " + e.what());
        }
        if (!restored.same_shape(img))
            throw DataError(std::string("self_ensemble: denoiser changed shape under ") +
                            to_string(g));
        for (std::size_t i = 0; i < acc.data.size(); ++i)
            acc.data[i] += restored.data[i];
    }
    for (auto& v : acc.data) v *= 1.0 / 8.0;
    return acc;
}

ImageF weighted_ensemble(const std::vector<ImageF>& outputs,
                         const std::vector<double>& weights) {
    if (outputs.empty() || outputs.size() != weights.size())
        throw DataError("weighted_ensemble: outputs/weights size mismatch");
    for (std::size_t i = 1; i < outputs.size(); ++i)
        if (!outputs[i].same_shape(outputs[0]))
            throw DataError("weighted_ensemble: shape mismatch");
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0) throw DataError("weighted_ensemble: negative weight");
        sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw DataError("weighted_ensemble: weights must sum to 1");

    ImageF out(outputs[0].height, outputs[0].width, outputs[0].channels, 0.0);
    for (std::size_t k = 0; k < outputs.size(); ++k)
        for (std::size_t i = 0; i < out.data.size(); ++i)
            out.data[i] += weights[k] * outputs[k].data[i];
    return out;
}

ImageF multiscale_ensemble(const DenoiseFn& denoiser, const ImageF& img,
                           const std::vector<TileSpec>& scales,
                           bool quantize_before_merge) {
    if (scales.empty()) throw DataError("multiscale_ensemble: no scales");
    ImageF acc(img.height, img.width, img.channels, 0.0);
    for (const TileSpec& spec : scales) {
        ImageF out = run_tiled(denoiser, img, spec);
        if (quantize_before_merge) out = to_float(to_u8(out));
        for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += out.data[i];
    }
    for (auto& v : acc.data) v /= static_cast<double>(scales.size());
    return acc;
}

std::size_t EdgeMask::count() const {
    return static_cast<std::size_t>(
        std::count_if(data.begin(), data.end(), [](std::uint8_t v) { return v != 0; }));
}

EdgeMask canny(const ImageF& img, const CannyParams& params) {
    if (params.low < 0 || params.high < params.low)
        throw DataError("canny: thresholds must satisfy 0 <= low <= high");

    const ImageF smoothed = gaussian_blur(to_luma(img), params.sigma);
    const Gradients g = sobel(smoothed);
    const int H = img.height, W = img.width;

    std::vector<double> mag(static_cast<std::size_t>(H) * W);
    double max_mag = 0.0;
    for (std::size_t i = 0; i < mag.size(); ++i) {
        mag[i] = std::hypot(g.gx.data[i], g.gy.data[i]);
        max_mag = std::max(max_mag, mag[i]);
    }

    EdgeMask mask{H, W, std::vector<std::uint8_t>(mag.size(), 0)};
    if (max_mag == 0.0) return mask;  // flat image, no edges

    const double lo = params.low * max_mag;
    const double hi = params.high * max_mag;

    // Non-maximum suppression along the quantized gradient direction. Ties
    // toward the forward neighbour are kept so a symmetric ridge stays one
    // pixel wide.
    std::vector<std::uint8_t> cls(mag.size(), 0);  // 0 none, 1 weak, 2 strong
    auto m = [&](int r, int c) -> double {
        if (r < 0 || r >= H || c < 0 || c >= W) return 0.0;
        return mag[static_cast<std::size_t>(r) * W + c];
    };
    for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * W + c;
            if (mag[i] < lo) continue;
            const double gx = g.gx.data[i], gy = g.gy.data[i];
            int dr, dc;
            const double angle = std::atan2(gy, gx);  // [-pi, pi]
            const double a = angle < 0 ? angle + std::numbers::pi : angle;
            if (a < std::numbers::pi / 8 || a >= 7 * std::numbers::pi / 8) {
                dr = 0; dc = 1;          // ~horizontal gradient
            } else if (a < 3 * std::numbers::pi / 8) {
                dr = 1; dc = 1;          // diagonal
            } else if (a < 5 * std::numbers::pi / 8) {
                dr = 1; dc = 0;          // ~vertical gradient
            } else {
                dr = 1; dc = -1;         // anti-diagonal
            }
            if (mag[i] >= m(r + dr, c + dc) && mag[i] > m(r - dr, c - dc))
                cls[i] = mag[i] >= hi ? 2 : 1;
        }
    }

    // Hysteresis: flood from strong pixels through 8-connected weak ones.
    std::stack<std::pair<int, int>> frontier;
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c)
            if (cls[static_cast<std::size_t>(r) * W + c] == 2) {
                mask.data[static_cast<std::size_t>(r) * W + c] = 1;
                frontier.emplace(r, c);
            }
    while (!frontier.empty()) {
        auto [r, c] = frontier.top();
        frontier.pop();
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                const int nr = r + dr, nc = c + dc;
                if (nr < 0 || nr >= H || nc < 0 || nc >= W) continue;
                const std::size_t ni = static_cast<std::size_t>(nr) * W + nc;
                if (cls[ni] == 1 && !mask.data[ni]) {
                    mask.data[ni] = 1;
                    frontier.emplace(nr, nc);
                }
            }
    }
    return mask;
}

ImageF edge_guided_fuse(const ImageF& a, const ImageF& b, const CannyParams& params) {
    if (!a.same_shape(b)) throw DataError("edge_guided_fuse: shape mismatch");
    const EdgeMask ea = canny(a, params);
    const EdgeMask eb = canny(b, params);

    ImageF out(a.height, a.width, a.channels);
    for (int r = 0; r < a.height; ++r)
        for (int c = 0; c < a.width; ++c) {
            // (E_a OR E_b) XOR E_b == E_a AND NOT E_b
            const bool keep_b = ea.at(r, c) && !eb.at(r, c);
            for (int ch = 0; ch < a.channels; ++ch)
                out.at(r, c, ch) = keep_b ? b.at(r, c, ch)
                                          : 0.5 * (a.at(r, c, ch) + b.at(r, c, ch));
        }
    return out;
}

}  // namespace dforge
