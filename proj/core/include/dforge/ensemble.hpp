#pragma once

#include <cstdint>
#include <vector>

#include "dforge/image.hpp"
#include "dforge/tiling.hpp"

namespace dforge {

// Geometric self-ensemble: (1/8) * sum_i Ti^-1(denoise(Ti(img))) over the
// eight D4 members. Exactly eight denoiser invocations.
ImageF self_ensemble(const DenoiseFn& denoiser, const ImageF& img);

// Per-pixel convex combination; weights must be >= 0 and sum to 1 (+-1e-9).
ImageF weighted_ensemble(const std::vector<ImageF>& outputs,
                         const std::vector<double>& weights);

// Runs tiled inference once per TileSpec and averages the results in float.
// quantize_before_merge round-trips each output through u8 first, for parity
// experiments with pipelines that merge after quantization.
ImageF multiscale_ensemble(const DenoiseFn& denoiser, const ImageF& img,
                           const std::vector<TileSpec>& scales,
                           bool quantize_before_merge = false);

struct EdgeMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;  // 0/1 per pixel

    bool at(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c] != 0; }
    std::size_t count() const;
};

struct CannyParams {
    double sigma = 1.4;
    double low = 0.1;   // fraction of the max gradient magnitude
    double high = 0.2;
};

// Canny on the Rec.601 luma: Gaussian smooth, Sobel gradients, non-maximum
// suppression along the quantized gradient direction, hysteresis from strong
// (>= high) through weak (>= low) pixels. Thresholds are relative to the
// maximum gradient magnitude, making them contrast-invariant.
EdgeMask canny(const ImageF& img, const CannyParams& params = {});

// Edge-guided fusion of two denoiser outputs: where only `a` shows an edge
// (E_a AND NOT E_b), keep `b` (the edge standard); average elsewhere.
ImageF edge_guided_fuse(const ImageF& a, const ImageF& b,
                        const CannyParams& params = {});

struct EnsembleSpec {
    enum class Mode { SelfD4, Weighted, Multiscale };
    Mode mode = Mode::SelfD4;
    std::vector<double> weights;       // Weighted
    std::vector<TileSpec> scales;      // Multiscale
    bool quantize_before_merge = false;
};

}  // namespace dforge
