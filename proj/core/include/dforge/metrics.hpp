#pragma once

#include <string>
#include <vector>

#include "dforge/image.hpp"

namespace dforge {

// Challenge-protocol PSNR on 8-bit images: 10*log10(255^2 / MSE) with the MSE
// taken jointly over all samples. Identical images return +infinity.
double psnr(const ImageU8& a, const ImageU8& b);

// Pre-quantization variant on float rasters with the given peak (1.0 for the
// nominal [0,1] domain).
double psnr(const ImageF& a, const ImageF& b, double peak = 1.0);

// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), C1=(0.01*L)^2,
// C2=(0.03*L)^2, computed per channel and averaged. Windows are fully inside
// the image, so min(H, W) >= 11 is required.
double ssim(const ImageU8& a, const ImageU8& b);
double ssim(const ImageF& a, const ImageF& b);  // L = 1.0

struct EvalRecord {
    std::string name;
    double psnr = 0.0;
    double ssim = 0.0;
};

struct RankedRow {
    int rank = 0;
    EvalRecord record;
};
using RankTable = std::vector<RankedRow>;

// Competition ("1224") ranking by PSNR rounded to 2 decimals; tied scores share
// a rank and the next rank skips. SSIM is carried along but never ordered on.
RankTable rank(std::vector<EvalRecord> records);

// Kahan-compensated mean so aggregation order cannot nudge reported values.
double mean_compensated(const std::vector<double>& values);

}  // namespace dforge
