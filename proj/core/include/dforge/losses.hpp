#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dforge/image.hpp"

namespace dforge {

// The training-loss zoo as pure image-pair functionals. A LossSpec is either a
// primitive kind or a non-negative weighted sum of other specs.
struct LossSpec {
    enum class Kind {
        L1,
        Mse,
        Charbonnier,         // mean sqrt(d^2 + eps^2)
        SobelGradient,       // mean |sobel(pred) - sobel(target)| over x/y responses
        GradientWeightedL1,  // mean((1 + |sobel(target)|/max) * |d|)
        Swt,                 // mean L1 over all subbands of an undecimated Haar transform
        HighFrequency,       // L1 between Gaussian-residuals (img - blur(img, sigma))
        Ssim,                // 1 - ssim on float images
        WeightedSum,
    };

    Kind kind = Kind::L1;
    double param = 0.0;  // Charbonnier eps / HighFrequency sigma_blur
    int levels = 1;      // Swt
    std::vector<std::pair<LossSpec, double>> terms;  // WeightedSum

    static LossSpec l1() { return {Kind::L1, 0.0, 1, {}}; }
    static LossSpec mse() { return {Kind::Mse, 0.0, 1, {}}; }
    static LossSpec charbonnier(double eps = 1e-3);
    static LossSpec sobel_gradient() { return {Kind::SobelGradient, 0.0, 1, {}}; }
    static LossSpec gradient_weighted_l1() { return {Kind::GradientWeightedL1, 0.0, 1, {}}; }
    static LossSpec swt(int levels = 1);
    static LossSpec high_frequency(double sigma_blur = 1.5);
    static LossSpec ssim_loss() { return {Kind::Ssim, 0.0, 1, {}}; }
    static LossSpec weighted_sum(std::vector<std::pair<LossSpec, double>> terms);
};

double loss(const LossSpec& spec, const ImageF& pred, const ImageF& target);

// Config-file syntax, e.g. "0.8*charbonnier(1e-3) + 0.2*gradw_l1".
// Names: l1, l2|mse, charbonnier(eps), sobel, gradw_l1, swt(levels),
// highfreq(sigma), ssim.
LossSpec parse_loss_expr(std::string_view expr);
std::string to_string(const LossSpec& spec);

// One level of the undecimated (a-trous) Haar decomposition. First letter is
// the row-axis filter: hl responds to horizontal edge lines, lh to vertical
// ones. All bands stay at full resolution.
struct SwtLevel {
    ImageF ll, lh, hl, hh;
};

// Symmetric boundary extension; level j uses tap spacing 2^(j-1).
std::vector<SwtLevel> swt_forward(const ImageF& img, int levels);

// Exact reconstruction from the subband stack (verification helper, also the
// backbone of wavelet shrinkage).
ImageF swt_inverse(const std::vector<SwtLevel>& levels);

}  // namespace dforge
