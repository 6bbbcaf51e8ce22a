#pragma once

#include <string>
#include <string_view>

#include "dforge/image.hpp"
#include "dforge/tiling.hpp"

namespace dforge {

// Uniform denoiser abstraction: built-in classical denoisers for end-to-end
// pipeline verification plus a subprocess adapter for external models.
struct DenoiserSpec {
    enum class Kind { Identity, Gaussian, Median, Nlm, WaveletShrink, External };

    Kind kind = Kind::Identity;
    double sigma_k = 1.5;      // gaussian kernel std
    int radius = 1;            // median window radius
    int nlm_patch = 7;         // nlm patch size (odd)
    int nlm_window = 21;       // nlm search window size (odd)
    double nlm_h = 0.0;        // 0 = auto: 0.8 * estimated noise std
    double shrink_threshold = -1.0;  // < 0 = auto universal threshold
    int shrink_levels = 1;
    std::string command;       // external template with {in} and {out}
    double timeout_s = 300.0;

    static DenoiserSpec identity();
    static DenoiserSpec gaussian(double sigma_k);
    static DenoiserSpec median(int radius);
    static DenoiserSpec nlm(int patch, int window, double h = 0.0);
    static DenoiserSpec wavelet_shrink(double threshold = -1.0, int levels = 1);
    static DenoiserSpec external(std::string command, double timeout_s = 300.0);

    // CLI syntax: identity | gaussian(1.5) | median(2) | nlm(7,21[,h]) |
    // wavelet(levels[,threshold]) | external:CMD
    static DenoiserSpec parse(std::string_view text);
    std::string to_string() const;
};

ImageF denoise(const DenoiserSpec& spec, const ImageF& img);

// Writes the input as a temp PNG, substitutes {in}/{out} in the command,
// runs it with a timeout and reads the produced PNG back. The workdir must
// exist; DENOISE_FORGE_TMPDIR overrides the default temp location.
ImageF run_external(const DenoiserSpec& spec, const ImageF& img,
                    const std::string& workdir = {});

DenoiseFn to_fn(const DenoiserSpec& spec);

}  // namespace dforge
