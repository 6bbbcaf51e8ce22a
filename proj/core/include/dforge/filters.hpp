#pragma once

#include <utility>

#include "dforge/image.hpp"

namespace dforge {

// Shared separable filtering, used by the loss zoo, the classical denoisers
// and the edge detector. All filters use symmetric (half-sample) boundary
// extension, which keeps them D4-equivariant.

// index reflected into [0, n)
int reflect_index(int i, int n);

// Isotropic Gaussian blur, kernel radius ceil(3*sigma), normalized to sum 1.
ImageF gaussian_blur(const ImageF& img, double sigma);

struct Gradients {
    ImageF gx;  // response along columns (x)
    ImageF gy;  // response along rows (y)
};

// Per-channel 3x3 Sobel responses.
Gradients sobel(const ImageF& img);

// Rec.601 luma; a 1-channel image passes through unchanged.
ImageF to_luma(const ImageF& img);

}  // namespace dforge
