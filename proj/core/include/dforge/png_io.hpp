#pragma once

#include <string>

#include "dforge/image.hpp"

namespace dforge {

// 8-bit grayscale/RGB PNG only. Alpha, palette and 16-bit files are rejected
// rather than converted; silent channel loss hides dataset mistakes.
ImageU8 load_png(const std::string& path);
void save_png(const std::string& path, const ImageU8& img);

}  // namespace dforge
