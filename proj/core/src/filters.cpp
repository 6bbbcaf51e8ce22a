#include "dforge/filters.hpp"

#include <cmath>
#include <vector>

namespace dforge {

int reflect_index(int i, int n) {
    if (n == 1) return 0;
    // half-sample symmetric: ... 1 0 | 0 1 ... n-1 | n-1 n-2 ...
    const int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

ImageF gaussian_blur(const ImageF& img, double sigma) {
    if (sigma <= 0) throw DataError("gaussian_blur: sigma must be > 0");
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += k[i + radius];
    }
    for (auto& v : k) v /= sum;

    const int H = img.height, W = img.width, C = img.channels;
    ImageF tmp(H, W, C), out(H, W, C);
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c)
            for (int ch = 0; ch < C; ++ch) {
                double s = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    s += k[i + radius] * img.at(r, reflect_index(c + i, W), ch);
                tmp.at(r, c, ch) = s;
            }
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c)
            for (int ch = 0; ch < C; ++ch) {
                double s = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    s += k[i + radius] * tmp.at(reflect_index(r + i, H), c, ch);
                out.at(r, c, ch) = s;
            }
    return out;
}

Gradients sobel(const ImageF& img) {
    const int H = img.height, W = img.width, C = img.channels;
    Gradients g{ImageF(H, W, C), ImageF(H, W, C)};
    for (int r = 0; r < H; ++r) {
        const int rm = reflect_index(r - 1, H), rp = reflect_index(r + 1, H);
        for (int c = 0; c < W; ++c) {
            const int cm = reflect_index(c - 1, W), cp = reflect_index(c + 1, W);
            for (int ch = 0; ch < C; ++ch) {
                const double tl = img.at(rm, cm, ch), tc = img.at(rm, c, ch),
                             tr = img.at(rm, cp, ch);
                const double ml = img.at(r, cm, ch), mr = img.at(r, cp, ch);
                const double bl = img.at(rp, cm, ch), bc = img.at(rp, c, ch),
                             br = img.at(rp, cp, ch);
                g.gx.at(r, c, ch) = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
                g.gy.at(r, c, ch) = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
            }
        }
    }
    return g;
}

ImageF to_luma(const ImageF& img) {
    if (img.channels == 1) return img;
    ImageF out(img.height, img.width, 1);
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c)
            out.at(r, c, 0) = 0.299 * img.at(r, c, 0) + 0.587 * img.at(r, c, 1) +
                              0.114 * img.at(r, c, 2);
    return out;
}

}  // namespace dforge
