#include "dforge/noise.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dforge/rng.hpp"

namespace dforge {

ImageF add_awgn(const ImageF& img, const NoiseSpec& spec) {
    if (spec.sigma < 0) throw DataError("add_awgn: sigma must be >= 0");
    if (!img.is_finite()) throw DataError("add_awgn: non-finite input");

    const double s = spec.sigma / 255.0;
    CounterRng rng(spec.seed);
    ImageF out(img.height, img.width, img.channels);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        double v = img.data[i] + s * rng.normal(i);
        if (spec.clip) v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        out.data[i] = v;
    }
    return out;
}

namespace {

double median_abs(std::vector<double>& v) {
    const std::size_t n = v.size();
    for (auto& x : v) x = std::fabs(x);
    auto mid = v.begin() + n / 2;
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    double hi = *mid;
    double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

}  // namespace

double estimate_sigma(const ImageF& img) {
    if (img.height < 2 || img.width < 2)
        throw DataError("estimate_sigma: image must be at least 2x2");

    // Diagonal Haar detail over non-overlapping 2x2 blocks; for i.i.d. noise of
    // std s the coefficients are N(0, s^2).
    const int bh = img.height / 2, bw = img.width / 2;
    double acc = 0.0;
    for (int ch = 0; ch < img.channels; ++ch) {
        std::vector<double> hh;
        hh.reserve(static_cast<std::size_t>(bh) * bw);
        for (int i = 0; i < bh; ++i) {
            for (int j = 0; j < bw; ++j) {
                const int r = 2 * i, c = 2 * j;
                hh.push_back(0.5 * (img.at(r, c, ch) - img.at(r, c + 1, ch) -
                                    img.at(r + 1, c, ch) + img.at(r + 1, c + 1, ch)));
            }
        }
        acc += 255.0 * median_abs(hh) / 0.6745;
    }
    return acc / img.channels;
}

}  // namespace dforge
