#include "dforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace dforge {

namespace {

void require_same_shape(int h1, int w1, int c1, int h2, int w2, int c2,
                        const char* op) {
    if (h1 != h2 || w1 != w2 || c1 != c2)
        throw DataError(std::string(op) + ": shape mismatch");
}

// SSIM on one channel extracted to a padded-free double plane.
// Means/variances use a normalized 11x11 Gaussian window applied separably at
// every fully-interior position.
constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

std::vector<double> ssim_kernel() {
    std::vector<double> k(kSsimWindow);
    const int r = kSsimWindow / 2;
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - r;
        k[i] = std::exp(-(d * d) / (2.0 * kSsimSigma * kSsimSigma));
        sum += k[i];
    }
    for (auto& v : k) v /= sum;
    return k;
}

// Horizontal then vertical pass over valid positions only.
std::vector<double> window_filter(const std::vector<double>& plane, int h, int w,
                                  const std::vector<double>& k) {
    const int r = kSsimWindow / 2;
    const int vw = w - 2 * r;
    const int vh = h - 2 * r;
    std::vector<double> tmp(static_cast<std::size_t>(h) * vw);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < vw; ++x) {
            double s = 0.0;
            for (int i = 0; i < kSsimWindow; ++i) s += k[i] * plane[y * w + x + i];
            tmp[y * vw + x] = s;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(vh) * vw);
    for (int y = 0; y < vh; ++y) {
        for (int x = 0; x < vw; ++x) {
            double s = 0.0;
            for (int i = 0; i < kSsimWindow; ++i) s += k[i] * tmp[(y + i) * vw + x];
            out[y * vw + x] = s;
        }
    }
    return out;
}

double ssim_channel(const std::vector<double>& x, const std::vector<double>& y,
                    int h, int w, double dynamic_range) {
    const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
    const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
    const auto k = ssim_kernel();

    const std::size_t n = x.size();
    std::vector<double> xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const auto mu_x = window_filter(x, h, w, k);
    const auto mu_y = window_filter(y, h, w, k);
    const auto m_xx = window_filter(xx, h, w, k);
    const auto m_yy = window_filter(yy, h, w, k);
    const auto m_xy = window_filter(xy, h, w, k);

    double acc = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < mu_x.size(); ++i) {
        const double mx = mu_x[i], my = mu_y[i];
        const double var_x = m_xx[i] - mx * mx;
        const double var_y = m_yy[i] - my * my;
        const double cov = m_xy[i] - mx * my;
        const double v = ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                         ((mx * mx + my * my + c1) * (var_x + var_y + c2));
        // Kahan step keeps the a==b case at exactly 1.0.
        const double t = v - comp;
        const double s = acc + t;
        comp = (s - acc) - t;
        acc = s;
    }
    return acc / static_cast<double>(mu_x.size());
}

template <typename Img, typename ToDouble>
double ssim_impl(const Img& a, const Img& b, double dynamic_range, ToDouble px) {
    require_same_shape(a.height, a.width, a.channels, b.height, b.width, b.channels,
                       "ssim");
    if (a.height < kSsimWindow || a.width < kSsimWindow)
        throw DataError("ssim: image smaller than the 11x11 window");

    const std::size_t plane = static_cast<std::size_t>(a.height) * a.width;
    std::vector<double> x(plane), y(plane);
    double total = 0.0;
    for (int ch = 0; ch < a.channels; ++ch) {
        for (int r = 0; r < a.height; ++r)
            for (int c = 0; c < a.width; ++c) {
                x[r * a.width + c] = px(a.at(r, c, ch));
                y[r * a.width + c] = px(b.at(r, c, ch));
            }
        total += ssim_channel(x, y, a.height, a.width, dynamic_range);
    }
    return total / a.channels;
}

}  // namespace

double psnr(const ImageU8& a, const ImageU8& b) {
    require_same_shape(a.height, a.width, a.channels, b.height, b.width, b.channels,
                       "psnr");
    double sse = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        sse += d * d;
    }
    if (sse == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = sse / static_cast<double>(a.data.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double psnr(const ImageF& a, const ImageF& b, double peak) {
    require_same_shape(a.height, a.width, a.channels, b.height, b.width, b.channels,
                       "psnr");
    double sse = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        sse += d * d;
    }
    if (sse == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = sse / static_cast<double>(a.data.size());
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const ImageU8& a, const ImageU8& b) {
    return ssim_impl(a, b, 255.0, [](std::uint8_t v) { return static_cast<double>(v); });
}

double ssim(const ImageF& a, const ImageF& b) {
    return ssim_impl(a, b, 1.0, [](double v) { return v; });
}

RankTable rank(std::vector<EvalRecord> records) {
    std::set<std::string> names;
    for (const auto& r : records)
        if (!names.insert(r.name).second)
            throw DataError("rank: duplicate entry name: " + r.name);

    // Round to the reported precision first; ties are decided at 2 decimals.
    auto key = [](double p) {
        if (std::isinf(p)) return std::numeric_limits<double>::infinity();
        return std::round(p * 100.0) / 100.0;
    };
    std::sort(records.begin(), records.end(), [&](const auto& x, const auto& y) {
        const double kx = key(x.psnr), ky = key(y.psnr);
        if (kx != ky) return kx > ky;
        return x.name < y.name;
    });

    RankTable table;
    table.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        int rk;
        if (i > 0 && key(records[i].psnr) == key(records[i - 1].psnr))
            rk = table.back().rank;
        else
            rk = static_cast<int>(i) + 1;
        table.push_back({rk, std::move(records[i])});
    }
    return table;
}

double mean_compensated(const std::vector<double>& values) {
    if (values.empty()) throw DataError("mean: empty input");
    double acc = 0.0, comp = 0.0;
    for (double v : values) {
        const double t = v - comp;
        const double s = acc + t;
        comp = (s - acc) - t;
        acc = s;
    }
    return acc / static_cast<double>(values.size());
}

}  // namespace dforge
