#include "dforge/losses.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "dforge/filters.hpp"
#include "dforge/metrics.hpp"

namespace dforge {

LossSpec LossSpec::charbonnier(double eps) {
    if (eps <= 0) throw DataError("charbonnier: eps must be > 0");
    return {Kind::Charbonnier, eps, 1, {}};
}

LossSpec LossSpec::swt(int levels) {
    if (levels < 1) throw DataError("swt loss: levels must be >= 1");
    return {Kind::Swt, 0.0, levels, {}};
}

LossSpec LossSpec::high_frequency(double sigma_blur) {
    if (sigma_blur <= 0) throw DataError("high_frequency: sigma_blur must be > 0");
    return {Kind::HighFrequency, sigma_blur, 1, {}};
}

LossSpec LossSpec::weighted_sum(std::vector<std::pair<LossSpec, double>> terms) {
    for (const auto& [spec, w] : terms)
        if (w < 0) throw DataError("weighted_sum: weights must be >= 0");
    return {Kind::WeightedSum, 0.0, 1, std::move(terms)};
}

namespace {

double mean_abs_diff(const ImageF& a, const ImageF& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        s += std::fabs(a.data[i] - b.data[i]);
    return s / static_cast<double>(a.data.size());
}

double sobel_gradient_loss(const ImageF& pred, const ImageF& target) {
    const Gradients gp = sobel(pred);
    const Gradients gt = sobel(target);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        s += std::fabs(gp.gx.data[i] - gt.gx.data[i]);
        s += std::fabs(gp.gy.data[i] - gt.gy.data[i]);
    }
    return s / static_cast<double>(2 * pred.data.size());
}

double gradient_weighted_l1(const ImageF& pred, const ImageF& target) {
    const Gradients g = sobel(target);
    std::vector<double> mag(target.data.size());
    double max_mag = 0.0;
    for (std::size_t i = 0; i < mag.size(); ++i) {
        mag[i] = std::hypot(g.gx.data[i], g.gy.data[i]);
        max_mag = std::max(max_mag, mag[i]);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < mag.size(); ++i) {
        const double w = 1.0 + (max_mag > 0.0 ? mag[i] / max_mag : 0.0);
        s += w * std::fabs(pred.data[i] - target.data[i]);
    }
    return s / static_cast<double>(mag.size());
}

double swt_l1(const ImageF& pred, const ImageF& target, int levels) {
    const auto sp = swt_forward(pred, levels);
    const auto st = swt_forward(target, levels);
    double s = 0.0;
    std::size_t n = 0;
    for (int j = 0; j < levels; ++j) {
        for (auto band : {&SwtLevel::ll, &SwtLevel::lh, &SwtLevel::hl, &SwtLevel::hh}) {
            const auto& bp = sp[j].*band;
            const auto& bt = st[j].*band;
            for (std::size_t i = 0; i < bp.data.size(); ++i)
                s += std::fabs(bp.data[i] - bt.data[i]);
            n += bp.data.size();
        }
    }
    return s / static_cast<double>(n);
}

double high_frequency_loss(const ImageF& pred, const ImageF& target, double sigma) {
    const ImageF bp = gaussian_blur(pred, sigma);
    const ImageF bt = gaussian_blur(target, sigma);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const double rp = pred.data[i] - bp.data[i];
        const double rt = target.data[i] - bt.data[i];
        s += std::fabs(rp - rt);
    }
    return s / static_cast<double>(pred.data.size());
}

}  // namespace

double loss(const LossSpec& spec, const ImageF& pred, const ImageF& target) {
    if (!pred.same_shape(target)) throw DataError("loss: shape mismatch");
    if (!pred.is_finite() || !target.is_finite())
        throw DataError("loss: non-finite input");

    switch (spec.kind) {
        case LossSpec::Kind::L1:
            return mean_abs_diff(pred, target);
        case LossSpec::Kind::Mse: {
            double s = 0.0;
            for (std::size_t i = 0; i < pred.data.size(); ++i) {
                const double d = pred.data[i] - target.data[i];
                s += d * d;
            }
            return s / static_cast<double>(pred.data.size());
        }
        case LossSpec::Kind::Charbonnier: {
            double s = 0.0;
            for (std::size_t i = 0; i < pred.data.size(); ++i) {
                const double d = pred.data[i] - target.data[i];
                s += std::sqrt(d * d + spec.param * spec.param);
            }
            return s / static_cast<double>(pred.data.size());
        }
        case LossSpec::Kind::SobelGradient:
            return sobel_gradient_loss(pred, target);
        case LossSpec::Kind::GradientWeightedL1:
            return gradient_weighted_l1(pred, target);
        case LossSpec::Kind::Swt:
            return swt_l1(pred, target, spec.levels);
        case LossSpec::Kind::HighFrequency:
            return high_frequency_loss(pred, target, spec.param);
        case LossSpec::Kind::Ssim:
            return 1.0 - ssim(pred, target);
        case LossSpec::Kind::WeightedSum: {
            double s = 0.0;
            for (const auto& [sub, w] : spec.terms) s += w * loss(sub, pred, target);
            return s;
        }
    }
    throw DataError("loss: unknown kind");
}

// ---------------------------------------------------------------------------
// Undecimated Haar transform

namespace {

// One analysis level with tap spacing `s`, orthonormal scaling (1/2 for the
// separable 2x2 stencil).
SwtLevel swt_level(const ImageF& a, int spacing) {
    const int H = a.height, W = a.width, C = a.channels;
    SwtLevel out{ImageF(H, W, C), ImageF(H, W, C), ImageF(H, W, C), ImageF(H, W, C)};
    for (int r = 0; r < H; ++r) {
        const int rs = reflect_index(r + spacing, H);
        for (int c = 0; c < W; ++c) {
            const int cs = reflect_index(c + spacing, W);
            for (int ch = 0; ch < C; ++ch) {
                const double p00 = a.at(r, c, ch), p01 = a.at(r, cs, ch);
                const double p10 = a.at(rs, c, ch), p11 = a.at(rs, cs, ch);
                out.ll.at(r, c, ch) = 0.5 * (p00 + p01 + p10 + p11);
                out.lh.at(r, c, ch) = 0.5 * (p00 - p01 + p10 - p11);
                out.hl.at(r, c, ch) = 0.5 * (p00 + p01 - p10 - p11);
                out.hh.at(r, c, ch) = 0.5 * (p00 - p01 - p10 + p11);
            }
        }
    }
    return out;
}

}  // namespace

std::vector<SwtLevel> swt_forward(const ImageF& img, int levels) {
    if (levels < 1) throw DataError("swt_forward: levels must be >= 1");
    std::vector<SwtLevel> out;
    out.reserve(levels);
    const ImageF* current = &img;
    int spacing = 1;
    for (int j = 0; j < levels; ++j) {
        out.push_back(swt_level(*current, spacing));
        current = &out.back().ll;
        spacing *= 2;
    }
    return out;
}

ImageF swt_inverse(const std::vector<SwtLevel>& levels) {
    if (levels.empty()) throw DataError("swt_inverse: empty stack");
    // The analysis stencil at (r, c) is invertible pointwise:
    // a = (ll + lh + hl + hh) / 2 recovers the previous level exactly.
    ImageF a = levels.back().ll;
    for (int j = static_cast<int>(levels.size()) - 1; j >= 0; --j) {
        const SwtLevel& lv = levels[j];
        ImageF prev(a.height, a.width, a.channels);
        for (std::size_t i = 0; i < prev.data.size(); ++i)
            prev.data[i] = 0.5 * (a.data[i] + lv.lh.data[i] + lv.hl.data[i] +
                                  lv.hh.data[i]);
        a = std::move(prev);
    }
    return a;
}

// ---------------------------------------------------------------------------
// Loss expression parser: terms separated by '+' at paren depth 0, each term
// "[weight *] name[(arg)]".

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

LossSpec parse_primitive(const std::string& term) {
    std::string name = term;
    std::string arg;
    const auto open = term.find('(');
    if (open != std::string::npos) {
        if (term.back() != ')')
            throw DataError("loss expr: unbalanced parentheses in '" + term + "'");
        name = trim(term.substr(0, open));
        arg = trim(term.substr(open + 1, term.size() - open - 2));
    }

    auto numeric_arg = [&](double fallback) {
        if (arg.empty()) return fallback;
        try {
            return std::stod(arg);
        } catch (const std::exception&) {
            throw DataError("loss expr: bad argument '" + arg + "'");
        }
    };

    if (name == "l1") return LossSpec::l1();
    if (name == "l2" || name == "mse") return LossSpec::mse();
    if (name == "charbonnier") return LossSpec::charbonnier(numeric_arg(1e-3));
    if (name == "sobel") return LossSpec::sobel_gradient();
    if (name == "gradw_l1") return LossSpec::gradient_weighted_l1();
    if (name == "swt") return LossSpec::swt(static_cast<int>(numeric_arg(1)));
    if (name == "highfreq") return LossSpec::high_frequency(numeric_arg(1.5));
    if (name == "ssim") return LossSpec::ssim_loss();
    throw DataError("loss expr: unknown loss '" + name + "'");
}

}  // namespace

LossSpec parse_loss_expr(std::string_view expr) {
    std::vector<std::string> parts;
    std::string current;
    int depth = 0;
    for (char ch : expr) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == '+' && depth == 0) {
            parts.push_back(current);
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    parts.push_back(current);

    std::vector<std::pair<LossSpec, double>> terms;
    bool any_weight = false;
    for (const auto& raw : parts) {
        std::string term = trim(raw);
        if (term.empty()) throw DataError("loss expr: empty term");
        double weight = 1.0;
        const auto star = term.find('*');
        if (star != std::string::npos) {
            any_weight = true;
            try {
                weight = std::stod(trim(term.substr(0, star)));
            } catch (const std::exception&) {
                throw DataError("loss expr: bad weight in '" + term + "'");
            }
            term = trim(term.substr(star + 1));
        }
        terms.emplace_back(parse_primitive(term), weight);
    }

    if (terms.size() == 1 && !any_weight) return terms.front().first;
    return LossSpec::weighted_sum(std::move(terms));
}

std::string to_string(const LossSpec& spec) {
    std::ostringstream os;
    switch (spec.kind) {
        case LossSpec::Kind::L1: os << "l1"; break;
        case LossSpec::Kind::Mse: os << "mse"; break;
        case LossSpec::Kind::Charbonnier: os << "charbonnier(" << spec.param << ")"; break;
        case LossSpec::Kind::SobelGradient: os << "sobel"; break;
        case LossSpec::Kind::GradientWeightedL1: os << "gradw_l1"; break;
        case LossSpec::Kind::Swt: os << "swt(" << spec.levels << ")"; break;
        case LossSpec::Kind::HighFrequency: os << "highfreq(" << spec.param << ")"; break;
        case LossSpec::Kind::Ssim: os << "ssim"; break;
        case LossSpec::Kind::WeightedSum: {
            bool first = true;
            for (const auto& [sub, w] : spec.terms) {
                if (!first) os << " + ";
                os << w << "*" << to_string(sub);
                first = false;
            }
            break;
        }
    }
    return os.str();
}

}  // namespace dforge
