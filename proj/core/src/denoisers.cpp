#include "dforge/denoisers.hpp"

#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <thread>
#include <vector>

#include "dforge/filters.hpp"
#include "dforge/losses.hpp"
#include "dforge/noise.hpp"
#include "dforge/png_io.hpp"

namespace dforge {

DenoiserSpec DenoiserSpec::identity() { return {}; }

DenoiserSpec DenoiserSpec::gaussian(double sigma_k) {
    if (sigma_k <= 0) throw DataError("gaussian denoiser: sigma_k must be > 0");
    DenoiserSpec s;
    s.kind = Kind::Gaussian;
    s.sigma_k = sigma_k;
    return s;
}

DenoiserSpec DenoiserSpec::median(int radius) {
    if (radius < 1) throw DataError("median denoiser: radius must be >= 1");
    DenoiserSpec s;
    s.kind = Kind::Median;
    s.radius = radius;
    return s;
}

DenoiserSpec DenoiserSpec::nlm(int patch, int window, double h) {
    if (patch < 1 || patch % 2 == 0 || window < patch || window % 2 == 0)
        throw DataError("nlm denoiser: patch/window must be odd, window >= patch");
    if (h < 0) throw DataError("nlm denoiser: h must be >= 0");
    DenoiserSpec s;
    s.kind = Kind::Nlm;
    s.nlm_patch = patch;
    s.nlm_window = window;
    s.nlm_h = h;
    return s;
}

DenoiserSpec DenoiserSpec::wavelet_shrink(double threshold, int levels) {
    if (levels < 1) throw DataError("wavelet denoiser: levels must be >= 1");
    DenoiserSpec s;
    s.kind = Kind::WaveletShrink;
    s.shrink_threshold = threshold;
    s.shrink_levels = levels;
    return s;
}

DenoiserSpec DenoiserSpec::external(std::string command, double timeout_s) {
    if (command.empty()) throw DataError("external denoiser: empty command");
    if (timeout_s <= 0) throw DataError("external denoiser: timeout must be > 0");
    DenoiserSpec s;
    s.kind = Kind::External;
    s.command = std::move(command);
    s.timeout_s = timeout_s;
    return s;
}

// ---------------------------------------------------------------------------
// Built-ins

namespace {

ImageF median_filter(const ImageF& img, int radius) {
    const int H = img.height, W = img.width, C = img.channels;
    ImageF out(H, W, C);
    std::vector<double> window;
    window.reserve(static_cast<std::size_t>(2 * radius + 1) * (2 * radius + 1));
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c)
            for (int ch = 0; ch < C; ++ch) {
                window.clear();
                for (int dr = -radius; dr <= radius; ++dr)
                    for (int dc = -radius; dc <= radius; ++dc)
                        window.push_back(img.at(reflect_index(r + dr, H),
                                                reflect_index(c + dc, W), ch));
                auto mid = window.begin() + window.size() / 2;
                std::nth_element(window.begin(), mid, window.end());
                out.at(r, c, ch) = *mid;
            }
    return out;
}

ImageF nlm_filter(const ImageF& img, int patch, int window, double h) {
    const int H = img.height, W = img.width, C = img.channels;
    const int pr = patch / 2, wr = window / 2;

    // Gaussian profile over patch offsets, normalized to sum 1.
    std::vector<double> profile(static_cast<std::size_t>(patch) * patch);
    const double ps = std::max(1.0, pr / 2.0);
    double psum = 0.0;
    for (int dr = -pr; dr <= pr; ++dr)
        for (int dc = -pr; dc <= pr; ++dc) {
            const double v = std::exp(-(dr * dr + dc * dc) / (2.0 * ps * ps));
            profile[(dr + pr) * patch + (dc + pr)] = v;
            psum += v;
        }
    for (auto& v : profile) v /= psum;

    ImageF out(H, W, C);
    const double h2 = h * h;
    for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
            double wsum = 0.0;
            std::vector<double> acc(C, 0.0);
            for (int qr = r - wr; qr <= r + wr; ++qr) {
                for (int qc = c - wr; qc <= c + wr; ++qc) {
                    double d2 = 0.0;
                    for (int dr = -pr; dr <= pr; ++dr)
                        for (int dc = -pr; dc <= pr; ++dc) {
                            const double g = profile[(dr + pr) * patch + (dc + pr)];
                            for (int ch = 0; ch < C; ++ch) {
                                const double diff =
                                    img.at(reflect_index(r + dr, H),
                                           reflect_index(c + dc, W), ch) -
                                    img.at(reflect_index(qr + dr, H),
                                           reflect_index(qc + dc, W), ch);
                                d2 += g * diff * diff;
                            }
                        }
                    const double w = std::exp(-d2 / (C * h2));
                    wsum += w;
                    for (int ch = 0; ch < C; ++ch)
                        acc[ch] += w * img.at(reflect_index(qr, H),
                                              reflect_index(qc, W), ch);
                }
            }
            for (int ch = 0; ch < C; ++ch) out.at(r, c, ch) = acc[ch] / wsum;
        }
    }
    return out;
}

ImageF wavelet_shrink_filter(const ImageF& img, double threshold, int levels) {
    double t = threshold;
    if (t < 0) {
        // Universal threshold sigma*sqrt(2 ln n); the detail coefficients keep
        // unit noise gain at every level, so the image-domain estimate applies.
        const double sigma_hat = estimate_sigma(img) / 255.0;
        const double n = static_cast<double>(img.height) * img.width;
        t = sigma_hat * std::sqrt(2.0 * std::log(n));
    }
    auto stack = swt_forward(img, levels);
    auto soft = [t](ImageF& band) {
        for (auto& v : band.data) {
            const double a = std::fabs(v) - t;
            v = a > 0 ? (v > 0 ? a : -a) : 0.0;
        }
    };
    for (auto& level : stack) {
        soft(level.lh);
        soft(level.hl);
        soft(level.hh);
    }
    return swt_inverse(stack);
}

}  // namespace

ImageF denoise(const DenoiserSpec& spec, const ImageF& img) {
    if (!img.is_finite()) throw DataError("denoise: non-finite input");
    switch (spec.kind) {
        case DenoiserSpec::Kind::Identity:
            return img;
        case DenoiserSpec::Kind::Gaussian:
            return gaussian_blur(img, spec.sigma_k);
        case DenoiserSpec::Kind::Median:
            return median_filter(img, spec.radius);
        case DenoiserSpec::Kind::Nlm: {
            double h = spec.nlm_h;
            if (h <= 0) h = 0.8 * std::max(estimate_sigma(img) / 255.0, 1e-4);
            return nlm_filter(img, spec.nlm_patch, spec.nlm_window, h);
        }
        case DenoiserSpec::Kind::WaveletShrink:
            return wavelet_shrink_filter(img, spec.shrink_threshold, spec.shrink_levels);
        case DenoiserSpec::Kind::External:
            return run_external(spec, img);
    }
    throw DataError("denoise: unknown kind");
}

// ---------------------------------------------------------------------------
// External subprocess adapter

namespace {

std::string substitute(const std::string& tmpl, const std::string& key,
                       const std::string& value) {
    std::string out = tmpl;
    std::size_t pos = 0;
    while ((pos = out.find(key, pos)) != std::string::npos) {
        out.replace(pos, key.size(), value);
        pos += value.size();
    }
    return out;
}

// Runs `sh -c command` with a wall-clock timeout. Returns the exit status or
// throws ExternalDenoiserError on launch failure / timeout.
int run_with_timeout(const std::string& command, double timeout_s) {
    const pid_t pid = fork();
    if (pid < 0)
        throw ExternalDenoiserError(ExternalDenoiserError::Kind::LaunchFailed,
                                    "external denoiser: fork failed");
    if (pid == 0) {
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration<double>(timeout_s);
    int status = 0;
    for (;;) {
        const pid_t r = waitpid(pid, &status, WNOHANG);
        if (r == pid) break;
        if (r < 0)
            throw ExternalDenoiserError(ExternalDenoiserError::Kind::LaunchFailed,
                                        "external denoiser: waitpid failed");
        if (std::chrono::steady_clock::now() >= deadline) {
            kill(pid, SIGKILL);
            waitpid(pid, &status, 0);
            throw ExternalDenoiserError(ExternalDenoiserError::Kind::Timeout,
                                        "external denoiser timed out after " +
                                            std::to_string(timeout_s) + " s");
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    if (!WIFEXITED(status))
        throw ExternalDenoiserError(ExternalDenoiserError::Kind::NonZeroExit,
                                    "external denoiser killed by signal");
    return WEXITSTATUS(status);
}

std::filesystem::path pick_tmpdir(const std::string& workdir) {
    if (!workdir.empty()) return workdir;
    if (const char* env = std::getenv("DENOISE_FORGE_TMPDIR")) return env;
    return std::filesystem::temp_directory_path();
}

std::atomic<std::uint64_t> g_external_counter{0};

}  // namespace

ImageF run_external(const DenoiserSpec& spec, const ImageF& img,
                    const std::string& workdir) {
    const auto base = pick_tmpdir(workdir);
    const auto dir = base / ("dforge-ext-" + std::to_string(getpid()) + "-" +
                             std::to_string(g_external_counter.fetch_add(1)));
    std::filesystem::create_directories(dir);
    struct DirCleanup {
        std::filesystem::path p;
        ~DirCleanup() {
            std::error_code ec;
            std::filesystem::remove_all(p, ec);
        }
    } cleanup{dir};

    const auto in_path = dir / "in.png";
    const auto out_path = dir / "out.png";
    save_png(in_path.string(), to_u8(img));

    std::string command = substitute(spec.command, "{in}", in_path.string());
    command = substitute(command, "{out}", out_path.string());

    const int status = run_with_timeout(command, spec.timeout_s);
    if (status != 0)
        throw ExternalDenoiserError(ExternalDenoiserError::Kind::NonZeroExit,
                                    "external denoiser failed (status " +
                                        std::to_string(status) + ")");
    if (!std::filesystem::exists(out_path))
        throw ExternalDenoiserError(ExternalDenoiserError::Kind::MissingOutput,
                                    "external denoiser produced no output file");

    ImageF out = to_float(load_png(out_path.string()));
    if (!out.same_shape(img))
        throw ExternalDenoiserError(ExternalDenoiserError::Kind::ShapeMismatch,
                                    "external denoiser output shape mismatch");
    return out;
}

DenoiseFn to_fn(const DenoiserSpec& spec) {
    return [spec](const ImageF& img) { return denoise(spec, img); };
}

// ---------------------------------------------------------------------------
// Spec parsing for the CLI

namespace {

std::vector<double> parse_args(const std::string& inner, const char* what) {
    std::vector<double> args;
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            args.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw DataError(std::string(what) + ": bad argument '" + item + "'");
        }
    }
    return args;
}

}  // namespace

DenoiserSpec DenoiserSpec::parse(std::string_view text) {
    std::string s(text);
    if (s.rfind("external:", 0) == 0) {
        return external(s.substr(9));
    }
    std::string name = s, inner;
    const auto open = s.find('(');
    if (open != std::string::npos) {
        if (s.back() != ')') throw DataError("denoiser spec: unbalanced parentheses");
        name = s.substr(0, open);
        inner = s.substr(open + 1, s.size() - open - 2);
    }
    const auto args = parse_args(inner, "denoiser spec");

    if (name == "identity") return identity();
    if (name == "gaussian") return gaussian(args.empty() ? 1.5 : args[0]);
    if (name == "median") return median(args.empty() ? 1 : static_cast<int>(args[0]));
    if (name == "nlm")
        return nlm(args.size() > 0 ? static_cast<int>(args[0]) : 7,
                   args.size() > 1 ? static_cast<int>(args[1]) : 21,
                   args.size() > 2 ? args[2] : 0.0);
    if (name == "wavelet")
        return wavelet_shrink(args.size() > 1 ? args[1] : -1.0,
                              args.empty() ? 1 : static_cast<int>(args[0]));
    throw DataError("denoiser spec: unknown denoiser '" + name + "'");
}

std::string DenoiserSpec::to_string() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Identity: os << "identity"; break;
        case Kind::Gaussian: os << "gaussian(" << sigma_k << ")"; break;
        case Kind::Median: os << "median(" << radius << ")"; break;
        case Kind::Nlm:
            os << "nlm(" << nlm_patch << "," << nlm_window << "," << nlm_h << ")";
            break;
        case Kind::WaveletShrink:
            os << "wavelet(" << shrink_levels << "," << shrink_threshold << ")";
            break;
        case Kind::External: os << "external:" << command; break;
    }
    return os.str();
}

}  // namespace dforge
