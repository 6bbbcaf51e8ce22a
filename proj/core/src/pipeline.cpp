#include "dforge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dforge/gdsm.hpp"
#include "dforge/png_io.hpp"
#include "dforge/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dforge {

namespace {

std::vector<std::string> list_pngs(const std::string& dir) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png") names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    if (names.empty()) throw DataError("no PNG files in " + dir);
    return names;
}

void require_distinct_dirs(const std::string& a, const std::string& b) {
    if (fs::weakly_canonical(a) == fs::weakly_canonical(b))
        throw DataError("input and output directories must be distinct");
}

// Bounded worker pool over a file list; exceptions surface after join, lowest
// index first so error reports are deterministic.
void parallel_over(std::size_t count, int workers,
                   const std::function<void(std::size_t)>& body) {
    const int n = std::clamp(workers, 1, 64);
    if (n == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::size_t error_index = count;
    std::exception_ptr error;
    std::vector<std::thread> pool;
    for (int w = 0; w < n; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (i < error_index) {
                        error_index = i;
                        error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

json tile_to_json(const TileSpec& t) {
    return {{"patch", t.patch}, {"stride", t.stride}, {"blend", to_string(t.blend)}};
}

TileSpec tile_from_json(const json& j) {
    return TileSpec::from_stride(j.at("patch").get<int>(), j.at("stride").get<int>(),
                                 blend_mode_from_string(j.at("blend").get<std::string>()));
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read manifest " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("bad manifest " + path + ": " + e.what());
    }
}

std::string format_score(double v, int precision) {
    if (std::isinf(v)) return "inf";
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// synth

int run_synth(const SynthConfig& config, const LogFn& log) {
    require_distinct_dirs(config.input_dir, config.output_dir);
    const auto names = list_pngs(config.input_dir);
    fs::create_directories(config.output_dir);

    // Per-file seed offset keeps images independent yet reproducible.
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto out_path = fs::path(config.output_dir) / names[i];
        if (fs::exists(out_path) && !config.force)
            throw DataError("output exists (use --force): " + out_path.string());
    }
    parallel_over(names.size(), config.workers, [&](std::size_t i) {
        const ImageF clean =
            to_float(load_png((fs::path(config.input_dir) / names[i]).string()));
        NoiseSpec spec = config.noise;
        spec.seed = config.noise.seed + i;
        const ImageF noisy = add_awgn(clean, spec);
        save_png((fs::path(config.output_dir) / names[i]).string(), to_u8(noisy));
        if (log) log("synth " + names[i]);
    });

    json manifest = {
        {"command", "synth"},
        {"input_dir", config.input_dir},
        {"sigma", config.noise.sigma},
        {"clip", config.noise.clip},
        {"seed", config.noise.seed},
        {"generator", kGeneratorName},
        {"files", names},
    };
    write_json((fs::path(config.output_dir) / "manifest.json").string(), manifest);
    return static_cast<int>(names.size());
}

SynthConfig synth_config_from_manifest(const std::string& path) {
    const json j = read_json(path);
    if (j.value("command", "") != "synth")
        throw DataError("manifest is not a synth manifest: " + path);
    SynthConfig config;
    config.input_dir = j.at("input_dir").get<std::string>();
    config.noise.sigma = j.at("sigma").get<double>();
    config.noise.clip = j.at("clip").get<bool>();
    config.noise.seed = j.at("seed").get<std::uint64_t>();
    return config;
}

// ---------------------------------------------------------------------------
// denoise

namespace {

// Tiled (or whole-image) pass for one denoiser under the configured geometry.
ImageF tiled_stage(const DenoiseConfig& config, const DenoiseFn& fn, const ImageF& img) {
    if (!config.multiscale.empty())
        return multiscale_ensemble(fn, img, config.multiscale,
                                   config.quantize_before_merge);
    if (config.adaptive) {
        const auto patch = adaptive_patch_size(img.height, img.width);
        if (!patch) return fn(img);
        return run_tiled(fn, img,
                         TileSpec::from_stride(*patch, *patch / 2, config.blend));
    }
    if (config.tile) return run_tiled(fn, img, *config.tile);
    return fn(img);
}

std::vector<double> effective_weights(const DenoiseConfig& config) {
    if (config.denoisers.empty()) throw DataError("denoise: no denoiser configured");
    if (config.ensemble_weights.empty())
        return std::vector<double>(config.denoisers.size(),
                                   1.0 / static_cast<double>(config.denoisers.size()));
    if (config.ensemble_weights.size() != config.denoisers.size())
        throw DataError("denoise: ensemble weights do not match denoiser count");
    return config.ensemble_weights;
}

}  // namespace

ImageF denoise_one(const DenoiseConfig& config, const ImageF& img) {
    std::vector<ImageF> outputs;
    for (const DenoiserSpec& spec : config.denoisers) {
        const DenoiseFn fn = to_fn(spec);
        const DenoiseFn staged = [&](const ImageF& x) { return tiled_stage(config, fn, x); };
        outputs.push_back(config.self_ensemble ? self_ensemble(staged, img)
                                               : staged(img));
    }
    if (outputs.size() == 1) return std::move(outputs.front());
    return weighted_ensemble(outputs, effective_weights(config));
}

int run_denoise(const DenoiseConfig& config, const LogFn& log) {
    require_distinct_dirs(config.input_dir, config.output_dir);
    const auto names = list_pngs(config.input_dir);
    fs::create_directories(config.output_dir);
    for (const auto& name : names) {
        const auto out_path = fs::path(config.output_dir) / name;
        if (fs::exists(out_path) && !config.force)
            throw DataError("output exists (use --force): " + out_path.string());
    }
    if (!config.fuse_edge_dir.empty() && !fs::is_directory(config.fuse_edge_dir))
        throw DataError("fusion directory not found: " + config.fuse_edge_dir);
    effective_weights(config);  // validate up front

    parallel_over(names.size(), config.workers, [&](std::size_t i) {
        const std::string& name = names[i];
        ImageF out;
        try {
            const ImageF noisy =
                to_float(load_png((fs::path(config.input_dir) / name).string()));
            out = denoise_one(config, noisy);
            if (!config.fuse_edge_dir.empty()) {
                const auto b_path = fs::path(config.fuse_edge_dir) / name;
                if (!fs::exists(b_path))
                    throw DataError("fusion image missing: " + b_path.string());
                const ImageF b = to_float(load_png(b_path.string()));
                out = edge_guided_fuse(out, b, config.canny);
            }
        } catch (const ExternalDenoiserError&) {
            throw;
        } catch (const std::exception& e) {
            throw DataError(name + ": " + e.what());
        }
        save_png((fs::path(config.output_dir) / name).string(), to_u8(out));
        if (log) log("denoise " + name);
    });

    json specs = json::array();
    for (const auto& d : config.denoisers) specs.push_back(d.to_string());
    json manifest = {
        {"command", "denoise"},
        {"input_dir", config.input_dir},
        {"denoisers", specs},
        {"ensemble_weights", config.ensemble_weights},
        {"adaptive", config.adaptive},
        {"blend", to_string(config.blend)},
        {"quantize_before_merge", config.quantize_before_merge},
        {"self_ensemble", config.self_ensemble},
        {"fuse_edge_dir", config.fuse_edge_dir},
        {"canny", {{"sigma", config.canny.sigma},
                   {"low", config.canny.low},
                   {"high", config.canny.high}}},
        {"files", names},
    };
    if (config.tile) manifest["tile"] = tile_to_json(*config.tile);
    if (config.adaptive) {
        // Record the realized geometry per file for reproducibility reports.
        json realized = json::object();
        for (const auto& name : names) {
            const ImageU8 img = load_png((fs::path(config.input_dir) / name).string());
            const auto patch = adaptive_patch_size(img.height, img.width);
            if (patch)
                realized[name] = {{"patch", *patch}, {"stride", *patch / 2}};
            else
                realized[name] = "whole-image";
        }
        manifest["adaptive_realized"] = realized;
    }
    if (!config.multiscale.empty()) {
        json scales = json::array();
        for (const auto& t : config.multiscale) scales.push_back(tile_to_json(t));
        manifest["multiscale"] = scales;
    }
    write_json((fs::path(config.output_dir) / "manifest.json").string(), manifest);
    return static_cast<int>(names.size());
}

DenoiseConfig denoise_config_from_manifest(const std::string& path) {
    const json j = read_json(path);
    if (j.value("command", "") != "denoise")
        throw DataError("manifest is not a denoise manifest: " + path);
    DenoiseConfig config;
    config.input_dir = j.at("input_dir").get<std::string>();
    config.denoisers.clear();
    for (const auto& s : j.at("denoisers"))
        config.denoisers.push_back(DenoiserSpec::parse(s.get<std::string>()));
    config.ensemble_weights = j.value("ensemble_weights", std::vector<double>{});
    config.adaptive = j.value("adaptive", false);
    config.blend = blend_mode_from_string(j.value("blend", "average"));
    config.quantize_before_merge = j.value("quantize_before_merge", false);
    config.self_ensemble = j.value("self_ensemble", false);
    config.fuse_edge_dir = j.value("fuse_edge_dir", "");
    if (j.contains("canny")) {
        config.canny.sigma = j["canny"].value("sigma", 1.4);
        config.canny.low = j["canny"].value("low", 0.1);
        config.canny.high = j["canny"].value("high", 0.2);
    }
    if (j.contains("tile")) config.tile = tile_from_json(j["tile"]);
    if (j.contains("multiscale"))
        for (const auto& t : j["multiscale"]) config.multiscale.push_back(tile_from_json(t));
    return config;
}

// ---------------------------------------------------------------------------
// eval / rank

EvalSummary run_eval(const EvalConfig& config, const LogFn& log) {
    const auto gt_names = list_pngs(config.gt_dir);
    std::vector<std::string> missing;
    for (const auto& name : gt_names)
        if (!fs::exists(fs::path(config.pred_dir) / name)) missing.push_back(name);
    if (!missing.empty()) {
        std::string joined;
        for (const auto& name : missing) joined += " " + name;
        throw DataError("missing predictions:" + joined);
    }

    EvalSummary summary;
    summary.per_image.resize(gt_names.size());
    std::mutex log_mutex;
    parallel_over(gt_names.size(), 1, [&](std::size_t i) {
        const ImageU8 gt = load_png((fs::path(config.gt_dir) / gt_names[i]).string());
        const ImageU8 pred =
            load_png((fs::path(config.pred_dir) / gt_names[i]).string());
        if (gt.height != pred.height || gt.width != pred.width ||
            gt.channels != pred.channels)
            throw DataError("shape mismatch for " + gt_names[i]);
        summary.per_image[i] = {gt_names[i], psnr(gt, pred), ssim(gt, pred)};
        if (log) {
            std::lock_guard lock(log_mutex);
            log("eval " + gt_names[i]);
        }
    });

    std::vector<double> psnrs, ssims;
    for (const auto& r : summary.per_image) {
        psnrs.push_back(r.psnr);
        ssims.push_back(r.ssim);
    }
    summary.mean_psnr = mean_compensated(psnrs);
    summary.mean_ssim = mean_compensated(ssims);

    if (!config.csv_path.empty()) {
        std::ofstream csv(config.csv_path);
        if (!csv) throw DataError("cannot write " + config.csv_path);
        csv << "name,image,psnr,ssim\n";
        for (const auto& r : summary.per_image)
            csv << config.entry_name << "," << r.name << ","
                << format_score(r.psnr, 4) << "," << format_score(r.ssim, 6) << "\n";
    }
    if (!config.md_path.empty()) {
        std::ofstream md(config.md_path);
        if (!md) throw DataError("cannot write " + config.md_path);
        md << "| Team | Rank | PSNR (primary) | SSIM |\n|---|---|---|---|\n";
        md << "| " << config.entry_name << " | 1 | "
           << format_score(summary.mean_psnr, 2) << " | "
           << format_score(summary.mean_ssim, 4) << " |\n\n";
        md << "| Image | PSNR | SSIM |\n|---|---|---|\n";
        for (const auto& r : summary.per_image)
            md << "| " << r.name << " | " << format_score(r.psnr, 2) << " | "
               << format_score(r.ssim, 4) << " |\n";
    }
    return summary;
}

std::string leaderboard_markdown(const RankTable& table) {
    std::ostringstream md;
    md << "| Team | Rank | PSNR (primary) | SSIM |\n|---|---|---|---|\n";
    for (const auto& row : table)
        md << "| " << row.record.name << " | " << row.rank << " | "
           << format_score(row.record.psnr, 2) << " | "
           << format_score(row.record.ssim, 4) << " |\n";
    return md.str();
}

RankTable run_rank(const std::string& csv_in, const std::string& md_out) {
    std::ifstream in(csv_in);
    if (!in) throw DataError("cannot read " + csv_in);
    std::vector<EvalRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string name, psnr_s, ssim_s;
        if (!std::getline(ss, name, ',') || !std::getline(ss, psnr_s, ','))
            throw DataError("rank: bad CSV row: " + line);
        std::getline(ss, ssim_s, ',');
        if (name == "name") continue;  // header
        try {
            records.push_back({name, std::stod(psnr_s),
                               ssim_s.empty() ? 0.0 : std::stod(ssim_s)});
        } catch (const std::exception&) {
            throw DataError("rank: bad CSV row: " + line);
        }
    }
    RankTable table = rank(std::move(records));
    if (!md_out.empty()) {
        std::ofstream md(md_out);
        if (!md) throw DataError("cannot write " + md_out);
        md << leaderboard_markdown(table);
    }
    return table;
}

bool run_gdsm_check(std::ostream& out) {
    const auto results = run_gdsm_checks();
    bool all = true;
    for (const auto& r : results) {
        out << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail
            << "\n";
        all = all && r.passed;
    }
    out << (all ? "all gdsm checks passed\n" : "gdsm checks FAILED\n");
    return all;
}

}  // namespace dforge
