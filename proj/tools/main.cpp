// denoise-forge: benchmark and inference-orchestration CLI for AWGN (sigma=50)
// image denoising. Subcommands: synth, denoise, eval, rank, gdsm-check.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 external-denoiser error.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dforge/losses.hpp"
#include "dforge/pipeline.hpp"
#include "dforge/png_io.hpp"

namespace {

dforge::LogFn progress_logger(bool quiet) {
    if (quiet) return {};
    return [](const std::string& line) { std::cout << line << std::endl; };
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    return parts;
}

// "256/48,384/64,512/96" -> TileSpecs (patch/overlap pairs)
std::vector<dforge::TileSpec> parse_multiscale(const std::string& text,
                                               dforge::BlendMode blend) {
    std::vector<dforge::TileSpec> specs;
    for (const auto& part : split(text, ',')) {
        const auto pair = split(part, '/');
        if (pair.size() != 2)
            throw dforge::DataError("bad multiscale entry '" + part +
                                    "' (expected patch/overlap)");
        specs.push_back(dforge::TileSpec::from_overlap(std::stoi(pair[0]),
                                                       std::stoi(pair[1]), blend));
    }
    return specs;
}

struct DenoiseCliOptions {
    dforge::DenoiseConfig config;
    std::vector<std::string> denoiser_texts;
    std::string weights_text;
    std::string blend_text = "average";
    std::string multiscale_text;
    std::string fuse_text;
    std::string manifest_path;
    int patch = 0;
    int overlap = -1;
    double overlap_frac = -1.0;
    bool quiet = false;
};

dforge::DenoiseConfig resolve_denoise_options(DenoiseCliOptions& opt) {
    if (!opt.manifest_path.empty()) {
        dforge::DenoiseConfig config =
            dforge::denoise_config_from_manifest(opt.manifest_path);
        config.output_dir = opt.config.output_dir;
        config.force = opt.config.force;
        config.workers = opt.config.workers;
        if (!opt.config.input_dir.empty()) config.input_dir = opt.config.input_dir;
        return config;
    }

    dforge::DenoiseConfig config = opt.config;
    config.blend = dforge::blend_mode_from_string(opt.blend_text);
    config.denoisers.clear();
    if (opt.denoiser_texts.empty()) opt.denoiser_texts.push_back("identity");
    for (const auto& text : opt.denoiser_texts)
        config.denoisers.push_back(dforge::DenoiserSpec::parse(text));
    if (!opt.weights_text.empty()) {
        for (const auto& w : split(opt.weights_text, ','))
            config.ensemble_weights.push_back(std::stod(w));
    }
    if (opt.patch > 0) {
        if (opt.overlap >= 0 && opt.overlap_frac >= 0)
            throw dforge::DataError("give either --overlap or --overlap-frac");
        int overlap = opt.overlap >= 0 ? opt.overlap : 0;
        if (opt.overlap_frac >= 0)
            overlap = static_cast<int>(opt.overlap_frac * opt.patch);
        config.tile = dforge::TileSpec::from_overlap(opt.patch, overlap, config.blend);
    }
    if (!opt.multiscale_text.empty())
        config.multiscale = parse_multiscale(opt.multiscale_text, config.blend);
    if (!opt.fuse_text.empty()) {
        if (opt.fuse_text.rfind("edge:", 0) != 0)
            throw dforge::DataError("--fuse expects edge:DIR");
        config.fuse_edge_dir = opt.fuse_text.substr(5);
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"denoise-forge: AWGN denoising benchmark tools"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML-style key=value config; flags win");

    // --- synth ---
    auto* synth = app.add_subcommand("synth", "Add seeded AWGN to a directory of PNGs");
    dforge::SynthConfig synth_config;
    std::string synth_manifest;
    bool synth_quiet = false;
    synth->add_option("--input,-i", synth_config.input_dir, "Clean image directory");
    synth->add_option("--output,-o", synth_config.output_dir, "Noisy output directory")
        ->required();
    synth->add_option("--sigma", synth_config.noise.sigma, "Noise std in 8-bit units")
        ->check(CLI::NonNegativeNumber);
    synth->add_flag("--clip,!--no-clip", synth_config.noise.clip,
                    "Clamp noisy samples into [0,1] (default on)");
    synth->add_option("--seed", synth_config.noise.seed, "Base RNG seed");
    synth->add_flag("--force", synth_config.force, "Overwrite existing outputs");
    synth->add_option("--workers", synth_config.workers, "Parallel image workers");
    synth->add_option("--from-manifest", synth_manifest,
                      "Re-run settings recorded in a synth manifest");
    synth->add_flag("--quiet", synth_quiet, "Suppress per-file progress");

    // --- denoise ---
    auto* den = app.add_subcommand("denoise", "Run the inference pipeline over a directory");
    DenoiseCliOptions den_opt;
    den->add_option("--input,-i", den_opt.config.input_dir, "Noisy image directory");
    den->add_option("--output,-o", den_opt.config.output_dir, "Denoised output directory")
        ->required();
    den->add_option("--denoiser,-d", den_opt.denoiser_texts,
                    "Denoiser spec (repeat for a model ensemble): identity, "
                    "gaussian(S), median(R), nlm(P,W[,H]), wavelet(L[,T]), external:CMD");
    den->add_option("--ensemble", den_opt.weights_text,
                    "Comma-separated model-ensemble weights, summing to 1");
    den->add_option("--patch", den_opt.patch, "Tile size in pixels");
    den->add_option("--overlap", den_opt.overlap, "Tile overlap in pixels");
    den->add_option("--overlap-frac", den_opt.overlap_frac,
                    "Tile overlap as a fraction of the patch");
    den->add_option("--blend", den_opt.blend_text, "Stitching mode: average|linear");
    den->add_flag("--adaptive", den_opt.config.adaptive,
                  "Pick the patch tier (896/768/512) by image size, stride patch/2");
    den->add_option("--multiscale", den_opt.multiscale_text,
                    "Patch/overlap list, e.g. 256/48,384/64,512/96");
    den->add_flag("--quantize-before-merge", den_opt.config.quantize_before_merge,
                  "Quantize each multiscale output to u8 before averaging");
    den->add_flag("--self-ensemble", den_opt.config.self_ensemble,
                  "Average over the 8 geometric transforms");
    den->add_option("--fuse", den_opt.fuse_text,
                    "edge:DIR, fuse with the edge-standard images in DIR");
    den->add_option("--canny-sigma", den_opt.config.canny.sigma, "Canny smoothing std");
    den->add_option("--canny-low", den_opt.config.canny.low, "Canny low threshold");
    den->add_option("--canny-high", den_opt.config.canny.high, "Canny high threshold");
    den->add_flag("--force", den_opt.config.force, "Overwrite existing outputs");
    den->add_option("--workers", den_opt.config.workers, "Parallel image workers");
    den->add_option("--from-manifest", den_opt.manifest_path,
                    "Re-run settings recorded in a denoise manifest");
    den->add_flag("--quiet", den_opt.quiet, "Suppress per-file progress");

    // --- eval ---
    auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
    dforge::EvalConfig eval_config;
    std::string eval_loss_expr;
    eval->add_option("--gt", eval_config.gt_dir, "Ground-truth directory")->required();
    eval->add_option("--pred", eval_config.pred_dir, "Prediction directory")->required();
    eval->add_option("--csv", eval_config.csv_path, "Per-image CSV output path");
    eval->add_option("--md", eval_config.md_path, "Markdown report output path");
    eval->add_option("--name", eval_config.entry_name, "Entry name for reports");
    eval->add_option("--loss", eval_loss_expr,
                     "Optional loss expression to report, e.g. "
                     "\"0.8*charbonnier(1e-3) + 0.2*gradw_l1\"");

    // --- rank ---
    auto* rank_cmd = app.add_subcommand("rank", "Rank entry CSV rows (name,psnr,ssim)");
    std::string rank_in, rank_md;
    rank_cmd->add_option("--input,-i", rank_in, "Entries CSV")->required();
    rank_cmd->add_option("--md", rank_md, "Markdown leaderboard output path");

    // --- gdsm-check ---
    auto* gdsm = app.add_subcommand("gdsm-check",
                                    "Run the score-matching invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) {
            dforge::SynthConfig config = synth_config;
            if (!synth_manifest.empty()) {
                dforge::SynthConfig recorded =
                    dforge::synth_config_from_manifest(synth_manifest);
                recorded.output_dir = config.output_dir;
                recorded.force = config.force;
                recorded.workers = config.workers;
                if (!config.input_dir.empty()) recorded.input_dir = config.input_dir;
                config = recorded;
            }
            if (config.input_dir.empty())
                throw dforge::DataError("--input is required (or --from-manifest)");
            const int n = dforge::run_synth(config, progress_logger(synth_quiet));
            std::cout << "wrote " << n << " noisy images to " << config.output_dir
                      << std::endl;
        } else if (den->parsed()) {
            dforge::DenoiseConfig config = resolve_denoise_options(den_opt);
            if (config.input_dir.empty())
                throw dforge::DataError("--input is required (or --from-manifest)");
            const int n = dforge::run_denoise(config, progress_logger(den_opt.quiet));
            std::cout << "wrote " << n << " denoised images to " << config.output_dir
                      << std::endl;
        } else if (eval->parsed()) {
            if (!eval_loss_expr.empty())
                dforge::parse_loss_expr(eval_loss_expr);  // validate before scoring
            const dforge::EvalSummary summary = dforge::run_eval(eval_config);
            std::cout << "images: " << summary.per_image.size()
                      << "  mean PSNR: " << summary.mean_psnr
                      << "  mean SSIM: " << summary.mean_ssim << std::endl;
            if (!eval_loss_expr.empty()) {
                const auto spec = dforge::parse_loss_expr(eval_loss_expr);
                double total = 0.0;
                for (const auto& r : summary.per_image) {
                    const auto gt = dforge::to_float(dforge::load_png(
                        eval_config.gt_dir + "/" + r.name));
                    const auto pred = dforge::to_float(dforge::load_png(
                        eval_config.pred_dir + "/" + r.name));
                    total += dforge::loss(spec, pred, gt);
                }
                std::cout << "mean loss [" << dforge::to_string(spec)
                          << "]: " << total / summary.per_image.size() << std::endl;
            }
        } else if (rank_cmd->parsed()) {
            const dforge::RankTable table = dforge::run_rank(rank_in, rank_md);
            std::cout << dforge::leaderboard_markdown(table);
        } else if (gdsm->parsed()) {
            if (!dforge::run_gdsm_check(std::cout)) return 2;
        }
    } catch (const dforge::ExternalDenoiserError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    } catch (const dforge::DataError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
    return 0;
}
