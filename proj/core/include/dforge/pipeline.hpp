#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dforge/denoisers.hpp"
#include "dforge/ensemble.hpp"
#include "dforge/metrics.hpp"
#include "dforge/noise.hpp"
#include "dforge/tiling.hpp"

namespace dforge {

// Dataset-level commands behind the CLI. Directories are flat; clean, noisy
// and denoised images are matched by filename. Every run writes a manifest
// that reproduces it exactly.

using LogFn = std::function<void(const std::string&)>;

struct SynthConfig {
    std::string input_dir;
    std::string output_dir;
    NoiseSpec noise;
    bool force = false;
    int workers = 1;
};

struct DenoiseConfig {
    std::string input_dir;
    std::string output_dir;
    std::vector<DenoiserSpec> denoisers = {DenoiserSpec::identity()};
    std::vector<double> ensemble_weights;  // empty = uniform over denoisers
    std::optional<TileSpec> tile;
    bool adaptive = false;                 // patch tiers by image size, stride patch/2
    BlendMode blend = BlendMode::Average;
    std::vector<TileSpec> multiscale;
    bool quantize_before_merge = false;
    bool self_ensemble = false;
    std::string fuse_edge_dir;             // edge-standard images, matched by filename
    CannyParams canny;
    bool force = false;
    int workers = 1;
};

struct EvalConfig {
    std::string gt_dir;
    std::string pred_dir;
    std::string csv_path;   // optional: per-image CSV `name,image,psnr,ssim`
    std::string md_path;    // optional: Markdown report
    std::string entry_name = "entry";
};

struct EvalSummary {
    std::vector<EvalRecord> per_image;  // name = filename
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
};

int run_synth(const SynthConfig& config, const LogFn& log = {});
int run_denoise(const DenoiseConfig& config, const LogFn& log = {});
EvalSummary run_eval(const EvalConfig& config, const LogFn& log = {});

// Reads entry rows `name,psnr,ssim` (header optional) and writes the ranked
// leaderboard table.
RankTable run_rank(const std::string& csv_in, const std::string& md_out);

// Full GDSM invariant suite; prints one line per check, returns false on any
// failure.
bool run_gdsm_check(std::ostream& out);

// Re-runs recorded settings; built-in denoisers reproduce outputs byte for byte.
SynthConfig synth_config_from_manifest(const std::string& path);
DenoiseConfig denoise_config_from_manifest(const std::string& path);

std::string leaderboard_markdown(const RankTable& table);

// One denoised image through the full inference stack (self-ensemble wrapping,
// tiling / adaptive tiers / multiscale, multi-model combination). Exposed for
// tests and custom drivers; fuse_edge_dir is handled at the dataset level.
ImageF denoise_one(const DenoiseConfig& config, const ImageF& img);

}  // namespace dforge
