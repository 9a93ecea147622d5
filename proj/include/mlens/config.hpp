#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlens/sim.hpp"

namespace mlens {

/// Fully resolved run configuration. Defaults here are the built-in layer;
/// a config file overrides defaults and command-line flags override the file.
struct RunConfig {
    SimContext ctx;
    std::string outdir;

    // lens parameters (commands that need one validate presence)
    std::optional<double> lens_r;
    double lens_k = 0.0;
    double lens_k4 = 0.0;
    double lens_n = 1.45;
    double lens_offset_x = 0.0;
    double lens_offset_y = 0.0;

    // command-specific knobs
    int profile_samples = 101;
    double sweep_k4_min = 0.0;
    std::optional<double> sweep_k4_max;  // default 3/R^3 when unset
    int sweep_points = 31;
    std::vector<double> k_values{0.0, -0.5, -1.0, -1.5};
    double family_r_min = 1.2;
    double family_r_max = 3.0;
    int family_points = 8;
    bool family_cold = false;
    double match_r_start = 2.0;
    double match_r_growth = 1.3;
    double match_r_max = 17.0;
    int match_max_iters = 200;
    double tol_max_offset = 1.0;
    int tol_offset_points = 21;
    double tol_max_dh = 1.5;
    int tol_height_points = 13;
    bool bare = false;
    bool summary_only = false;
};

/// Parse a flat `key = value` config file (# comments, dotted keys) into cfg.
/// Unknown keys are a hard error with line context.
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Apply one key/value pair (also used when re-running from a manifest).
void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value);

/// Validate every physical parameter against the module invariants.
/// needs_lens: the command requires lens.r to be set.
void validate_config(const RunConfig& cfg, bool needs_lens);

/// Resolved flat view of the config (all defaults expanded), suitable for the
/// manifest and for re-running bit-identically.
std::map<std::string, std::string> resolved_config(const RunConfig& cfg);

AsphericLens config_lens(const RunConfig& cfg);

}  // namespace mlens
