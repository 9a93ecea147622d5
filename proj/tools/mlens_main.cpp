// mlens: scalar Fourier-optics design tool for aspheric microlenses on
// micropillar emitters. Subcommands evaluate single designs, parameter
// sweeps, radius-family scans, fibre matching, and fabrication tolerances,
// writing CSV data plus JSON summaries and a reproducibility manifest.

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mlens/config.hpp"
#include "mlens/csvio.hpp"
#include "mlens/errors.hpp"
#include "mlens/optimize.hpp"
#include "mlens/parallel.hpp"

namespace fs = std::filesystem;
using mlens::io::json;

namespace {

constexpr const char* kVersion = "mlens 0.1.0";

/// Exclusive lock on the output directory; no two commands may write to the
/// same directory concurrently.
class DirLock {
public:
    explicit DirLock(const fs::path& dir) : path_(dir / ".mlens.lock") {
        fs::create_directories(dir);
        fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0)
            throw mlens::ValidationError("output directory is locked by another run (" +
                                         path_.string() + " exists)");
    }
    ~DirLock() {
        if (fd_ >= 0) {
            ::close(fd_);
            ::unlink(path_.c_str());
        }
    }
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

private:
    fs::path path_;
    int fd_ = -1;
};

/// Tracks artifacts so a failing run leaves no partial outputs behind.
class ArtifactSet {
public:
    explicit ArtifactSet(fs::path dir) : dir_(std::move(dir)) {}
    fs::path file(const std::string& name) {
        paths_.push_back(dir_ / name);
        return paths_.back();
    }
    void discard_all() {
        for (const auto& p : paths_) {
            std::error_code ec;
            fs::remove(p, ec);
            fs::path side = p;
            side.replace_extension(".json");
            fs::remove(side, ec);
        }
    }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::vector<fs::path> paths_;
};

json summarize_record(const mlens::SweepRecord& rec) { return mlens::io::record_json(rec); }

void write_manifest(ArtifactSet& artifacts, const std::string& command,
                    const mlens::RunConfig& cfg, const json& summary, double duration_s) {
    json manifest;
    manifest["artifact"] = kVersion;
    manifest["command"] = command;
    manifest["config"] = mlens::resolved_config(cfg);
    manifest["summary"] = summary;
    manifest["timing"] = {{"duration_s", duration_s}};
    mlens::io::write_json(manifest, artifacts.file("manifest.json"));
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return out;
}

/// Symmetric grid about 0 (odd point count guarantees the 0 entry).
std::vector<double> symmetric_grid(double max_abs, int points) {
    if (points < 3 || points % 2 == 0)
        throw mlens::ValidationError("tolerance scans need an odd point count >= 3");
    auto grid = linspace(-max_abs, max_abs, points);
    grid[static_cast<std::size_t>(points / 2)] = 0.0;  // exact zero at the center
    return grid;
}

// ---------------------------------------------------------------- commands

json cmd_profile(const mlens::RunConfig& cfg, ArtifactSet& artifacts) {
    const mlens::AsphericLens lens = mlens::config_lens(cfg);
    if (cfg.profile_samples < 2) throw mlens::ValidationError("profile.samples must be >= 2");
    std::ofstream out(artifacts.file("profile.csv"));
    out << "x,z\n";
    for (int i = 0; i < cfg.profile_samples; ++i) {
        const double x = lens.radius * i / (cfg.profile_samples - 1);
        out << mlens::io::format_value(x) << ',' << mlens::io::format_value(mlens::sag(lens, x))
            << '\n';
    }
    json summary;
    summary["lens"] = mlens::io::lens_json(lens);
    summary["height"] = mlens::lens_height(lens);
    summary["samples"] = cfg.profile_samples;
    return summary;
}

json cmd_simulate(const mlens::RunConfig& cfg, ArtifactSet& artifacts) {
    std::optional<mlens::AsphericLens> lens;
    if (!cfg.bare) lens = mlens::config_lens(cfg);

    const mlens::ComplexFieldGrid source =
        mlens::gaussian_source(cfg.ctx.source, cfg.ctx.grid.n, cfg.ctx.grid.pitch);
    const mlens::ComplexFieldGrid exit_field =
        lens ? mlens::traverse_lens(source, *lens, cfg.ctx.grid.slice) : source;
    const mlens::FarFieldMap far = mlens::far_field(exit_field, cfg.ctx.grid.pad_factor);
    const mlens::ComplexFieldGrid monitor = mlens::propagate_asm(exit_field, cfg.ctx.monitor_gap);

    mlens::SweepRecord rec;
    rec.lens = lens;
    rec.grid = cfg.ctx.grid;
    rec.source = cfg.ctx.source;
    rec.coupling = mlens::smf_coupling(far, monitor, cfg.ctx.fiber, cfg.ctx.analysis);
    rec.stats = rec.coupling.stats;

    if (!cfg.summary_only) {
        mlens::io::export_farfield(far, artifacts.file("farfield.csv"));
        mlens::io::export_nearfield(monitor, artifacts.file("nearfield.csv"));
    }
    json summary = summarize_record(rec);
    summary["fiber_na_from_mfd"] = mlens::fiber_na_consistency(cfg.ctx.fiber);
    if (lens) {
        summary["lens_height"] = mlens::lens_height(*lens);
        summary["warnings"] = mlens::lens_warnings(*lens);
    }
    return summary;
}

json cmd_sweep_k4(const mlens::RunConfig& cfg, ArtifactSet& artifacts) {
    const mlens::AsphericLens lens = mlens::config_lens(cfg);
    const double hi = cfg.sweep_k4_max.value_or(3.0 / std::pow(lens.radius, 3.0));
    if (!(hi > cfg.sweep_k4_min)) throw mlens::ValidationError("sweep.k4_max must exceed sweep.k4_min");
    if (cfg.sweep_points < 2) throw mlens::ValidationError("sweep.points must be >= 2");
    const auto grid = linspace(cfg.sweep_k4_min, hi, cfg.sweep_points);
    const auto records = mlens::sweep_k4(lens.radius, lens.conic, grid, cfg.ctx);
    mlens::io::export_records(records, artifacts.file("sweep.csv"));

    int best = 0;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].stats.power_in_na014 > records[best].stats.power_in_na014)
            best = static_cast<int>(i);
    json summary;
    summary["points"] = records.size();
    summary["best"] = summarize_record(records[static_cast<std::size_t>(best)]);
    summary["bare"] = summarize_record(mlens::evaluate_bare(cfg.ctx));
    return summary;
}

json cmd_sweep_k(const mlens::RunConfig& cfg, ArtifactSet& artifacts) {
    const mlens::AsphericLens lens = mlens::config_lens(cfg);
    const auto results = mlens::sweep_k(lens.radius, cfg.k_values, cfg.ctx);
    std::vector<mlens::SweepRecord> records;
    records.reserve(results.size());
    for (const auto& [k, best] : results) records.push_back(best.record);
    mlens::io::export_records(records, artifacts.file("sweep.csv"));

    json per_k = json::array();
    for (const auto& [k, best] : results)
        per_k.push_back({{"k", k},
                         {"k4_opt", best.k4},
                         {"eta014", best.record.stats.power_in_na014},
                         {"evaluations", best.evaluations}});
    json summary;
    summary["per_k"] = per_k;
    return summary;
}

json cmd_family(const mlens::RunConfig& cfg, ArtifactSet& artifacts) {
    if (cfg.family_points < 4) throw mlens::ValidationError("family.points must be >= 4");
    const auto grid = linspace(cfg.family_r_min, cfg.family_r_max, cfg.family_points);
    const auto scan = mlens::family_scan(grid, cfg.ctx, !cfg.family_cold);
    mlens::io::export_records(scan.records, artifacts.file("sweep.csv"));
    json summary;
    summary["fit"] = mlens::io::fit_json(scan.fit);
    summary["k4_opt"] = scan.k4_opt;
    summary["radii"] = grid;
    return summary;
}

json cmd_match_fiber(const mlens::RunConfig& cfg, ArtifactSet& artifacts) {
    mlens::MatchConfig mc;
    mc.r_start = cfg.match_r_start;
    mc.r_growth = cfg.match_r_growth;
    mc.r_max = cfg.match_r_max;
    mc.max_iters = cfg.match_max_iters;
    const auto result = mlens::match_fiber(cfg.ctx, mc);

    mlens::io::export_records(result.stage1, artifacts.file("stage1.csv"));
    std::ofstream trace(artifacts.file("trace.csv"));
    trace << "iter,R,k4,eta_overlap\n";
    for (std::size_t i = 0; i < result.trace.size(); ++i)
        trace << i << ',' << mlens::io::format_value(result.trace[i].lens.radius) << ','
              << mlens::io::format_value(result.trace[i].lens.quartic) << ','
              << mlens::io::format_value(result.trace[i].objective) << '\n';

    json summary;
    summary["lens"] = mlens::io::lens_json(result.lens);
    summary["record"] = summarize_record(result.record);
    summary["bare"] = summarize_record(mlens::evaluate_bare(cfg.ctx));
    summary["stage1_crossed"] = result.stage1_crossed;
    summary["converged"] = result.converged;
    summary["trace_evaluations"] = result.trace.size();
    return summary;
}

json cmd_tolerance_offset(const mlens::RunConfig& cfg, ArtifactSet& artifacts) {
    const mlens::AsphericLens lens = mlens::config_lens(cfg);
    const auto offsets = symmetric_grid(cfg.tol_max_offset, cfg.tol_offset_points);
    const auto records = mlens::tolerance_offset(lens, offsets, cfg.ctx);
    mlens::io::export_records(records, artifacts.file("sweep.csv"));
    json summary;
    summary["offsets"] = offsets;
    summary["nominal"] = summarize_record(records[static_cast<std::size_t>(cfg.tol_offset_points / 2)]);
    return summary;
}

json cmd_tolerance_height(const mlens::RunConfig& cfg, ArtifactSet& artifacts) {
    const mlens::AsphericLens lens = mlens::config_lens(cfg);
    const auto grid = symmetric_grid(cfg.tol_max_dh, cfg.tol_height_points);
    const auto entries = mlens::tolerance_height(lens, grid, cfg.ctx);
    const double height = mlens::lens_height(lens);

    std::vector<mlens::SweepRecord> records;
    json dh_um = json::array(), dh_pct = json::array(), skipped = json::array();
    for (const auto& entry : entries) {
        if (entry.record) {
            records.push_back(*entry.record);
            dh_um.push_back(entry.dh);
            dh_pct.push_back(100.0 * entry.dh / height);
        } else {
            skipped.push_back({{"dh", entry.dh}, {"error", entry.error}});
        }
    }
    mlens::io::export_records(records, artifacts.file("sweep.csv"));
    json summary;
    summary["lens_height"] = height;
    summary["dh_um"] = dh_um;
    summary["dh_pct"] = dh_pct;
    summary["skipped"] = skipped;
    return summary;
}

// ------------------------------------------------------------------- main

struct CliFlags {
    std::string config_file;
    std::string outdir;
    // raw flag storage; applied onto RunConfig only when the flag was given
    double R = 0, k = 0, k4 = 0, lens_n = 0, off_x = 0, off_y = 0;
    int N = 0, pad = 0, points = 0, samples = 0, workers = 0, max_iters = 0;
    double pitch = 0, lambda = 0, mfd = 0, slice = 0;
    std::string fiber_preset;
    double fiber_mfd = 0, fiber_na = 0;
    double k4_min = 0, k4_max = 0, r_min = 0, r_max = 0, r_start = 0, r_growth = 0;
    double max_offset = 0, max_dh = 0;
    std::string k_values;  // comma-separated so negative conics parse cleanly
    bool bare = false, summary_only = false, cold = false;
};

void add_common_flags(CLI::App* cmd, CliFlags& f) {
    cmd->add_option("--config", f.config_file, "flat key = value config file");
    cmd->add_option("--out", f.outdir, "output directory (default $MLENS_OUTDIR or ./mlens-out)");
    cmd->add_option("--workers", f.workers, "worker threads (default: hardware parallelism)");
    cmd->add_option("--N", f.N, "grid size (even, >= 64)");
    cmd->add_option("--pitch", f.pitch, "grid pitch, um");
    cmd->add_option("--pad", f.pad, "far-field pad factor (1,2,4,8)");
    cmd->add_option("--slice", f.slice, "lens traversal slab thickness, um");
    cmd->add_option("--lambda", f.lambda, "wavelength, um");
    cmd->add_option("--mfd", f.mfd, "source mode field diameter, um");
    cmd->add_option("--fiber", f.fiber_preset, "fibre preset name (smf28)");
    cmd->add_option("--fiber-mfd", f.fiber_mfd, "fibre mode field diameter, um");
    cmd->add_option("--fiber-na", f.fiber_na, "fibre numerical aperture");
}

void add_lens_flags(CLI::App* cmd, CliFlags& f) {
    cmd->add_option("--R", f.R, "lens base radius, um");
    cmd->add_option("--k", f.k, "conic coefficient (<= 0)");
    cmd->add_option("--k4", f.k4, "quartic coefficient, um^-3");
    cmd->add_option("--lens-n", f.lens_n, "lens refractive index");
    cmd->add_option("--offset-x", f.off_x, "lens lateral offset x, um");
    cmd->add_option("--offset-y", f.off_y, "lens lateral offset y, um");
}

void apply_flag_overrides(const CLI::App* cmd, const CliFlags& f, mlens::RunConfig& cfg) {
    auto given = [&](const std::string& name) {
        const CLI::Option* opt = cmd->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (given("--workers")) cfg.ctx.workers = f.workers;
    if (given("--N")) cfg.ctx.grid.n = f.N;
    if (given("--pitch")) cfg.ctx.grid.pitch = f.pitch;
    if (given("--pad")) cfg.ctx.grid.pad_factor = f.pad;
    if (given("--slice")) cfg.ctx.grid.slice = f.slice;
    if (given("--lambda")) cfg.ctx.source.wavelength = f.lambda;
    if (given("--mfd")) cfg.ctx.source.mfd = f.mfd;
    if (given("--fiber")) apply_config_key(cfg, "fiber.preset", f.fiber_preset);
    if (given("--fiber-mfd")) cfg.ctx.fiber.mfd = f.fiber_mfd;
    if (given("--fiber-na")) cfg.ctx.fiber.na = f.fiber_na;
    if (given("--R")) cfg.lens_r = f.R;
    if (given("--k")) cfg.lens_k = f.k;
    if (given("--k4")) cfg.lens_k4 = f.k4;
    if (given("--lens-n")) cfg.lens_n = f.lens_n;
    if (given("--offset-x")) cfg.lens_offset_x = f.off_x;
    if (given("--offset-y")) cfg.lens_offset_y = f.off_y;
    if (given("--samples")) cfg.profile_samples = f.samples;
    if (given("--points")) cfg.sweep_points = f.points;
    if (given("--k4-min")) cfg.sweep_k4_min = f.k4_min;
    if (given("--k4-max")) cfg.sweep_k4_max = f.k4_max;
    if (given("--k-values")) apply_config_key(cfg, "sweep.k_values", f.k_values);
    if (given("--r-min")) cfg.family_r_min = f.r_min;
    if (given("--r-max")) cfg.family_r_max = f.r_max;
    if (given("--r-start")) cfg.match_r_start = f.r_start;
    if (given("--r-growth")) cfg.match_r_growth = f.r_growth;
    if (given("--match-r-max")) cfg.match_r_max = f.r_max;
    if (given("--max-iters")) cfg.match_max_iters = f.max_iters;
    if (given("--max-offset")) cfg.tol_max_offset = f.max_offset;
    if (given("--max-dh")) cfg.tol_max_dh = f.max_dh;
    if (given("--bare")) cfg.bare = true;
    if (given("--summary-only")) cfg.summary_only = true;
    if (given("--cold")) cfg.family_cold = true;
    // sweep-k / tolerance point counts share --points
    if (given("--points")) {
        cfg.family_points = f.points;
        cfg.tol_offset_points = f.points;
        cfg.tol_height_points = f.points;
    }
}

int run(int argc, char** argv) {
    CLI::App app{"scalar Fourier-optics microlens design tool"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    CliFlags f;
    const std::set<std::string> lens_commands = {"profile", "simulate", "sweep-k4", "sweep-k",
                                                 "tolerance-offset", "tolerance-height"};

    auto* profile = app.add_subcommand("profile", "tabulate the lens sag profile");
    profile->add_option("--samples", f.samples, "number of radial samples");
    auto* simulate = app.add_subcommand("simulate", "evaluate one design end to end");
    simulate->add_flag("--bare", f.bare, "no lens: bare source");
    simulate->add_flag("--summary-only", f.summary_only, "skip bulk field exports");
    auto* sweep_k4_cmd = app.add_subcommand("sweep-k4", "sweep the quartic coefficient");
    sweep_k4_cmd->add_option("--k4-min", f.k4_min, "sweep start");
    sweep_k4_cmd->add_option("--k4-max", f.k4_max, "sweep end (default 3/R^3)");
    sweep_k4_cmd->add_option("--points", f.points, "sweep points");
    auto* sweep_k_cmd = app.add_subcommand("sweep-k", "optimal k4 per conic coefficient");
    sweep_k_cmd->add_option("--k-values", f.k_values, "comma-separated conic values (<= 0, include 0)");
    auto* family = app.add_subcommand("family", "optimal-k4 family across radii + scaling fit");
    family->add_option("--r-min", f.r_min, "smallest radius");
    family->add_option("--r-max", f.r_max, "largest radius");
    family->add_option("--points", f.points, "number of radii");
    family->add_flag("--cold", f.cold, "disable warm-started brackets");
    auto* match = app.add_subcommand("match-fiber", "two-stage fibre mode matching");
    match->add_option("--r-start", f.r_start, "stage-1 starting radius");
    match->add_option("--r-growth", f.r_growth, "stage-1 geometric growth factor");
    match->add_option("--match-r-max", f.r_max, "stage-1 radius cap");
    match->add_option("--max-iters", f.max_iters, "stage-2 simplex iteration cap");
    auto* tol_off = app.add_subcommand("tolerance-offset", "lateral misalignment scan");
    tol_off->add_option("--max-offset", f.max_offset, "scan half-range, um");
    tol_off->add_option("--points", f.points, "odd point count");
    auto* tol_h = app.add_subcommand("tolerance-height", "lens height error scan");
    tol_h->add_option("--max-dh", f.max_dh, "scan half-range, um");
    tol_h->add_option("--points", f.points, "odd point count");
    auto* rerun = app.add_subcommand("rerun", "re-run a command from its manifest");
    std::string manifest_path;
    rerun->add_option("manifest", manifest_path, "path to manifest.json")->required();

    for (auto* cmd : {profile, simulate, sweep_k4_cmd, sweep_k_cmd, family, match, tol_off, tol_h}) {
        add_common_flags(cmd, f);
        if (lens_commands.count(cmd->get_name())) add_lens_flags(cmd, f);
    }
    rerun->add_option("--out", f.outdir, "output directory");
    rerun->add_option("--workers", f.workers, "worker threads");

    CLI11_PARSE(app, argc, argv);
    CLI::App* cmd = app.get_subcommands().front();
    std::string command = cmd->get_name();

    mlens::RunConfig cfg;
    cfg.ctx.workers = mlens::default_workers();

    if (command == "rerun") {
        const json manifest = mlens::io::read_json(manifest_path);
        command = manifest.at("command").get<std::string>();
        if (command == "rerun") throw mlens::ValidationError("manifest command cannot be rerun");
        for (const auto& [key, value] : manifest.at("config").items())
            apply_config_key(cfg, key, value.get<std::string>());
        if (cmd->get_option("--workers")->count() > 0) cfg.ctx.workers = f.workers;
    } else {
        if (!f.config_file.empty()) apply_config_file(cfg, f.config_file);
        apply_flag_overrides(cmd, f, cfg);
    }

    // Output directory: flag > config > environment > default.
    fs::path outdir;
    if (!f.outdir.empty())
        outdir = f.outdir;
    else if (!cfg.outdir.empty())
        outdir = cfg.outdir;
    else if (const char* env = std::getenv("MLENS_OUTDIR"))
        outdir = env;
    else
        outdir = "mlens-out";

    const bool needs_lens =
        lens_commands.count(command) > 0 && !(command == "simulate" && cfg.bare);
    validate_config(cfg, needs_lens);

    DirLock lock(outdir);
    ArtifactSet artifacts(outdir);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        json summary;
        if (command == "profile")
            summary = cmd_profile(cfg, artifacts);
        else if (command == "simulate")
            summary = cmd_simulate(cfg, artifacts);
        else if (command == "sweep-k4")
            summary = cmd_sweep_k4(cfg, artifacts);
        else if (command == "sweep-k")
            summary = cmd_sweep_k(cfg, artifacts);
        else if (command == "family")
            summary = cmd_family(cfg, artifacts);
        else if (command == "match-fiber")
            summary = cmd_match_fiber(cfg, artifacts);
        else if (command == "tolerance-offset")
            summary = cmd_tolerance_offset(cfg, artifacts);
        else if (command == "tolerance-height")
            summary = cmd_tolerance_height(cfg, artifacts);
        else
            throw mlens::ValidationError("unknown command " + command);

        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        mlens::io::write_json(summary, artifacts.file("summary.json"));
        write_manifest(artifacts, command, cfg, summary, dt);
        std::cout << command << ": ok -> " << outdir.string() << "\n";
        return 0;
    } catch (...) {
        artifacts.discard_all();
        throw;
    }
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const mlens::NumericalError& err) {
        std::cerr << "numerical error: " << err.what() << "\n";
        return 2;
    } catch (const mlens::ValidationError& err) {
        std::cerr << "validation error: " << err.what() << "\n";
        return 1;
    } catch (const std::domain_error& err) {
        std::cerr << "validation error: " << err.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& err) {
        std::cerr << "validation error: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "numerical error: " << err.what() << "\n";
        return 2;
    }
}
