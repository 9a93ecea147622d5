#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mlens/sim.hpp"

namespace mlens {

/// Sweep the quartic coefficient at fixed (R, k). Grid must be ascending and
/// non-negative; records come back in grid order regardless of worker count.
std::vector<SweepRecord> sweep_k4(double radius, double conic, std::span<const double> k4_grid,
                                  const SimContext& ctx);

struct BestK4 {
    double k4 = 0.0;
    SweepRecord record;
    int evaluations = 0;
};

/// Maximize the NA<=0.14 encircled fraction over k4 in [lo, hi]: a 9-point
/// coarse pre-scan (which must place the maximum strictly inside the bracket)
/// followed by golden-section refinement to 1e-3 relative. Deterministic;
/// ties break toward smaller k4.
BestK4 best_k4(double radius, double conic, double lo, double hi, const SimContext& ctx);

/// Per-conic best_k4 over a grid of k <= 0 (must include 0).
std::vector<std::pair<double, BestK4>> sweep_k(double radius, std::span<const double> k_grid,
                                               const SimContext& ctx);

/// Log-log power-law fit of k4*(R); half-widths are 1-sigma from the fit residuals.
struct ScalingFit {
    double r0 = 0.0;            ///< reference radius (2 um when inside the scan range)
    double k4_at_r0 = 0.0;
    double k4_halfwidth = 0.0;
    double exponent = 0.0;
    double exponent_halfwidth = 0.0;
    std::vector<double> residuals;  ///< log-space residual per point
};

struct FamilyScan {
    std::vector<SweepRecord> records;  ///< per-R optimum, in grid order
    std::vector<double> k4_opt;
    ScalingFit fit;
};

/// Optimal-k4 family across radii. Each point after the first is warm-started
/// from the previous optimum scaled by (R_prev/R)^3, bracket = prediction x
/// [0.5, 2]; a failed warm bracket falls back to the cold one. warm_start =
/// false forces cold brackets everywhere (results agree to 1e-3 relative).
FamilyScan family_scan(std::span<const double> r_grid, const SimContext& ctx,
                       bool warm_start = true);

struct MatchConfig {
    double r_start = 2.0;
    double r_growth = 1.3;
    double r_max = 12.0;
    int max_iters = 200;
    double ftol = 1e-4;
};

struct TraceEntry {
    AsphericLens lens;
    double objective = 0.0;  ///< eta_overlap at this iterate
};

struct MatchResult {
    AsphericLens lens;       ///< best-ever design
    SweepRecord record;
    std::vector<SweepRecord> stage1;  ///< NA-matching scan along the family
    std::vector<TraceEntry> trace;    ///< stage-2 simplex evaluations
    bool stage1_crossed = false;  ///< eta_na maximum bracketed inside the R range
    bool converged = false;       ///< simplex met ftol before max_iters
};

/// Two-stage fibre matching: walk the minimal-NA family in R until the
/// NA-formula efficiency peaks, then refine (R, k4) with a Nelder-Mead
/// simplex maximizing the overlap integral.
MatchResult match_fiber(const SimContext& ctx, const MatchConfig& cfg = {});

/// Lateral-offset tolerance scan; offsets must include 0. Input order kept.
std::vector<SweepRecord> tolerance_offset(const AsphericLens& lens,
                                          std::span<const double> offsets,
                                          const SimContext& ctx);

struct HeightToleranceEntry {
    double dh = 0.0;
    std::optional<SweepRecord> record;  ///< empty when the entry was skipped
    std::string error;
};

/// Height-error tolerance scan via the k4 parametrization (k = 0 family).
/// Entries that would need k4 < 0 are skipped with a per-entry error marker.
std::vector<HeightToleranceEntry> tolerance_height(const AsphericLens& lens,
                                                   std::span<const double> dh_grid,
                                                   const SimContext& ctx);

}  // namespace mlens
