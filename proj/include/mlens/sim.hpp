#pragma once

#include <optional>

#include "mlens/coupling.hpp"
#include "mlens/field.hpp"
#include "mlens/lens.hpp"
#include "mlens/stats.hpp"

namespace mlens {

struct GridSpec {
    int n = 512;
    double pitch = 0.1;     ///< um
    int pad_factor = 4;     ///< far-field zero padding
    double slice = 0.25;    ///< lens traversal slab thickness bound, um
};

/// Everything needed to evaluate one design point reproducibly.
struct SimContext {
    GridSpec grid;
    SourceSpec source;
    FiberSpec fiber;
    AnalysisConfig analysis;
    double monitor_gap = 1.0;  ///< near-field monitor height above the lens top, um
    int workers = 1;
};

/// One evaluated design point, with enough metadata to re-run bit-identically.
struct SweepRecord {
    std::optional<AsphericLens> lens;  ///< empty = bare source
    double dh = 0.0;                   ///< height error for tolerance scans, um
    ModeStats stats;
    CouplingReport coupling;
    GridSpec grid;
    SourceSpec source;
};

/// Full pipeline pass: source -> lens traversal -> far field at the exit
/// plane -> monitor near field -> stats -> coupling. Deterministic.
SweepRecord evaluate_design(const std::optional<AsphericLens>& lens, const SimContext& ctx);

inline SweepRecord evaluate_bare(const SimContext& ctx) { return evaluate_design(std::nullopt, ctx); }

}  // namespace mlens
