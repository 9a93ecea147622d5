#include "mlens/sim.hpp"

namespace mlens {

SweepRecord evaluate_design(const std::optional<AsphericLens>& lens, const SimContext& ctx) {
    const ComplexFieldGrid source = gaussian_source(ctx.source, ctx.grid.n, ctx.grid.pitch);

    ComplexFieldGrid exit_field =
        lens ? traverse_lens(source, *lens, ctx.grid.slice) : source;
    const FarFieldMap far = far_field(exit_field, ctx.grid.pad_factor);
    const ComplexFieldGrid monitor = propagate_asm(exit_field, ctx.monitor_gap);

    SweepRecord rec;
    rec.lens = lens;
    rec.grid = ctx.grid;
    rec.source = ctx.source;
    rec.coupling = smf_coupling(far, monitor, ctx.fiber, ctx.analysis);
    rec.stats = rec.coupling.stats;
    return rec;
}

}  // namespace mlens
