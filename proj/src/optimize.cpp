#include "mlens/optimize.hpp"

#include <algorithm>
#include <cmath>

#include "mlens/errors.hpp"
#include "mlens/parallel.hpp"

namespace mlens {

namespace {

AsphericLens make_lens(double radius, double conic, double k4) {
    AsphericLens lens;
    lens.radius = radius;
    lens.conic = conic;
    lens.quartic = k4;
    return lens;
}

double objective(const SweepRecord& rec) { return rec.stats.power_in_na014; }

double cold_hi(double radius) { return 3.0 / (radius * radius * radius); }

}  // namespace

std::vector<SweepRecord> sweep_k4(double radius, double conic, std::span<const double> k4_grid,
                                  const SimContext& ctx) {
    if (k4_grid.empty()) throw ValidationError("sweep_k4 grid is empty");
    for (std::size_t i = 0; i < k4_grid.size(); ++i) {
        if (k4_grid[i] < 0.0) throw ValidationError("sweep_k4 grid must be non-negative");
        if (i > 0 && k4_grid[i] <= k4_grid[i - 1])
            throw ValidationError("sweep_k4 grid must be strictly ascending");
    }
    return parallel_map<SweepRecord>(
        static_cast<int>(k4_grid.size()), ctx.workers,
        [&](int i) { return evaluate_design(make_lens(radius, conic, k4_grid[i]), ctx); });
}

BestK4 best_k4(double radius, double conic, double lo, double hi, const SimContext& ctx) {
    if (!(lo >= 0.0) || !(hi > lo)) throw ValidationError("best_k4 bracket must satisfy 0 <= lo < hi");

    BestK4 best;
    best.k4 = -1.0;
    double best_val = -1.0;
    auto consider = [&](double k4, const SweepRecord& rec) {
        const double v = objective(rec);
        // Ties break toward smaller k4.
        if (v > best_val || (v == best_val && k4 < best.k4)) {
            best_val = v;
            best.k4 = k4;
            best.record = rec;
        }
    };
    auto eval = [&](double k4) {
        SweepRecord rec = evaluate_design(make_lens(radius, conic, k4), ctx);
        ++best.evaluations;
        consider(k4, rec);
        return objective(rec);
    };

    // Coarse 9-point pre-scan; the maximum must be interior.
    constexpr int kPreScan = 9;
    std::vector<double> grid(kPreScan);
    for (int i = 0; i < kPreScan; ++i) grid[i] = lo + (hi - lo) * i / (kPreScan - 1);
    const auto recs = parallel_map<SweepRecord>(kPreScan, ctx.workers, [&](int i) {
        return evaluate_design(make_lens(radius, conic, grid[i]), ctx);
    });
    best.evaluations += kPreScan;
    int arg = 0;
    for (int i = 0; i < kPreScan; ++i) {
        if (objective(recs[i]) > objective(recs[arg])) arg = i;
        consider(grid[i], recs[i]);
    }
    if (arg == 0 || arg == kPreScan - 1)
        throw NoInteriorMaximum("k4 objective is maximal at the bracket endpoint; no interior maximum");

    // Golden-section refinement on the bracketing interval.
    constexpr double kInvPhi = 0.6180339887498949;
    double a = grid[arg - 1], b = grid[arg + 1];
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = eval(c), fd = eval(d);
    const double rel_tol = 1e-3;
    while ((b - a) > rel_tol * b) {
        if (fc >= fd) {  // keep the left interval on ties (smaller k4)
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = eval(d);
        }
    }
    return best;
}

std::vector<std::pair<double, BestK4>> sweep_k(double radius, std::span<const double> k_grid,
                                               const SimContext& ctx) {
    if (std::find(k_grid.begin(), k_grid.end(), 0.0) == k_grid.end())
        throw ValidationError("sweep_k grid must include k = 0");
    for (double k : k_grid)
        if (k > 0.0) throw ValidationError("sweep_k grid must be <= 0");

    std::vector<std::pair<double, BestK4>> out;
    out.reserve(k_grid.size());
    for (double k : k_grid) out.emplace_back(k, best_k4(radius, k, 0.0, cold_hi(radius), ctx));
    return out;
}

namespace {

ScalingFit fit_power_law(std::span<const double> radii, std::span<const double> k4s) {
    const int n = static_cast<int>(radii.size());
    if (n < 4) throw NumericalError("scaling fit needs at least 4 valid points");
    double r0 = radii.front();
    if (radii.front() <= 2.0 && radii.back() >= 2.0) r0 = 2.0;

    std::vector<double> xs(n), ys(n);
    double sx = 0.0, sy = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!(k4s[i] > 0.0)) throw NumericalError("scaling fit requires positive k4 optima");
        xs[i] = std::log(radii[i] / r0);
        ys[i] = std::log(k4s[i]);
        sx += xs[i];
        sy += ys[i];
    }
    const double xbar = sx / n, ybar = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    const double slope = sxy / sxx;
    const double intercept = ybar - slope * xbar;

    ScalingFit fit;
    fit.r0 = r0;
    fit.exponent = slope;
    fit.k4_at_r0 = std::exp(intercept);
    fit.residuals.resize(n);
    double ssr = 0.0;
    for (int i = 0; i < n; ++i) {
        fit.residuals[i] = ys[i] - (intercept + slope * xs[i]);
        ssr += fit.residuals[i] * fit.residuals[i];
    }
    const double sigma2 = n > 2 ? ssr / (n - 2) : 0.0;
    fit.exponent_halfwidth = std::sqrt(sigma2 / sxx);
    fit.k4_halfwidth = fit.k4_at_r0 * std::sqrt(sigma2 * (1.0 / n + xbar * xbar / sxx));
    return fit;
}

}  // namespace

FamilyScan family_scan(std::span<const double> r_grid, const SimContext& ctx, bool warm_start) {
    if (r_grid.size() < 4) throw ValidationError("family_scan needs at least 4 radii");
    for (std::size_t i = 1; i < r_grid.size(); ++i)
        if (r_grid[i] <= r_grid[i - 1]) throw ValidationError("family_scan radii must be ascending");

    FamilyScan scan;
    double prev_r = 0.0, prev_k4 = -1.0;
    for (double radius : r_grid) {
        BestK4 point;
        bool done = false;
        if (warm_start && prev_k4 > 0.0) {
            const double predicted = prev_k4 * std::pow(prev_r / radius, 3.0);
            try {
                point = best_k4(radius, 0.0, 0.5 * predicted, 2.0 * predicted, ctx);
                done = true;
            } catch (const NoInteriorMaximum&) {
                // Prediction bracket missed; fall through to the cold bracket.
            }
        }
        if (!done) point = best_k4(radius, 0.0, 0.0, cold_hi(radius), ctx);
        scan.k4_opt.push_back(point.k4);
        scan.records.push_back(std::move(point.record));
        prev_r = radius;
        prev_k4 = scan.k4_opt.back();
    }
    scan.fit = fit_power_law(r_grid, scan.k4_opt);
    return scan;
}

namespace {

/// Stage-2 objective; invalid designs get a large penalty.
double overlap_objective(double radius, double k4, const SimContext& ctx,
                         std::vector<TraceEntry>& trace) {
    const double max_radius = ctx.grid.n * ctx.grid.pitch / 2.0;
    if (radius <= 0.0 || k4 < 0.0 || radius >= max_radius) return -1.0;
    const AsphericLens lens = make_lens(radius, 0.0, k4);
    const SweepRecord rec = evaluate_design(lens, ctx);
    trace.push_back({lens, rec.coupling.eta_overlap});
    return rec.coupling.eta_overlap;
}

}  // namespace

MatchResult match_fiber(const SimContext& ctx, const MatchConfig& cfg) {
    MatchResult result;

    // Stage 1: follow the minimal-NA family in R until eta_na peaks.
    double best_eta_na = -1.0;
    double best_r = cfg.r_start, best_k4_val = 0.0;
    int decline_streak = 0;
    double prev_r = 0.0, prev_k4 = -1.0;
    for (double radius = cfg.r_start; radius <= cfg.r_max; radius *= cfg.r_growth) {
        BestK4 point;
        bool done = false;
        if (prev_k4 > 0.0) {
            const double predicted = prev_k4 * std::pow(prev_r / radius, 3.0);
            try {
                point = best_k4(radius, 0.0, 0.5 * predicted, 2.0 * predicted, ctx);
                done = true;
            } catch (const NoInteriorMaximum&) {
            }
        }
        if (!done) point = best_k4(radius, 0.0, 0.0, cold_hi(radius), ctx);
        prev_r = radius;
        prev_k4 = point.k4;

        const double eta = point.record.coupling.eta_na;
        if (eta > best_eta_na) {
            best_eta_na = eta;
            best_r = radius;
            best_k4_val = point.k4;
            decline_streak = 0;
        } else if (++decline_streak >= 2) {
            result.stage1.push_back(std::move(point.record));
            result.stage1_crossed = true;
            break;
        }
        result.stage1.push_back(std::move(point.record));
    }

    // Stage 2: Nelder-Mead over (R, k4) maximizing the overlap integral.
    struct Vertex {
        double r, k4, f;
    };
    auto f_of = [&](double r, double k4) {
        return -overlap_objective(r, k4, ctx, result.trace);
    };
    std::vector<Vertex> simplex = {
        {best_r, best_k4_val, f_of(best_r, best_k4_val)},
        {best_r * 1.05, best_k4_val, f_of(best_r * 1.05, best_k4_val)},
        {best_r, best_k4_val * 1.2, f_of(best_r, best_k4_val * 1.2)},
    };
    auto order = [&]() {
        std::sort(simplex.begin(), simplex.end(),
                  [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    };
    order();
    constexpr double kAlpha = 1.0, kGamma = 2.0, kRho = 0.5, kSigma = 0.5;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        if (simplex[2].f - simplex[0].f < cfg.ftol) {
            result.converged = true;
            break;
        }
        const double cr = (simplex[0].r + simplex[1].r) / 2.0;
        const double ck = (simplex[0].k4 + simplex[1].k4) / 2.0;
        Vertex refl{cr + kAlpha * (cr - simplex[2].r), ck + kAlpha * (ck - simplex[2].k4), 0.0};
        refl.f = f_of(refl.r, refl.k4);
        if (refl.f < simplex[0].f) {
            Vertex exp_{cr + kGamma * (refl.r - cr), ck + kGamma * (refl.k4 - ck), 0.0};
            exp_.f = f_of(exp_.r, exp_.k4);
            simplex[2] = exp_.f < refl.f ? exp_ : refl;
        } else if (refl.f < simplex[1].f) {
            simplex[2] = refl;
        } else {
            Vertex contr{cr + kRho * (simplex[2].r - cr), ck + kRho * (simplex[2].k4 - ck), 0.0};
            contr.f = f_of(contr.r, contr.k4);
            if (contr.f < simplex[2].f) {
                simplex[2] = contr;
            } else {
                for (int i = 1; i < 3; ++i) {
                    simplex[i].r = simplex[0].r + kSigma * (simplex[i].r - simplex[0].r);
                    simplex[i].k4 = simplex[0].k4 + kSigma * (simplex[i].k4 - simplex[0].k4);
                    simplex[i].f = f_of(simplex[i].r, simplex[i].k4);
                }
            }
        }
        order();
    }

    // Best-ever iterate wins, never worse than the initialization.
    const TraceEntry* best = nullptr;
    for (const auto& entry : result.trace)
        if (!best || entry.objective > best->objective) best = &entry;
    if (!best) throw NumericalError("match_fiber produced no evaluations");
    result.lens = best->lens;
    result.record = evaluate_design(result.lens, ctx);
    return result;
}

std::vector<SweepRecord> tolerance_offset(const AsphericLens& lens,
                                          std::span<const double> offsets,
                                          const SimContext& ctx) {
    if (std::find(offsets.begin(), offsets.end(), 0.0) == offsets.end())
        throw ValidationError("tolerance_offset grid must include 0");
    return parallel_map<SweepRecord>(
        static_cast<int>(offsets.size()), ctx.workers, [&](int i) {
            AsphericLens shifted = lens;
            shifted.offset_x = offsets[i];
            return evaluate_design(shifted, ctx);
        });
}

std::vector<HeightToleranceEntry> tolerance_height(const AsphericLens& lens,
                                                   std::span<const double> dh_grid,
                                                   const SimContext& ctx) {
    if (lens.conic != 0.0)
        throw ValidationError("tolerance_height is defined for the k = 0 family");
    if (std::find(dh_grid.begin(), dh_grid.end(), 0.0) == dh_grid.end())
        throw ValidationError("tolerance_height grid must include 0");
    return parallel_map<HeightToleranceEntry>(
        static_cast<int>(dh_grid.size()), ctx.workers, [&](int i) {
            HeightToleranceEntry entry;
            entry.dh = dh_grid[i];
            try {
                const AsphericLens perturbed = k4_from_height_error(lens, dh_grid[i]);
                entry.record = evaluate_design(perturbed, ctx);
                entry.record->dh = dh_grid[i];
            } catch (const ValidationError& err) {
                entry.error = err.what();
            }
            return entry;
        });
}

}  // namespace mlens
