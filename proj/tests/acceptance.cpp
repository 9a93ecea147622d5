// Acceptance suite: one test case per criterion, each printing a single
// PASS/FAIL line with the measured numbers. Some criteria encode idealized
// paraxial-Gaussian expectations that the exact scalar model cannot meet;
// those run exactly as stated, fail honestly, and print the measured gap
// (see README, "Model envelope and expected acceptance results").

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "mlens/coupling.hpp"
#include "mlens/csvio.hpp"
#include "mlens/optimize.hpp"
#include "mlens/parallel.hpp"

using namespace mlens;
namespace fs = std::filesystem;

namespace {

SimContext default_ctx() {
    SimContext ctx;  // N=512, pitch 0.1, pad 4, slice 0.25, smf28, mfd 1.5
    ctx.workers = default_workers();
    return ctx;
}

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(const char* id, bool pass, const std::string& detail) {
    std::printf("[%s] %s %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

const MatchResult& shared_match() {
    static const MatchResult result = match_fiber(default_ctx(), MatchConfig{});
    return result;
}

int count_interior_maxima(const std::vector<double>& v, double min_prominence) {
    const int n = static_cast<int>(v.size());
    int count = 0;
    for (int i = 1; i + 1 < n; ++i) {
        if (!(v[i] > v[i - 1] && v[i] > v[i + 1])) continue;
        double left_min = v[i], right_min = v[i];
        for (int j = i - 1; j >= 0 && v[j] < v[i]; --j) left_min = std::min(left_min, v[j]);
        for (int j = i + 1; j < n && v[j] < v[i]; ++j) right_min = std::min(right_min, v[j]);
        if (v[i] - std::max(left_min, right_min) > min_prominence) ++count;
    }
    return count;
}

/// Largest |x| such that eta >= level holds on [0, |x|], by linear
/// interpolation along one side of a symmetric scan.
double plateau_half_width(const std::vector<double>& xs, const std::vector<double>& etas,
                          double level) {
    const int n = static_cast<int>(xs.size());
    const int c = n / 2;
    if (etas[c] < level) return 0.0;
    double left = std::abs(xs.front()), right = std::abs(xs.back());
    for (int i = c; i + 1 < n; ++i)
        if (etas[i + 1] < level) {
            right = xs[i] + (etas[i] - level) / (etas[i] - etas[i + 1]) * (xs[i + 1] - xs[i]);
            break;
        }
    for (int i = c; i - 1 >= 0; --i)
        if (etas[i - 1] < level) {
            left = -(xs[i] - (etas[i] - level) / (etas[i] - etas[i - 1]) * (xs[i] - xs[i - 1]));
            break;
        }
    return std::min(std::abs(left), std::abs(right));
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return out;
}

std::string csv_bytes(const std::vector<SweepRecord>& records) {
    const fs::path p = fs::temp_directory_path() / "mlens_ac9_probe.csv";
    io::export_records(records, p);
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("AC-1 Gaussian-overlap / NA-formula equivalence") {
    Stopwatch timer;
    auto make_ff = [](double na) {
        ComplexFieldGrid f;
        f.n = 512;
        f.pitch = 0.00625;
        f.wavelength = 1.3;
        f.samples.resize(512 * 512);
        for (int i = 0; i < 512; ++i)
            for (int j = 0; j < 512; ++j) {
                const double rho2 = f.coord(i) * f.coord(i) + f.coord(j) * f.coord(j);
                f.at(i, j) = std::exp(-rho2 / (na * na));
            }
        return f;
    };
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> dist(0.05, 0.7);
    double max_err = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double p = dist(rng), q = dist(rng);
        const double ov = overlap_efficiency(make_ff(p), make_ff(q));
        max_err = std::max(max_err, std::abs(ov - eta_na(p, q)));
    }
    const double dt = timer.seconds();
    const bool pass = max_err <= 1e-4 && dt < 10.0;
    report("AC-1", pass,
           "overlap vs NA formula, 20 random pairs: max |diff| = " + fmt("%.2e", max_err) +
               " (tol 1e-4), " + fmt("%.1f s", dt));
    CHECK(max_err <= 1e-4);
    CHECK(dt < 10.0);
}

TEST_CASE("AC-2 propagation oracle: paraxial w(z) and Parseval") {
    Stopwatch timer;
    const double w0 = 1.0, lambda = 1.3;
    const double zr = std::numbers::pi * w0 * w0 / lambda;
    SourceSpec spec;
    spec.mfd = 2.0 * w0;
    spec.wavelength = lambda;
    const auto field = gaussian_source(spec, 512, 0.1);
    const double p_prop = propagate_asm(field, 0.0).power();

    double max_width_err = 0.0, max_parseval_err = 0.0;
    for (double fz : {0.5, 1.0, 2.0, 4.0}) {
        const auto prop = propagate_asm(field, fz * zr);
        const double measured = mfd_d4sigma(prop) / 2.0;
        const double paraxial = w0 * std::sqrt(1.0 + fz * fz);
        max_width_err = std::max(max_width_err, std::abs(measured - paraxial) / paraxial);
        max_parseval_err =
            std::max(max_parseval_err, std::abs(prop.power() - p_prop) / p_prop);
    }
    const double dt = timer.seconds();
    const bool width_ok = max_width_err <= 0.005;
    const bool parseval_ok = max_parseval_err <= 1e-9;
    report("AC-2", width_ok && parseval_ok && dt < 10.0,
           "width vs paraxial w(z): max rel err = " + fmt("%.1f%%", 100.0 * max_width_err) +
               " (tol 0.5%; exact transfer is nonparaxial at NA 0.41, see README); Parseval = " +
               fmt("%.1e", max_parseval_err) + " (tol 1e-9), " + fmt("%.1f s", dt));
    CHECK(max_width_err <= 0.005);
    CHECK(max_parseval_err <= 1e-9);
    CHECK(dt < 10.0);
}

TEST_CASE("AC-3 encircled-energy analytics at NA 0.14") {
    Stopwatch timer;
    auto ctx = default_ctx();
    SourceSpec spec;
    spec.mfd = mfd_from_na(0.14, 1.3);
    spec.wavelength = 1.3;
    const auto field = gaussian_source(spec, ctx.grid.n, ctx.grid.pitch);
    const auto map = far_field(field, ctx.grid.pad_factor);
    const double eta = encircled_fraction(map, 0.14);
    const double expected = 1.0 - std::exp(-2.0);
    const double err = std::abs(eta - expected) / expected;
    const double dt = timer.seconds();
    const bool pass = err <= 0.01 && dt < 5.0;
    report("AC-3", pass,
           "eta(0.14) = " + fmt("%.4f", eta) + " vs 0.8647 analytic: rel err = " +
               fmt("%.2e", err) + " (tol 1%), " + fmt("%.1f s", dt));
    CHECK(err <= 0.01);
    CHECK(dt < 5.0);
}

TEST_CASE("AC-4 scaling law: log-log exponent of the optimal-k4 family") {
    Stopwatch timer;
    const auto ctx = default_ctx();
    const auto scan = family_scan(linspace(1.2, 3.0, 8), ctx, true);
    const double dt = timer.seconds();
    const bool pass = std::abs(scan.fit.exponent + 3.0) <= 0.3 && dt < 600.0;
    report("AC-4", pass,
           "family over R in [1.2, 3.0], 8 points: exponent = " + fmt("%.3f", scan.fit.exponent) +
               " +/- " + fmt("%.3f", scan.fit.exponent_halfwidth) + " (required -3.0 +/- 0.3), k4(R0=" +
               fmt("%.1f", scan.fit.r0) + ") = " + fmt("%.4f", scan.fit.k4_at_r0) + ", " +
               fmt("%.0f s", dt));
    CHECK(std::abs(scan.fit.exponent + 3.0) <= 0.3);
    CHECK(dt < 600.0);
}

TEST_CASE("AC-5 fibre matching against smf28") {
    Stopwatch timer;
    const auto& match = shared_match();
    const auto bare = evaluate_bare(default_ctx());
    const double dt = timer.seconds();
    const double overlap = match.record.coupling.eta_overlap;
    const bool overlap_ok = overlap >= 0.99;
    const bool bare_ok = bare.coupling.eta_na <= 0.25;
    report("AC-5", overlap_ok && bare_ok && dt < 900.0,
           "match_fiber: R = " + fmt("%.3f", match.lens.radius) + ", k4 = " +
               fmt("%.3g", match.lens.quartic) + ", eta_overlap = " + fmt("%.4f", overlap) +
               " (required >= 0.99; scalar thin-element ceiling, see README); bare eta_na = " +
               fmt("%.4f", bare.coupling.eta_na) + " (required <= 0.25), " + fmt("%.0f s", dt));
    CHECK(overlap >= 0.99);
    CHECK(bare.coupling.eta_na <= 0.25);
    CHECK(dt < 900.0);
}

TEST_CASE("AC-6 k4 sweep shape at R = 1.2") {
    Stopwatch timer;
    const auto ctx = default_ctx();
    const auto records = sweep_k4(1.2, 0.0, linspace(0.0, 1.5, 31), ctx);
    const auto bare = evaluate_bare(ctx);

    std::vector<double> eta(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) eta[i] = records[i].stats.power_in_na014;
    const int n_max = count_interior_maxima(eta, 1e-3);
    int arg = 0;
    for (std::size_t i = 0; i < eta.size(); ++i)
        if (eta[i] > eta[static_cast<std::size_t>(arg)]) arg = static_cast<int>(i);

    int first_bimodal = -1;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].stats.bimodal) {
            first_bimodal = static_cast<int>(i);
            break;
        }
    const bool interior = arg > 0 && arg + 1 < static_cast<int>(eta.size());
    const bool declines = eta.back() < eta[static_cast<std::size_t>(arg)] &&
                          eta.back() < bare.stats.power_in_na014;
    const bool bimodal_after = first_bimodal > arg;
    const double dt = timer.seconds();
    const bool pass = n_max == 1 && interior && declines && bimodal_after && dt < 300.0;
    report("AC-6", pass,
           "eta014 over k4 in [0, 1.5]: " + std::to_string(n_max) +
               " interior maximum(s), peak at k4 = " + fmt("%.3f", 1.5 * arg / 30.0) +
               ", tail = " + fmt("%.4f", eta.back()) + " < bare " +
               fmt("%.4f", bare.stats.power_in_na014) + ", bimodal from k4 = " +
               fmt("%.3f", first_bimodal >= 0 ? 1.5 * first_bimodal / 30.0 : -1.0) + ", " +
               fmt("%.0f s", dt));
    CHECK(n_max == 1);
    CHECK(interior);
    CHECK(declines);
    CHECK(bimodal_after);
    CHECK(dt < 300.0);
}

TEST_CASE("AC-7 conic optimality at R = 1.6") {
    Stopwatch timer;
    const auto ctx = default_ctx();
    const std::vector<double> ks{0.0, -0.5, -1.0, -1.5};
    const auto results = sweep_k(1.6, ks, ctx);
    int arg = 0;
    std::string detail = "per-k optimal eta014:";
    for (std::size_t i = 0; i < results.size(); ++i) {
        detail += " k=" + fmt("%.1f", results[i].first) + " -> " +
                  fmt("%.4f", results[i].second.record.stats.power_in_na014);
        if (results[i].second.record.stats.power_in_na014 >
            results[static_cast<std::size_t>(arg)].second.record.stats.power_in_na014)
            arg = static_cast<int>(i);
    }
    const double dt = timer.seconds();
    const bool pass = results[static_cast<std::size_t>(arg)].first == 0.0 && dt < 600.0;
    report("AC-7", pass, detail + "; best at k = " + fmt("%.1f", results[static_cast<std::size_t>(arg)].first) +
                             ", " + fmt("%.0f s", dt));
    CHECK(results[static_cast<std::size_t>(arg)].first == 0.0);
    CHECK(dt < 600.0);
}

TEST_CASE("AC-8 tolerance plateaus of the matched design") {
    Stopwatch timer;
    const auto ctx = default_ctx();
    const auto& match = shared_match();

    const auto offsets = linspace(-0.8, 0.8, 17);
    const auto off_records = tolerance_offset(match.lens, offsets, ctx);
    std::vector<double> off_eta(off_records.size());
    for (std::size_t i = 0; i < off_records.size(); ++i)
        off_eta[i] = off_records[i].coupling.eta_overlap;

    const auto dhs = linspace(-1.5, 1.5, 13);
    const auto h_entries = tolerance_height(match.lens, dhs, ctx);
    std::vector<double> h_eta;
    std::vector<double> h_x;
    for (const auto& entry : h_entries)
        if (entry.record) {
            h_x.push_back(entry.dh);
            h_eta.push_back(entry.record->coupling.eta_overlap);
        }

    const double off_width = plateau_half_width(offsets, off_eta, 0.9);
    const double h_width = plateau_half_width(h_x, h_eta, 0.9);
    double off_asym = 0.0, h_asym = 0.0;
    for (std::size_t i = 0; i < off_eta.size() / 2; ++i)
        off_asym = std::max(off_asym, std::abs(off_eta[i] - off_eta[off_eta.size() - 1 - i]));
    for (std::size_t i = 0; i < h_eta.size() / 2; ++i)
        h_asym = std::max(h_asym, std::abs(h_eta[i] - h_eta[h_eta.size() - 1 - i]));

    // Recorded diagnostics: retention relative to the design's own peak.
    const double peak = off_eta[off_eta.size() / 2];
    std::vector<double> off_rel = off_eta, h_rel = h_eta;
    for (auto& v : off_rel) v /= peak;
    for (auto& v : h_rel) v /= peak;
    const double off_width_rel = plateau_half_width(offsets, off_rel, 0.9);
    const double h_width_rel = plateau_half_width(h_x, h_rel, 0.9);

    const bool off_ok = off_width >= 0.2 && off_width <= 0.8;
    const bool h_ok = h_width >= 0.5 && h_width <= 2.0;
    const bool sym_ok = off_asym <= 1e-3 && h_asym <= 1e-3;
    const double dt = timer.seconds();
    report("AC-8", off_ok && h_ok && sym_ok && dt < 600.0,
           "eta_overlap >= 0.9 half-widths: offset " + fmt("%.3f", off_width) +
               " um (required 0.2-0.8), height " + fmt("%.3f", h_width) +
               " um (required 0.5-2.0); peak-relative retention widths " +
               fmt("%.3f", off_width_rel) + " / " + fmt("%.3f um", h_width_rel) +
               " (recorded); symmetry offset " + fmt("%.1e", off_asym) + ", height " +
               fmt("%.1e", h_asym) + " (tol 1e-3), " + fmt("%.0f s", dt));
    CHECK(off_width >= 0.2);
    CHECK(off_width <= 0.8);
    CHECK(h_width >= 0.5);
    CHECK(h_width <= 2.0);
    CHECK(off_asym <= 1e-3);
    CHECK(h_asym <= 1e-3);
    CHECK(dt < 600.0);
}

TEST_CASE("AC-9 determinism across worker counts") {
    Stopwatch timer;
    auto ctx1 = default_ctx();
    ctx1.workers = 1;
    auto ctx4 = default_ctx();
    ctx4.workers = 4;

    const auto grid = linspace(0.0, 1.2, 11);
    const std::string sweep_1 = csv_bytes(sweep_k4(1.2, 0.0, grid, ctx1));
    const std::string sweep_4 = csv_bytes(sweep_k4(1.2, 0.0, grid, ctx4));
    const std::string sweep_1b = csv_bytes(sweep_k4(1.2, 0.0, grid, ctx1));

    AsphericLens lens;
    lens.radius = 2.0;
    lens.quartic = 0.074;
    const auto offsets = linspace(-0.4, 0.4, 9);
    const std::string tol_1 = csv_bytes(tolerance_offset(lens, offsets, ctx1));
    const std::string tol_4 = csv_bytes(tolerance_offset(lens, offsets, ctx4));

    const auto radii = linspace(1.4, 2.6, 4);
    const std::string fam_1 = csv_bytes(family_scan(radii, ctx1, true).records);
    const std::string fam_4 = csv_bytes(family_scan(radii, ctx4, true).records);

    const bool pass = sweep_1 == sweep_4 && sweep_1 == sweep_1b && tol_1 == tol_4 && fam_1 == fam_4;
    const double dt = timer.seconds();
    report("AC-9", pass && dt < 600.0,
           std::string("CSV outputs byte-identical for 1 vs 4 workers and across re-runs: ") +
               (pass ? "yes" : "NO") + ", " + fmt("%.0f s", dt));
    CHECK(sweep_1 == sweep_4);
    CHECK(sweep_1 == sweep_1b);
    CHECK(tol_1 == tol_4);
    CHECK(fam_1 == fam_4);
    CHECK(dt < 600.0);
}
