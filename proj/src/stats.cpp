#include "mlens/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mlens/errors.hpp"

namespace mlens {

namespace {

struct Moments {
    double power = 0.0;
    double cx = 0.0, cy = 0.0;
    double r2 = 0.0;  ///< second central moment
};

template <class GetI, class GetX>
Moments central_moments(int n, GetI inten, GetX coord) {
    Moments m;
    double sx = 0.0, sy = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double w = inten(i, j);
            m.power += w;
            sx += w * coord(i);
            sy += w * coord(j);
        }
    if (m.power <= 0.0) throw NumericalError("degenerate field: total power is zero");
    m.cx = sx / m.power;
    m.cy = sy / m.power;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dx = coord(i) - m.cx;
        for (int j = 0; j < n; ++j) {
            const double dy = coord(j) - m.cy;
            acc += inten(i, j) * (dx * dx + dy * dy);
        }
    }
    m.r2 = acc / m.power;
    return m;
}

/// Azimuthal average of map intensity about (cx, cy), bin width = dna.
std::vector<double> radial_profile(const FarFieldMap& map, double cx, double cy) {
    const int nbins = map.size;  // generous upper bound
    std::vector<double> sum(nbins, 0.0);
    std::vector<int> count(nbins, 0);
    for (int i = 0; i < map.size; ++i) {
        const double dx = map.na(i) - cx;
        for (int j = 0; j < map.size; ++j) {
            const double dy = map.na(j) - cy;
            const int b = std::min(static_cast<int>(std::hypot(dx, dy) / map.dna), nbins - 1);
            sum[b] += map.at(i, j);
            ++count[b];
        }
    }
    for (int b = 0; b < nbins; ++b)
        if (count[b] > 0) sum[b] /= count[b];
    return sum;
}

}  // namespace

double mfd_d4sigma(const ComplexFieldGrid& field) {
    const auto m = central_moments(
        field.n, [&](int i, int j) { return std::norm(field.at(i, j)); },
        [&](int i) { return field.coord(i); });
    return 2.0 * std::sqrt(2.0 * m.r2);
}

double mfd_contour_1e2(const ComplexFieldGrid& field) {
    const auto m = central_moments(
        field.n, [&](int i, int j) { return std::norm(field.at(i, j)); },
        [&](int i) { return field.coord(i); });
    const double dr = field.pitch / 2.0;
    const int nbins = field.n;
    std::vector<double> sum(nbins, 0.0);
    std::vector<int> count(nbins, 0);
    for (int i = 0; i < field.n; ++i) {
        const double dx = field.coord(i) - m.cx;
        for (int j = 0; j < field.n; ++j) {
            const double dy = field.coord(j) - m.cy;
            const int b = std::min(static_cast<int>(std::hypot(dx, dy) / dr), nbins - 1);
            sum[b] += std::norm(field.at(i, j));
            ++count[b];
        }
    }
    for (int b = 0; b < nbins; ++b)
        if (count[b] > 0) sum[b] /= count[b];
    double peak = 0.0;
    for (int b = 0; b < nbins; ++b) peak = std::max(peak, sum[b]);
    const double target = peak * std::exp(-2.0);
    int last = -1;
    for (int b = 0; b < nbins; ++b)
        if (sum[b] > target) last = b;
    if (last < 0 || last + 1 >= nbins) throw NumericalError("1/e^2 contour not bracketed");
    const double frac = (sum[last] - target) / (sum[last] - sum[last + 1]);
    return 2.0 * ((last + 0.5) + frac) * dr;
}

double na_1e2(const FarFieldMap& map) {
    const auto m = central_moments(
        map.size, [&](int i, int j) { return map.at(i, j); }, [&](int i) { return map.na(i); });
    return std::sqrt(2.0 * m.r2);
}

double encircled_fraction(const FarFieldMap& map, double na_cut) {
    if (!(na_cut > 0.0) || na_cut > 1.0)
        throw ValidationError("encircled_fraction cut must lie in (0, 1]");
    double inside = 0.0, total = 0.0;
    for (int i = 0; i < map.size; ++i) {
        const double nax = map.na(i);
        for (int j = 0; j < map.size; ++j) {
            const double rho = std::hypot(nax, map.na(j));
            const double v = map.at(i, j);
            total += v;
            // Linear ramp over one cell across the boundary circle.
            const double w = std::clamp((na_cut - rho) / map.dna + 0.5, 0.0, 1.0);
            inside += v * w;
        }
    }
    if (total <= 0.0) throw NumericalError("degenerate far-field map: zero power");
    return inside / total;
}

GaussianityResult gaussianity(const FarFieldMap& map, const AnalysisConfig& cfg) {
    const auto m = central_moments(
        map.size, [&](int i, int j) { return map.at(i, j); }, [&](int i) { return map.na(i); });
    const double s0 = std::sqrt(2.0 * m.r2);  // moment-fit 1/e amplitude radius

    // Amplitude overlap of sqrt(I) with G(rho) = exp(-rho^2/s^2); one
    // refinement pass over the width around the moment fit.
    double sum_i = 0.0;
    for (int i = 0; i < map.size; ++i)
        for (int j = 0; j < map.size; ++j) sum_i += map.at(i, j);

    double best = 0.0;
    for (int step = 0; step < 25; ++step) {
        const double s = s0 * (0.7 + 0.6 * step / 24.0);
        double cross = 0.0, gg = 0.0;
        for (int i = 0; i < map.size; ++i) {
            const double dx = map.na(i) - m.cx;
            for (int j = 0; j < map.size; ++j) {
                const double dy = map.na(j) - m.cy;
                const double g = std::exp(-(dx * dx + dy * dy) / (s * s));
                cross += std::sqrt(map.at(i, j)) * g;
                gg += g * g;
            }
        }
        best = std::max(best, cross * cross / (sum_i * gg));
    }

    const auto profile = radial_profile(map, m.cx, m.cy);
    int argmax = 0;
    for (int b = 1; b < static_cast<int>(profile.size()); ++b)
        if (profile[b] > profile[argmax]) argmax = b;
    const bool off_axis = argmax > 2;

    GaussianityResult res;
    res.score = std::min(best, 1.0);
    res.bimodal = (res.score < cfg.gaussianity_threshold) || off_axis;
    return res;
}

ModeStats mode_stats(const ComplexFieldGrid& nearfield, const FarFieldMap& farfield,
                     const AnalysisConfig& cfg) {
    ModeStats s;
    s.mfd = mfd_d4sigma(nearfield);
    s.na = na_1e2(farfield);
    const auto g = gaussianity(farfield, cfg);
    s.gaussianity = g.score;
    s.bimodal = g.bimodal;
    s.power_in_na014 = encircled_fraction(farfield, cfg.na_cut);
    return s;
}

}  // namespace mlens
