#include "mlens/coupling.hpp"

#include <cmath>
#include <numbers>

#include "mlens/errors.hpp"

namespace mlens {

FiberSpec smf28() { return FiberSpec{}; }

double eta_na(double na_p, double na_f) {
    if (!(na_p > 0.0) || !(na_f > 0.0))
        throw std::domain_error("eta_na requires positive numerical apertures");
    const double a2 = na_p * na_p, b2 = na_f * na_f;
    const double s = a2 + b2;
    return 4.0 * a2 * b2 / (s * s);
}

double na_from_mfd(double mfd, double wavelength) {
    if (!(mfd > 0.0) || !(wavelength > 0.0))
        throw std::domain_error("na_from_mfd requires positive arguments");
    return 2.0 * wavelength / (std::numbers::pi * mfd);
}

double mfd_from_na(double na, double wavelength) {
    if (!(na > 0.0) || !(wavelength > 0.0))
        throw std::domain_error("mfd_from_na requires positive arguments");
    return 2.0 * wavelength / (std::numbers::pi * na);
}

double fiber_na_consistency(const FiberSpec& fiber) {
    return na_from_mfd(fiber.mfd, fiber.wavelength);
}

double overlap_efficiency(const ComplexFieldGrid& a, const ComplexFieldGrid& b) {
    if (a.n != b.n || a.pitch != b.pitch)
        throw ValidationError("overlap_efficiency requires identical grid geometry");
    std::complex<double> cross(0.0, 0.0);
    double pa = 0.0, pb = 0.0;
    const std::size_t total = a.samples.size();
    for (std::size_t idx = 0; idx < total; ++idx) {
        cross += a.samples[idx] * std::conj(b.samples[idx]);
        pa += std::norm(a.samples[idx]);
        pb += std::norm(b.samples[idx]);
    }
    if (pa <= 0.0 || pb <= 0.0) throw NumericalError("overlap of a zero-power field");
    return std::norm(cross) / (pa * pb);  // pitch^2 factors cancel
}

CouplingReport smf_coupling(const FarFieldMap& farfield, const ComplexFieldGrid& nearfield,
                            const FiberSpec& fiber, const AnalysisConfig& cfg) {
    CouplingReport report;
    report.fiber = fiber;
    report.stats = mode_stats(nearfield, farfield, cfg);

    report.eta_na = eta_na(report.stats.na, fiber.na);

    SourceSpec fiber_mode;
    fiber_mode.mfd = fiber.mfd;
    fiber_mode.wavelength = nearfield.wavelength;
    const ComplexFieldGrid fiber_field = gaussian_source(fiber_mode, nearfield.n, nearfield.pitch);
    report.eta_overlap = overlap_efficiency(nearfield, fiber_field);

    report.consistency_gap = std::abs(report.eta_na - report.eta_overlap);
    const double mfd_mismatch = std::abs(report.stats.mfd - fiber.mfd) / fiber.mfd;
    report.shortcut_valid = !report.stats.bimodal &&
                            report.stats.gaussianity >= cfg.gaussianity_threshold &&
                            mfd_mismatch <= 0.05;
    return report;
}

}  // namespace mlens
