#pragma once

#include <string>

#include "mlens/field.hpp"
#include "mlens/stats.hpp"

namespace mlens {

/// Target single-mode fibre. mfd and na are kept independent: vendor numbers
/// for real fibres need not satisfy the Gaussian mfd<->na relation, and this
/// artifact never silently reconciles them.
struct FiberSpec {
    double mfd = 9.2;         ///< mode field diameter, um
    double na = 0.14;         ///< 1/e^2 numerical aperture
    double wavelength = 1.3;  ///< um
    std::string name = "smf28";
};

FiberSpec smf28();

/// NA-based mode-matching efficiency 4 a^2 b^2 / (a^2 + b^2)^2.
double eta_na(double na_p, double na_f);

/// Gaussian beam relation NA = 2*lambda / (pi * w), and its inverse.
double na_from_mfd(double mfd, double wavelength);
double mfd_from_na(double na, double wavelength);

/// NA implied by the fibre's own mfd through the Gaussian relation; reported
/// so users can see how far the vendor (mfd, na) pair is from self-consistent.
double fiber_na_consistency(const FiberSpec& fiber);

/// |<a,b>|^2 / (|a|^2 |b|^2) on identical grids; <= 1 by Cauchy-Schwarz.
double overlap_efficiency(const ComplexFieldGrid& a, const ComplexFieldGrid& b);

struct CouplingReport {
    double eta_na = 0.0;       ///< from the far-field NA and the fibre NA
    double eta_overlap = 0.0;  ///< butt-coupling overlap with the fibre Gaussian
    double consistency_gap = 0.0;
    bool shortcut_valid = false;  ///< NA formula applicable: Gaussian far field and mfd matched
    FiberSpec fiber;
    ModeStats stats;
};

/// Full coupling report for a device emission: NA-formula efficiency from the
/// far field, overlap-integral efficiency against a flat-phase fibre Gaussian
/// at the near-field monitor plane, and the gap between the two.
CouplingReport smf_coupling(const FarFieldMap& farfield, const ComplexFieldGrid& nearfield,
                            const FiberSpec& fiber, const AnalysisConfig& cfg = {});

}  // namespace mlens
