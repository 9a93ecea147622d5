#pragma once

#include "mlens/field.hpp"

namespace mlens {

/// Summary statistics of a simulated emission mode.
struct ModeStats {
    double mfd = 0.0;             ///< near-field D4-sigma diameter, um
    double na = 0.0;              ///< far-field 1/e^2 NA (D4-sigma in NA space)
    double gaussianity = 0.0;     ///< far-field overlap with its best-fit Gaussian, [0,1]
    bool bimodal = false;         ///< non-Gaussian / off-axis-peaked far field
    double power_in_na014 = 0.0;  ///< encircled fraction inside NA = 0.14
};

struct AnalysisConfig {
    double gaussianity_threshold = 0.95;  ///< bimodal when the score drops below this
    double na_cut = 0.14;                 ///< fibre-acceptance cone for power_in_na014
};

/// D4-sigma width 2*sqrt(2<r^2>) about the intensity centroid; equals the
/// 1/e^2 intensity diameter for a Gaussian. Throws NumericalError on zero power.
double mfd_d4sigma(const ComplexFieldGrid& field);

/// Diagnostic cross-check: outermost 1/e^2 crossing of the azimuthally
/// averaged intensity profile about the centroid.
double mfd_contour_1e2(const ComplexFieldGrid& field);

/// sqrt(2<rho^2>) about the centroid in NA space.
double na_1e2(const FarFieldMap& map);

/// Fraction of far-field power inside rho <= na_cut, with linear partial-cell
/// weighting across the boundary circle. Monotone non-decreasing in na_cut.
double encircled_fraction(const FarFieldMap& map, double na_cut);

struct GaussianityResult {
    double score = 0.0;
    bool bimodal = false;
};

/// Overlap of sqrt(intensity) with a centered best-fit Gaussian (moment fit
/// plus one width-refinement pass). Bimodal when the score falls below the
/// threshold or the radial profile peaks off axis.
GaussianityResult gaussianity(const FarFieldMap& map, const AnalysisConfig& cfg = {});

ModeStats mode_stats(const ComplexFieldGrid& nearfield, const FarFieldMap& farfield,
                     const AnalysisConfig& cfg = {});

}  // namespace mlens
