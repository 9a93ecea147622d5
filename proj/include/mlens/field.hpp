#pragma once

#include <complex>
#include <vector>

#include "mlens/fft.hpp"
#include "mlens/lens.hpp"

namespace mlens {

/// Sampled complex scalar field on a uniform square grid.
/// Cell centers sit at x_i = (i - n/2) * pitch; index n/2 is the grid center.
/// Nyquist: pitch <= lambda/2 so the whole propagating cone (NA <= 1) is representable.
struct ComplexFieldGrid {
    int n = 0;
    double pitch = 0.0;       ///< um
    double wavelength = 0.0;  ///< um
    double origin_x = 0.0;    ///< physical coordinate of the grid center (um)
    double origin_y = 0.0;
    fft::cvec samples;        ///< row-major n*n

    double coord(int i) const { return (i - n / 2) * pitch; }
    std::complex<double>& at(int i, int j) { return samples[static_cast<std::size_t>(i) * n + j]; }
    const std::complex<double>& at(int i, int j) const {
        return samples[static_cast<std::size_t>(i) * n + j];
    }
    /// Total power sum |E|^2 pitch^2.
    double power() const;
};

/// Gaussian stand-in for the pillar's fundamental mode.
struct SourceSpec {
    double mfd = 1.5;         ///< mode field diameter (1/e^2 intensity), um
    double wavelength = 1.3;  ///< um
    double pillar_d = 1.9;    ///< pillar diameter, metadata only
};

/// Far-field intensity over direction cosines, on an odd-sized square grid
/// centered at NA = 0 with spacing dna; zero outside the unit NA disc.
/// sum(intensity) * dna^2 equals the propagating source-plane power.
struct FarFieldMap {
    int size = 0;              ///< odd; index size/2 is NA = 0
    double dna = 0.0;          ///< angular pitch
    double wavelength = 0.0;   ///< um
    double total_power = 0.0;  ///< propagating power inside the unit disc
    double evanescent_loss = 0.0;  ///< power beyond NA = 1, zeroed (never renormalized)
    std::vector<double> intensity;  ///< row-major size*size, >= 0

    double na(int i) const { return (i - size / 2) * dna; }
    double at(int i, int j) const { return intensity[static_cast<std::size_t>(i) * size + j]; }
};

void validate_grid(int n, double pitch, double wavelength);

/// Unit-peak flat-phase Gaussian E = exp(-(x^2+y^2)/w0^2), w0 = mfd/2,
/// centered on the grid. Requires grid extent >= 4*mfd.
ComplexFieldGrid gaussian_source(const SourceSpec& spec, int n, double pitch);

/// Thin-element mask for the whole lens: E' = E * exp(i k0 (n-1) h(x,y)).
/// Pointwise unit modulus, power conserved exactly.
ComplexFieldGrid apply_thin_lens(const ComplexFieldGrid& field, const AsphericLens& lens);

/// Angular-spectrum free-space transfer over z >= 0. Evanescent components
/// (lambda^2 f^2 > 1) are zeroed, never renormalized.
ComplexFieldGrid propagate_asm(const ComplexFieldGrid& field, double z);

/// Thick-lens traversal: symmetric split-step through the lens volume with
/// per-slab glass-chord phase masks and free-space steps between them.
/// max_slice is the slab thickness bound; one slab reduces to a single mask
/// at the lens mid-plane.
ComplexFieldGrid traverse_lens(const ComplexFieldGrid& field, const AsphericLens& lens,
                               double max_slice = 0.25);

/// |FFT|^2 of the field mapped to direction cosines NA = lambda*f, zero-padded
/// by pad_factor in {1,2,4,8} for angular resolution dna = lambda/(n*pad*pitch),
/// cropped to the unit NA square and clipped to the unit disc.
FarFieldMap far_field(const ComplexFieldGrid& field, int pad_factor);

}  // namespace mlens
