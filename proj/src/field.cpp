#include "mlens/field.hpp"

#include <cmath>
#include <numbers>

#include "mlens/errors.hpp"

namespace mlens {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// FFT-layout spatial frequency for bin i of an n-point grid (cycles/um).
inline double fft_freq(int i, int n, double pitch) {
    const int k = (i < n - n / 2) ? i : i - n;
    return k / (n * pitch);
}

/// Precomputed ASM transfer for one (grid, z) pair; reusable across steps.
class AsmTransfer {
public:
    AsmTransfer(int n, double pitch, double wavelength, double z) : n_(n), factor_(n) {
        const double lam2 = wavelength * wavelength;
        for (int i = 0; i < n; ++i) {
            const double f = fft_freq(i, n, pitch);
            factor_[i] = lam2 * f * f;
        }
        phase_scale_ = kTwoPi * z / wavelength;
    }

    /// Multiply an FFT-layout spectrum in place; zero the evanescent part.
    void apply(fft::cvec& spec) const {
        for (int i = 0; i < n_; ++i) {
            auto* row = spec.data() + static_cast<std::size_t>(i) * n_;
            const double fi = factor_[i];
            for (int j = 0; j < n_; ++j) {
                const double arg = 1.0 - fi - factor_[j];
                if (arg > 0.0)
                    row[j] *= std::polar(1.0, phase_scale_ * std::sqrt(arg));
                else
                    row[j] = 0.0;
            }
        }
    }

private:
    int n_;
    std::vector<double> factor_;  ///< (lambda * f_i)^2 per axis
    double phase_scale_;
};

ComplexFieldGrid propagate_with(const ComplexFieldGrid& field, const AsmTransfer& transfer) {
    ComplexFieldGrid out = field;
    fft::forward2d(out.samples, out.n);
    transfer.apply(out.samples);
    fft::backward2d(out.samples, out.n);
    const double norm = 1.0 / (static_cast<double>(out.n) * out.n);
    for (auto& v : out.samples) v *= norm;
    return out;
}

void propagate_in_place(ComplexFieldGrid& field, const AsmTransfer& transfer) {
    fft::forward2d(field.samples, field.n);
    transfer.apply(field.samples);
    fft::backward2d(field.samples, field.n);
    const double norm = 1.0 / (static_cast<double>(field.n) * field.n);
    for (auto& v : field.samples) v *= norm;
}

}  // namespace

double ComplexFieldGrid::power() const {
    double acc = 0.0;
    for (const auto& v : samples) acc += std::norm(v);
    return acc * pitch * pitch;
}

void validate_grid(int n, double pitch, double wavelength) {
    if (n < 64 || n % 2 != 0)
        throw ValidationError("grid size must be even and >= 64 (got " + std::to_string(n) + ")");
    if (!(pitch > 0.0)) throw ValidationError("grid pitch must be > 0");
    if (!(wavelength > 0.0)) throw ValidationError("wavelength must be > 0");
    if (pitch > wavelength / 2.0)
        throw ValidationError("grid pitch violates the Nyquist bound pitch <= lambda/2");
}

ComplexFieldGrid gaussian_source(const SourceSpec& spec, int n, double pitch) {
    if (!(spec.mfd > 0.0)) throw ValidationError("source mfd must be > 0");
    validate_grid(n, pitch, spec.wavelength);
    if (n * pitch < 4.0 * spec.mfd)
        throw GridTooSmall("grid extent smaller than 4x the source mode field diameter");

    ComplexFieldGrid field;
    field.n = n;
    field.pitch = pitch;
    field.wavelength = spec.wavelength;
    field.samples.resize(static_cast<std::size_t>(n) * n);
    const double w0 = spec.mfd / 2.0;
    const double inv_w02 = 1.0 / (w0 * w0);
    for (int i = 0; i < n; ++i) {
        const double x = field.coord(i);
        for (int j = 0; j < n; ++j) {
            const double y = field.coord(j);
            field.at(i, j) = std::exp(-(x * x + y * y) * inv_w02);
        }
    }
    return field;
}

ComplexFieldGrid apply_thin_lens(const ComplexFieldGrid& field, const AsphericLens& lens) {
    const HeightMap map = height_map(lens, field.pitch, field.n);
    ComplexFieldGrid out = field;
    const double k_glass = kTwoPi / field.wavelength * (lens.index - 1.0);
    for (int i = 0; i < field.n; ++i)
        for (int j = 0; j < field.n; ++j) {
            const double h = map.at(i, j);
            if (h > 0.0) out.at(i, j) *= std::polar(1.0, k_glass * h);
        }
    return out;
}

ComplexFieldGrid propagate_asm(const ComplexFieldGrid& field, double z) {
    if (z < 0.0) throw ValidationError("propagation distance must be >= 0");
    validate_grid(field.n, field.pitch, field.wavelength);
    // z = 0 still applies the evanescent cut (projection onto the propagating subspace).
    AsmTransfer transfer(field.n, field.pitch, field.wavelength, z);
    return propagate_with(field, transfer);
}

ComplexFieldGrid traverse_lens(const ComplexFieldGrid& field, const AsphericLens& lens,
                               double max_slice) {
    if (!(max_slice > 0.0)) throw ValidationError("slice thickness must be > 0");
    const HeightMap map = height_map(lens, field.pitch, field.n);
    const double height = map.total_height;
    if (height <= 0.0) return field;

    const int slabs = std::max(1, static_cast<int>(std::ceil(height / max_slice)));
    const double dz = height / slabs;
    const double k_glass = kTwoPi / field.wavelength * (lens.index - 1.0);
    const std::complex<double> full_slab = std::polar(1.0, k_glass * dz);

    AsmTransfer half_step(field.n, field.pitch, field.wavelength, dz / 2.0);
    AsmTransfer full_step(field.n, field.pitch, field.wavelength, dz);

    ComplexFieldGrid out = field;
    propagate_in_place(out, half_step);
    for (int s = 0; s < slabs; ++s) {
        const double z_lo = s * dz;
        for (int i = 0; i < field.n; ++i)
            for (int j = 0; j < field.n; ++j) {
                const double t = map.at(i, j) - z_lo;  // glass chord inside this slab
                if (t <= 0.0) continue;
                if (t >= dz)
                    out.at(i, j) *= full_slab;
                else
                    out.at(i, j) *= std::polar(1.0, k_glass * t);
            }
        propagate_in_place(out, s < slabs - 1 ? full_step : half_step);
    }
    return out;
}

FarFieldMap far_field(const ComplexFieldGrid& field, int pad_factor) {
    if (pad_factor != 1 && pad_factor != 2 && pad_factor != 4 && pad_factor != 8)
        throw ValidationError("pad_factor must be one of 1, 2, 4, 8");
    validate_grid(field.n, field.pitch, field.wavelength);

    const int n = field.n;
    const int m = n * pad_factor;
    fft::cvec buf(static_cast<std::size_t>(m) * m, std::complex<double>(0.0, 0.0));
    const int off = (m - n) / 2;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            buf[static_cast<std::size_t>(i + off) * m + (j + off)] = field.at(i, j);
    fft::forward2d(buf, m);

    const double lambda = field.wavelength;
    const double dna = lambda / (m * field.pitch);
    // Spectral intensity scaled so that sum * dna^2 recovers source-plane power.
    const double scale = std::pow(field.pitch, 4) / (lambda * lambda);

    const int half = std::min(static_cast<int>(std::floor(1.0 / dna)), m / 2 - 1);
    const int size = 2 * half + 1;
    FarFieldMap map;
    map.size = size;
    map.dna = dna;
    map.wavelength = lambda;
    map.intensity.assign(static_cast<std::size_t>(size) * size, 0.0);

    double in_disc = 0.0;
    for (int u = 0; u < size; ++u) {
        // FFT bin for NA index (u - half): negative bins wrap.
        const int bu = ((u - half) % m + m) % m;
        const double nax = (u - half) * dna;
        for (int v = 0; v < size; ++v) {
            const int bv = ((v - half) % m + m) % m;
            const double nay = (v - half) * dna;
            if (nax * nax + nay * nay > 1.0) continue;
            const double inten = scale * std::norm(buf[static_cast<std::size_t>(bu) * m + bv]);
            map.intensity[static_cast<std::size_t>(u) * size + v] = inten;
            in_disc += inten;
        }
    }
    in_disc *= dna * dna;
    map.total_power = in_disc;
    // Parseval: full-plane spectral power equals source-plane power exactly.
    map.evanescent_loss = field.power() - in_disc;
    return map;
}

}  // namespace mlens
