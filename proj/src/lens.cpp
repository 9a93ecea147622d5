#include "mlens/lens.hpp"

#include <algorithm>
#include <cmath>

#include "mlens/errors.hpp"

namespace mlens {

namespace {
std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}
}  // namespace

void validate(const AsphericLens& lens) {
    if (!(lens.radius > 0.0))
        throw ValidationError("lens radius must be > 0 (got " + num(lens.radius) + ")");
    if (!(lens.index > 1.0))
        throw ValidationError("lens index must be > 1 (got " + num(lens.index) + ")");
    if (lens.conic > 0.0)
        throw ValidationError("oblate conic (k > 0) is unsupported; profile turns singular at x = R/sqrt(1+k) (got k = " +
                              num(lens.conic) + ")");
    if (lens.quartic < 0.0)
        throw ValidationError("quartic coefficient must be >= 0 (got " + num(lens.quartic) + ")");
    if (!std::isfinite(lens.offset_x) || !std::isfinite(lens.offset_y))
        throw ValidationError("lens offsets must be finite");
}

std::vector<std::string> lens_warnings(const AsphericLens& lens) {
    std::vector<std::string> warnings;
    const double off = std::hypot(lens.offset_x, lens.offset_y);
    if (off >= lens.radius)
        warnings.push_back("lens offset magnitude " + num(off) + " exceeds base radius " +
                           num(lens.radius) + "; the lens no longer covers the source axis");
    return warnings;
}

double sag(const AsphericLens& lens, double x) {
    const double r = lens.radius;
    if (x < 0.0 || x > r)
        throw std::domain_error("sag coordinate " + num(x) + " outside [0, " + num(r) + "]");
    const double u = (1.0 + lens.conic) * x * x / (r * r);
    if (u > 1.0)
        throw std::domain_error("sag square-root argument negative (conic out of range)");
    return (x * x / r) / (1.0 + std::sqrt(1.0 - u)) + lens.quartic * x * x * x * x;
}

double lens_height(const AsphericLens& lens) { return sag(lens, lens.radius); }

HeightMap height_map(const AsphericLens& lens, double pitch, int n_samples) {
    validate(lens);
    if (!(pitch > 0.0)) throw ValidationError("height_map pitch must be > 0");
    if (n_samples <= 0 || n_samples % 2 != 0)
        throw ValidationError("height_map n_samples must be positive and even (got " +
                              std::to_string(n_samples) + ")");
    const double extent = n_samples * pitch;
    const double max_off = std::max(std::abs(lens.offset_x), std::abs(lens.offset_y));
    if (extent < 2.0 * lens.radius + 2.0 * max_off)
        throw GridTooSmall("grid extent " + num(extent) + " um cannot hold the lens (needs >= " +
                           num(2.0 * lens.radius + 2.0 * max_off) + " um)");

    HeightMap map;
    map.n = n_samples;
    map.pitch = pitch;
    map.total_height = lens_height(lens);
    map.h.assign(static_cast<std::size_t>(n_samples) * n_samples, 0.0);
    for (int i = 0; i < n_samples; ++i) {
        const double x = map.coord(i) - lens.offset_x;
        for (int j = 0; j < n_samples; ++j) {
            const double y = map.coord(j) - lens.offset_y;
            const double r = std::hypot(x, y);
            if (r <= lens.radius)
                map.h[static_cast<std::size_t>(i) * n_samples + j] = map.total_height - sag(lens, r);
        }
    }
    return map;
}

AsphericLens scale_lens(const AsphericLens& lens, double s) {
    if (!(s > 0.0)) throw ValidationError("scale factor must be > 0 (got " + num(s) + ")");
    AsphericLens out = lens;
    out.radius = lens.radius * s;
    out.quartic = lens.quartic / (s * s * s);
    out.offset_x = lens.offset_x * s;
    out.offset_y = lens.offset_y * s;
    return out;
}

AsphericLens k4_from_height_error(const AsphericLens& lens, double dh) {
    if (lens.conic != 0.0)
        throw ValidationError("height-error parametrization is defined for the k = 0 family only");
    const double r4 = std::pow(lens.radius, 4);
    const double k4 = lens.quartic + dh / r4;
    if (k4 < 0.0)
        throw ValidationError("height error " + num(dh) + " um exceeds the quartic height contribution (k4 would be " +
                              num(k4) + ")");
    AsphericLens out = lens;
    out.quartic = k4;
    return out;
}

}  // namespace mlens
