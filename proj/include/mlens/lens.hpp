#pragma once

#include <string>
#include <vector>

namespace mlens {

/// Rotationally symmetric aspheric lens profile
///   z(x) = (x^2/R) / (1 + sqrt(1 - (1+k) x^2/R^2)) + k4 x^4
/// with z the sag depth measured from the apex. Lengths in um, k4 in um^-3.
struct AsphericLens {
    double radius = 1.0;    ///< base radius R, > 0
    double conic = 0.0;     ///< conic coefficient k, <= 0 (oblate profiles rejected)
    double quartic = 0.0;   ///< quartic coefficient k4, >= 0
    double index = 1.45;    ///< refractive index of the lens glass
    double offset_x = 0.0;  ///< lateral offset of the lens axis from the source axis
    double offset_y = 0.0;
};

/// Thickness map h(x,y) of a lens sampled at cell centers on a square grid.
/// h = H - sag(r) inside the base circle (r from the offset lens axis), 0 outside.
struct HeightMap {
    int n = 0;
    double pitch = 0.0;
    double total_height = 0.0;  ///< H = sag(R)
    std::vector<double> h;      ///< row-major, n*n, h >= 0

    double at(int i, int j) const { return h[static_cast<std::size_t>(i) * n + j]; }
    double coord(int i) const { return (i - n / 2) * pitch; }
};

/// Throws ValidationError if the lens violates a hard invariant
/// (R <= 0, n <= 1, k > 0, k4 < 0).
void validate(const AsphericLens& lens);

/// Soft issues worth surfacing (offset magnitude >= R, etc.).
std::vector<std::string> lens_warnings(const AsphericLens& lens);

/// Sag depth at radial coordinate x in [0, R]. Throws std::domain_error outside.
double sag(const AsphericLens& lens, double x);

/// Total lens height H = sag(R); for k = 0 this is R + k4 R^4.
double lens_height(const AsphericLens& lens);

/// Grid must be even-sized with extent >= 2R + 2*max offset.
HeightMap height_map(const AsphericLens& lens, double pitch, int n_samples);

/// Similar lens scaled by S: R' = S R, k4' = k4 / S^3, offsets scaled, k kept.
AsphericLens scale_lens(const AsphericLens& lens, double s);

/// Lens whose height differs by exactly dh, realized as k4' = k4 + dh/R^4.
/// Requires k = 0 and k4' >= 0.
AsphericLens k4_from_height_error(const AsphericLens& lens, double dh);

}  // namespace mlens
