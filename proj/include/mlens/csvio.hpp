#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mlens/optimize.hpp"
#include "mlens/sim.hpp"

#include "json.hpp"

namespace mlens::io {

using json = nlohmann::json;

/// All numeric CSV values carry 9 significant digits.
std::string format_value(double v);

/// Far-field export: header nax,nay,intensity, row-major, peak normalized to 1;
/// JSON sidecar (same stem, .json) with dna, wavelength, total_power,
/// evanescent_loss.
void export_farfield(const FarFieldMap& map, const std::filesystem::path& csv_path);

/// Near-field export: header x,y,re,im.
void export_nearfield(const ComplexFieldGrid& field, const std::filesystem::path& csv_path);

/// Sweep-table export with the fixed column set
/// R,k,k4,offset_x,dH,mfd,na,eta014,gaussianity,bimodal,eta_na,eta_overlap.
void export_records(const std::vector<SweepRecord>& records, const std::filesystem::path& csv_path);

json record_json(const SweepRecord& rec);
json lens_json(const AsphericLens& lens);
json fit_json(const ScalingFit& fit);

void write_json(const json& j, const std::filesystem::path& path);
json read_json(const std::filesystem::path& path);

/// Reads a far-field CSV (as written by export_farfield) back into a map.
/// Intensities are peak-normalized; dna and wavelength come from the sidecar.
FarFieldMap import_farfield(const std::filesystem::path& csv_path);

}  // namespace mlens::io
