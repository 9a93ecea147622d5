#include "mlens/csvio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mlens/errors.hpp"

namespace mlens::io {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw NumericalError("cannot open " + path.string() + " for writing");
    return out;
}

}  // namespace

void export_farfield(const FarFieldMap& map, const std::filesystem::path& csv_path) {
    double peak = 0.0;
    for (double v : map.intensity) peak = std::max(peak, v);
    const double norm = peak > 0.0 ? 1.0 / peak : 1.0;

    auto out = open_out(csv_path);
    out << "nax,nay,intensity\n";
    for (int i = 0; i < map.size; ++i)
        for (int j = 0; j < map.size; ++j)
            out << format_value(map.na(i)) << ',' << format_value(map.na(j)) << ','
                << format_value(map.at(i, j) * norm) << '\n';

    json sidecar;
    sidecar["dna"] = map.dna;
    sidecar["wavelength"] = map.wavelength;
    sidecar["total_power"] = map.total_power;
    sidecar["evanescent_loss"] = map.evanescent_loss;
    sidecar["size"] = map.size;
    sidecar["peak_intensity"] = peak;
    std::filesystem::path side = csv_path;
    side.replace_extension(".json");
    write_json(sidecar, side);
}

void export_nearfield(const ComplexFieldGrid& field, const std::filesystem::path& csv_path) {
    auto out = open_out(csv_path);
    out << "x,y,re,im\n";
    for (int i = 0; i < field.n; ++i)
        for (int j = 0; j < field.n; ++j) {
            const auto v = field.at(i, j);
            out << format_value(field.coord(i)) << ',' << format_value(field.coord(j)) << ','
                << format_value(v.real()) << ',' << format_value(v.imag()) << '\n';
        }
}

void export_records(const std::vector<SweepRecord>& records,
                    const std::filesystem::path& csv_path) {
    auto out = open_out(csv_path);
    out << "R,k,k4,offset_x,dH,mfd,na,eta014,gaussianity,bimodal,eta_na,eta_overlap\n";
    for (const auto& rec : records) {
        const AsphericLens lens = rec.lens.value_or(AsphericLens{0.0, 0.0, 0.0, 1.45, 0.0, 0.0});
        out << format_value(lens.radius) << ',' << format_value(lens.conic) << ','
            << format_value(lens.quartic) << ',' << format_value(lens.offset_x) << ','
            << format_value(rec.dh) << ',' << format_value(rec.stats.mfd) << ','
            << format_value(rec.stats.na) << ',' << format_value(rec.stats.power_in_na014) << ','
            << format_value(rec.stats.gaussianity) << ',' << (rec.stats.bimodal ? 1 : 0) << ','
            << format_value(rec.coupling.eta_na) << ',' << format_value(rec.coupling.eta_overlap)
            << '\n';
    }
}

json lens_json(const AsphericLens& lens) {
    return json{{"R", lens.radius},         {"k", lens.conic},
                {"k4", lens.quartic},       {"n", lens.index},
                {"offset_x", lens.offset_x}, {"offset_y", lens.offset_y}};
}

json record_json(const SweepRecord& rec) {
    json j;
    if (rec.lens) j["lens"] = lens_json(*rec.lens);
    j["mfd"] = rec.stats.mfd;
    j["na"] = rec.stats.na;
    j["eta014"] = rec.stats.power_in_na014;
    j["gaussianity"] = rec.stats.gaussianity;
    j["bimodal"] = rec.stats.bimodal;
    j["eta_na"] = rec.coupling.eta_na;
    j["eta_overlap"] = rec.coupling.eta_overlap;
    j["consistency_gap"] = rec.coupling.consistency_gap;
    j["shortcut_valid"] = rec.coupling.shortcut_valid;
    return j;
}

json fit_json(const ScalingFit& fit) {
    return json{{"r0", fit.r0},
                {"k4_at_r0", fit.k4_at_r0},
                {"k4_halfwidth", fit.k4_halfwidth},
                {"exponent", fit.exponent},
                {"exponent_halfwidth", fit.exponent_halfwidth},
                {"residuals", fit.residuals}};
}

void write_json(const json& j, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    json j;
    in >> j;
    return j;
}

FarFieldMap import_farfield(const std::filesystem::path& csv_path) {
    std::filesystem::path side = csv_path;
    side.replace_extension(".json");
    const json meta = read_json(side);

    FarFieldMap map;
    map.size = meta.at("size").get<int>();
    map.dna = meta.at("dna").get<double>();
    map.wavelength = meta.at("wavelength").get<double>();
    map.total_power = meta.at("total_power").get<double>();
    map.evanescent_loss = meta.at("evanescent_loss").get<double>();
    map.intensity.assign(static_cast<std::size_t>(map.size) * map.size, 0.0);

    std::ifstream in(csv_path);
    if (!in) throw ValidationError("cannot open " + csv_path.string());
    std::string line;
    std::getline(in, line);  // header
    std::size_t idx = 0;
    while (std::getline(in, line)) {
        const auto c2 = line.rfind(',');
        if (c2 == std::string::npos || idx >= map.intensity.size())
            throw ValidationError("malformed far-field CSV: " + csv_path.string());
        map.intensity[idx++] = std::stod(line.substr(c2 + 1));
    }
    if (idx != map.intensity.size())
        throw ValidationError("far-field CSV row count mismatch: " + csv_path.string());
    return map;
}

}  // namespace mlens::io
