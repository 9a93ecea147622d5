#include "mlens/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "mlens/errors.hpp"

namespace mlens {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ValidationError("config key '" + key + "': not a number: '" + value + "'");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ValidationError("config key '" + key + "': not an integer: '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ValidationError("config key '" + key + "': not a boolean: '" + value + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    if (out.empty()) throw ValidationError("config key '" + key + "': empty list");
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += fmt(v[i]);
    }
    return out;
}

}  // namespace

void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
    static const std::map<std::string, Setter> table = {
        {"grid.n", [](RunConfig& c, const std::string& k, const std::string& v) { c.ctx.grid.n = parse_int(k, v); }},
        {"grid.pitch", [](RunConfig& c, const std::string& k, const std::string& v) { c.ctx.grid.pitch = parse_double(k, v); }},
        {"grid.pad_factor", [](RunConfig& c, const std::string& k, const std::string& v) { c.ctx.grid.pad_factor = parse_int(k, v); }},
        {"grid.slice", [](RunConfig& c, const std::string& k, const std::string& v) { c.ctx.grid.slice = parse_double(k, v); }},
        {"source.mfd", [](RunConfig& c, const std::string& k, const std::string& v) { c.ctx.source.mfd = parse_double(k, v); }},
        {"source.wavelength", [](RunConfig& c, const std::string& k, const std::string& v) { c.ctx.source.wavelength = parse_double(k, v); }},
        {"source.pillar_d", [](RunConfig& c, const std::string& k, const std::string& v) { c.ctx.source.pillar_d = parse_double(k, v); }},
        {"fiber.preset",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v != "smf28") throw ValidationError("config key '" + k + "': unknown fibre preset '" + v + "'");
             c.ctx.fiber = smf28();
         }},
        {"fiber.mfd", [](RunConfig& c, const std::string& k, const std::string& v) { c.ctx.fiber.mfd = parse_double(k, v); }},
        {"fiber.na", [](RunConfig& c, const std::string& k, const std::string& v) { c.ctx.fiber.na = parse_double(k, v); }},
        {"fiber.wavelength", [](RunConfig& c, const std::string& k, const std::string& v) { c.ctx.fiber.wavelength = parse_double(k, v); }},
        {"fiber.name", [](RunConfig& c, const std::string&, const std::string& v) { c.ctx.fiber.name = v; }},
        {"analysis.gaussianity_threshold",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.ctx.analysis.gaussianity_threshold = parse_double(k, v); }},
        {"analysis.na_cut", [](RunConfig& c, const std::string& k, const std::string& v) { c.ctx.analysis.na_cut = parse_double(k, v); }},
        {"sim.monitor_gap", [](RunConfig& c, const std::string& k, const std::string& v) { c.ctx.monitor_gap = parse_double(k, v); }},
        {"run.workers", [](RunConfig& c, const std::string& k, const std::string& v) { c.ctx.workers = parse_int(k, v); }},
        {"run.out", [](RunConfig& c, const std::string&, const std::string& v) { c.outdir = v; }},
        {"lens.r", [](RunConfig& c, const std::string& k, const std::string& v) { c.lens_r = parse_double(k, v); }},
        {"lens.k", [](RunConfig& c, const std::string& k, const std::string& v) { c.lens_k = parse_double(k, v); }},
        {"lens.k4", [](RunConfig& c, const std::string& k, const std::string& v) { c.lens_k4 = parse_double(k, v); }},
        {"lens.n", [](RunConfig& c, const std::string& k, const std::string& v) { c.lens_n = parse_double(k, v); }},
        {"lens.offset_x", [](RunConfig& c, const std::string& k, const std::string& v) { c.lens_offset_x = parse_double(k, v); }},
        {"lens.offset_y", [](RunConfig& c, const std::string& k, const std::string& v) { c.lens_offset_y = parse_double(k, v); }},
        {"profile.samples", [](RunConfig& c, const std::string& k, const std::string& v) { c.profile_samples = parse_int(k, v); }},
        {"sweep.k4_min", [](RunConfig& c, const std::string& k, const std::string& v) { c.sweep_k4_min = parse_double(k, v); }},
        {"sweep.k4_max", [](RunConfig& c, const std::string& k, const std::string& v) { c.sweep_k4_max = parse_double(k, v); }},
        {"sweep.points", [](RunConfig& c, const std::string& k, const std::string& v) { c.sweep_points = parse_int(k, v); }},
        {"sweep.k_values", [](RunConfig& c, const std::string& k, const std::string& v) { c.k_values = parse_list(k, v); }},
        {"family.r_min", [](RunConfig& c, const std::string& k, const std::string& v) { c.family_r_min = parse_double(k, v); }},
        {"family.r_max", [](RunConfig& c, const std::string& k, const std::string& v) { c.family_r_max = parse_double(k, v); }},
        {"family.points", [](RunConfig& c, const std::string& k, const std::string& v) { c.family_points = parse_int(k, v); }},
        {"family.cold", [](RunConfig& c, const std::string& k, const std::string& v) { c.family_cold = parse_bool(k, v); }},
        {"match.r_start", [](RunConfig& c, const std::string& k, const std::string& v) { c.match_r_start = parse_double(k, v); }},
        {"match.r_growth", [](RunConfig& c, const std::string& k, const std::string& v) { c.match_r_growth = parse_double(k, v); }},
        {"match.r_max", [](RunConfig& c, const std::string& k, const std::string& v) { c.match_r_max = parse_double(k, v); }},
        {"match.max_iters", [](RunConfig& c, const std::string& k, const std::string& v) { c.match_max_iters = parse_int(k, v); }},
        {"tol.max_offset", [](RunConfig& c, const std::string& k, const std::string& v) { c.tol_max_offset = parse_double(k, v); }},
        {"tol.offset_points", [](RunConfig& c, const std::string& k, const std::string& v) { c.tol_offset_points = parse_int(k, v); }},
        {"tol.max_dh", [](RunConfig& c, const std::string& k, const std::string& v) { c.tol_max_dh = parse_double(k, v); }},
        {"tol.height_points", [](RunConfig& c, const std::string& k, const std::string& v) { c.tol_height_points = parse_int(k, v); }},
        {"simulate.bare", [](RunConfig& c, const std::string& k, const std::string& v) { c.bare = parse_bool(k, v); }},
        {"simulate.summary_only", [](RunConfig& c, const std::string& k, const std::string& v) { c.summary_only = parse_bool(k, v); }},
    };
    const auto it = table.find(key);
    if (it == table.end()) throw ValidationError("unknown config key '" + key + "'");
    it->second(cfg, key, value);
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                                  ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                                  ": empty key or value");
        try {
            apply_config_key(cfg, key, value);
        } catch (const ValidationError& err) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + err.what());
        }
    }
}

AsphericLens config_lens(const RunConfig& cfg) {
    if (!cfg.lens_r) throw ValidationError("this command requires a lens radius (lens.r / --R)");
    AsphericLens lens;
    lens.radius = *cfg.lens_r;
    lens.conic = cfg.lens_k;
    lens.quartic = cfg.lens_k4;
    lens.index = cfg.lens_n;
    lens.offset_x = cfg.lens_offset_x;
    lens.offset_y = cfg.lens_offset_y;
    return lens;
}

void validate_config(const RunConfig& cfg, bool needs_lens) {
    validate_grid(cfg.ctx.grid.n, cfg.ctx.grid.pitch, cfg.ctx.source.wavelength);
    if (cfg.ctx.grid.pad_factor != 1 && cfg.ctx.grid.pad_factor != 2 &&
        cfg.ctx.grid.pad_factor != 4 && cfg.ctx.grid.pad_factor != 8)
        throw ValidationError("grid.pad_factor must be one of 1, 2, 4, 8");
    if (!(cfg.ctx.grid.slice > 0.0)) throw ValidationError("grid.slice must be > 0");
    if (!(cfg.ctx.source.mfd > 0.0)) throw ValidationError("source.mfd must be > 0");
    if (cfg.ctx.grid.n * cfg.ctx.grid.pitch < 4.0 * cfg.ctx.source.mfd)
        throw GridTooSmall("grid extent must be at least 4x the source mfd");
    if (!(cfg.ctx.fiber.mfd > 0.0)) throw ValidationError("fiber.mfd must be > 0");
    if (!(cfg.ctx.fiber.na > 0.0) || cfg.ctx.fiber.na >= 1.0)
        throw ValidationError("fiber.na must lie in (0, 1)");
    if (!(cfg.ctx.monitor_gap >= 0.0)) throw ValidationError("sim.monitor_gap must be >= 0");
    if (cfg.ctx.workers < 1) throw ValidationError("run.workers must be >= 1");
    if (!(cfg.ctx.analysis.gaussianity_threshold > 0.0 && cfg.ctx.analysis.gaussianity_threshold <= 1.0))
        throw ValidationError("analysis.gaussianity_threshold must lie in (0, 1]");
    if (!(cfg.ctx.analysis.na_cut > 0.0 && cfg.ctx.analysis.na_cut <= 1.0))
        throw ValidationError("analysis.na_cut must lie in (0, 1]");
    if (needs_lens) {
        const AsphericLens lens = config_lens(cfg);
        validate(lens);
        const double extent = cfg.ctx.grid.n * cfg.ctx.grid.pitch;
        const double max_off = std::max(std::abs(lens.offset_x), std::abs(lens.offset_y));
        if (extent < 2.0 * lens.radius + 2.0 * max_off)
            throw GridTooSmall("grid extent cannot hold the lens footprint");
    } else if (cfg.lens_r) {
        AsphericLens lens = config_lens(cfg);
        validate(lens);
    }
    if (cfg.lens_k4 < 0.0) throw ValidationError("lens.k4 must be >= 0");
}

std::map<std::string, std::string> resolved_config(const RunConfig& cfg) {
    std::map<std::string, std::string> out;
    out["grid.n"] = std::to_string(cfg.ctx.grid.n);
    out["grid.pitch"] = fmt(cfg.ctx.grid.pitch);
    out["grid.pad_factor"] = std::to_string(cfg.ctx.grid.pad_factor);
    out["grid.slice"] = fmt(cfg.ctx.grid.slice);
    out["source.mfd"] = fmt(cfg.ctx.source.mfd);
    out["source.wavelength"] = fmt(cfg.ctx.source.wavelength);
    out["source.pillar_d"] = fmt(cfg.ctx.source.pillar_d);
    out["fiber.mfd"] = fmt(cfg.ctx.fiber.mfd);
    out["fiber.na"] = fmt(cfg.ctx.fiber.na);
    out["fiber.wavelength"] = fmt(cfg.ctx.fiber.wavelength);
    out["fiber.name"] = cfg.ctx.fiber.name;
    out["analysis.gaussianity_threshold"] = fmt(cfg.ctx.analysis.gaussianity_threshold);
    out["analysis.na_cut"] = fmt(cfg.ctx.analysis.na_cut);
    out["sim.monitor_gap"] = fmt(cfg.ctx.monitor_gap);
    out["run.workers"] = std::to_string(cfg.ctx.workers);
    if (cfg.lens_r) {
        out["lens.r"] = fmt(*cfg.lens_r);
        out["lens.k"] = fmt(cfg.lens_k);
        out["lens.k4"] = fmt(cfg.lens_k4);
        out["lens.n"] = fmt(cfg.lens_n);
        out["lens.offset_x"] = fmt(cfg.lens_offset_x);
        out["lens.offset_y"] = fmt(cfg.lens_offset_y);
    }
    out["profile.samples"] = std::to_string(cfg.profile_samples);
    out["sweep.k4_min"] = fmt(cfg.sweep_k4_min);
    if (cfg.sweep_k4_max) out["sweep.k4_max"] = fmt(*cfg.sweep_k4_max);
    out["sweep.points"] = std::to_string(cfg.sweep_points);
    out["sweep.k_values"] = fmt_list(cfg.k_values);
    out["family.r_min"] = fmt(cfg.family_r_min);
    out["family.r_max"] = fmt(cfg.family_r_max);
    out["family.points"] = std::to_string(cfg.family_points);
    out["family.cold"] = cfg.family_cold ? "true" : "false";
    out["match.r_start"] = fmt(cfg.match_r_start);
    out["match.r_growth"] = fmt(cfg.match_r_growth);
    out["match.r_max"] = fmt(cfg.match_r_max);
    out["match.max_iters"] = std::to_string(cfg.match_max_iters);
    out["tol.max_offset"] = fmt(cfg.tol_max_offset);
    out["tol.offset_points"] = std::to_string(cfg.tol_offset_points);
    out["tol.max_dh"] = fmt(cfg.tol_max_dh);
    out["tol.height_points"] = std::to_string(cfg.tol_height_points);
    out["simulate.bare"] = cfg.bare ? "true" : "false";
    out["simulate.summary_only"] = cfg.summary_only ? "true" : "false";
    return out;
}

}  // namespace mlens
