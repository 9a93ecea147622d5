// End-to-end tests of the CLI binary: artifact layout, exit codes,
// manifest-driven re-runs. The binary path comes from MLENS_BIN.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mlens/csvio.hpp"
#include "mlens/lens.hpp"
#include "mlens/stats.hpp"

namespace fs = std::filesystem;
using mlens::io::json;

namespace {

std::string binary() {
    const char* env = std::getenv("MLENS_BIN");
    REQUIRE(env != nullptr);
    return env;
}

int run_cli(const std::string& args) {
    const std::string cmd = binary() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("profile: CSV rows match the sag function") {
    const auto dir = fresh_dir("mlens_cli_profile");
    REQUIRE(run_cli("profile --R 1.2 --k4 0.75 --samples 5 --out " + dir.string()) == 0);

    std::ifstream csv(dir / "profile.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line == "x,z");
    mlens::AsphericLens lens;
    lens.radius = 1.2;
    lens.quartic = 0.75;
    int rows = 0;
    while (std::getline(csv, line)) {
        const auto comma = line.find(',');
        const double x = std::stod(line.substr(0, comma));
        const double z = std::stod(line.substr(comma + 1));
        CHECK(z == doctest::Approx(mlens::sag(lens, x)).epsilon(1e-8));
        ++rows;
    }
    CHECK(rows == 5);

    const json manifest = mlens::io::read_json(dir / "manifest.json");
    CHECK(manifest.at("command") == "profile");
    // defaults are expanded into the manifest
    CHECK(manifest.at("config").at("grid.n") == "512");
    CHECK(manifest.at("config").at("fiber.name") == "smf28");
}

TEST_CASE("validation failures exit with code 1 and leave no artifacts") {
    const auto dir = fresh_dir("mlens_cli_invalid");
    CHECK(run_cli("simulate --R 5.7 --pitch 0.7 --out " + dir.string()) == 1);  // Nyquist
    CHECK(run_cli("simulate --R 5.7 --k4 -0.1 --out " + dir.string()) == 1);
    CHECK(run_cli("simulate --out " + dir.string()) == 1);  // lens required
    CHECK_FALSE(fs::exists(dir / "summary.json"));

    const auto cfg = fs::temp_directory_path() / "mlens_bad.cfg";
    std::ofstream(cfg) << "grid.banana = 1\n";
    CHECK(run_cli("simulate --R 5.7 --config " + cfg.string() + " --out " + dir.string()) == 1);
}

TEST_CASE("simulate: summary fields and far-field export round trip") {
    const auto dir = fresh_dir("mlens_cli_sim");
    REQUIRE(run_cli("simulate --R 2.0 --k4 0.07 --N 256 --pitch 0.15 --pad 2 --out " +
                    dir.string()) == 0);

    const json summary = mlens::io::read_json(dir / "summary.json");
    for (const char* key : {"eta_na", "eta_overlap", "mfd", "na", "eta014", "gaussianity"})
        CHECK(summary.contains(key));

    // re-importing the far-field CSV reproduces the NA statistic
    const auto map = mlens::io::import_farfield(dir / "farfield.csv");
    CHECK(mlens::na_1e2(map) == doctest::Approx(summary.at("na").get<double>()).epsilon(1e-6));

    // intensities are peak-normalized and confined to the unit disc
    double peak = 0.0;
    for (double v : map.intensity) peak = std::max(peak, v);
    CHECK(peak == doctest::Approx(1.0).epsilon(1e-9));
    for (int i = 0; i < map.size; ++i)
        for (int j = 0; j < map.size; ++j)
            if (map.na(i) * map.na(i) + map.na(j) * map.na(j) > 1.0) CHECK(map.at(i, j) == 0.0);
}

TEST_CASE("simulate --summary-only suppresses bulk output; --bare needs no lens") {
    const auto dir = fresh_dir("mlens_cli_bare");
    REQUIRE(run_cli("simulate --bare --summary-only --N 256 --pitch 0.15 --out " + dir.string()) ==
            0);
    CHECK(fs::exists(dir / "summary.json"));
    CHECK_FALSE(fs::exists(dir / "farfield.csv"));
    CHECK_FALSE(fs::exists(dir / "nearfield.csv"));
}

TEST_CASE("rerun from a manifest reproduces CSV artifacts byte-identically") {
    const auto dir1 = fresh_dir("mlens_cli_rerun1");
    REQUIRE(run_cli("sweep-k4 --R 1.3 --points 5 --k4-max 1.0 --N 256 --pitch 0.15 --out " +
                    dir1.string()) == 0);
    const auto dir2 = fresh_dir("mlens_cli_rerun2");
    REQUIRE(run_cli("rerun " + (dir1 / "manifest.json").string() + " --out " + dir2.string()) == 0);

    CHECK(slurp(dir1 / "sweep.csv") == slurp(dir2 / "sweep.csv"));

    // manifests agree modulo the timing block
    json m1 = mlens::io::read_json(dir1 / "manifest.json");
    json m2 = mlens::io::read_json(dir2 / "manifest.json");
    m1.erase("timing");
    m2.erase("timing");
    CHECK(m1 == m2);
}

TEST_CASE("output directory lock forbids concurrent runs") {
    const auto dir = fresh_dir("mlens_cli_lock");
    fs::create_directories(dir);
    std::ofstream(dir / ".mlens.lock") << "held\n";
    CHECK(run_cli("profile --R 1.0 --out " + dir.string()) == 1);
    fs::remove(dir / ".mlens.lock");
    CHECK(run_cli("profile --R 1.0 --out " + dir.string()) == 0);
}

TEST_CASE("MLENS_OUTDIR environment variable supplies the default output directory") {
    const auto dir = fresh_dir("mlens_cli_env");
    const std::string cmd = "MLENS_OUTDIR=" + dir.string() + " " + binary() +
                            " profile --R 1.0 >/dev/null 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(fs::exists(dir / "profile.csv"));
}

TEST_CASE("sweep CSV carries the fixed column header") {
    const auto dir = fresh_dir("mlens_cli_cols");
    REQUIRE(run_cli("sweep-k4 --R 1.3 --points 3 --k4-max 0.8 --N 256 --pitch 0.15 --out " +
                    dir.string()) == 0);
    std::ifstream csv(dir / "sweep.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "R,k,k4,offset_x,dH,mfd,na,eta014,gaussianity,bimodal,eta_na,eta_overlap");
}
