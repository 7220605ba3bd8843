#include <catch2/catch.hpp>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "fsolink/config.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = FSOLINK_CLI_PATH;

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = kCli + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "fsolink_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

const char* kMiniConfig = R"({"range_km": 100.0, "grid_n": 512, "n_trials": 2, "master_seed": 7})";

} // namespace

TEST_CASE("sweep-detector writes the expected CSV, reproducibly") {
    const fs::path dir = fresh_dir("sweep");
    write(dir / "cfg.json", R"({"sweep_n_points": 12})");
    REQUIRE(run_cli("sweep-detector --config " + (dir / "cfg.json").string() + " --out " +
                        (dir / "a").string(),
                    dir / "a.log") == 0);
    const std::string csv = slurp(dir / "a" / "sweep.csv");
    CHECK(csv.rfind("diameter_mm,bandwidth_hz,nep_diode_w_rthz,nep_total_w_rthz,v_ele_snu,"
                    "max_clock_hz\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 13); // header + 12 rows

    REQUIRE(run_cli("sweep-detector --config " + (dir / "cfg.json").string() + " --out " +
                        (dir / "b").string(),
                    dir / "b.log") == 0);
    CHECK(slurp(dir / "b" / "sweep.csv") == csv);
    CHECK(slurp(dir / "b" / "sweep_params.json") == slurp(dir / "a" / "sweep_params.json"));
}

TEST_CASE("link-budget runs are byte-identical, serial or parallel") {
    const fs::path dir = fresh_dir("lb");
    write(dir / "cfg.json", kMiniConfig);
    const std::string base = "link-budget --config " + (dir / "cfg.json").string();
    REQUIRE(run_cli(base + " --threads 1 --out " + (dir / "a").string(), dir / "a.log") == 0);
    REQUIRE(run_cli(base + " --threads 2 --out " + (dir / "b").string(), dir / "b.log") == 0);

    for (const char* f : {"report.json", "trials.csv", "summary.txt"}) {
        INFO(f);
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }

    // summary reaches stdout
    CHECK(slurp(dir / "a.log").find("diffraction loss") != std::string::npos);

    // the config echo in report.json re-parses to an identical RunConfig and
    // the report carries the per-trial records
    const nlohmann::json report = nlohmann::json::parse(slurp(dir / "a" / "report.json"));
    const fsolink::RunConfig echoed = fsolink::parse_run_config(report["config"]);
    CHECK(fsolink::to_json(echoed) == report["config"]);
    REQUIRE(report["trials"].size() == 2);
    CHECK(report["trials"][0].contains("seed"));
    CHECK(report["trials"][0]["eta"].size() == 2);

    // a different seed changes the trials
    REQUIRE(run_cli(base + " --threads 2 --seed 8 --out " + (dir / "c").string(),
                    dir / "c.log") == 0);
    CHECK(slurp(dir / "c" / "trials.csv") != slurp(dir / "a" / "trials.csv"));

    // --trials overrides the config
    REQUIRE(run_cli(base + " --trials 1 --out " + (dir / "d").string(), dir / "d.log") == 0);
    const std::string trials_d = slurp(dir / "d" / "trials.csv");
    CHECK(std::count(trials_d.begin(), trials_d.end(), '\n') == 2); // header + 1 trial
}

TEST_CASE("config errors exit with code 2 and name the key") {
    const fs::path dir = fresh_dir("cfgerr");
    write(dir / "bad.json", R"({"rx_aperture_cm": -35.5})");
    CHECK(run_cli("link-budget --config " + (dir / "bad.json").string() + " --out " +
                      (dir / "o").string(),
                  dir / "bad.log") == 2);
    CHECK(slurp(dir / "bad.log").find("rx_aperture_cm") != std::string::npos);

    write(dir / "unknown.json", R"({"range_miles": 400})");
    CHECK(run_cli("sweep-detector --config " + (dir / "unknown.json").string() + " --out " +
                      (dir / "o2").string(),
                  dir / "unknown.log") == 2);
    CHECK(slurp(dir / "unknown.log").find("range_miles") != std::string::npos);

    CHECK(run_cli("link-budget --config " + (dir / "missing.json").string() + " --out " +
                      (dir / "o3").string(),
                  dir / "missing.log") == 2);

    write(dir / "mangled.json", "{ not json");
    CHECK(run_cli("link-budget --config " + (dir / "mangled.json").string() + " --out " +
                      (dir / "o4").string(),
                  dir / "mangled.log") == 2);
}

TEST_CASE("simulation failures exit with code 3") {
    const fs::path dir = fresh_dir("simerr");
    // passes config validation but violates the r0/3 grid rule at run time
    write(dir / "coarse.json", R"({"range_km": 100.0, "grid_n": 512, "grid_dx_mm": 200.0})");
    CHECK(run_cli("link-budget --config " + (dir / "coarse.json").string() + " --out " +
                      (dir / "o").string(),
                  dir / "coarse.log") == 3);
    CHECK(slurp(dir / "coarse.log").find("r0/3") != std::string::npos);
}

TEST_CASE("shot-noise and phase-screen outputs are reproducible") {
    const fs::path dir = fresh_dir("misc");
    write(dir / "cfg.json",
          R"({"homodyne_samples": 20000, "lo_levels_photons": [1e8, 2e8, 4e8],
              "screen_n": 128, "screen_dx_cm": 2.0})");

    const std::string shot = "shot-noise --config " + (dir / "cfg.json").string();
    REQUIRE(run_cli(shot + " --out " + (dir / "s1").string(), dir / "s1.log") == 0);
    REQUIRE(run_cli(shot + " --out " + (dir / "s2").string(), dir / "s2.log") == 0);
    CHECK(slurp(dir / "s1" / "shot_noise.csv") == slurp(dir / "s2" / "shot_noise.csv"));
    CHECK(slurp(dir / "s1" / "shot_noise.csv")
              .rfind("lo_photons,raw_variance,normalized_variance,ele_ratio\n", 0) == 0);
    CHECK(slurp(dir / "s1" / "shot_noise_fit.json") == slurp(dir / "s2" / "shot_noise_fit.json"));

    const std::string scr = "phase-screen --config " + (dir / "cfg.json").string();
    REQUIRE(run_cli(scr + " --out " + (dir / "p1").string(), dir / "p1.log") == 0);
    REQUIRE(run_cli(scr + " --out " + (dir / "p2").string(), dir / "p2.log") == 0);
    CHECK(slurp(dir / "p1" / "screen.csv") == slurp(dir / "p2" / "screen.csv"));
    REQUIRE(run_cli(scr + " --seed 31 --out " + (dir / "p3").string(), dir / "p3.log") == 0);
    CHECK(slurp(dir / "p3" / "screen.csv") != slurp(dir / "p1" / "screen.csv"));
    // 128 rows of 128 comma-separated values
    const std::string screen = slurp(dir / "p1" / "screen.csv");
    CHECK(std::count(screen.begin(), screen.end(), '\n') == 128);
}
