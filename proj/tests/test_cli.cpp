#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dfstomo/io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string cli_path() {
    const char* p = std::getenv("DFSTOMO_CLI");
    REQUIRE_MESSAGE(p != nullptr, "DFSTOMO_CLI must point at the dfstomo binary");
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = "'" + cli_path() + "' " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("dfstomo_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

bool same_bytes(const fs::path& a, const fs::path& b) { return slurp(a) == slurp(b); }

} // namespace

TEST_CASE("simulate writes record files with matching counts") {
    const fs::path dir = scratch_dir("sim_fig3b");
    const int rc = run_cli("simulate --scenario fig3b --n-samples 5000 --vacuum-samples 2000 "
                           "--seed 3 --out " +
                           dir.string());
    REQUIRE(rc == 0);
    const auto acq = dfstomo::read_records_jsonl(dir / "acquisition.jsonl");
    const auto vac = dfstomo::read_records_jsonl(dir / "vacuum.jsonl");
    CHECK(acq.size() == 5000);
    CHECK(vac.size() == 2000);
    const auto truth = dfstomo::read_truth_sidecar(dir / "truth.json");
    CHECK(truth.config.state.format() == "coherent alpha=0.6+0i");
    CHECK(truth.theta.size() == 5000);
}

TEST_CASE("simulate is byte-deterministic under a fixed seed") {
    const fs::path a = scratch_dir("det_a");
    const fs::path b = scratch_dir("det_b");
    for (const auto& dir : {a, b}) {
        const int rc = run_cli("simulate --scenario fig3d --n-samples 4000 --vacuum-samples 2000 "
                               "--seed 11 --out " +
                               dir.string());
        REQUIRE(rc == 0);
    }
    CHECK(same_bytes(a / "acquisition.jsonl", b / "acquisition.jsonl"));
    CHECK(same_bytes(a / "vacuum.jsonl", b / "vacuum.jsonl"));
    CHECK(same_bytes(a / "truth.json", b / "truth.json"));
}

TEST_CASE("explicit state text is accepted and echoed") {
    const fs::path dir = scratch_dir("state_text");
    REQUIRE(run_cli("simulate --state 'displaced_mix alpha=0.60+0.00i eta=0.62' "
                    "--n-samples 2000 --vacuum-samples 1500 --seed 2 --out " +
                    dir.string()) == 0);
    const auto truth = dfstomo::read_truth_sidecar(dir / "truth.json");
    CHECK(truth.config.state.eta() == 0.62);
    CHECK(truth.config.state.alpha().real() == 0.60);
    CHECK(run_cli("simulate --state 'squeezed r=1' --out " + dir.string()) == 2);
}

TEST_CASE("fig3d sidecar echoes eta = 0.62") {
    const fs::path dir = scratch_dir("sidecar");
    REQUIRE(run_cli("simulate --scenario fig3d --n-samples 2000 --vacuum-samples 1500 --seed 2 "
                    "--out " +
                    dir.string()) == 0);
    const auto truth = dfstomo::read_truth_sidecar(dir / "truth.json");
    CHECK(truth.config.state.eta() == 0.62);
    CHECK(truth.config.state.format() == "displaced_mix alpha=0.6+0i eta=0.62");
}

TEST_CASE("reconstruct picks the Abel path for vacuum and FBP for fig3d") {
    const fs::path vac = scratch_dir("rec_vac");
    REQUIRE(run_cli("simulate --scenario fig3a --n-samples 20000 --vacuum-samples 5000 --seed 5 "
                    "--out " +
                    vac.string()) == 0);
    REQUIRE(run_cli("reconstruct --in " + vac.string()) == 0);
    CHECK(fs::exists(vac / "profile.txt"));
    CHECK(!fs::exists(vac / "wigner.txt"));
    CHECK(fs::exists(vac / "diagonals.txt"));

    const fs::path disp = scratch_dir("rec_fig3d");
    REQUIRE(run_cli("simulate --scenario fig3d --n-samples 20000 --vacuum-samples 5000 --seed 5 "
                    "--out " +
                    disp.string()) == 0);
    REQUIRE(run_cli("reconstruct --in " + disp.string() + " --grid -3:3:0.25") == 0);
    CHECK(fs::exists(disp / "wigner.txt"));
    CHECK(!fs::exists(disp / "profile.txt"));
    const std::string grid_text = slurp(disp / "wigner.txt");
    CHECK(grid_text.find("# kc: 6.4") != std::string::npos);
    CHECK(grid_text.find("# convention: vacuum-variance-1/2") != std::string::npos);

    SUBCASE("grid file round-trips") {
        const auto grid = dfstomo::read_wigner_grid(disp / "wigner.txt");
        CHECK(grid.x_axis.count() == 25);
        CHECK(grid.p_axis.count() == 25);
        CHECK(grid.k_c == 6.4);
        CHECK(grid.n_samples == 20000);
    }

    SUBCASE("analyze emits the report") {
        REQUIRE(run_cli("analyze --in " + disp.string() + " --bootstrap-reps 100 --seed 4") == 0);
        const json rep = json::parse(slurp(disp / "report.json"));
        CHECK(rep.at("phase_locked").get<bool>());
        CHECK(rep.contains("alpha_abs"));
        CHECK(rep.contains("stderr_eta"));
        CHECK(rep.at("method") == "fbp");
        CHECK(std::abs(rep.at("eta").get<double>() - 0.62) < 0.1);
        CHECK(rep.at("diagonals").size() == 11);
    }

    SUBCASE("compare reports small grid error against the truth state") {
        REQUIRE(run_cli("compare --in " + disp.string()) == 0);
        const json cmp = json::parse(slurp(disp / "compare.json"));
        CHECK(cmp.at("grid").at("rms_diff").get<double>() < 0.05);
        CHECK(cmp.at("diagonals").at("within_4_stderr").get<bool>());
    }

    SUBCASE("compare against itself is exactly zero") {
        REQUIRE(run_cli("compare --in " + disp.string() + " --ref " +
                        (disp / "wigner.txt").string()) == 0);
        const json cmp = json::parse(slurp(disp / "compare.json"));
        CHECK(cmp.at("grid").at("max_abs_diff").get<double>() == 0.0);
        CHECK(cmp.at("grid").at("rms_diff").get<double>() == 0.0);
    }
}

TEST_CASE("vacuum pipeline analyze reports alpha consistent with zero") {
    const fs::path dir = scratch_dir("vac_analyze");
    REQUIRE(run_cli("simulate --scenario fig3a --n-samples 20000 --vacuum-samples 5000 --seed 6 "
                    "--out " +
                    dir.string()) == 0);
    REQUIRE(run_cli("reconstruct --in " + dir.string()) == 0);
    REQUIRE(run_cli("analyze --in " + dir.string() + " --bootstrap-reps 100") == 0);
    const json rep = json::parse(slurp(dir / "report.json"));
    CHECK(!rep.at("phase_locked").get<bool>());
    CHECK(rep.at("method") == "abel");
    const double a = rep.at("alpha_abs").get<double>();
    const double se = rep.at("stderr_alpha_abs").get<double>();
    CHECK(a < 4.0 * se);
    CHECK(std::abs(rep.at("eta").get<double>()) < 0.05);
}

TEST_CASE("error exit codes") {
    SUBCASE("missing vacuum file -> calibration error (4)") {
        const fs::path dir = scratch_dir("no_vacuum");
        REQUIRE(run_cli("simulate --scenario fig3b --n-samples 5000 --vacuum-samples 2000 "
                        "--seed 7 --out " +
                        dir.string()) == 0);
        fs::remove(dir / "vacuum.jsonl");
        CHECK(run_cli("reconstruct --in " + dir.string()) == 4);
    }
    SUBCASE("missing acquisition file -> io error (3)") {
        const fs::path dir = scratch_dir("no_acq");
        fs::create_directories(dir);
        CHECK(run_cli("reconstruct --in " + dir.string()) == 3);
    }
    SUBCASE("unknown scenario -> config error (2)") {
        const fs::path dir = scratch_dir("bad_scenario");
        CHECK(run_cli("simulate --scenario nope --out " + dir.string()) == 2);
    }
    SUBCASE("unknown config key -> config error (2)") {
        const fs::path dir = scratch_dir("bad_config");
        fs::create_directories(dir);
        std::ofstream(dir / "run.cfg") << "scenario=fig3b\nfrobnicate=1\n";
        CHECK(run_cli("simulate --config " + (dir / "run.cfg").string() + " --out " +
                      dir.string()) == 2);
    }
    SUBCASE("config file provides defaults that flags override") {
        const fs::path dir = scratch_dir("good_config");
        fs::create_directories(dir);
        std::ofstream(dir / "run.cfg")
            << "scenario=fig3b\nn-samples=2000\nvacuum-samples=1500\nseed=9\n";
        CHECK(run_cli("simulate --config " + (dir / "run.cfg").string() + " --out " +
                      dir.string()) == 0);
        CHECK(dfstomo::read_records_jsonl(dir / "acquisition.jsonl").size() == 2000);
        CHECK(run_cli("simulate --config " + (dir / "run.cfg").string() +
                      " --n-samples 1000 --out " + dir.string()) == 0);
        CHECK(dfstomo::read_records_jsonl(dir / "acquisition.jsonl").size() == 1000);
    }
    SUBCASE("phase coverage error (5)") {
        const fs::path dir = scratch_dir("coverage");
        // ramp spanning only a fifth of the circle over the whole run
        REQUIRE(run_cli("simulate --scenario fig3d --n-samples 20000 --vacuum-samples 5000 "
                        "--theta-step 0.0000628 --seed 13 --out " +
                        dir.string()) == 0);
        CHECK(run_cli("reconstruct --in " + dir.string()) == 5);
    }
}
