// Drives the installed tsboot binary end to end: simulate -> fit -> ks, plus
// the machine-readable error path.
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CommandResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

CommandResult run_cli(const std::string& args) {
    const std::string cmd = std::string("TSBOOT_THREADS= '") + TSBOOT_CLI_PATH + "' " + args +
                            " 2>&1";
    std::array<char, 4096> buf{};
    std::string output;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (std::fgets(buf.data(), buf.size(), pipe)) output += buf.data();
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), output};
}

}  // namespace

TEST_CASE("simulate, fit, and ks subcommands round-trip") {
    const auto dir = fs::temp_directory_path() / "tsboot_cli_smoke";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto series_a = (dir / "a.csv").string();
    const auto series_b = (dir / "b.csv").string();

    auto sim = run_cli("simulate ar1 --theta 0.5 --sigma 1 --n 400 --seed 11 --out " + series_a);
    CHECK(sim.exit_code == 0);
    CHECK(sim.output.find("wrote 400 observations") != std::string::npos);
    CHECK(run_cli("simulate hetero_ar1 --theta 0.5 --sigma1-sq 1 --sigma2-sq 2 --n 400 "
                  "--seed 12 --out " + series_b).exit_code == 0);

    auto fit = run_cli("fit lse " + series_a);
    CHECK(fit.exit_code == 0);
    CHECK(fit.output.find("theta = ") != std::string::npos);
    CHECK(run_cli("fit lad " + series_a).exit_code == 0);
    CHECK(run_cli("fit wlse " + series_b + " --sigma1-sq 1 --sigma2-sq 2").exit_code == 0);

    auto arch = run_cli("simulate arch --c0 1 --b 0.5 --n 200 --seed 13 --out " + series_a);
    CHECK(arch.exit_code == 0);
    auto arch_fit = run_cli("fit arch_ml " + series_a + " --p 1");
    CHECK(arch_fit.exit_code == 0);
    CHECK(arch_fit.output.find("c0 = ") != std::string::npos);
    CHECK(arch_fit.output.find("b1 = ") != std::string::npos);

    auto ks = run_cli("ks " + series_a + " " + series_a);
    CHECK(ks.exit_code == 0);
    CHECK(ks.output.find("ks_value = 0") != std::string::npos);
    CHECK(ks.output.find("p_value = 1") != std::string::npos);

    fs::remove_all(dir);
}

TEST_CASE("failures exit nonzero with a machine-readable error line") {
    auto missing = run_cli("fit lse /nonexistent/series.csv");
    CHECK(missing.exit_code == 1);
    CHECK(missing.output.find("{\"error\":") != std::string::npos);

    auto bad_config = run_cli("run /nonexistent/config.json");
    CHECK(bad_config.exit_code == 1);
    CHECK(bad_config.output.find("{\"error\":") != std::string::npos);
}

TEST_CASE("ks subcommand reads pivot csvs and respects --param") {
    const auto dir = fs::temp_directory_path() / "tsboot_cli_ks";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto pivots = (dir / "p.csv").string();
    {
        std::ofstream out(pivots);
        out << "replicate,param,pivot\n";
        for (int i = 0; i < 20; ++i) {
            out << i << ",c0," << 0.1 * i << "\n";
            out << i << ",b1," << 0.2 * i << "\n";
        }
    }
    auto ambiguous = run_cli("ks " + pivots + " " + pivots);
    CHECK(ambiguous.exit_code == 1);
    CHECK(ambiguous.output.find("--param") != std::string::npos);

    auto picked = run_cli("ks " + pivots + " " + pivots + " --param c0");
    CHECK(picked.exit_code == 0);
    CHECK(picked.output.find("ks_value = 0") != std::string::npos);
    fs::remove_all(dir);
}
