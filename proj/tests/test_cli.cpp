#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(MSNOW_CLI) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("msnow_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("exit codes") {
    CHECK(run("") == 1);
    CHECK(run("no-such-command") == 1);
    CHECK(run("run-uplink --noise maybe") == 1);
    CHECK(run("run-uplink --config /nonexistent/x.cfg") == 2);
    const auto d = scratch("bad");
    std::ofstream(d / "bad.cfg") << "sensors_per_subcarrier = 12\n";
    CHECK(run("run-uplink --config " + (d / "bad.cfg").string()) == 2);
    CHECK(run("sweep --out " + d.string()) == 2);
    CHECK(run("gen-pn") == 0);
    CHECK(run("verify-pn --n 5") == 0);
    CHECK(run("estimate") == 0);
}

TEST_CASE("gen-pn writes the set") {
    const auto d = scratch("pn");
    REQUIRE(run("gen-pn --seed1 010 --seed2 010 --out " + (d / "pns2.txt").string()) == 0);
    const auto text = slurp(d / "pns2.txt");
    CHECK(text.find("0101110") != std::string::npos);
    CHECK(text.find("1111101") != std::string::npos);
}

TEST_CASE("run writes reports and is reproducible") {
    const auto a = scratch("a"), b = scratch("b");
    const auto cfg = a / "s.cfg";
    std::ofstream(cfg) << "sensors_per_subcarrier = 2\npackets_per_sensor = 3\n";
    const std::string common = "run-uplink --config " + cfg.string() + " --seed 5 --dump-events --out ";
    REQUIRE(run(common + a.string()) == 0);
    REQUIRE(run(common + b.string()) == 0);
    for (const char* f : {"msnow_uplink.json", "msnow_uplink.csv", "msnow_uplink_events.csv"}) {
        CHECK(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
}

TEST_CASE("sweep writes one report per point") {
    const auto d = scratch("sweep");
    REQUIRE(run("sweep --reps 1 --grid sensors_per_subcarrier=1,2 --noise off --out " + d.string()) == 0);
    CHECK(fs::exists(d / "msnow_uplink_0.json"));
    CHECK(fs::exists(d / "msnow_uplink_1.json"));
    const auto csv = slurp(d / "msnow_uplink.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("signal dump has a header") {
    const auto d = scratch("dump");
    const auto cfg = d / "s.cfg";
    std::ofstream(cfg) << "sensors_per_subcarrier = 1\npackets_per_sensor = 1\n";
    REQUIRE(run("run-uplink --config " + cfg.string() + " --dump-signal " + (d / "sig.bin").string() + " --out " +
                d.string()) == 0);
    CHECK(fs::exists(d / "sig.bin"));
    CHECK(fs::exists(d / "sig.bin.hdr"));
    CHECK(fs::file_size(d / "sig.bin") > 0);
}
