#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
};

Outcome cli(const std::string& args) {
    const std::string cmd = std::string(SEQSENSE_CLI) + " " + args + " 2>&1";
    Outcome r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int data_lines(const std::string& csv) {
    int n = 0;
    std::istringstream in(csv);
    for (std::string line; std::getline(in, line);)
        if (!line.empty() && line[0] != '#') ++n;
    return n;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("seqsense_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

const std::string kConfig = std::string(SEQSENSE_SOURCE_DIR) + "/configs/gaussian.ini";

}  // namespace

TEST_CASE("run writes one row per sweep point and repeats exactly") {
    TempDir tmp;
    const auto a = tmp.path / "a.csv", b = tmp.path / "b.csv";
    const std::string args = "run --config " + kConfig + " --trials 300 --sweep 0.1,0.01 --threads 1 --out ";
    REQUIRE(cli(args + a.string()).code == 0);
    REQUIRE(cli(args + b.string()).code == 0);
    const auto text = slurp(a);
    CHECK(data_lines(text) == 3);
    CHECK(text == slurp(b));
    CHECK(text.find("# config_hash=") != std::string::npos);
}

TEST_CASE("analyze and calibrate") {
    TempDir tmp;
    const auto a = tmp.path / "an.csv", b = tmp.path / "an2.csv";
    REQUIRE(cli("analyze --config " + kConfig + " --sweep 0.01 --threads 1 --out " + a.string()).code == 0);
    REQUIRE(cli("analyze --config " + kConfig + " --sweep 0.01 --threads 2 --out " + b.string()).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(data_lines(slurp(a)) > 1);

    const auto c = tmp.path / "cal.csv";
    const auto ok = cli("calibrate --config " + kConfig + " --trials 300 --target-pfa 0.5 --target-pmd 0.5 "
                        "--sweep 0.001,0.1,0.01 --threads 1 --out " + c.string());
    CHECK(ok.code == 0);
    CHECK(slurp(c).find("\n0.1,") != std::string::npos);
    const auto bad = cli("calibrate --config " + kConfig + " --trials 200 --target-pfa 1e-9 --target-pmd 1e-9 "
                         "--sweep 0.1 --threads 1 --out " + c.string());
    CHECK(bad.code == 4);
}

TEST_CASE("config errors exit with 2") {
    TempDir tmp;
    const auto cfg = tmp.path / "bad.ini";
    std::ofstream(cfg) << "[system]\nb0 = 1\n";
    const auto r = cli("run --config " + cfg.string());
    CHECK(r.code == 2);
    CHECK(r.out.find("system.nodes") != std::string::npos);
    CHECK(cli("run --config " + (tmp.path / "missing.ini").string()).code == 2);
    std::ofstream(cfg) << "[system]\nnodes = 1\n[run]\nsweep = 5\n";
    const auto r2 = cli("analyze --config " + cfg.string());
    CHECK(r2.code == 2);
    CHECK(r2.out.find("run.sweep") != std::string::npos);
}
