#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ctrg/bell.hpp"

#ifndef CTRG_CLI_PATH
#error "CTRG_CLI_PATH must point at the ctrg binary"
#endif

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path outfile = dir / "stdout.txt";
    const std::string cmd = std::string("cd ") + dir.string() + " && CTRG_THREADS=2 " +
                            CTRG_CLI_PATH + " " + args + " > " + outfile.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(rc);
    std::ifstream is(outfile);
    std::ostringstream ss;
    ss << is.rdbuf();
    r.out = ss.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path d = fs::temp_directory_path() / ("ctrg_cli_" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

} // namespace

TEST_CASE("usage errors exit with code 2") {
    const auto dir = fresh_dir("usage");
    CHECK(run_cli("bound", dir).exit_code == 2);          // missing --I
    CHECK(run_cli("nonsense", dir).exit_code == 2);       // unknown subcommand
    CHECK(run_cli("bound --I 5 --method analytic --zero-curve closed-form", dir).exit_code ==
          2); // out of range
}

TEST_CASE("bound command echoes its config and prints the value") {
    const auto dir = fresh_dir("bound");
    const auto r =
        run_cli("bound --I 2.0732 --chi 0.0030 --method analytic --zero-curve closed-form", dir);
    REQUIRE(r.exit_code == 0);
    const auto echo = nlohmann::json::parse(first_line(r.out));
    CHECK(echo.at("command") == "bound");
    CHECK(echo.at("I").get<double>() == doctest::Approx(2.0732));
    CHECK(r.out.find("P* = 0.9966") != std::string::npos);
}

TEST_CASE("lp bound at the signaling corner") {
    const auto dir = fresh_dir("lp");
    const auto r = run_cli("bound --I 2 --delta 0 --method lp", dir);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("P* = 1 ") != std::string::npos);
}

TEST_CASE("config file values merge under explicit flags") {
    const auto dir = fresh_dir("config");
    {
        std::ofstream os(dir / "cfg.json");
        os << R"({"I": 2.0732, "chi": 0.0030, "method": "analytic", "zero-curve": "closed-form"})";
    }
    const auto r = run_cli("bound --config cfg.json", dir);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("P* = 0.9966") != std::string::npos);
    // A flag overrides the file value.
    const auto r2 = run_cli("bound --config cfg.json --chi 0", dir);
    REQUIRE(r2.exit_code == 0);
    CHECK(r2.out.find("P* = 0.981") != std::string::npos);
    // Unknown keys are rejected.
    {
        std::ofstream os(dir / "bad.json");
        os << R"({"I": 2.5, "frobnicate": 1})";
    }
    CHECK(run_cli("bound --config bad.json", dir).exit_code == 2);
}

TEST_CASE("certify writes deterministic artifacts") {
    const auto dir = fresh_dir("certify");
    const std::string args =
        "certify --model ideal --n 20000 --seed 42 --chi 0 --method analytic "
        "--zero-curve closed-form --eps-sec 1e-6 --out-dir .";
    const auto r1 = run_cli(args, dir);
    REQUIRE(r1.exit_code == 0);
    const auto cert1 = slurp(dir / "certificate.json");
    const auto bits1 = slurp(dir / "bits.bin");
    const auto hex1 = slurp(dir / "bits.hex");
    CHECK(!cert1.empty());
    CHECK(!bits1.empty());
    const auto r2 = run_cli(args, dir);
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp(dir / "certificate.json") == cert1);
    CHECK(slurp(dir / "bits.bin") == bits1);
    CHECK(slurp(dir / "bits.hex") == hex1);
    CHECK(r1.out == r2.out);

    const auto cert = nlohmann::json::parse(cert1);
    CHECK(cert.at("output_length").get<std::uint64_t>() > 0);
}

TEST_CASE("deterministic model certifies zero bits with exit 0") {
    const auto dir = fresh_dir("zerobits");
    const auto r = run_cli(
        "certify --model deterministic --n 5000 --seed 1 --chi 0 --method analytic "
        "--zero-curve closed-form --out-dir .",
        dir);
    REQUIRE(r.exit_code == 0);
    const auto cert = nlohmann::json::parse(slurp(dir / "certificate.json"));
    CHECK(cert.at("output_length").get<std::uint64_t>() == 0);
}

TEST_CASE("chi command reports the model estimates") {
    const auto dir = fresh_dir("chi");
    const auto r = run_cli("chi --model josephson --pA 0.0059 --pB 0.0031", dir);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("model chi upper bound = 0.003") != std::string::npos);
    const auto r2 = run_cli("chi --model ion --epsilon 0.03", dir);
    REQUIRE(r2.exit_code == 0);
    CHECK(r2.out.find("model chi upper bound = 0.0166") != std::string::npos);
    CHECK(run_cli("chi", dir).exit_code == 2);
    CHECK(run_cli("chi --behavior missing.json", dir).exit_code == 2);
}

TEST_CASE("chi command lower-bounds a behavior file") {
    const auto dir = fresh_dir("chibeh");
    {
        std::ofstream os(dir / "pr.json");
        os << ctrg::pr_box().to_json();
    }
    const auto r = run_cli("chi --behavior pr.json --skip-di", dir);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("delta/2N lower bound = 0") != std::string::npos);
}

TEST_CASE("curve output is a deterministic csv with ordered columns") {
    const auto dir = fresh_dir("curve");
    const std::string args =
        "curve --chi 0.01 --steps 3 --methods shifted --out curve.csv";
    const auto r1 = run_cli(args, dir);
    REQUIRE(r1.exit_code == 0);
    const auto csv1 = slurp(dir / "curve.csv");
    CHECK(csv1.rfind("I,shifted,status", 0) == 0);
    const auto r2 = run_cli(args, dir);
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp(dir / "curve.csv") == csv1);
    // One data row per step, all flagged ok.
    int lines = 0;
    for (const char c : csv1)
        if (c == '\n') ++lines;
    CHECK(lines == 4);
    CHECK(csv1.find("failed") == std::string::npos);
}

TEST_CASE("problem dumps solve back to the same value") {
    const auto dir = fresh_dir("dump");
    const auto r1 = run_cli(
        "bound --I 2.5 --chi 0.002 --method sdp --level l1 --export-problem prob.json", dir);
    REQUIRE(r1.exit_code == 0);
    const auto r2 = run_cli("solve-json --problem prob.json --report report.json", dir);
    REQUIRE(r2.exit_code == 0);
    CHECK(r2.out.find("revalidated = yes") != std::string::npos);
    const auto rep = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(rep.at("status") == "optimal");
}
