// Golden-run tests of the command-line front end: exit codes, JSON shape,
// and determinism. The binary path arrives through the MAHLER_CLI env var.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

std::string cli_path() {
    const char* p = std::getenv("MAHLER_CLI");
    REQUIRE(p != nullptr);
    return p;
}

struct RunResult {
    int exit_code;
    std::string stdout_text;
};

RunResult run(const std::string& args) {
    std::string out_file = "/tmp/mahler_cli_out.txt";
    std::string cmd = cli_path() + " " + args + " > " + out_file + " 2>/dev/null";
    int rc = std::system(cmd.c_str());
    int code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    return {code, ss.str()};
}

// strip the timestamped meta line so runs can be compared byte-for-byte
std::string without_meta(const std::string& text) {
    std::stringstream in(text), out;
    std::string line;
    while (std::getline(in, line))
        if (line.find("\"record\":\"meta\"") == std::string::npos) out << line << "\n";
    return out.str();
}

double extract_number(const std::string& text, const std::string& key) {
    auto pos = text.find("\"" + key + "\":");
    REQUIRE(pos != std::string::npos);
    return std::strtod(text.c_str() + pos + key.size() + 3, nullptr);
}

}  // namespace

TEST_CASE("transform: summary with tiny Fenchel-Young violation") {
    auto r = run("transform --spec \"pnorm p=1\" --n 2 --nodes 129");
    CHECK(r.exit_code == 0);
    CHECK(std::abs(extract_number(r.stdout_text, "fenchel_young_violation")) < 1e-12);
}

TEST_CASE("transform: bad spec exits 2") {
    CHECK(run("transform --spec \"nonsense a=1\" --n 2 --nodes 65").exit_code == 2);
}

TEST_CASE("transform: undersized dual range exits 3") {
    auto r = run("transform --spec \"gaussian scale=1\" --n 2 --nodes 65 --dual-range 1.0");
    CHECK(r.exit_code == 3);
}

TEST_CASE("volume-product: gaussian lands on the Santalo value") {
    auto r = run("volume-product --spec \"gaussian scale=1\" --n 2 --nodes 257");
    CHECK(r.exit_code == 0);
    double p = extract_number(r.stdout_text, "P");
    CHECK(std::abs(p - 39.478417604357434476) < 1e-6);  // exact path
}

TEST_CASE("volume-product: parallelogram indicator gives 16") {
    auto r = run(
        "volume-product --spec \"parallelogram_indicator u1=[1.3,0.2] u2=[-0.4,0.9]\" --n 2");
    CHECK(r.exit_code == 0);
    CHECK(std::abs(extract_number(r.stdout_text, "P") - 16.0) < 1e-9);
}

TEST_CASE("volume-product: scale sweep emits the table") {
    auto r = run("volume-product --spec \"gaussian scale=1\" --n 2 --scale-sweep 0.5:2:4");
    CHECK(r.exit_code == 0);
    int rows = 0;
    std::stringstream in(r.stdout_text);
    std::string line;
    while (std::getline(in, line))
        if (line.find("scale_sweep") != std::string::npos) ++rows;
    CHECK(rows == 4);
}

TEST_CASE("volume-product: non-coercive spec exits 4") {
    auto r = run("volume-product --spec \"max_affine seed=1 k=1 quad_eps=0\" --n 2 --nodes 65");
    CHECK(r.exit_code == 4);
}

TEST_CASE("equipartition: gaussian map and skewed quadratic residuals") {
    auto r = run("equipartition --spec \"gaussian scale=1\" --n 2");
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.find("\"residual_mass\":") != std::string::npos);

    auto rs = run(
        "equipartition --spec \"gaussian scale=1 map=[[1.2,0.5],[0,0.9]]\" --n 2");
    CHECK(rs.exit_code == 0);
    CHECK(extract_number(rs.stdout_text, "residual_mass") < 1e-6);
    CHECK(extract_number(rs.stdout_text, "residual_axis") < 1e-6);
}

TEST_CASE("equipartition: regularize schedule emits stages within the bound") {
    auto r = run(
        "equipartition --spec \"pnorm p=1\" --n 2 --nodes 257 --regularize-schedule 4,16");
    CHECK(r.exit_code == 0);
    int stages = 0;
    std::stringstream in(r.stdout_text);
    std::string line;
    while (std::getline(in, line))
        if (line.find("regularize_stage") != std::string::npos) {
            ++stages;
            CHECK(extract_number(line, "map_norm") <= extract_number(line, "norm_bound"));
        }
    CHECK(stages == 2);
}

TEST_CASE("config file values are used and flags override them") {
    std::string cfg_path = "/tmp/mahler_cli_cfg.json";
    {
        std::ofstream cfg(cfg_path);
        cfg << "{\"spec\": \"pnorm p=1\", \"n\": 2, \"nodes\": 65}\n";
    }
    auto r = run("volume-product --config " + cfg_path);
    CHECK(r.exit_code == 0);
    CHECK(std::abs(extract_number(r.stdout_text, "P") - 16.0) < 1e-9);
    // flag overrides the file's spec
    auto r2 = run("volume-product --config " + cfg_path + " --spec \"gaussian scale=1\"");
    CHECK(std::abs(extract_number(r2.stdout_text, "P") - 39.4784176) < 1e-4);
    std::remove(cfg_path.c_str());
}

TEST_CASE("identical config and seed give byte-identical output modulo the timestamp") {
    std::string args = "volume-product --spec \"max_affine seed=3 k=5 quad_eps=0.01\" --n 2 "
                       "--nodes 129 --scale-sweep 0.5:2:3";
    auto a = run(args);
    auto b = run(args);
    CHECK(a.exit_code == 0);
    CHECK(without_meta(a.stdout_text) == without_meta(b.stdout_text));
    CHECK(without_meta(a.stdout_text).find("17") != std::string::npos);
}

TEST_CASE("verify: smoke suite passes and writes the aggregate CSV") {
    auto r = run("verify --suite smoke --seed 7 --out /tmp/mahler_cli_verify");
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.find("\"all_pass\":true") != std::string::npos);
    std::ifstream csv("/tmp/mahler_cli_verify.csv");
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "check,spec,lhs,rhs,margin,tol,pass");
    int rows = 0;
    std::string line;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows > 10);
    std::remove("/tmp/mahler_cli_verify.csv");
    std::remove("/tmp/mahler_cli_verify.jsonl");
}

TEST_CASE("verify: unknown suite exits 2") {
    CHECK(run("verify --suite bogus").exit_code == 2);
}
