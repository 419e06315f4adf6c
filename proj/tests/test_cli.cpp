#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = FOLHODGE_CLI_PATH;

int run(const std::string& args) {
    const int rc = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

fs::path scratch() {
    const fs::path dir = fs::temp_directory_path() / "folhodge_cli_tests";
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const std::string& name, const std::string& body) {
    const fs::path path = scratch() / name;
    std::ofstream out(path, std::ios::binary);
    out << body;
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kCircleConfig = R"({
  "model": {
    "kind": "product",
    "leaf": {"dim": 1, "sizes": [24], "spacings": [0.041666666666666664]},
    "transversal_samples": [[0.0]]
  },
  "potential": {"terms": [{"coeff": 1.0, "freq_h": [1], "freq_v": [0],
                           "phase_h": ["cos"], "phase_v": ["cos"]}]},
  "epsilons": [0.0, 1.0, 2.0],
  "seed": 3,
  "output_dir": "."
})";

}  // namespace

TEST_CASE("betti command: invariant rows, exit 0, report written") {
    const fs::path cfg = write_config("circle.json", kCircleConfig);
    const fs::path out = scratch() / "betti_out";
    REQUIRE(run("betti --config " + cfg.string() + " --out " + out.string() +
                " --quiet") == 0);
    const std::string body = slurp(out / "betti.json");
    CHECK(body.find("\"invariant\": true") != std::string::npos);
    CHECK(body.find("\"pass\": true") != std::string::npos);
    CHECK(body.find("\"lambda_dimensions\"") != std::string::npos);
}

TEST_CASE("witten-sweep command writes RFC-4180 CSV and a summary") {
    const fs::path cfg = write_config("circle.json", kCircleConfig);
    const fs::path out = scratch() / "sweep_out";
    REQUIRE(run("witten-sweep --config " + cfg.string() + " --out " + out.string() +
                " --quiet") == 0);
    const std::string csv = slurp(out / "sweep.csv");
    CHECK(csv.rfind("epsilon,degree,eigenvalue_index,eigenvalue\r\n", 0) == 0);
    CHECK(csv.find("\r\n0,0,0,") != std::string::npos);
    // every record is CRLF-terminated: no bare LF anywhere
    for (size_t i = 0; i < csv.size(); ++i)
        if (csv[i] == '\n') REQUIRE(csv[i - 1] == '\r');
    const std::string summary = slurp(out / "sweep_summary.json");
    CHECK(summary.find("\"kernel_dim\": 1") != std::string::npos);
}

TEST_CASE("morse-scan command on the separable example") {
    const fs::path cfg = write_config("morse.json", R"({
      "model": {
        "kind": "product",
        "leaf": {"dim": 1, "sizes": [24], "spacings": [0.041666666666666664]},
        "transversal_samples": [[0.1],[0.3],[0.5],[0.7],[0.9]]
      },
      "potential": {"terms": [
        {"coeff": 2.0, "freq_h": [1], "freq_v": [0], "phase_h": ["cos"], "phase_v": ["cos"]},
        {"coeff": 1.0, "freq_h": [1], "freq_v": [1], "phase_h": ["cos"], "phase_v": ["cos"]}
      ]},
      "seed": 1,
      "output_dir": "."
    })");
    const fs::path out = scratch() / "morse_out";
    REQUIRE(run("morse-scan --config " + cfg.string() + " --out " + out.string() +
                " --quiet") == 0);
    const std::string body = slurp(out / "morse.json");
    CHECK(body.find("\"almost_morse_verdict\": \"good\"") != std::string::npos);
    CHECK(body.find("\"morse_inequalities\"") != std::string::npos);
}

TEST_CASE("hodge-check command passes clean and fails corrupted") {
    const fs::path cfg = write_config("circle.json", kCircleConfig);
    const fs::path out = scratch() / "hodge_out";
    REQUIRE(run("hodge-check --config " + cfg.string() + " --out " + out.string() +
                " --quiet") == 0);
    CHECK(slurp(out / "hodge.json").find("\"pass\": true") != std::string::npos);

    // fault injection: a corrupted differential must be caught with exit 2
    std::string bad = kCircleConfig;
    bad.insert(bad.rfind('}'), R"(, "fault_injection": {"corrupt_d": true})");
    const fs::path bad_cfg = write_config("bad.json", bad);
    CHECK(run("hodge-check --config " + bad_cfg.string() + " --out " +
              (scratch() / "hodge_bad").string() + " --quiet") == 2);
}

TEST_CASE("operational errors exit 1 with structured JSON") {
    SECTION("unknown config key") {
        const fs::path cfg = write_config("typo.json", R"({"mode": {}})");
        CHECK(run("betti --config " + cfg.string() + " --quiet") == 1);
    }
    SECTION("missing config file") {
        CHECK(run("betti --config /nonexistent.json --quiet") == 1);
    }
    SECTION("epsilon beyond the overflow budget") {
        std::string big = kCircleConfig;
        const size_t pos = big.find("[0.0, 1.0, 2.0]");
        big.replace(pos, 15, "[0.0, 1000000.0]");
        const fs::path cfg = write_config("big_eps.json", big);
        const fs::path out = scratch() / "overflow_out";
        CHECK(run("betti --config " + cfg.string() + " --out " + out.string() +
                  " --quiet") == 1);
        CHECK(slurp(out / "error.json").find("overflow budget") != std::string::npos);
    }
    SECTION("empty epsilon list for a sweep") {
        std::string empty = kCircleConfig;
        const size_t pos = empty.find("[0.0, 1.0, 2.0]");
        empty.replace(pos, 15, "[]");
        const fs::path cfg = write_config("no_eps.json", empty);
        CHECK(run("witten-sweep --config " + cfg.string() + " --quiet") == 1);
    }
    SECTION("morse-scan without a potential") {
        const fs::path cfg = write_config("no_phi.json", R"({
          "model": {
            "kind": "product",
            "leaf": {"dim": 1, "sizes": [24], "spacings": [0.041666666666666664]},
            "transversal_samples": [[0.0]]
          }
        })");
        CHECK(run("morse-scan --config " + cfg.string() + " --quiet") == 1);
    }
}

TEST_CASE("identical config and seed give byte-identical reports") {
    const fs::path cfg = write_config("circle.json", kCircleConfig);
    const fs::path a = scratch() / "det_a", b = scratch() / "det_b";
    for (const std::string sub : {"betti", "witten-sweep", "hodge-check"}) {
        REQUIRE(run(sub + " --config " + cfg.string() + " --out " + a.string() +
                    " --seed 11 --quiet") == 0);
        REQUIRE(run(sub + " --config " + cfg.string() + " --out " + b.string() +
                    " --seed 11 --quiet") == 0);
    }
    for (const char* name : {"betti.json", "sweep.csv", "sweep_summary.json", "hodge.json"})
        CHECK(slurp(a / name) == slurp(b / name));
}
