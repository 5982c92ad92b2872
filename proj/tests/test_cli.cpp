// Copyright 2026 The finqbit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "finqbit/cli.hpp"

namespace fs = std::filesystem;
using finqbit::cli::run;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string &tag) {
        path = fs::temp_directory_path() /
               ("finqbit_cli_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    [[nodiscard]] std::string operator/(const std::string &name) const {
        return (path / name).string();
    }
};

struct Result {
    int code;
    std::string out, err;
};

Result cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Restores FINQBIT_SEED on scope exit.
struct SeedEnv {
    std::optional<std::string> saved;
    explicit SeedEnv(const char *value) {
        if (const char *s = std::getenv("FINQBIT_SEED")) {
            saved = s;
        }
        if (value != nullptr) {
            ::setenv("FINQBIT_SEED", value, 1);
        } else {
            ::unsetenv("FINQBIT_SEED");
        }
    }
    ~SeedEnv() {
        if (saved) {
            ::setenv("FINQBIT_SEED", saved->c_str(), 1);
        } else {
            ::unsetenv("FINQBIT_SEED");
        }
    }
};

int shell_status(const std::string &cmd) {
    const int s = std::system(cmd.c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
}

} // namespace

TEST_CASE("generate is deterministic in the seed", "[cli]") {
    SeedEnv env(nullptr);
    TempDir dir("gen");
    REQUIRE(cli({"--seed", "5", "generate", "--n", "20", "--out", dir / "a.csv"}).code == 0);
    REQUIRE(cli({"--seed", "5", "generate", "--n", "20", "--out", dir / "b.csv"}).code == 0);
    REQUIRE(cli({"--seed", "6", "generate", "--n", "20", "--out", dir / "c.csv"}).code == 0);
    REQUIRE(cli({"--seed", "5", "generate", "--n", "20", "--test", "--out", dir / "t.csv"}).code ==
            0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "a.csv") != slurp(dir / "c.csv"));
    CHECK(slurp(dir / "a.csv") != slurp(dir / "t.csv"));
    CHECK(finqbit::load_dataset(dir / "a.csv") == finqbit::generate_dataset(20, 5));
    CHECK(fs::exists(dir / "a.csv.manifest.json"));
}

TEST_CASE("validation failures exit with code 2", "[cli][error]") {
    TempDir dir("val");
    const auto r = cli({"generate", "--n", "0", "--out", dir / "x.csv"});
    CHECK(r.code == 2);
    CHECK(r.err.find("empty dataset") != std::string::npos);
    CHECK(cli({"generate", "--out", dir / "x.csv"}).code == 2);
    CHECK(cli({"nonsense"}).code == 2);
    CHECK(cli({}).code == 2);
    CHECK(cli({"stability", "--params", "p.json", "--out", "o.json", "--noise", "loud"}).code == 2);
}

TEST_CASE("missing input files exit with code 1 and name the path", "[cli][error]") {
    TempDir dir("io");
    const auto missing = dir / "absent.json";
    const auto r = cli({"evaluate", "--params", missing, "--test", dir / "absent.csv"});
    CHECK(r.code == 1);
    CHECK(r.err.find(missing) != std::string::npos);
    const auto r2 = cli({"ols", "--train", dir / "none.csv", "--test", dir / "none.csv"});
    CHECK(r2.code == 1);
    CHECK(r2.err.find("none.csv") != std::string::npos);
}

TEST_CASE("malformed parameter files are validation errors", "[cli][error]") {
    TempDir dir("bad");
    std::ofstream(dir / "p.json") << "{\"theta\": [1, 2]";
    std::ofstream(dir / "q.json") << "{\"theta\": [1, 2], \"phi\": [3]}";
    REQUIRE(cli({"generate", "--n", "5", "--out", dir / "d.csv"}).code == 0);
    CHECK(cli({"evaluate", "--params", dir / "p.json", "--test", dir / "d.csv"}).code == 2);
    CHECK(cli({"evaluate", "--params", dir / "q.json", "--test", dir / "d.csv"}).code == 2);
}

TEST_CASE("train, evaluate and report on a small run", "[cli]") {
    SeedEnv env(nullptr);
    TempDir dir("run");
    REQUIRE(cli({"--seed", "3", "generate", "--n", "40", "--out", dir / "train.csv"}).code == 0);
    REQUIRE(cli({"--seed", "3", "generate", "--n", "20", "--test", "--out", dir / "test.csv"})
                .code == 0);
    const auto t = cli({"--seed", "3", "train", "--train", dir / "train.csv", "--test",
                        dir / "test.csv", "--iters", "5", "--restarts", "2", "--out",
                        dir / "params.json", "--loss-csv", dir / "loss.csv"});
    REQUIRE(t.code == 0);
    const auto p = finqbit::cli::load_params(dir / "params.json");
    CHECK(p.ansatz == finqbit::Ansatz::finqbit());
    CHECK(fs::exists(dir / "params.json.report.json"));
    CHECK(slurp(dir / "loss.csv").rfind("iter,train_mse,val_mse\n", 0) == 0);

    const auto manifest = finqbit::cli::read_json(dir / "params.json.manifest.json");
    CHECK(manifest.at("seed") == 3);
    CHECK(manifest.at("command") == "train");
    CHECK(manifest.at("args").at(0) == "--seed");

    const auto e = cli({"evaluate", "--params", dir / "params.json", "--test", dir / "test.csv",
                        "--out", dir / "eval.json"});
    REQUIRE(e.code == 0);
    CHECK(e.out.find("finQbit") != std::string::npos);
    const auto ej = finqbit::cli::read_json(dir / "eval.json");
    CHECK(ej.at("kind") == "evaluation");
    CHECK(ej.at("metrics").at("n") == 20);

    REQUIRE(cli({"ols", "--train", dir / "train.csv", "--test", dir / "test.csv", "--out",
                 dir / "ols.json"})
                .code == 0);
    REQUIRE(cli({"report", "--run-dir", dir.path.string()}).code == 0);
    const auto first = slurp(dir / "report.md");
    CHECK(first.find("not run") != std::string::npos);
    CHECK(first.find("OLS") != std::string::npos);
    REQUIRE(cli({"report", "--run-dir", dir.path.string()}).code == 0);
    CHECK(slurp(dir / "report.md") == first);
}

TEST_CASE("report on an empty directory marks every section not run", "[cli]") {
    TempDir dir("empty");
    REQUIRE(cli({"report", "--run-dir", dir.path.string(), "--out", dir / "r.md"}).code == 0);
    const auto text = slurp(dir / "r.md");
    CHECK(text.find("not run") != std::string::npos);
    CHECK(cli({"report", "--run-dir", dir / "missing"}).code == 1);
}

TEST_CASE("replay reproduces the recorded output", "[cli]") {
    SeedEnv env(nullptr);
    TempDir dir("replay");
    REQUIRE(cli({"--seed", "17", "generate", "--n", "15", "--out", dir / "d.csv"}).code == 0);
    const auto before = slurp(dir / "d.csv");
    fs::remove(dir / "d.csv");
    {
        // A different environment seed must not leak into the replay.
        SeedEnv other("99");
        REQUIRE(cli({"replay", dir / "d.csv.manifest.json"}).code == 0);
    }
    CHECK(slurp(dir / "d.csv") == before);
}

TEST_CASE("seed precedence: flag over environment over default", "[cli]") {
    TempDir dir("seed");
    {
        SeedEnv env("7");
        REQUIRE(cli({"generate", "--n", "10", "--out", dir / "env.csv"}).code == 0);
        REQUIRE(cli({"--seed", "8", "generate", "--n", "10", "--out", dir / "flag.csv"}).code == 0);
    }
    {
        SeedEnv env(nullptr);
        REQUIRE(cli({"--seed", "7", "generate", "--n", "10", "--out", dir / "s7.csv"}).code == 0);
        REQUIRE(cli({"--seed", "8", "generate", "--n", "10", "--out", dir / "s8.csv"}).code == 0);
        REQUIRE(cli({"generate", "--n", "10", "--out", dir / "none.csv"}).code == 0);
        REQUIRE(cli({"--seed", "0", "generate", "--n", "10", "--out", dir / "s0.csv"}).code == 0);
    }
    CHECK(slurp(dir / "env.csv") == slurp(dir / "s7.csv"));
    CHECK(slurp(dir / "flag.csv") == slurp(dir / "s8.csv"));
    CHECK(slurp(dir / "none.csv") == slurp(dir / "s0.csv"));
    {
        SeedEnv env("seven");
        CHECK(cli({"generate", "--n", "10", "--out", dir / "bad.csv"}).code == 2);
    }
}

TEST_CASE("an unconverged compression exits with code 3", "[cli]") {
    SeedEnv env(nullptr);
    TempDir dir("compress");
    const auto p = finqbit::initial_params(finqbit::Ansatz::finqbit(), 1);
    finqbit::cli::write_json(dir / "p.json", finqbit::to_json(p));
    const auto r = cli({"compress", "--params", dir / "p.json", "--tol", "1e-14", "--iters", "1",
                        "--restarts", "1", "--out-dir", dir / "out"});
    CHECK(r.code == 3);
    CHECK(fs::exists(dir / "out/compression.json"));
    CHECK(fs::exists(dir / "out/original_0.qasm"));
    CHECK(fs::exists(dir / "out/manifest.json"));

    const auto ok = cli({"compress", "--params", dir / "p.json", "--out-dir", dir / "ok"});
    CHECK(ok.code == 0);
    const auto j = finqbit::cli::read_json(dir / "ok/compression.json");
    for (const auto &pt : j.at("points")) {
        CHECK(pt.at("cnots_compressed") == 3);
        CHECK(pt.at("cnots_original") == 8);
    }
}

TEST_CASE("process exit status", "[cli][process]") {
    const std::string bin = FINQBIT_CLI_PATH;
    TempDir dir("proc");
    CHECK(shell_status(bin + " --help > /dev/null") == 0);
    CHECK(shell_status(bin + " generate --n 0 --out " + (dir / "x.csv") + " 2> /dev/null") == 2);
    CHECK(shell_status(bin + " evaluate --params " + (dir / "none.json") + " --test " +
                       (dir / "none.csv") + " 2> /dev/null") == 1);
    CHECK(shell_status(bin + " generate --n 3 --out " + (dir / "y.csv") + " > /dev/null") == 0);
}
