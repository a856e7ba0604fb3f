#include <doctest.h>

#include "tempdir.hpp"

#include <argonet/synthetic.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

namespace fs = std::filesystem;
using testdata::slurp;
using testdata::TempDir;

namespace {

const char* kConfig = R"({
  "data": {"cases": "cases.csv", "search": "search.csv", "media": "media.csv", "mechanistic": "mechanistic.csv"},
  "augmentation": {"n_bootstrap": 10},
  "lasso": {"folds": 3, "n_lambda": 10},
  "ensemble": {"runs": 2},
  "seed": 7,
  "backtest": {"start": "2020-02-03", "end": "2020-02-09"},
  "scenario": {"subpopulations": 4, "population": 10000, "days": 20, "runs": 3}
})";

struct Workspace {
    TempDir dir;
    fs::path config;

    Workspace() {
        argonet::SyntheticOptions opt;
        opt.regions = 8;
        opt.days = 30;
        argonet::write_inputs(argonet::generate_synthetic(opt).panel, dir.path());
        config = dir.write("config.json", kConfig);
    }
};

int run(const std::string& args) {
    const std::string cmd = std::string(ARGONET_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.starts_with("#")) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        rows.push_back(std::move(f));
    }
    return rows;
}

}  // namespace

TEST_CASE("every subcommand succeeds and every output starts with the header") {
    Workspace ws;
    const fs::path out = ws.dir.path() / "out";
    for (const char* cmd : {"ingest", "cluster", "simulate", "forecast", "backtest", "report"}) {
        CAPTURE(cmd);
        CHECK(run(std::string(cmd) + " --config " + q(ws.config) + " --out " + q(out)) == 0);
    }
    for (const char* name : {"validation.csv", "partition.csv", "dendrogram.csv", "mechanistic.csv", "forecasts.csv",
                             "eval.csv", "coefficient_traces.csv", "models.txt", "resolved_config.json"}) {
        CAPTURE(name);
        REQUIRE(fs::exists(out / name));
        CHECK(slurp(out / name).starts_with("# config_hash="));
    }
    CHECK(slurp(out / "resolved_config.json").find(" seed=7\n") != std::string::npos);
}

TEST_CASE("resolved config can be fed back") {
    Workspace ws;
    const fs::path a = ws.dir.path() / "a";
    REQUIRE(run("ingest --config " + q(ws.config) + " --out " + q(a)) == 0);
    const fs::path copy = ws.dir.write("again.json", slurp(a / "resolved_config.json"));
    const fs::path b = ws.dir.path() / "b";
    REQUIRE(run("ingest --config " + q(copy) + " --out " + q(b)) == 0);
    CHECK(slurp(a / "resolved_config.json") == slurp(b / "resolved_config.json"));
}

TEST_CASE("backtest reruns are byte-identical, also across --jobs") {
    Workspace ws;
    const fs::path a = ws.dir.path() / "a", b = ws.dir.path() / "b", c = ws.dir.path() / "c";
    REQUIRE(run("backtest --config " + q(ws.config) + " --out " + q(a)) == 0);
    REQUIRE(run("backtest --config " + q(ws.config) + " --out " + q(b)) == 0);
    REQUIRE(run("backtest --config " + q(ws.config) + " --jobs 3 --out " + q(c)) == 0);
    for (const char* name : {"forecasts.csv", "eval.csv", "coefficient_traces.csv", "partition.csv", "models.txt"}) {
        CAPTURE(name);
        const std::string ref = slurp(a / name);
        CHECK(!ref.empty());
        CHECK(ref == slurp(b / name));
        CHECK(ref == slurp(c / name));
    }
}

TEST_CASE("--seed changes the header and the augmented forecasts") {
    Workspace ws;
    const fs::path a = ws.dir.path() / "a", b = ws.dir.path() / "b";
    REQUIRE(run("forecast --config " + q(ws.config) + " --out " + q(a)) == 0);
    REQUIRE(run("forecast --config " + q(ws.config) + " --seed 8 --out " + q(b)) == 0);
    const std::string fa = slurp(a / "forecasts.csv"), fb = slurp(b / "forecasts.csv");
    CHECK(fa.find(" seed=7\n") != std::string::npos);
    CHECK(fb.find(" seed=8\n") != std::string::npos);
    CHECK(fa.substr(fa.find('\n')) != fb.substr(fb.find('\n')));
}

TEST_CASE("persistence-only run compares persistence with itself") {
    Workspace ws;
    const fs::path out = ws.dir.path() / "p";
    REQUIRE(run("backtest --config " + q(ws.config) + " --models persistence --out " + q(out)) == 0);
    const auto rows = csv_rows(out / "eval.csv");
    REQUIRE(rows.size() > 1);
    REQUIRE(rows[0][1] == "model");
    REQUIRE(rows[0][4] == "relative_improvement");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][1] == "persistence");
        CHECK(rows[i][4] == "1");
    }
}

TEST_CASE("report reproduces the eval written by backtest") {
    Workspace ws;
    const fs::path out = ws.dir.path() / "r";
    REQUIRE(run("backtest --config " + q(ws.config) + " --out " + q(out)) == 0);
    const std::string before = slurp(out / "eval.csv");
    REQUIRE(run("report --config " + q(ws.config) + " --out " + q(out)) == 0);
    CHECK(slurp(out / "eval.csv") == before);
}

TEST_CASE("usage errors exit with 1") {
    Workspace ws;
    CHECK(run("") == 1);
    CHECK(run("frobnicate --config " + q(ws.config)) == 1);
    CHECK(run("ingest") == 1);
    CHECK(run("ingest --config " + q(ws.dir.path() / "missing.json")) == 1);
    CHECK(run("ingest --config " + q(ws.config) + " --jobs 0") == 1);
    CHECK(run("backtest --config " + q(ws.config) + " --models nonsense") == 1);
    const fs::path unknown = ws.dir.write("unknown.json", R"({"bogus": 1})");
    CHECK(run("ingest --config " + q(unknown)) == 1);
    const fs::path wrong_type = ws.dir.write("type.json", R"({"seed": "seven"})");
    CHECK(run("ingest --config " + q(wrong_type)) == 1);
}

TEST_CASE("data validation errors exit with 2") {
    Workspace ws;
    std::string cases = slurp(ws.dir.path() / "cases.csv");
    const auto line2 = cases.find('\n', cases.find('\n') + 1);
    cases.insert(line2, "x");
    ws.dir.write("cases.csv", cases);
    CHECK(run("ingest --config " + q(ws.config) + " --out " + q(ws.dir.path() / "o")) == 2);

    const fs::path empty = ws.dir.path() / "empty";
    fs::create_directories(empty);
    std::ofstream(empty / "cases.csv") << "pairs,of,nothing\n";
    const fs::path cfg = empty / "config.json";
    std::ofstream(cfg) << R"({"data": {"cases": "cases.csv"}})";
    CHECK(run("ingest --config " + q(cfg) + " --out " + q(empty / "o")) == 2);
}

TEST_CASE("runtime failures exit with 3") {
    Workspace ws;
    const fs::path blocker = ws.dir.write("blocker", "not a directory");
    CHECK(run("ingest --config " + q(ws.config) + " --out " + q(blocker / "sub")) == 3);
}
