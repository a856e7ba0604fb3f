#include <doctest.h>

#include "tempdir.hpp"

#include <argonet/app.hpp>
#include <argonet/config.hpp>
#include <argonet/ingest.hpp>

#include <sstream>

using namespace argonet;
using testdata::TempDir;

namespace {

const std::string kCasesHeader = "date,region,confirmed,suspected,deaths,cumulative\n";

InputFiles bundled() {
    const std::filesystem::path dir = ARGONET_TEST_DATA;
    return {dir / "cases.csv", dir / "search.csv", dir / "media.csv", dir / "mechanistic.csv", false};
}

std::string small_cases() {
    return kCasesHeader +
           "2020-01-01,A,1,0,0,1\n2020-01-01,B,2,0,0,2\n"
           "2020-01-02,A,3,0,0,4\n2020-01-02,B,1,0,0,3\n"
           "2020-01-03,A,2,1,0,6\n2020-01-03,B,0,0,0,3\n"
           "2020-01-04,A,5,0,1,11\n2020-01-04,B,4,0,0,7\n";
}

}  // namespace

TEST_CASE("bundled dataset ingests without findings") {
    const auto res = ingest(bundled());
    CHECK(res.report.findings() == 0);
    CHECK(res.mechanistic_available);
    CHECK(res.panel.region_count() == 32);
    CHECK(res.panel.has_signal("search:fever"));
    CHECK(res.panel.has_signal("media"));
}

TEST_CASE("search terms can be summed into one signal") {
    auto files = bundled();
    files.sum_search_terms = true;
    const auto res = ingest(files);
    CHECK(res.panel.has_signal("search"));
    CHECK(!res.panel.has_signal("search:fever"));
}

TEST_CASE("header mismatch is rejected with a location") {
    TempDir dir;
    InputFiles f;
    f.cases = dir.write("cases.csv", "date,region,confirmed\n2020-01-01,A,1\n");
    CHECK_THROWS_WITH_AS(ingest(f), doctest::Contains("cases.csv:1:1: header"), DataError);
}

TEST_CASE("malformed rows report file, line and column") {
    TempDir dir;
    InputFiles f;
    f.cases = dir.write("cases.csv", kCasesHeader + "2020-01-01,A,1,0,0,1\n2020-01-02,A,x,0,0,1\n");
    CHECK_THROWS_WITH_AS(ingest(f), doctest::Contains("cases.csv:3:3: not a number"), DataError);
    f.cases = dir.write("cases.csv", kCasesHeader + "2020-13-01,A,1,0,0,1\n");
    CHECK_THROWS_WITH_AS(ingest(f), doctest::Contains("cases.csv:2:1: invalid date"), DataError);
    f.cases = dir.write("cases.csv", kCasesHeader + "2020-01-01,A,-1,0,0,1\n");
    CHECK_THROWS_WITH_AS(ingest(f), doctest::Contains("cases.csv:2:3: negative"), DataError);
    f.cases = dir.write("cases.csv", kCasesHeader + "2020-01-01,A,1,0,0\n");
    CHECK_THROWS_WITH_AS(ingest(f), doctest::Contains("cases.csv:2:"), DataError);
}

TEST_CASE("duplicate rows are rejected") {
    TempDir dir;
    InputFiles f;
    f.cases = dir.write("cases.csv", kCasesHeader + "2020-01-01,A,1,0,0,1\n2020-01-01,A,2,0,0,2\n");
    CHECK_THROWS_WITH_AS(ingest(f), doctest::Contains("duplicate"), DataError);
    f.cases = dir.write("cases.csv", small_cases());
    f.media = dir.write("media.csv", "date,region,article_count\n2020-01-01,A,1\n2020-01-01,A,1\n");
    CHECK_THROWS_WITH_AS(ingest(f), doctest::Contains("media.csv:3:1: duplicate"), DataError);
}

TEST_CASE("comments, blank lines, a BOM and NA cells are accepted") {
    TempDir dir;
    InputFiles f;
    f.cases = dir.write("cases.csv", "\xEF\xBB\xBF# exported\n" + kCasesHeader +
                                         "2020-01-01,A,1,0,0,1\n\n2020-01-02,A,NA,0,0,1\n2020-01-03,A,,0,0,2\n"
                                         "2020-01-04,A,3,0,0,5\n");
    const auto res = ingest(f);
    CHECK(!res.panel.get("confirmed", 0, 1));
    const auto agg = aggregate(res.panel);
    CHECK(agg.value("confirmed", 0, 0) == 1);
    CHECK(agg.value("confirmed", 0, 1) == 3);
    const auto imp = impute(res.panel);
    CHECK(imp.imputed.size() == 2);
}

TEST_CASE("empty mechanistic file disables augmented") {
    TempDir dir;
    const auto cases = dir.write("cases.csv", small_cases());
    dir.write("mech.csv", "date,region,forecast_new_cases\n");
    InputFiles f;
    f.cases = cases;
    f.mechanistic = dir.path() / "mech.csv";
    const auto res = ingest(f);
    CHECK(!res.mechanistic_available);
    CHECK(!res.panel.has_signal("mechanistic"));
    CHECK(res.report.warnings.size() == 1);

    dir.write("config.json", R"({"data": {"cases": "cases.csv", "mechanistic": "mech.csv"}, "features": {"lags": 1}})");
    const auto cfg = load_config(dir.path() / "config.json");
    std::ostringstream log;
    const auto loaded = load_data(cfg, log);
    bool has_aug = false;
    for (auto k : loaded.config.backtest.models) has_aug = has_aug || k == ModelKind::Augmented;
    CHECK(!has_aug);
    CHECK(log.str().find("augmented model disabled") != std::string::npos);
}

TEST_CASE("unknown region in an auxiliary file warns and is skipped") {
    TempDir dir;
    InputFiles f;
    f.cases = dir.write("cases.csv", small_cases());
    f.media = dir.write("media.csv", "date,region,article_count\n2020-01-01,A,1\n2020-01-01,Z,4\n");
    const auto res = ingest(f);
    REQUIRE(res.report.warnings.size() == 1);
    CHECK(res.report.warnings[0].find("'Z'") != std::string::npos);
}

TEST_CASE("cumulative decreases surface in the report") {
    TempDir dir;
    InputFiles f;
    f.cases = dir.write("cases.csv", kCasesHeader + "2020-01-01,A,1,0,0,5\n2020-01-02,A,1,0,0,4\n");
    const auto res = ingest(f);
    CHECK(res.report.violations.size() == 1);
}

TEST_CASE("config defaults and overrides") {
    const auto cfg = parse_config(R"({"data": {"cases": "c.csv"}})");
    CHECK(cfg.backtest.runs == 20);
    CHECK(cfg.backtest.pipeline.features.lags == 4);
    CHECK(cfg.backtest.pipeline.augment.n_bootstrap == 100);
    CHECK(cfg.backtest.pipeline.augment.noise_sd == 0.01);
    CHECK(cfg.backtest.pipeline.cluster.k_range.max == 10);
    CHECK(cfg.backtest.models.size() == 5);
    CHECK(cfg.window_days == 2);

    const auto bundled_cfg = load_config(std::filesystem::path(ARGONET_TEST_DATA) / "config.json");
    CHECK(bundled_cfg.backtest.seed == 20200203);
    CHECK(bundled_cfg.hash().size() == 16);
    CHECK(bundled_cfg.hash() == load_config(std::filesystem::path(ARGONET_TEST_DATA) / "config.json").hash());

    CommandLine cl;
    cl.config = std::filesystem::path(ARGONET_TEST_DATA) / "config.json";
    cl.seed = 5;
    cl.jobs = 2;
    cl.models = "persistence,augmented";
    const auto over = resolve_config(cl);
    CHECK(over.backtest.seed == 5);
    CHECK(over.backtest.jobs == 2);
    CHECK(over.backtest.models == std::vector<ModelKind>{ModelKind::Persistence, ModelKind::Augmented});
    CHECK(over.hash() != bundled_cfg.hash());
}

TEST_CASE("resolved config parses back to the same configuration") {
    const auto cfg = load_config(std::filesystem::path(ARGONET_TEST_DATA) / "config.json");
    const auto again = parse_config(cfg.resolved_json(), cfg.base_dir);
    CHECK(again.resolved_json() == cfg.resolved_json());
    CHECK(again.hash() == cfg.hash());
}

TEST_CASE("unknown config keys are rejected at any depth") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"data": {"cases": "c.csv"}, "sede": 1})"),
                         doctest::Contains("'sede'"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"data": {"cases": "c.csv"}, "lasso": {"fold": 3}})"),
                         doctest::Contains("lasso.fold"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"data": {"cases": "c.csv"}, "scenario": {"abc": {"eps": 1}}})"),
                         doctest::Contains("scenario.abc.eps"), ConfigError);
}

TEST_CASE("invalid config values are rejected") {
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"data": {"cases": "c.csv"}, "seed": "x"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"data": {"cases": "c.csv"}, "lasso": {"folds": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"data": {"cases": "c.csv"}, "models": ["gleam"]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"data": {"cases": "c.csv"}, "backtest": {"start": "2020-02-31"}})"), ConfigError);
    CHECK_THROWS_AS(parse_model_list(""), ConfigError);
    CHECK(parse_model_list("ar,argo").size() == 2);
}

TEST_CASE("exit codes follow the error class") {
    CHECK(exit_code_for(ConfigError("x")) == 1);
    CHECK(exit_code_for(DataError("x")) == 2);
    CHECK(exit_code_for(std::runtime_error("x")) == 3);
}

TEST_CASE("CSV splitting honours quotes") {
    CHECK(split_csv_line("a,\"b,c\",d") == std::vector<std::string>{"a", "b,c", "d"});
    CHECK(split_csv_line("a,,") == std::vector<std::string>{"a", "", ""});
}
