#include <doctest.h>

#include "panels.hpp"

#include <argonet/app.hpp>
#include <argonet/model_io.hpp>

#include <algorithm>
#include <random>
#include <sstream>

using namespace argonet;

namespace {

StoredModel random_model(std::mt19937_64& rng, std::size_t run) {
    std::normal_distribution<double> nd;
    StoredModel sm;
    sm.as_of = testdata::day(2020, 2, 3) + Days{2 * static_cast<int>(run)};
    sm.variant = run % 2 ? "argonet" : "augmented";
    sm.run = run;
    sm.cluster_id = run % 3;
    sm.members = {"R01", "R07"};
    auto& m = sm.model;
    m.columns = {"y_lag0", "y_lag1", "search:fever", "mechanistic"};
    m.fit.coefficients = Eigen::VectorXd(4);
    for (int i = 0; i < 4; ++i) m.fit.coefficients(i) = nd(rng) / 3.0;
    m.fit.coefficients(2) = 0.0;
    m.fit.intercept = nd(rng) * 1e-17;
    m.fit.lambda = std::abs(nd(rng)) * 1e-3;
    m.fit.diagnostics.converged = run != 2;
    m.fit.diagnostics.iterations = 17 + run;
    m.fit.diagnostics.kkt_residual = 3.1e-9;
    m.feature_stats.columns = m.columns;
    for (int i = 0; i < 4; ++i) {
        m.feature_stats.mean.push_back(100 * nd(rng));
        m.feature_stats.std.push_back(i == 3 ? 0.0 : std::abs(nd(rng)) * 7);
        m.feature_stats.constant.push_back(i == 3);
    }
    m.target_stats.columns = {"target"};
    m.target_stats.mean = {42.123456789012345};
    m.target_stats.std = {1.0 / 3.0};
    m.target_stats.constant = {false};
    return sm;
}

}  // namespace

TEST_CASE("model dump round trips exactly") {
    std::mt19937_64 rng(1);
    std::vector<StoredModel> models;
    for (std::size_t r = 0; r < 4; ++r) models.push_back(random_model(rng, r));
    std::stringstream ss;
    write_models(ss, models);
    const auto back = read_models(ss);
    REQUIRE(back.size() == models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto& a = models[i];
        const auto& b = back[i];
        CHECK(a.as_of == b.as_of);
        CHECK(a.variant == b.variant);
        CHECK(a.run == b.run);
        CHECK(a.cluster_id == b.cluster_id);
        CHECK(a.members == b.members);
        CHECK(a.model.columns == b.model.columns);
        CHECK(a.model.fit.coefficients == b.model.fit.coefficients);
        CHECK(a.model.fit.intercept == b.model.fit.intercept);
        CHECK(a.model.fit.lambda == b.model.fit.lambda);
        CHECK(a.model.fit.diagnostics.converged == b.model.fit.diagnostics.converged);
        CHECK(a.model.fit.diagnostics.iterations == b.model.fit.diagnostics.iterations);
        CHECK(a.model.feature_stats.mean == b.model.feature_stats.mean);
        CHECK(a.model.feature_stats.std == b.model.feature_stats.std);
        CHECK(a.model.feature_stats.constant == b.model.feature_stats.constant);
        CHECK(a.model.target_stats.mean == b.model.target_stats.mean);
        CHECK(a.model.target_stats.std == b.model.target_stats.std);
        Eigen::RowVectorXd probe(4);
        probe << 10, 20, 0.3, 5;
        CHECK(a.model.predict_raw(probe) == b.model.predict_raw(probe));
    }
}

TEST_CASE("malformed model dump names the line") {
    std::mt19937_64 rng(2);
    const std::vector<StoredModel> one{random_model(rng, 0)};
    std::stringstream good;
    write_models(good, one);
    std::string text = good.str();
    const auto at = text.find("lambda = ");
    const auto eol = text.find('\n', at);
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(at), '\n');
    text.replace(at, eol - at, "lambda = abc");
    std::stringstream ss(text);
    CHECK_THROWS_WITH_AS(read_models(ss), doctest::Contains(("line " + std::to_string(line)).c_str()), DataError);
    std::stringstream partial("[model]\nas_of = 2020-02-03\n");
    CHECK_THROWS_AS(read_models(partial), DataError);
    std::stringstream junk("coef.x = 1\n");
    CHECK_THROWS_AS(read_models(junk), DataError);
}

TEST_CASE("forecasts csv round trips") {
    RunConfig cfg = parse_config(R"({"data": {"cases": "c.csv"}})");
    std::vector<ForecastRecord> recs(3);
    recs[0] = {testdata::day(2020, 2, 3), testdata::day(2020, 2, 5), "R01", "augmented", 12.5, 0.25, 1, {"cv_folds_reduced"}};
    recs[1] = {testdata::day(2020, 2, 3), testdata::day(2020, 2, 5), "R02", "persistence", 0.0, 0.0, std::nullopt, {}};
    recs[2] = {testdata::day(2020, 2, 5), testdata::day(2020, 2, 7), "R02", "argonet", 1.0 / 3.0, 0.1,
               std::nullopt, {"excluded_zero_history", "fallback_persistence"}};
    std::stringstream ss;
    write_forecasts(ss, cfg, recs);
    CHECK(ss.str().rfind("# config_hash=" + cfg.hash(), 0) == 0);
    const auto back = read_forecasts(ss);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].as_of == recs[i].as_of);
        CHECK(back[i].target_date == recs[i].target_date);
        CHECK(back[i].region == recs[i].region);
        CHECK(back[i].model == recs[i].model);
        CHECK(back[i].estimate == recs[i].estimate);
        CHECK(back[i].spread == recs[i].spread);
        CHECK(back[i].cluster_id == recs[i].cluster_id);
        CHECK(back[i].flags == recs[i].flags);
    }
}
