#pragma once

#include "argonet/backtest.hpp"
#include "argonet/mechanistic.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace argonet {

struct DataPaths {
    std::string cases = "cases.csv";
    std::string search;       // empty: not used
    std::string media;
    std::string mechanistic;
    bool sum_search_terms = false;
};

struct ScenarioConfig {
    std::vector<std::string> regions;  // empty: "S00".."S{n-1}"
    std::size_t subpopulations = 33;
    std::vector<std::int64_t> populations;  // empty: `population` for every subpopulation
    std::int64_t population = 1000000;
    std::size_t hubs = 3;
    double hub_weight = 4.0;
    double max_outflow = 0.002;
    double r0 = 2.0;
    double latent_period = 4.0;
    double infectious_period = 3.0;
    std::size_t seed_subpopulation = 0;
    std::int64_t seed_latent = 40;
    std::optional<Date> start;  // default: first case date when calibrating, else 2020-01-01
    std::size_t days = 60;
    std::size_t runs = 50;
    SimOptions sim{};
    bool abc = false;
    AbcConfig abc_config{};
};

struct SimilarityConfig {
    std::string a;  // whitespace-separated square matrices; empty: skipped
    std::string b;
    bool off_diagonal_only = true;
};

struct RunConfig {
    DataPaths data{};
    int window_days = 2;
    BacktestOptions backtest{};
    std::optional<Date> backtest_start;
    std::optional<Date> backtest_end;
    std::optional<Date> as_of;  // forecast and cluster; default: last observed bin
    ScenarioConfig scenario{};
    SimilarityConfig similarity{};

    std::filesystem::path base_dir;  // relative data paths resolve against this

    std::filesystem::path resolve(const std::string& path) const;
    /// Canonical JSON with every default filled in.
    std::string resolved_json() const;
    /// FNV-1a of resolved_json() with jobs pinned to 1, as 16 hex digits.
    std::string hash() const;
};

/// Parses and validates a JSON config. Unknown keys anywhere, wrong types and
/// out-of-range values throw ConfigError naming the offending key.
RunConfig parse_config(const std::string& json_text, std::filesystem::path base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

std::vector<ModelKind> parse_model_list(const std::string& csv);

}  // namespace argonet
