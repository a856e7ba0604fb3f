#include "argonet/config.hpp"

#include "argonet/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace argonet {

using nlohmann::json;

namespace {

std::string kind_name(const json& j) {
    switch (j.type()) {
        case json::value_t::null: return "null";
        case json::value_t::boolean: return "boolean";
        case json::value_t::string: return "string";
        case json::value_t::array: return "array";
        case json::value_t::object: return "object";
        default: return "number";
    }
}

// Reads the keys of one JSON object and rejects whatever is left unread.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + " must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    Section sub(const std::string& key) {
        used_.insert(key);
        static const json empty = json::object();
        return Section(j_.contains(key) ? j_.at(key) : empty, name(key));
    }

    void read(const std::string& key, bool& out) { with(key, [&](const json& v) {
        if (!v.is_boolean()) bad(key, "a boolean", v);
        out = v.get<bool>();
    }); }

    void read(const std::string& key, double& out) { with(key, [&](const json& v) {
        if (!v.is_number()) bad(key, "a number", v);
        out = v.get<double>();
    }); }

    void read(const std::string& key, int& out) { with(key, [&](const json& v) {
        if (!v.is_number_integer()) bad(key, "an integer", v);
        out = v.get<int>();
    }); }

    void read(const std::string& key, std::int64_t& out) { with(key, [&](const json& v) {
        if (!v.is_number_integer()) bad(key, "an integer", v);
        out = v.get<std::int64_t>();
    }); }

    void read(const std::string& key, std::uint64_t& out) { with(key, [&](const json& v) {
        if (!v.is_number_unsigned()) bad(key, "a non-negative integer", v);
        out = v.get<std::uint64_t>();
    }); }

    void read(const std::string& key, std::string& out) { with(key, [&](const json& v) {
        if (!v.is_string()) bad(key, "a string", v);
        out = v.get<std::string>();
    }); }

    void read(const std::string& key, std::optional<Date>& out) { with(key, [&](const json& v) {
        if (v.is_null()) {
            out.reset();
            return;
        }
        if (!v.is_string()) bad(key, "a date string or null", v);
        try {
            out = parse_date(v.get<std::string>());
        } catch (const std::invalid_argument&) {
            throw ConfigError(name(key) + ": invalid date '" + v.get<std::string>() + "'");
        }
    }); }

    void read(const std::string& key, std::optional<double>& out) { with(key, [&](const json& v) {
        if (v.is_null()) {
            out.reset();
            return;
        }
        if (!v.is_number()) bad(key, "a number or null", v);
        out = v.get<double>();
    }); }

    void read(const std::string& key, std::vector<std::string>& out) { with(key, [&](const json& v) {
        if (!v.is_array()) bad(key, "an array of strings", v);
        out.clear();
        for (const auto& e : v) {
            if (!e.is_string()) bad(key, "an array of strings", v);
            out.push_back(e.get<std::string>());
        }
    }); }

    void read(const std::string& key, std::vector<std::int64_t>& out) { with(key, [&](const json& v) {
        if (!v.is_array()) bad(key, "an array of integers", v);
        out.clear();
        for (const auto& e : v) {
            if (!e.is_number_integer()) bad(key, "an array of integers", v);
            out.push_back(e.get<std::int64_t>());
        }
    }); }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!used_.contains(key)) throw ConfigError("unknown config key '" + name(key) + "'");
        }
    }

    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    template <class Fn>
    void with(const std::string& key, Fn&& fn) {
        used_.insert(key);
        if (j_.contains(key)) fn(j_.at(key));
    }

    [[noreturn]] void bad(const std::string& key, const char* expected, const json& v) const {
        throw ConfigError(name(key) + " must be " + expected + ", got " + kind_name(v));
    }

    std::string where() const { return path_.empty() ? "config" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

json date_or_null(const std::optional<Date>& d) { return d ? json(format_date(*d)) : json(nullptr); }

std::string embedding_name(ChEmbedding e) { return e == ChEmbedding::CorrelationRows ? "correlation_rows" : "zscored_series"; }

}  // namespace

std::vector<ModelKind> parse_model_list(const std::string& csv) {
    std::vector<ModelKind> out;
    std::stringstream in(csv);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto kind = parse_model(item);
        if (!kind) throw ConfigError("unknown model '" + item + "'");
        if (std::find(out.begin(), out.end(), *kind) == out.end()) out.push_back(*kind);
    }
    if (out.empty()) throw ConfigError("model list is empty");
    return out;
}

std::filesystem::path RunConfig::resolve(const std::string& path) const {
    const std::filesystem::path p(path);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

RunConfig parse_config(const std::string& json_text, std::filesystem::path base_dir) {
    // Leading '#' lines (the header of a written resolved_config.json) are skipped.
    std::size_t begin = 0;
    while (begin < json_text.size()) {
        const std::size_t first = json_text.find_first_not_of(" \t\r\n", begin);
        if (first == std::string::npos || json_text[first] != '#') break;
        const std::size_t eol = json_text.find('\n', first);
        begin = eol == std::string::npos ? json_text.size() : eol + 1;
    }
    json root;
    try {
        root = json::parse(json_text.begin() + static_cast<std::ptrdiff_t>(begin), json_text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    cfg.base_dir = std::move(base_dir);
    Section top(root, "");
    auto& bt = cfg.backtest;
    auto& po = bt.pipeline;

    {
        Section s = top.sub("data");
        s.read("cases", cfg.data.cases);
        s.read("search", cfg.data.search);
        s.read("media", cfg.data.media);
        s.read("mechanistic", cfg.data.mechanistic);
        s.read("sum_search_terms", cfg.data.sum_search_terms);
        s.finish();
        require(!cfg.data.cases.empty(), "data.cases is required");
    }
    {
        Section s = top.sub("features");
        s.read("lags", po.features.lags);
        s.read("search", po.features.search);
        s.read("media", po.features.media);
        s.read("deaths", po.features.deaths);
        s.read("cumulative", po.features.cumulative);
        s.read("mechanistic", po.features.mechanistic);
        s.read("window_days", cfg.window_days);
        s.finish();
        require(po.features.lags >= 1, "features.lags must be at least 1");
        require(cfg.window_days >= 1, "features.window_days must be at least 1");
    }
    {
        Section s = top.sub("clustering");
        s.read("enabled", po.clustering);
        s.read("k_min", po.cluster.k_range.min);
        s.read("k_max", po.cluster.k_range.max);
        std::string embedding = embedding_name(po.cluster.embedding);
        s.read("embedding", embedding);
        s.finish();
        if (embedding == "correlation_rows") po.cluster.embedding = ChEmbedding::CorrelationRows;
        else if (embedding == "zscored_series") po.cluster.embedding = ChEmbedding::ZScoredSeries;
        else throw ConfigError("clustering.embedding must be correlation_rows or zscored_series");
        require(po.cluster.k_range.min >= 2 && po.cluster.k_range.min <= po.cluster.k_range.max,
                "clustering.k_min must be at least 2 and at most k_max");
    }
    {
        Section s = top.sub("augmentation");
        s.read("enabled", po.augmentation);
        s.read("n_bootstrap", po.augment.n_bootstrap);
        s.read("noise_sd", po.augment.noise_sd);
        s.read("noise_on_target", po.augment.noise_on_target);
        s.finish();
        require(po.augment.n_bootstrap >= 1, "augmentation.n_bootstrap must be at least 1");
        require(po.augment.noise_sd >= 0.0, "augmentation.noise_sd must be non-negative");
    }
    {
        Section s = top.sub("lasso");
        s.read("folds", po.cv.folds);
        s.read("n_lambda", po.cv.n_lambda);
        s.read("lambda_ratio", po.cv.lambda_ratio);
        s.read("time_blocked", po.cv.time_blocked);
        s.read("tol", po.cv.solver.tol);
        s.read("max_iter", po.cv.solver.max_iter);
        s.finish();
        require(po.cv.folds >= 2, "lasso.folds must be at least 2");
        require(po.cv.n_lambda >= 1, "lasso.n_lambda must be at least 1");
        require(po.cv.lambda_ratio > 0.0 && po.cv.lambda_ratio <= 1.0, "lasso.lambda_ratio must be in (0, 1]");
        require(po.cv.solver.tol > 0.0, "lasso.tol must be positive");
        require(po.cv.solver.max_iter >= 1, "lasso.max_iter must be at least 1");
    }
    {
        Section s = top.sub("ar");
        s.read("lags", bt.ar.lags);
        s.read("penalized", bt.ar.penalized);
        s.finish();
        require(bt.ar.lags >= 1, "ar.lags must be at least 1");
    }
    {
        Section s = top.sub("ensemble");
        s.read("runs", bt.runs);
        s.finish();
        require(bt.runs >= 1, "ensemble.runs must be at least 1");
    }
    top.read("seed", bt.seed);
    top.read("jobs", bt.jobs);
    require(bt.jobs >= 1, "jobs must be at least 1");
    {
        std::vector<std::string> models;
        for (ModelKind k : bt.models) models.emplace_back(model_name(k));
        top.read("models", models);
        std::string joined;
        for (const auto& m : models) joined += (joined.empty() ? "" : ",") + m;
        bt.models = parse_model_list(joined);
    }
    {
        Section s = top.sub("backtest");
        s.read("start", cfg.backtest_start);
        s.read("end", cfg.backtest_end);
        s.finish();
    }
    {
        Section s = top.sub("forecast");
        s.read("as_of", cfg.as_of);
        s.finish();
    }
    {
        Section s = top.sub("report");
        Section m = s.sub("similarity");
        m.read("a", cfg.similarity.a);
        m.read("b", cfg.similarity.b);
        m.read("off_diagonal_only", cfg.similarity.off_diagonal_only);
        m.finish();
        s.finish();
    }
    {
        auto& sc = cfg.scenario;
        Section s = top.sub("scenario");
        s.read("regions", sc.regions);
        s.read("subpopulations", sc.subpopulations);
        s.read("populations", sc.populations);
        s.read("population", sc.population);
        s.read("hubs", sc.hubs);
        s.read("hub_weight", sc.hub_weight);
        s.read("max_outflow", sc.max_outflow);
        s.read("r0", sc.r0);
        s.read("latent_period", sc.latent_period);
        s.read("infectious_period", sc.infectious_period);
        s.read("seed_subpopulation", sc.seed_subpopulation);
        s.read("seed_latent", sc.seed_latent);
        s.read("start", sc.start);
        s.read("days", sc.days);
        s.read("runs", sc.runs);
        s.read("steps_per_day", sc.sim.steps_per_day);
        s.read("infectious_travel", sc.sim.infectious_travel);
        Section a = s.sub("abc");
        a.read("enabled", sc.abc);
        a.read("prior_low", sc.abc_config.prior_low);
        a.read("prior_high", sc.abc_config.prior_high);
        a.read("epsilon", sc.abc_config.epsilon);
        a.read("epsilon_quantile", sc.abc_config.epsilon_quantile);
        a.read("n_samples", sc.abc_config.n_samples);
        a.finish();
        s.finish();

        if (!sc.regions.empty()) sc.subpopulations = sc.regions.size();
        if (!sc.populations.empty()) {
            require(sc.populations.size() == sc.subpopulations, "scenario.populations must have one entry per subpopulation");
        }
        require(sc.subpopulations >= 1, "scenario.subpopulations must be at least 1");
        require(sc.population >= 1, "scenario.population must be positive");
        for (auto p : sc.populations) require(p >= 1, "scenario.populations must be positive");
        require(sc.r0 >= 0.0, "scenario.r0 must be non-negative");
        require(sc.latent_period > 0.0 && sc.infectious_period > 0.0, "scenario periods must be positive");
        require(sc.seed_subpopulation < sc.subpopulations, "scenario.seed_subpopulation out of range");
        require(sc.seed_latent >= 0, "scenario.seed_latent must be non-negative");
        require(sc.days >= 1 && sc.runs >= 1, "scenario.days and scenario.runs must be at least 1");
        require(sc.sim.steps_per_day >= 1, "scenario.steps_per_day must be at least 1");
        require(sc.max_outflow >= 0.0 && sc.max_outflow <= 1.0, "scenario.max_outflow must be in [0, 1]");
        sc.abc_config.bin_days = cfg.window_days;
        sc.abc_config.sim = sc.sim;
        sc.abc_config.pooled = true;
        try {
            sc.abc_config.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("scenario.abc: ") + e.what());
        }
    }
    top.finish();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

std::string RunConfig::resolved_json() const {
    const auto& po = backtest.pipeline;
    const auto& sc = scenario;
    json j;
    j["data"] = {{"cases", data.cases},
                 {"search", data.search},
                 {"media", data.media},
                 {"mechanistic", data.mechanistic},
                 {"sum_search_terms", data.sum_search_terms}};
    j["features"] = {{"lags", po.features.lags},
                     {"search", po.features.search},
                     {"media", po.features.media},
                     {"deaths", po.features.deaths},
                     {"cumulative", po.features.cumulative},
                     {"mechanistic", po.features.mechanistic},
                     {"window_days", window_days}};
    j["clustering"] = {{"enabled", po.clustering},
                       {"k_min", po.cluster.k_range.min},
                       {"k_max", po.cluster.k_range.max},
                       {"embedding", embedding_name(po.cluster.embedding)}};
    j["augmentation"] = {{"enabled", po.augmentation},
                         {"n_bootstrap", po.augment.n_bootstrap},
                         {"noise_sd", po.augment.noise_sd},
                         {"noise_on_target", po.augment.noise_on_target}};
    j["lasso"] = {{"folds", po.cv.folds},
                  {"n_lambda", po.cv.n_lambda},
                  {"lambda_ratio", po.cv.lambda_ratio},
                  {"time_blocked", po.cv.time_blocked},
                  {"tol", po.cv.solver.tol},
                  {"max_iter", po.cv.solver.max_iter}};
    j["ar"] = {{"lags", backtest.ar.lags}, {"penalized", backtest.ar.penalized}};
    j["ensemble"] = {{"runs", backtest.runs}};
    j["seed"] = backtest.seed;
    j["jobs"] = backtest.jobs;
    json models = json::array();
    for (ModelKind k : backtest.models) models.push_back(std::string(model_name(k)));
    j["models"] = models;
    j["backtest"] = {{"start", date_or_null(backtest_start)}, {"end", date_or_null(backtest_end)}};
    j["forecast"] = {{"as_of", date_or_null(as_of)}};
    j["report"] = {{"similarity",
                    {{"a", similarity.a}, {"b", similarity.b}, {"off_diagonal_only", similarity.off_diagonal_only}}}};
    j["scenario"] = {{"regions", sc.regions},
                     {"subpopulations", sc.subpopulations},
                     {"populations", sc.populations},
                     {"population", sc.population},
                     {"hubs", sc.hubs},
                     {"hub_weight", sc.hub_weight},
                     {"max_outflow", sc.max_outflow},
                     {"r0", sc.r0},
                     {"latent_period", sc.latent_period},
                     {"infectious_period", sc.infectious_period},
                     {"seed_subpopulation", sc.seed_subpopulation},
                     {"seed_latent", sc.seed_latent},
                     {"start", date_or_null(sc.start)},
                     {"days", sc.days},
                     {"runs", sc.runs},
                     {"steps_per_day", sc.sim.steps_per_day},
                     {"infectious_travel", sc.sim.infectious_travel},
                     {"abc",
                      {{"enabled", sc.abc},
                       {"prior_low", sc.abc_config.prior_low},
                       {"prior_high", sc.abc_config.prior_high},
                       {"epsilon", sc.abc_config.epsilon ? json(*sc.abc_config.epsilon) : json(nullptr)},
                       {"epsilon_quantile", sc.abc_config.epsilon_quantile},
                       {"n_samples", sc.abc_config.n_samples}}}};
    return j.dump(2) + "\n";
}

std::string RunConfig::hash() const {
    RunConfig c = *this;
    c.backtest.jobs = 1;
    const std::uint64_t h = hash_name(c.resolved_json());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace argonet
