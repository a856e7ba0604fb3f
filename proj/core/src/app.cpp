#include "argonet/app.hpp"

#include "argonet/model_io.hpp"
#include "argonet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace argonet {

namespace {

std::string real(double x) {
    if (std::isnan(x)) return "NA";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::ofstream create(const std::filesystem::path& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    return os;
}

void write_resolved(const CommandLine& cl, const RunConfig& cfg) {
    auto os = create(cl.out, "resolved_config.json");
    os << output_header(cfg) << cfg.resolved_json() << '\n';
}

std::size_t bin_for(const AggregatedPanel& panel, Date d, const char* what) {
    const auto b = panel.bin_index(d);
    if (!b) throw ConfigError(std::string(what) + " " + format_date(d) + " is not a bin end date");
    return *b;
}

std::size_t default_as_of(const AggregatedPanel& panel, const RunConfig& cfg) {
    if (cfg.as_of) return bin_for(panel, *cfg.as_of, "forecast.as_of");
    const auto last = panel.last_observed_bin();
    if (!last) throw DataError("no confirmed counts in the input");
    return *last;
}

std::string primary_variant(const std::vector<ModelKind>& models) {
    for (ModelKind k : {ModelKind::Augmented, ModelKind::Argonet, ModelKind::Argo}) {
        if (std::find(models.begin(), models.end(), k) != models.end()) return std::string(model_name(k));
    }
    return {};
}

void write_partition(std::ostream& os, const RunConfig& cfg, const AggregatedPanel& panel,
                     std::span<const DatedClustering> clusterings) {
    os << output_header(cfg) << "as_of,region,cluster_id,k,ch_score\n";
    for (const auto& dc : clusterings) {
        const auto& c = dc.clustering;
        for (std::size_t i = 0; i < c.included.size(); ++i) {
            os << format_date(dc.as_of) << ',' << panel.regions()[c.included[i]] << ',' << c.partition.assignment[i] << ','
               << c.partition.k << ',' << real(c.partition.ch_score) << '\n';
        }
        for (std::size_t r : c.excluded) {
            os << format_date(dc.as_of) << ',' << panel.regions()[r] << ",," << c.partition.k << ',' << real(c.partition.ch_score)
               << '\n';
        }
    }
}

void write_dendrogram(std::ostream& os, const RunConfig& cfg, const AggregatedPanel& panel, const ClusteringResult& c) {
    os << output_header(cfg) << "node,left,right,height,size,label\n";
    for (std::size_t i = 0; i < c.included.size(); ++i) os << i << ",,,0,1," << panel.regions()[c.included[i]] << '\n';
    for (std::size_t m = 0; m < c.dendrogram.merges.size(); ++m) {
        const Merge& mg = c.dendrogram.merges[m];
        os << c.dendrogram.leaves + m << ',' << mg.left << ',' << mg.right << ',' << real(mg.height) << ',' << mg.size << ",\n";
    }
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path.string() + ": cannot open file");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        std::vector<double> row;
        std::string tok;
        while (ls >> tok) {
            try {
                row.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw DataError(path.string() + ":" + std::to_string(lineno) + ": not a number '" + tok + "'");
            }
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n) {
            throw DataError(path.string() + ": matrix is not square");
        }
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return m;
}

void summarize(std::ostream& log, const EvalReport& report, const std::vector<ModelKind>& models) {
    for (ModelKind k : models) {
        const auto name = model_name(k);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-12s mean rmse %10.3f  improved over persistence in %5.1f%% of regions\n",
                      std::string(name).c_str(), report.mean_rmse(name), 100.0 * report.improved_share(name));
        log << buf;
    }
}

}  // namespace

RunConfig resolve_config(const CommandLine& cl) {
    if (cl.config.empty()) throw ConfigError("--config is required");
    RunConfig cfg = load_config(cl.config);
    if (cl.seed) cfg.backtest.seed = *cl.seed;
    if (cl.jobs) {
        if (*cl.jobs < 1) throw ConfigError("--jobs must be at least 1");
        cfg.backtest.jobs = *cl.jobs;
    }
    if (cl.models) cfg.backtest.models = parse_model_list(*cl.models);
    return cfg;
}

LoadedData load_data(const RunConfig& config, std::ostream& log) {
    LoadedData out;
    out.config = config;
    InputFiles files;
    files.cases = config.resolve(config.data.cases);
    if (!config.data.search.empty()) files.search = config.resolve(config.data.search);
    if (!config.data.media.empty()) files.media = config.resolve(config.data.media);
    if (!config.data.mechanistic.empty()) files.mechanistic = config.resolve(config.data.mechanistic);
    files.sum_search_terms = config.data.sum_search_terms;
    out.ingest = ingest(files);
    for (const auto& w : out.ingest.report.warnings) log << "warning: " << w << '\n';
    if (!out.ingest.mechanistic_available) {
        auto& models = out.config.backtest.models;
        const auto it = std::find(models.begin(), models.end(), ModelKind::Augmented);
        if (it != models.end()) {
            models.erase(it);
            log << "warning: no mechanistic input; augmented model disabled\n";
        }
        if (models.empty()) throw ConfigError("no model left to run");
    }
    out.panel = aggregate(out.ingest.panel, config.window_days);
    return out;
}

std::string output_header(const RunConfig& config) {
    return "# config_hash=" + config.hash() + " seed=" + std::to_string(config.backtest.seed) + "\n";
}

void write_forecasts(std::ostream& os, const RunConfig& config, std::span<const ForecastRecord> records) {
    os << output_header(config) << "as_of,target_date,region,model,estimate,spread,cluster_id,flags\n";
    for (const auto& r : records) {
        os << format_date(r.as_of) << ',' << format_date(r.target_date) << ',' << r.region << ',' << r.model << ','
           << real(r.estimate) << ',' << real(r.spread) << ',';
        if (r.cluster_id) os << *r.cluster_id;
        os << ',';
        for (std::size_t i = 0; i < r.flags.size(); ++i) os << (i ? ";" : "") << r.flags[i];
        os << '\n';
    }
}

std::vector<ForecastRecord> read_forecasts(std::istream& is) {
    std::vector<ForecastRecord> out;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != "as_of,target_date,region,model,estimate,spread,cluster_id,flags") {
                throw DataError("forecasts.csv:" + std::to_string(lineno) + ": unexpected header");
            }
            header = true;
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 8) throw DataError("forecasts.csv:" + std::to_string(lineno) + ": expected 8 fields");
        ForecastRecord r;
        try {
            r.as_of = parse_date(f[0]);
            r.target_date = parse_date(f[1]);
            r.region = f[2];
            r.model = f[3];
            r.estimate = f[4] == "NA" ? std::nan("") : std::stod(f[4]);
            r.spread = f[5] == "NA" ? std::nan("") : std::stod(f[5]);
            if (!f[6].empty()) r.cluster_id = static_cast<std::size_t>(std::stoul(f[6]));
        } catch (const std::exception&) {
            throw DataError("forecasts.csv:" + std::to_string(lineno) + ": malformed row");
        }
        std::stringstream fl(f[7]);
        for (std::string item; std::getline(fl, item, ';');) {
            if (!item.empty()) r.flags.push_back(item);
        }
        out.push_back(std::move(r));
    }
    return out;
}

void write_eval(std::ostream& os, const RunConfig& config, const EvalReport& report) {
    os << output_header(config) << "region,model,rmse,pearson,relative_improvement,n_points\n";
    for (const auto& r : report.rows) {
        os << r.region << ',' << r.model << ',' << real(r.rmse) << ',' << (r.pearson ? real(*r.pearson) : "NA") << ','
           << real(r.relative_improvement) << ',' << r.n_points << '\n';
    }
}

void write_traces(std::ostream& os, const RunConfig& config, std::span<const TracePoint> traces) {
    os << output_header(config) << "region,feature,as_of,mean_coef\n";
    for (const auto& t : traces) os << t.region << ',' << t.feature << ',' << format_date(t.as_of) << ',' << real(t.mean_coef) << '\n';
}

void cmd_ingest(const CommandLine& cl, std::ostream& log) {
    const RunConfig cfg0 = resolve_config(cl);
    const LoadedData data = load_data(cfg0, log);
    const RunConfig& cfg = data.config;
    const auto& panel = data.ingest.panel;
    const auto& rep = data.ingest.report;
    auto os = create(cl.out, "validation.csv");
    os << output_header(cfg) << "kind,signal,region,date,detail\n";
    for (const auto& c : rep.imputed) os << "imputed," << c.signal << ',' << panel.regions()[c.region] << ',' << format_date(c.date) << ",\n";
    for (const auto& c : rep.uncovered) os << "uncovered," << c.signal << ',' << panel.regions()[c.region] << ',' << format_date(c.date) << ",\n";
    for (const auto& v : rep.violations) {
        os << "monotonicity,cumulative," << panel.regions()[v.region] << ',' << format_date(v.date) << ','
           << real(v.previous) << " -> " << real(v.value) << '\n';
    }
    for (const auto& w : rep.warnings) os << "warning,,,,\"" << w << "\"\n";
    write_resolved(cl, cfg);
    log << panel.region_count() << " regions, " << panel.day_count() << " days, " << data.panel.bin_count() << " bins; "
        << rep.findings() << " validation findings (" << rep.imputed.size() << " imputed, " << rep.uncovered.size()
        << " uncovered, " << rep.violations.size() << " monotonicity, " << rep.warnings.size() << " warnings)\n";
}

void cmd_cluster(const CommandLine& cl, std::ostream& log) {
    const LoadedData data = load_data(resolve_config(cl), log);
    const RunConfig& cfg = data.config;
    const std::size_t as_of = default_as_of(data.panel, cfg);
    const AggregatedPanel cut_panel = data.panel.truncated(as_of);
    ClusteringResult c = cluster_regions(cut_panel, as_of, cfg.backtest.pipeline.cluster);
    c.partition.as_of = cut_panel.bin_ends()[as_of];
    const DatedClustering dated[] = {{cut_panel.bin_ends()[as_of], c}};
    auto p = create(cl.out, "partition.csv");
    write_partition(p, cfg, cut_panel, dated);
    auto d = create(cl.out, "dendrogram.csv");
    write_dendrogram(d, cfg, cut_panel, c);
    write_resolved(cl, cfg);
    log << "as_of " << format_date(cut_panel.bin_ends()[as_of]) << ": k = " << c.partition.k << ", "
        << c.excluded.size() << " regions excluded" << (c.partition.fallback ? " (" + c.partition.warning + ")" : "") << '\n';
}

void cmd_simulate(const CommandLine& cl, std::ostream& log) {
    const RunConfig cfg = resolve_config(cl);
    const ScenarioConfig& sc = cfg.scenario;
    std::vector<std::string> names = sc.regions;
    if (names.empty()) {
        for (std::size_t i = 0; i < sc.subpopulations; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "S%02zu", i);
            names.emplace_back(buf);
        }
    }
    const std::vector<std::int64_t> sizes =
        sc.populations.empty() ? std::vector<std::int64_t>(names.size(), sc.population) : sc.populations;
    Metapopulation meta = Metapopulation::susceptible(names, sizes);
    meta.mobility = hub_mobility(sizes, sc.hubs, sc.hub_weight, sc.max_outflow);

    Seeding seeding{sc.seed_subpopulation, sc.seed_latent, sc.start.value_or(Date{std::chrono::year{2020} / 1 / 1})};
    double r0 = sc.r0;
    if (sc.abc) {
        const LoadedData data = load_data(cfg, log);
        const SignalPanel filled = impute(data.ingest.panel).panel;
        if (!sc.start) seeding.start = filled.calendar().front();
        std::vector<double> daily;
        for (std::size_t d = 0; d < filled.day_count(); ++d) {
            if (filled.calendar()[d] < seeding.start) continue;
            double total = 0.0;
            bool any = false;
            for (std::size_t r = 0; r < filled.region_count(); ++r) {
                if (const auto v = filled.get(signal::confirmed, r, d)) {
                    total += *v;
                    any = true;
                }
            }
            if (!any) break;
            daily.push_back(total);
        }
        const int w = cfg.window_days;
        const std::size_t bins = daily.size() / static_cast<std::size_t>(w);
        if (bins == 0) throw DataError("no observed cases after the scenario start date");
        Eigen::MatrixXd observed(1, static_cast<Eigen::Index>(bins));
        for (std::size_t b = 0; b < bins; ++b) {
            double s = 0.0;
            for (int k = 0; k < w; ++k) s += daily[b * static_cast<std::size_t>(w) + static_cast<std::size_t>(k)];
            observed(0, static_cast<Eigen::Index>(b)) = s;
        }
        const EpiParams tmpl = EpiParams::from_r0(sc.r0, sc.latent_period, sc.infectious_period, seeding);
        const AbcResult abc = abc_calibrate(meta, observed, tmpl, sc.abc_config, derive_seed(cfg.backtest.seed, "abc"),
                                            cfg.backtest.jobs);
        r0 = abc.posterior_mean();
        auto os = create(cl.out, "abc_posterior.csv");
        os << output_header(cfg) << "r0,distance,accepted\n";
        for (std::size_t k = 0; k < abc.draws.size(); ++k) {
            os << real(abc.draws[k]) << ',' << real(abc.distances[k]) << ',' << (abc.distances[k] <= abc.epsilon ? 1 : 0) << '\n';
        }
        log << "ABC: epsilon " << abc.epsilon << ", acceptance " << abc.acceptance_rate << ", posterior mean R0 " << r0 << '\n';
    }

    const EpiParams params = EpiParams::from_r0(r0, sc.latent_period, sc.infectious_period, seeding);
    const EnsembleSummary ens = simulate_ensemble(meta, params, sc.days, sc.runs, derive_seed(cfg.backtest.seed, "simulate"),
                                                  sc.sim, cfg.backtest.jobs, cfg.window_days);
    auto os = create(cl.out, "mechanistic.csv");
    os << output_header(cfg) << "date,region,forecast_new_cases\n";
    for (Eigen::Index d = 0; d < ens.median.cols(); ++d) {
        for (Eigen::Index i = 0; i < ens.median.rows(); ++i) {
            os << format_date(ens.dates[static_cast<std::size_t>(d)]) << ',' << names[static_cast<std::size_t>(i)] << ','
               << real(ens.median(i, d)) << '\n';
        }
    }
    auto bins = create(cl.out, "mechanistic_bins.csv");
    bins << output_header(cfg) << "bin_end,region,median,q05,q95\n";
    for (Eigen::Index b = 0; b < ens.bin_median.cols(); ++b) {
        for (Eigen::Index i = 0; i < ens.bin_median.rows(); ++i) {
            bins << format_date(ens.bin_ends[static_cast<std::size_t>(b)]) << ',' << names[static_cast<std::size_t>(i)] << ','
                 << real(ens.bin_median(i, b)) << ',' << real(ens.bin_q05(i, b)) << ',' << real(ens.bin_q95(i, b)) << '\n';
        }
    }
    write_resolved(cl, cfg);
    if (!ens.conserved) throw std::runtime_error("population conservation violated");
    log << "simulated " << sc.runs << " runs x " << sc.days << " days over " << names.size()
        << " subpopulations; population conserved\n";
}

void cmd_forecast(const CommandLine& cl, std::ostream& log) {
    const LoadedData data = load_data(resolve_config(cl), log);
    const RunConfig& cfg = data.config;
    const std::size_t as_of = default_as_of(data.panel, cfg);
    const WalkForwardOutput out = forecast_models(data.panel.truncated(as_of), as_of, cfg.backtest);
    auto f = create(cl.out, "forecasts.csv");
    write_forecasts(f, cfg, out.records);
    auto m = create(cl.out, "models.txt");
    m << output_header(cfg);
    write_models(m, out.models);
    auto p = create(cl.out, "partition.csv");
    write_partition(p, cfg, data.panel, out.clusterings);
    write_resolved(cl, cfg);
    log << "forecast issued at " << format_date(data.panel.bin_ends()[as_of]) << " for "
        << format_date(data.panel.bin_ends()[as_of] + Days{cfg.window_days}) << ": " << out.records.size() << " records\n";
}

void cmd_backtest(const CommandLine& cl, std::ostream& log) {
    const LoadedData data = load_data(resolve_config(cl), log);
    const RunConfig& cfg = data.config;
    auto [start, end] = default_backtest_range(data.panel, cfg.backtest.pipeline.features);
    if (cfg.backtest_start) start = bin_for(data.panel, *cfg.backtest_start, "backtest.start");
    if (cfg.backtest_end) end = bin_for(data.panel, *cfg.backtest_end, "backtest.end");
    if (start > end) throw ConfigError("backtest.start is after backtest.end");

    const WalkForwardOutput out = walk_forward(data.panel, start, end, cfg.backtest);
    const EvalReport report = evaluate(out.records, data.panel);
    const auto canonical = cfg.backtest.pipeline.features.columns(data.panel);
    const auto traces = coefficient_traces(out.models, primary_variant(cfg.backtest.models), canonical);

    auto f = create(cl.out, "forecasts.csv");
    write_forecasts(f, cfg, out.records);
    auto e = create(cl.out, "eval.csv");
    write_eval(e, cfg, report);
    auto t = create(cl.out, "coefficient_traces.csv");
    write_traces(t, cfg, traces);
    auto p = create(cl.out, "partition.csv");
    write_partition(p, cfg, data.panel, out.clusterings);
    auto m = create(cl.out, "models.txt");
    m << output_header(cfg);
    write_models(m, out.models);
    write_resolved(cl, cfg);
    log << "backtest " << format_date(data.panel.bin_ends()[start]) << " .. " << format_date(data.panel.bin_ends()[end]) << " ("
        << end - start + 1 << " dates)\n";
    summarize(log, report, cfg.backtest.models);
}

void cmd_report(const CommandLine& cl, std::ostream& log) {
    const LoadedData data = load_data(resolve_config(cl), log);
    const RunConfig& cfg = data.config;
    std::ifstream fin(cl.out / "forecasts.csv");
    if (!fin) throw DataError((cl.out / "forecasts.csv").string() + ": cannot open file (run backtest first)");
    const auto records = read_forecasts(fin);
    const EvalReport report = evaluate(records, data.panel);
    auto e = create(cl.out, "eval.csv");
    write_eval(e, cfg, report);

    std::ifstream min(cl.out / "models.txt");
    if (min) {
        const auto models = read_models(min);
        const auto canonical = cfg.backtest.pipeline.features.columns(data.panel);
        const auto traces = coefficient_traces(models, primary_variant(cfg.backtest.models), canonical);
        auto t = create(cl.out, "coefficient_traces.csv");
        write_traces(t, cfg, traces);
    }
    if (!cfg.similarity.a.empty() && !cfg.similarity.b.empty()) {
        const SimilarityResult s = matrix_similarity(read_matrix(cfg.resolve(cfg.similarity.a)),
                                                     read_matrix(cfg.resolve(cfg.similarity.b)), cfg.similarity.off_diagonal_only);
        auto os = create(cl.out, "similarity.txt");
        os << output_header(cfg);
        os << "entries = " << s.entries << '\n';
        os << "off_diagonal_only = " << (cfg.similarity.off_diagonal_only ? 1 : 0) << '\n';
        os << "pearson = " << (s.pearson ? real(*s.pearson) : "NA") << '\n';
        os << "cosine = " << (s.cosine ? real(*s.cosine) : "NA") << '\n';
    }
    summarize(log, report, cfg.backtest.models);
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 1;
    if (dynamic_cast<const DataError*>(&e)) return 2;
    return 3;
}

}  // namespace argonet
