#include "argonet/forecaster.hpp"

#include "argonet/rng.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace argonet {

namespace {

constexpr std::string_view kLagPrefix = "y_lag";

double persistence_value(const AggregatedPanel& panel, std::size_t region, std::size_t as_of) {
    return panel.value(signal::confirmed, region, as_of);
}

void add_flag(ForecastRecord& rec, std::string_view f) {
    if (!rec.has_flag(f)) rec.flags.emplace_back(f);
}

}  // namespace

std::string lag_column(std::size_t i) { return std::string(kLagPrefix) + std::to_string(i); }

void FeatureSpec::validate() const {
    if (lags < 1) throw std::invalid_argument("need at least one lag");
}

FeatureSpec FeatureSpec::lags_only(std::size_t lags) {
    FeatureSpec spec;
    spec.lags = lags;
    spec.search = spec.media = spec.deaths = spec.cumulative = spec.mechanistic = false;
    return spec;
}

std::vector<std::string> FeatureSpec::columns(const AggregatedPanel& panel) const {
    validate();
    std::vector<std::string> out;
    for (std::size_t i = 0; i < lags; ++i) out.push_back(lag_column(i));
    if (search) {
        for (auto& name : panel.search_signals()) out.push_back(std::move(name));
    }
    auto maybe = [&](bool enabled, std::string_view name) {
        if (enabled && panel.has_signal(name)) out.emplace_back(name);
    };
    maybe(media, signal::media);
    maybe(deaths, signal::deaths);
    maybe(cumulative, signal::cumulative);
    maybe(mechanistic, signal::mechanistic);
    return out;
}

std::optional<Eigen::RowVectorXd> feature_row(const AggregatedPanel& panel, std::size_t region,
                                              std::span<const std::string> columns, std::size_t t) {
    Eigen::RowVectorXd row(static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const std::string& name = columns[c];
        std::size_t bin = t;
        std::string_view source = name;
        if (name.starts_with(kLagPrefix)) {
            const auto lag = static_cast<std::size_t>(std::stoul(name.substr(kLagPrefix.size())));
            if (lag > t) return std::nullopt;
            bin = t - lag;
            source = signal::confirmed;
        } else if (name == signal::mechanistic) {
            bin = t + 1;
        }
        if (!panel.available(source, region, bin)) return std::nullopt;
        row(static_cast<Eigen::Index>(c)) = panel.value(source, region, bin);
    }
    return row;
}

DesignMatrix build_design(const AggregatedPanel& panel, std::span<const std::size_t> regions, const FeatureSpec& spec,
                          std::size_t as_of) {
    if (as_of >= panel.bin_count()) throw std::out_of_range("as_of bin beyond panel");
    DesignMatrix out;
    out.columns = spec.columns(panel);
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> targets;
    const Days step{panel.window_days()};
    for (std::size_t region : regions) {
        const std::size_t before = rows.size();
        for (std::size_t t = spec.lags - 1; t + 1 <= as_of; ++t) {
            if (!panel.available(signal::confirmed, region, t + 1)) continue;
            auto row = feature_row(panel, region, out.columns, t);
            if (!row) continue;
            rows.push_back(std::move(*row));
            targets.push_back(panel.value(signal::confirmed, region, t + 1));
            out.rows.push_back({region, panel.bin_ends()[t], panel.bin_ends()[t] + step});
        }
        if (rows.size() == before) out.dropped_regions.push_back(region);
    }
    out.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(out.columns.size()));
    out.target.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = rows[i];
        out.target(static_cast<Eigen::Index>(i)) = targets[i];
    }
    return out;
}

TrainOutcome train_cluster(const DesignMatrix& design, const PipelineOptions& options, std::uint64_t seed) {
    TrainOutcome out;
    if (design.row_count() < 2) {
        out.fallback_reason = "insufficient training rows";
        return out;
    }
    NormalizationStats target_stats = zscore_fit(design.target, {"target"});
    if (target_stats.constant[0]) {
        out.fallback_reason = "constant target";
        return out;
    }
    NormalizationStats feature_stats = zscore_fit(design.features, design.columns);

    Dataset data;
    data.columns = design.columns;
    data.features = zscore_apply(design.features, design.columns, feature_stats);
    data.target = zscore_apply(design.target, std::vector<std::string>{"target"}, target_stats).col(0);

    if (options.augmentation) {
        data = augment(data, options.augment, derive_seed(seed, "augment"), feature_stats.constant).data;
    }

    const CvResult cv = select_lambda_cv(data.features, data.target, derive_seed(seed, "cv"), options.cv);
    out.folds_reduced = cv.folds_reduced;
    out.model = SparseLinearModel{design.columns, cv.fit, std::move(feature_stats), std::move(target_stats)};
    return out;
}

bool ForecastRecord::has_flag(std::string_view f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
}

RunOutput forecast_once(const AggregatedPanel& panel, std::size_t as_of, const PipelineOptions& options,
                        std::uint64_t seed, std::string_view model_name) {
    if (as_of >= panel.bin_count()) throw std::out_of_range("as_of bin beyond panel");
    RunOutput out;
    out.clustering = options.clustering ? cluster_regions(panel, as_of, options.cluster) : singleton_clusters(panel, as_of);
    const auto& clustering = out.clustering;
    const std::vector<std::string> columns = options.features.columns(panel);

    std::vector<std::optional<std::size_t>> cluster_of(panel.region_count());
    const auto groups = clustering.partition.members();
    for (std::size_t c = 0; c < groups.size(); ++c) {
        ClusterModel cm;
        cm.cluster_id = c;
        for (std::size_t local : groups[c]) {
            cm.members.push_back(clustering.included[local]);
            cluster_of[clustering.included[local]] = c;
        }
        const DesignMatrix design = build_design(panel, cm.members, options.features, as_of);
        TrainOutcome trained = train_cluster(design, options, derive_seed(seed, "cluster", cm.members.front()));
        cm.model = std::move(trained.model);
        cm.fallback_reason = std::move(trained.fallback_reason);
        cm.folds_reduced = trained.folds_reduced;
        out.models.push_back(std::move(cm));
    }

    const Date as_of_date = panel.bin_ends()[as_of];
    for (std::size_t r = 0; r < panel.region_count(); ++r) {
        ForecastRecord rec;
        rec.as_of = as_of_date;
        rec.target_date = as_of_date + Days{panel.window_days()};
        rec.region = panel.regions()[r];
        rec.model = std::string(model_name);
        rec.cluster_id = cluster_of[r];

        std::optional<double> estimate;
        if (!cluster_of[r]) {
            add_flag(rec, flag::excluded_zero_history);
        } else {
            const ClusterModel& cm = out.models[*cluster_of[r]];
            if (clustering.partition.fallback && options.clustering) add_flag(rec, flag::single_cluster);
            if (!cm.model) {
                add_flag(rec, flag::fallback_persistence);
            } else if (auto row = feature_row(panel, r, columns, as_of)) {
                estimate = std::max(0.0, cm.model->predict_raw(*row));
                if (!cm.model->fit.diagnostics.converged) add_flag(rec, flag::not_converged);
                if (cm.folds_reduced) add_flag(rec, flag::cv_folds_reduced);
            } else {
                add_flag(rec, flag::missing_features);
                add_flag(rec, flag::fallback_persistence);
            }
        }
        if (!estimate) {
            const double y = persistence_value(panel, r, as_of);
            if (std::isnan(y)) add_flag(rec, flag::missing_input);
            estimate = y;
        }
        rec.estimate = *estimate;
        out.records.push_back(std::move(rec));
    }
    return out;
}

std::vector<ForecastRecord> reduce_runs(const std::vector<std::vector<ForecastRecord>>& runs) {
    if (runs.empty()) return {};
    std::vector<ForecastRecord> out = runs.front();
    const auto count = static_cast<double>(runs.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double sum = 0.0;
        std::set<std::string> flags;
        for (const auto& run : runs) {
            sum += run.at(i).estimate;
            flags.insert(run[i].flags.begin(), run[i].flags.end());
        }
        // Spread from deviations against run 0, so identical runs give exactly 0.
        const double pivot = runs.front()[i].estimate;
        double d1 = 0.0, d2 = 0.0;
        for (const auto& run : runs) {
            const double d = run[i].estimate - pivot;
            d1 += d;
            d2 += d * d;
        }
        const double m = d1 / count;
        out[i].estimate = sum / count;
        out[i].spread = std::sqrt(std::max(0.0, d2 / count - m * m));
        out[i].flags.assign(flags.begin(), flags.end());
    }
    return out;
}

EnsembleOutput forecast_ensemble(const AggregatedPanel& panel, std::size_t as_of, const PipelineOptions& options,
                                 std::uint64_t base_seed, std::size_t runs, std::string_view model_name,
                                 std::size_t jobs) {
    if (runs < 1) throw std::invalid_argument("ensemble needs at least one run");
    EnsembleOutput out;
    out.runs.resize(runs);
    detail::parallel_for(runs, jobs, [&](std::size_t r) {
        out.runs[r] = forecast_once(panel, as_of, options, base_seed + r, model_name);
    });
    std::vector<std::vector<ForecastRecord>> per_run;
    per_run.reserve(runs);
    for (const auto& run : out.runs) per_run.push_back(run.records);
    out.records = reduce_runs(per_run);
    return out;
}

}  // namespace argonet
