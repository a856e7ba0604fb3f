#include "argonet/backtest.hpp"

#include <algorithm>
#include <stdexcept>

namespace argonet {

namespace {

void keep_models(WalkForwardOutput& out, const AggregatedPanel& panel, const EnsembleOutput& ens, std::size_t as_of,
                 std::string_view variant) {
    for (std::size_t r = 0; r < ens.runs.size(); ++r) {
        for (const auto& cm : ens.runs[r].models) {
            if (!cm.model) continue;
            StoredModel sm;
            sm.as_of = panel.bin_ends()[as_of];
            sm.variant = std::string(variant);
            sm.run = r;
            sm.cluster_id = cm.cluster_id;
            for (std::size_t m : cm.members) sm.members.push_back(panel.regions()[m]);
            sm.model = *cm.model;
            out.models.push_back(std::move(sm));
        }
    }
}

}  // namespace

WalkForwardOutput forecast_models(const AggregatedPanel& panel, std::size_t as_of, const BacktestOptions& options) {
    WalkForwardOutput out;
    bool clustered = false;
    for (ModelKind kind : options.models) {
        std::vector<ForecastRecord> recs;
        switch (kind) {
            case ModelKind::Persistence:
                recs = persistence(panel, as_of);
                break;
            case ModelKind::Ar:
                recs = ar_all(panel, as_of, options.ar, options.pipeline.cv, options.seed);
                break;
            default: {
                const PipelineOptions po = variant_options(kind, options.pipeline);
                const auto name = model_name(kind);
                EnsembleOutput ens = forecast_ensemble(panel, as_of, po, options.seed, options.runs, name, options.jobs);
                keep_models(out, panel, ens, as_of, name);
                if (po.clustering && (!clustered || kind == ModelKind::Augmented)) {
                    out.clusterings.assign(1, {panel.bin_ends()[as_of], ens.runs.front().clustering});
                    clustered = true;
                }
                recs = std::move(ens.records);
            }
        }
        out.records.insert(out.records.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
    }
    return out;
}

WalkForwardOutput walk_forward(const AggregatedPanel& panel, std::size_t start_bin, std::size_t end_bin,
                               const BacktestOptions& options) {
    if (start_bin > end_bin || end_bin >= panel.bin_count()) throw std::invalid_argument("invalid backtest range");
    WalkForwardOutput out;
    for (std::size_t b = start_bin; b <= end_bin; ++b) {
        WalkForwardOutput step = forecast_models(panel.truncated(b), b, options);
        auto move_into = [](auto& dst, auto& src) {
            dst.insert(dst.end(), std::make_move_iterator(src.begin()), std::make_move_iterator(src.end()));
        };
        move_into(out.records, step.records);
        move_into(out.clusterings, step.clusterings);
        move_into(out.models, step.models);
    }
    return out;
}

std::pair<std::size_t, std::size_t> default_backtest_range(const AggregatedPanel& panel, const FeatureSpec& spec) {
    const auto last = panel.last_observed_bin();
    if (!last || *last < spec.lags + 1) throw DataError("not enough bins for a backtest");
    return {spec.lags, *last - 1};
}

}  // namespace argonet
