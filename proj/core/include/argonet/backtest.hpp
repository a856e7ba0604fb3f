#pragma once

#include "argonet/baselines.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace argonet {

struct BacktestOptions {
    PipelineOptions pipeline{};
    ArOptions ar{};
    std::vector<ModelKind> models{ModelKind::Persistence, ModelKind::Ar, ModelKind::Argo, ModelKind::Argonet,
                                  ModelKind::Augmented};
    std::size_t runs = 20;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

/// A trained cluster model from one ensemble run, kept for coefficient traces.
struct StoredModel {
    Date as_of{};
    std::string variant;
    std::size_t run = 0;
    std::size_t cluster_id = 0;
    std::vector<std::string> members;
    SparseLinearModel model;
};

struct DatedClustering {
    Date as_of{};
    ClusteringResult clustering;  // from run 0 of the primary pipeline variant
};

struct WalkForwardOutput {
    std::vector<ForecastRecord> records;
    std::vector<DatedClustering> clusterings;
    std::vector<StoredModel> models;
};

/// All enabled models at one bin, using a panel already cut at as_of.
WalkForwardOutput forecast_models(const AggregatedPanel& panel, std::size_t as_of, const BacktestOptions& options);

/// Every bin in [start_bin, end_bin]: the panel is truncated at the bin
/// before any model sees it, so training windows expand one bin at a time.
WalkForwardOutput walk_forward(const AggregatedPanel& panel, std::size_t start_bin, std::size_t end_bin,
                               const BacktestOptions& options);

/// Default range: the first bin with one full training row through the last
/// bin whose target has been observed.
std::pair<std::size_t, std::size_t> default_backtest_range(const AggregatedPanel& panel, const FeatureSpec& spec);

}  // namespace argonet
