#pragma once

#include "argonet/clustering.hpp"
#include "argonet/date.hpp"
#include "argonet/lasso.hpp"
#include "argonet/timeseries.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace argonet {

/// Which inputs enter the regression. Lag i is the confirmed count i bins
/// before T; exogenous signals are taken at T, except the mechanistic
/// forecast, which is the model's prediction for the target bin T+1.
struct FeatureSpec {
    std::size_t lags = 4;
    bool search = true;
    bool media = true;
    bool deaths = true;
    bool cumulative = true;
    bool mechanistic = true;

    void validate() const;
    /// Column names in canonical order: y_lag0..y_lag{L-1}, search terms,
    /// media, deaths, cumulative, mechanistic. Exogenous columns appear only
    /// when enabled and present in the panel.
    std::vector<std::string> columns(const AggregatedPanel& panel) const;

    static FeatureSpec lags_only(std::size_t lags);
};

std::string lag_column(std::size_t i);

struct DesignRow {
    std::size_t region = 0;
    Date as_of{};        // T
    Date target_date{};  // T + one bin
};

struct DesignMatrix {
    std::vector<std::string> columns;
    Eigen::MatrixXd features;
    Eigen::VectorXd target;
    std::vector<DesignRow> rows;
    std::vector<std::size_t> dropped_regions;  // no usable row

    std::size_t row_count() const { return rows.size(); }
};

/// One row per (region, T) with T + 1 <= as_of, stacked across `regions`.
/// Reads nothing after `as_of` except the mechanistic forecast of a row's
/// own target bin.
DesignMatrix build_design(const AggregatedPanel& panel, std::span<const std::size_t> regions, const FeatureSpec& spec,
                          std::size_t as_of);

/// Raw feature row for predicting bin T+1 from bin T, or nullopt when an
/// input is unavailable.
std::optional<Eigen::RowVectorXd> feature_row(const AggregatedPanel& panel, std::size_t region,
                                              std::span<const std::string> columns, std::size_t t);

struct PipelineOptions {
    FeatureSpec features{};
    bool clustering = true;
    ClusteringOptions cluster{};
    bool augmentation = true;
    AugmentOptions augment{};
    CvOptions cv{};
};

struct TrainOutcome {
    std::optional<SparseLinearModel> model;
    std::string fallback_reason;  // set when model is empty
    bool folds_reduced = false;
};

/// z-score on the raw rows, then augmentation, then a cross-validated LASSO
/// fit. Fewer than 2 rows, or a constant target, yields no model.
TrainOutcome train_cluster(const DesignMatrix& design, const PipelineOptions& options, std::uint64_t seed);

namespace flag {
inline constexpr std::string_view excluded_zero_history = "excluded_zero_history";
inline constexpr std::string_view fallback_persistence = "fallback_persistence";
inline constexpr std::string_view missing_features = "missing_features";
inline constexpr std::string_view missing_input = "missing_input";
inline constexpr std::string_view single_cluster = "single_cluster_fallback";
inline constexpr std::string_view cv_folds_reduced = "cv_folds_reduced";
inline constexpr std::string_view ridge_jitter = "ridge_jitter";
inline constexpr std::string_view not_converged = "not_converged";
}  // namespace flag

struct ForecastRecord {
    Date as_of{};
    Date target_date{};
    std::string region;
    std::string model;
    double estimate = 0.0;  // >= 0; NaN only with the missing_input flag
    double spread = 0.0;    // population std over ensemble runs
    std::optional<std::size_t> cluster_id;
    std::vector<std::string> flags;

    bool has_flag(std::string_view f) const;
};

struct ClusterModel {
    std::size_t cluster_id = 0;
    std::vector<std::size_t> members;  // panel region indices
    std::optional<SparseLinearModel> model;
    std::string fallback_reason;
    bool folds_reduced = false;
};

struct RunOutput {
    std::vector<ForecastRecord> records;  // one per panel region, in region order
    ClusteringResult clustering;
    std::vector<ClusterModel> models;
};

/// One pass of cluster, pool, normalize, augment, fit and predict at bin
/// `as_of`. Estimates are clamped at 0.
RunOutput forecast_once(const AggregatedPanel& panel, std::size_t as_of, const PipelineOptions& options,
                        std::uint64_t seed, std::string_view model_name = "augmented");

struct EnsembleOutput {
    std::vector<ForecastRecord> records;
    std::vector<RunOutput> runs;
};

/// Mean of forecast_once over seeds base_seed .. base_seed + runs - 1. Runs
/// are spread over `jobs` threads; the reduction is in run order, so the
/// result does not depend on the thread count.
EnsembleOutput forecast_ensemble(const AggregatedPanel& panel, std::size_t as_of, const PipelineOptions& options,
                                 std::uint64_t base_seed, std::size_t runs = 20, std::string_view model_name = "augmented",
                                 std::size_t jobs = 1);

/// Ensemble reduction shared by every model family.
std::vector<ForecastRecord> reduce_runs(const std::vector<std::vector<ForecastRecord>>& runs);

}  // namespace argonet
