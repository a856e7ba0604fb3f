#pragma once

#include "argonet/backtest.hpp"
#include "argonet/forecaster.hpp"
#include "argonet/timeseries.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace argonet {

/// Throws std::invalid_argument on length mismatch or empty input.
double rmse(std::span<const double> pred, std::span<const double> obs);

/// Needs at least 3 points (std::invalid_argument otherwise); nullopt when
/// either side has zero variance.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

/// nullopt when either vector has zero norm.
std::optional<double> cosine(std::span<const double> a, std::span<const double> b);

/// baseline / model, with 0/0 = 1 and x/0 = +inf.
double relative_improvement(double model_rmse, double baseline_rmse);

struct EvalRow {
    std::string region;
    std::string model;
    double rmse = 0.0;
    std::optional<double> pearson;
    double relative_improvement = 1.0;
    std::size_t n_points = 0;
};

struct EvalReport {
    std::vector<EvalRow> rows;         // region order of the panel, then model order of first appearance
    std::size_t invalid_pearson = 0;   // rows whose correlation is undefined

    const EvalRow* find(std::string_view region, std::string_view model) const;
    /// Mean RMSE over the regions evaluated for `model`.
    double mean_rmse(std::string_view model) const;
    /// Share of that model's rows with relative_improvement > 1.
    double improved_share(std::string_view model) const;
};

/// Pairs each record with the confirmed count of its target bin. The
/// baseline for relative improvement is persistence on exactly the same
/// pairs. Records without a finite estimate or target are skipped.
EvalReport evaluate(std::span<const ForecastRecord> records, const AggregatedPanel& panel);

struct TracePoint {
    std::string region;
    std::string feature;
    Date as_of{};
    double mean_coef = 0.0;
};

/// Mean coefficient per (region, feature, as_of) over the runs that trained
/// a model for the region's cluster. Only models of `variant` are used;
/// features follow `canonical` order and an absent feature counts as 0.
std::vector<TracePoint> coefficient_traces(std::span<const StoredModel> models, std::string_view variant,
                                           std::span<const std::string> canonical);

struct SimilarityResult {
    std::optional<double> pearson;
    std::optional<double> cosine;
    std::size_t entries = 0;
};

/// Flattens both matrices row-major and compares them. With
/// off_diagonal_only the diagonal entries are skipped.
SimilarityResult matrix_similarity(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, bool off_diagonal_only = true);

}  // namespace argonet
