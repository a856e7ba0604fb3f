#pragma once

#include "argonet/forecaster.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace argonet {

enum class ModelKind { Persistence, Ar, Argo, Argonet, Augmented };

std::string_view model_name(ModelKind kind);
std::optional<ModelKind> parse_model(std::string_view name);

/// estimate = y at as_of, untouched by any configuration.
std::vector<ForecastRecord> persistence(const AggregatedPanel& panel, std::size_t as_of);

struct ArOptions {
    std::size_t lags = 4;
    bool penalized = false;  // LASSO on the lag design instead of OLS
};

/// Single-region AR refit on the expanding window ending at as_of. OLS via
/// the centered normal equations; a rank-deficient system gets 1e-8 added to
/// its diagonal and the ridge_jitter flag. Fewer than lags + 2 training rows
/// falls back to persistence.
ForecastRecord ar_fit_predict(const AggregatedPanel& panel, std::size_t region, std::size_t as_of,
                              const ArOptions& options = {}, const CvOptions& cv = {}, std::uint64_t seed = 0);

std::vector<ForecastRecord> ar_all(const AggregatedPanel& panel, std::size_t as_of, const ArOptions& options = {},
                                   const CvOptions& cv = {}, std::uint64_t seed = 0);

/// Pipeline settings that realize each learned model family from a common
/// base configuration: argo drops pooling, augmentation and the mechanistic
/// input; argonet drops the mechanistic input only.
PipelineOptions variant_options(ModelKind kind, const PipelineOptions& base);

EnsembleOutput argo(const AggregatedPanel& panel, std::size_t as_of, const PipelineOptions& base,
                    std::uint64_t base_seed, std::size_t runs = 20, std::size_t jobs = 1);
EnsembleOutput argonet(const AggregatedPanel& panel, std::size_t as_of, const PipelineOptions& base,
                       std::uint64_t base_seed, std::size_t runs = 20, std::size_t jobs = 1);
EnsembleOutput augmented(const AggregatedPanel& panel, std::size_t as_of, const PipelineOptions& base,
                         std::uint64_t base_seed, std::size_t runs = 20, std::size_t jobs = 1);

}  // namespace argonet
