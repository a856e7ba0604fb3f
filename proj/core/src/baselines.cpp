#include "argonet/baselines.hpp"

#include "argonet/rng.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace argonet {

namespace {

constexpr std::array<std::pair<ModelKind, std::string_view>, 5> kNames{{
    {ModelKind::Persistence, "persistence"},
    {ModelKind::Ar, "ar"},
    {ModelKind::Argo, "argo"},
    {ModelKind::Argonet, "argonet"},
    {ModelKind::Augmented, "augmented"},
}};

constexpr double kRidgeJitter = 1e-8;

ForecastRecord blank_record(const AggregatedPanel& panel, std::size_t region, std::size_t as_of, std::string_view model) {
    ForecastRecord rec;
    rec.as_of = panel.bin_ends()[as_of];
    rec.target_date = rec.as_of + Days{panel.window_days()};
    rec.region = panel.regions()[region];
    rec.model = std::string(model);
    return rec;
}

void fall_back(ForecastRecord& rec, const AggregatedPanel& panel, std::size_t region, std::size_t as_of) {
    rec.flags.emplace_back(flag::fallback_persistence);
    rec.estimate = panel.value(signal::confirmed, region, as_of);
    if (std::isnan(rec.estimate)) rec.flags.emplace_back(flag::missing_input);
}

}  // namespace

std::string_view model_name(ModelKind kind) {
    for (const auto& [k, name] : kNames) {
        if (k == kind) return name;
    }
    throw std::invalid_argument("unknown model kind");
}

std::optional<ModelKind> parse_model(std::string_view name) {
    for (const auto& [k, n] : kNames) {
        if (n == name) return k;
    }
    return std::nullopt;
}

std::vector<ForecastRecord> persistence(const AggregatedPanel& panel, std::size_t as_of) {
    if (as_of >= panel.bin_count()) throw std::out_of_range("as_of bin beyond panel");
    std::vector<ForecastRecord> out;
    for (std::size_t r = 0; r < panel.region_count(); ++r) {
        ForecastRecord rec = blank_record(panel, r, as_of, "persistence");
        rec.estimate = panel.value(signal::confirmed, r, as_of);
        if (std::isnan(rec.estimate)) rec.flags.emplace_back(flag::missing_input);
        out.push_back(std::move(rec));
    }
    return out;
}

ForecastRecord ar_fit_predict(const AggregatedPanel& panel, std::size_t region, std::size_t as_of,
                              const ArOptions& options, const CvOptions& cv, std::uint64_t seed) {
    if (as_of >= panel.bin_count()) throw std::out_of_range("as_of bin beyond panel");
    ForecastRecord rec = blank_record(panel, region, as_of, "ar");
    const FeatureSpec spec = FeatureSpec::lags_only(options.lags);
    const std::size_t regions[] = {region};
    const DesignMatrix design = build_design(panel, regions, spec, as_of);
    const auto columns = spec.columns(panel);
    const auto row = feature_row(panel, region, columns, as_of);
    if (!row) {
        rec.flags.emplace_back(flag::missing_features);
        fall_back(rec, panel, region, as_of);
        return rec;
    }

    if (options.penalized) {
        PipelineOptions po;
        po.features = spec;
        po.clustering = false;
        po.augmentation = false;
        po.cv = cv;
        const TrainOutcome trained = train_cluster(design, po, derive_seed(seed, "cluster", region));
        if (!trained.model) {
            fall_back(rec, panel, region, as_of);
            return rec;
        }
        rec.estimate = std::max(0.0, trained.model->predict_raw(*row));
        return rec;
    }

    const Eigen::Index n = design.features.rows();
    const Eigen::Index p = design.features.cols();
    if (n < p + 2) {
        fall_back(rec, panel, region, as_of);
        return rec;
    }
    const Eigen::RowVectorXd x_mean = design.features.colwise().mean();
    const double y_mean = design.target.mean();
    const Eigen::MatrixXd xc = design.features.rowwise() - x_mean;
    const Eigen::VectorXd yc = design.target.array() - y_mean;
    Eigen::MatrixXd normal = xc.transpose() * xc;
    const Eigen::VectorXd rhs = xc.transpose() * yc;

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal, Eigen::EigenvaluesOnly);
    const double hi = eig.eigenvalues().maxCoeff();
    const double lo = eig.eigenvalues().minCoeff();
    if (n <= p || hi <= 0.0 || lo <= hi * 1e-12) {
        normal.diagonal().array() += kRidgeJitter;
        rec.flags.emplace_back(flag::ridge_jitter);
    }
    const Eigen::VectorXd w = normal.ldlt().solve(rhs);
    rec.estimate = std::max(0.0, y_mean + (*row - x_mean).dot(w));
    return rec;
}

std::vector<ForecastRecord> ar_all(const AggregatedPanel& panel, std::size_t as_of, const ArOptions& options,
                                   const CvOptions& cv, std::uint64_t seed) {
    std::vector<ForecastRecord> out;
    for (std::size_t r = 0; r < panel.region_count(); ++r) out.push_back(ar_fit_predict(panel, r, as_of, options, cv, seed));
    return out;
}

PipelineOptions variant_options(ModelKind kind, const PipelineOptions& base) {
    PipelineOptions out = base;
    switch (kind) {
        case ModelKind::Argo:
            out.clustering = false;
            out.augmentation = false;
            out.features.mechanistic = false;
            break;
        case ModelKind::Argonet:
            out.features.mechanistic = false;
            break;
        case ModelKind::Augmented:
            break;
        default:
            throw std::invalid_argument("model has no pipeline configuration");
    }
    return out;
}

EnsembleOutput argo(const AggregatedPanel& panel, std::size_t as_of, const PipelineOptions& base,
                    std::uint64_t base_seed, std::size_t runs, std::size_t jobs) {
    return forecast_ensemble(panel, as_of, variant_options(ModelKind::Argo, base), base_seed, runs, "argo", jobs);
}

EnsembleOutput argonet(const AggregatedPanel& panel, std::size_t as_of, const PipelineOptions& base,
                       std::uint64_t base_seed, std::size_t runs, std::size_t jobs) {
    return forecast_ensemble(panel, as_of, variant_options(ModelKind::Argonet, base), base_seed, runs, "argonet", jobs);
}

EnsembleOutput augmented(const AggregatedPanel& panel, std::size_t as_of, const PipelineOptions& base,
                         std::uint64_t base_seed, std::size_t runs, std::size_t jobs) {
    return forecast_ensemble(panel, as_of, variant_options(ModelKind::Augmented, base), base_seed, runs, "augmented", jobs);
}

}  // namespace argonet
