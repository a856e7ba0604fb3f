#include "argonet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace argonet {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b, std::size_t min_len) {
    if (a.size() != b.size()) throw std::invalid_argument("series lengths differ");
    if (a.size() < min_len) throw std::invalid_argument("series too short");
}

double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> obs) {
    check_pair(pred, obs, 1);
    double ss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) ss += (pred[i] - obs[i]) * (pred[i] - obs[i]);
    return std::sqrt(ss / static_cast<double>(pred.size()));
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    check_pair(a, b, 3);
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::optional<double> cosine(std::span<const double> a, std::span<const double> b) {
    check_pair(a, b, 1);
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (aa <= 0.0 || bb <= 0.0) return std::nullopt;
    return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

double relative_improvement(double model_rmse, double baseline_rmse) {
    if (model_rmse < 0.0 || baseline_rmse < 0.0) throw std::invalid_argument("RMSE must be non-negative");
    if (model_rmse == 0.0) return baseline_rmse == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return baseline_rmse / model_rmse;
}

const EvalRow* EvalReport::find(std::string_view region, std::string_view model) const {
    for (const auto& r : rows) {
        if (r.region == region && r.model == model) return &r;
    }
    return nullptr;
}

double EvalReport::mean_rmse(std::string_view model) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
        if (r.model != model) continue;
        sum += r.rmse;
        ++n;
    }
    return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
}

double EvalReport::improved_share(std::string_view model) const {
    std::size_t n = 0, better = 0;
    for (const auto& r : rows) {
        if (r.model != model) continue;
        ++n;
        if (r.relative_improvement > 1.0) ++better;
    }
    return n == 0 ? 0.0 : static_cast<double>(better) / static_cast<double>(n);
}

EvalReport evaluate(std::span<const ForecastRecord> records, const AggregatedPanel& panel) {
    struct Pairs {
        std::vector<double> pred, obs, base;
    };
    std::vector<std::string> model_order;
    std::map<std::pair<std::string, std::string>, Pairs> pairs;
    for (const auto& rec : records) {
        if (std::find(model_order.begin(), model_order.end(), rec.model) == model_order.end()) model_order.push_back(rec.model);
        const auto region = panel.find_region(rec.region);
        const auto target = panel.bin_index(rec.target_date);
        const auto origin = panel.bin_index(rec.as_of);
        if (!region || !target || !origin || !std::isfinite(rec.estimate)) continue;
        const double obs = panel.value(signal::confirmed, *region, *target);
        const double base = panel.value(signal::confirmed, *region, *origin);
        if (std::isnan(obs) || std::isnan(base)) continue;
        auto& p = pairs[{rec.region, rec.model}];
        p.pred.push_back(rec.estimate);
        p.obs.push_back(obs);
        p.base.push_back(base);
    }

    EvalReport out;
    for (const auto& region : panel.regions()) {
        for (const auto& model : model_order) {
            const auto it = pairs.find({region, model});
            if (it == pairs.end()) continue;
            const Pairs& p = it->second;
            EvalRow row;
            row.region = region;
            row.model = model;
            row.n_points = p.pred.size();
            row.rmse = rmse(p.pred, p.obs);
            row.relative_improvement = relative_improvement(row.rmse, rmse(p.base, p.obs));
            if (p.pred.size() >= 3) row.pearson = pearson(p.pred, p.obs);
            if (!row.pearson) ++out.invalid_pearson;
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

std::vector<TracePoint> coefficient_traces(std::span<const StoredModel> models, std::string_view variant,
                                           std::span<const std::string> canonical) {
    // (as_of, region) -> per-run coefficient maps
    std::map<std::pair<Date, std::string>, std::vector<const SparseLinearModel*>> by_key;
    for (const auto& sm : models) {
        if (sm.variant != variant) continue;
        for (const auto& member : sm.members) by_key[{sm.as_of, member}].push_back(&sm.model);
    }
    std::vector<TracePoint> out;
    for (const auto& [key, fits] : by_key) {
        for (const auto& feature : canonical) {
            double sum = 0.0;
            for (const SparseLinearModel* m : fits) {
                const auto col = std::find(m->columns.begin(), m->columns.end(), feature);
                if (col != m->columns.end()) sum += m->fit.coefficients(col - m->columns.begin());
            }
            out.push_back({key.second, feature, key.first, sum / static_cast<double>(fits.size())});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const TracePoint& a, const TracePoint& b) {
        if (a.region != b.region) return a.region < b.region;
        return a.as_of < b.as_of;
    });
    return out;
}

SimilarityResult matrix_similarity(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, bool off_diagonal_only) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("matrix dimensions differ");
    std::vector<double> va, vb;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (off_diagonal_only && i == j) continue;
            va.push_back(a(i, j));
            vb.push_back(b(i, j));
        }
    }
    SimilarityResult out;
    out.entries = va.size();
    if (va.empty()) return out;
    out.cosine = cosine(va, vb);
    if (va.size() >= 3) out.pearson = pearson(va, vb);
    return out;
}

}  // namespace argonet
