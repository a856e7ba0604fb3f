#include "argonet/lasso.hpp"

#include "argonet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace argonet {

namespace {

// Fixed-order reductions. Results must not depend on the vector length so
// that appending an all-zero column leaves every other quantity bitwise equal.
double seq_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) acc += a(i) * b(i);
    return acc;
}

Eigen::VectorXd seq_symv(const Eigen::MatrixXd& m, const Eigen::VectorXd& w) {
    Eigen::VectorXd out(m.rows());
    for (Eigen::Index j = 0; j < m.rows(); ++j) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < m.cols(); ++k) acc += m(j, k) * w(k);
        out(j) = acc;
    }
    return out;
}

double seq_l1(const Eigen::VectorXd& w) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) acc += std::abs(w(i));
    return acc;
}

double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

void require_finite(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw std::invalid_argument("X and y row counts differ");
    if (!X.allFinite() || !y.allFinite()) throw std::invalid_argument("NaN or infinite value in lasso input");
}

double gram_objective(const GramStats& s, const Eigen::VectorXd& w, double lambda) {
    return 0.5 * (s.yy - 2.0 * seq_dot(w, s.xy) + seq_dot(w, seq_symv(s.xx, w))) + lambda * seq_l1(w);
}

double gram_kkt(const Eigen::VectorXd& grad, const Eigen::VectorXd& w, double lambda) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        const double v = w(j) != 0.0 ? std::abs(grad(j) - lambda * (w(j) > 0.0 ? 1.0 : -1.0))
                                     : std::max(std::abs(grad(j)) - lambda, 0.0);
        worst = std::max(worst, v);
    }
    return worst;
}

// Raw (uncentered) sums of a row subset; differences of these give the
// training-fold moments without touching the rows again.
struct RawSums {
    double n = 0.0;
    Eigen::VectorXd x;
    double y = 0.0;
    Eigen::MatrixXd xx;
    Eigen::VectorXd xy;
    double yy = 0.0;

    explicit RawSums(Eigen::Index p) : x(Eigen::VectorXd::Zero(p)), xx(Eigen::MatrixXd::Zero(p, p)), xy(Eigen::VectorXd::Zero(p)) {}

    RawSums& operator-=(const RawSums& o) {
        n -= o.n;
        x -= o.x;
        y -= o.y;
        xx -= o.xx;
        xy -= o.xy;
        yy -= o.yy;
        return *this;
    }

    GramStats centered() const {
        GramStats s;
        s.n = static_cast<std::size_t>(n);
        s.x_mean = x / n;
        s.y_mean = y / n;
        s.xx = xx / n - s.x_mean * s.x_mean.transpose();
        s.xy = xy / n - s.x_mean * s.y_mean;
        s.yy = yy / n - s.y_mean * s.y_mean;
        return s;
    }

    // Mean squared error of a fit on these rows.
    double mse(const LassoFit& f) const {
        const Eigen::VectorXd& w = f.coefficients;
        const double b = f.intercept;
        const double sse =
            yy - 2.0 * b * y - 2.0 * seq_dot(w, xy) + n * b * b + 2.0 * b * seq_dot(w, x) + seq_dot(w, seq_symv(xx, w));
        return std::max(sse, 0.0) / n;
    }
};

RawSums raw_sums(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<Eigen::Index>& rows) {
    const Eigen::Index p = X.cols();
    RawSums s(p);
    for (Eigen::Index i : rows) {
        const auto xi = X.row(i);
        s.n += 1.0;
        s.x += xi.transpose();
        s.y += y(i);
        s.xx.selfadjointView<Eigen::Lower>().rankUpdate(xi.transpose());
        s.xy += xi.transpose() * y(i);
        s.yy += y(i) * y(i);
    }
    s.xx = s.xx.selfadjointView<Eigen::Lower>();
    return s;
}

}  // namespace

GramStats gram_stats(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    require_finite(X, y);
    if (X.rows() == 0) throw std::invalid_argument("lasso input has no rows");
    const auto n = static_cast<double>(X.rows());
    const Eigen::Index p = X.cols();
    GramStats s;
    s.n = static_cast<std::size_t>(X.rows());
    s.x_mean.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < X.rows(); ++i) acc += X(i, j);
        s.x_mean(j) = acc / n;
    }
    s.y_mean = y.mean();
    // Column-pair dot products in a fixed order: an entry does not depend on
    // which other columns are present.
    Eigen::MatrixXd xc = X.rowwise() - s.x_mean.transpose();
    const Eigen::VectorXd yc = y.array() - s.y_mean;
    s.xx.resize(p, p);
    s.xy.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double* cj = xc.col(j).data();
        for (Eigen::Index k = 0; k <= j; ++k) {
            const double* ck = xc.col(k).data();
            double acc = 0.0;
            for (Eigen::Index i = 0; i < X.rows(); ++i) acc += cj[i] * ck[i];
            s.xx(j, k) = s.xx(k, j) = acc / n;
        }
        double acc = 0.0;
        for (Eigen::Index i = 0; i < X.rows(); ++i) acc += cj[i] * yc(i);
        s.xy(j) = acc / n;
    }
    s.yy = yc.squaredNorm() / n;
    return s;
}

double lambda_max(const GramStats& stats) { return stats.xy.size() == 0 ? 0.0 : stats.xy.cwiseAbs().maxCoeff(); }

double lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) { return lambda_max(gram_stats(X, y)); }

LassoFit fit_lasso(const GramStats& stats, double lambda, const LassoOptions& options, const Eigen::VectorXd* warm_start) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
    const Eigen::Index p = stats.xy.size();
    LassoFit out;
    out.lambda = lambda;
    out.coefficients = warm_start ? *warm_start : Eigen::VectorXd::Zero(p);
    Eigen::VectorXd& w = out.coefficients;
    Eigen::VectorXd grad = stats.xy - seq_symv(stats.xx, w);

    auto& diag = out.diagnostics;
    for (diag.iterations = 0; diag.iterations < options.max_iter;) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double a = stats.xx(j, j);
            if (a <= 0.0) {
                w(j) = 0.0;
                continue;
            }
            const double updated = soft_threshold(grad(j) + a * w(j), lambda) / a;
            const double delta = updated - w(j);
            if (delta != 0.0) {
                for (Eigen::Index k = 0; k < p; ++k) grad(k) -= stats.xx(k, j) * delta;
                w(j) = updated;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        ++diag.iterations;
        if (options.trace_objective) diag.objective_trace.push_back(gram_objective(stats, w, lambda));
        if (max_change < options.tol) {
            grad = stats.xy - seq_symv(stats.xx, w);  // refresh to drop accumulated rounding
            if (gram_kkt(grad, w, lambda) <= options.tol) {
                diag.converged = true;
                break;
            }
        }
    }
    diag.kkt_residual = gram_kkt(stats.xy - seq_symv(stats.xx, w), w, lambda);
    out.intercept = stats.y_mean - seq_dot(stats.x_mean, w);
    return out;
}

LassoFit fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda, const LassoOptions& options) {
    return fit_lasso(gram_stats(X, y), lambda, options);
}

double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w, double b,
                       double lambda) {
    const Eigen::VectorXd r = (y - X * w).array() - b;
    return r.squaredNorm() / (2.0 * static_cast<double>(X.rows())) + lambda * w.lpNorm<1>();
}

double kkt_residual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LassoFit& fit) {
    const Eigen::VectorXd r = (y - X * fit.coefficients).array() - fit.intercept;
    const Eigen::VectorXd g = X.transpose() * r / static_cast<double>(X.rows());
    return gram_kkt(g, fit.coefficients, fit.lambda);
}

std::vector<double> lambda_grid(double lmax, std::size_t n_lambda, double ratio) {
    if (n_lambda == 0) throw std::invalid_argument("n_lambda must be positive");
    if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("lambda ratio must be in (0, 1]");
    if (lmax <= 0.0) return {0.0};
    std::vector<double> grid(n_lambda);
    for (std::size_t i = 0; i < n_lambda; ++i) {
        const double t = n_lambda == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n_lambda - 1);
        grid[i] = lmax * std::pow(ratio, t);
    }
    grid.front() = lmax;
    return grid;
}

std::vector<LassoFit> lasso_path(const GramStats& stats, const std::vector<double>& lambdas, const LassoOptions& options) {
    std::vector<LassoFit> path;
    path.reserve(lambdas.size());
    for (double lambda : lambdas) {
        path.push_back(fit_lasso(stats, lambda, options, path.empty() ? nullptr : &path.back().coefficients));
    }
    return path;
}

std::vector<LassoFit> lambda_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::size_t n_lambda, double ratio,
                                  const LassoOptions& options) {
    const GramStats stats = gram_stats(X, y);
    return lasso_path(stats, lambda_grid(lambda_max(stats), n_lambda, ratio), options);
}

CvResult select_lambda_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::uint64_t seed, const CvOptions& options) {
    require_finite(X, y);
    const auto n = static_cast<std::size_t>(X.rows());
    if (n < 2) throw std::invalid_argument("cross-validation needs at least 2 rows");
    if (options.folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");

    CvResult out;
    out.folds_used = options.folds;
    if (n < options.folds) {
        out.folds_used = n;
        out.folds_reduced = true;
    }

    const GramStats full = gram_stats(X, y);
    out.lambdas = lambda_grid(lambda_max(full), options.n_lambda, options.lambda_ratio);

    // Work on globally centered data so the fold moments stay well scaled.
    const Eigen::MatrixXd xc = X.rowwise() - full.x_mean.transpose();
    const Eigen::VectorXd yc = y.array() - full.y_mean;

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    if (!options.time_blocked) {
        // Fisher-Yates driven by counter-based draws.
        for (std::size_t i = n; i-- > 1;) {
            const auto j = index_from_key(derive_seed(seed, "cv.shuffle", i), i + 1);
            std::swap(order[i], order[j]);
        }
    }
    std::vector<std::vector<Eigen::Index>> fold_rows(out.folds_used);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t fold = options.time_blocked ? i * out.folds_used / n : i % out.folds_used;
        fold_rows[fold].push_back(order[i]);
    }
    std::vector<Eigen::Index> all(n);
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    const RawSums total = raw_sums(xc, yc, all);

    out.cv_mse.assign(out.lambdas.size(), 0.0);
    for (const auto& rows : fold_rows) {
        const RawSums held = raw_sums(xc, yc, rows);
        RawSums train = total;
        train -= held;
        const auto path = lasso_path(train.centered(), out.lambdas, options.solver);
        for (std::size_t l = 0; l < path.size(); ++l) {
            out.cv_mse[l] += held.mse(path[l]) / static_cast<double>(out.folds_used);
        }
    }

    out.lambda_index = 0;
    for (std::size_t l = 1; l < out.cv_mse.size(); ++l) {
        if (out.cv_mse[l] < out.cv_mse[out.lambda_index]) out.lambda_index = l;
    }
    out.lambda = out.lambdas[out.lambda_index];
    const std::vector<double> prefix(out.lambdas.begin(), out.lambdas.begin() + static_cast<std::ptrdiff_t>(out.lambda_index) + 1);
    out.fit = lasso_path(full, prefix, options.solver).back();
    return out;
}

double LassoFit::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    double acc = intercept;
    for (Eigen::Index i = 0; i < x.size(); ++i) acc += x(i) * coefficients(i);
    return acc;
}

double SparseLinearModel::coefficient(std::string_view column) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == column) return fit.coefficients(static_cast<Eigen::Index>(i));
    }
    throw std::invalid_argument("model has no coefficient '" + std::string(column) + "'");
}

double SparseLinearModel::predict_raw(const Eigen::Ref<const Eigen::RowVectorXd>& raw) const {
    if (static_cast<std::size_t>(raw.size()) != columns.size()) throw std::invalid_argument("feature row width mismatch");
    Eigen::RowVectorXd z(raw.size());
    for (Eigen::Index c = 0; c < raw.size(); ++c) {
        const auto idx = feature_stats.find(columns[static_cast<std::size_t>(c)]);
        if (!idx) throw std::invalid_argument("model stats missing column " + columns[static_cast<std::size_t>(c)]);
        z(c) = feature_stats.normalize(*idx, raw(c));
    }
    return target_stats.denormalize(0, fit.predict(z));
}

}  // namespace argonet
