#pragma once

#include "argonet/timeseries.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace argonet {

struct LassoOptions {
    double tol = 1e-7;
    std::size_t max_iter = 10000;
    bool trace_objective = false;  // record the objective after every sweep
};

struct FitDiagnostics {
    std::size_t iterations = 0;
    bool converged = false;
    double kkt_residual = 0.0;
    std::vector<double> objective_trace;  // filled when LassoOptions::trace_objective is set
};

/// Solution of min (1/2n)||y - Xw - b||^2 + lambda ||w||_1 with an
/// unpenalized intercept.
struct LassoFit {
    Eigen::VectorXd coefficients;
    double intercept = 0.0;
    double lambda = 0.0;
    FitDiagnostics diagnostics;

    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

/// Centered second moments of (X, y), scaled by 1/n. Coordinate descent only
/// needs these, so a solve costs O(p^2) per sweep regardless of the row count.
struct GramStats {
    std::size_t n = 0;
    Eigen::VectorXd x_mean;
    double y_mean = 0.0;
    Eigen::MatrixXd xx;  // (1/n) Xc^T Xc
    Eigen::VectorXd xy;  // (1/n) Xc^T yc
    double yy = 0.0;     // (1/n) yc^T yc
};

GramStats gram_stats(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// max_j |(1/n) X_j^T (y - ybar)|: the smallest lambda giving w = 0.
double lambda_max(const GramStats& stats);
double lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Cyclic coordinate descent with exact soft-threshold updates. Converged
/// once a sweep changes no coefficient by more than tol and the KKT residual
/// is at most tol. Reaching max_iter returns the iterate with
/// converged = false. Throws std::invalid_argument on NaN input.
LassoFit fit_lasso(const GramStats& stats, double lambda, const LassoOptions& options = {},
                   const Eigen::VectorXd* warm_start = nullptr);
LassoFit fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                   const LassoOptions& options = {});

/// Objective value computed directly from the data.
double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w, double b,
                       double lambda);

/// Largest KKT violation computed directly from the data:
/// |g_j - lambda sign(w_j)| for w_j != 0, max(|g_j| - lambda, 0) otherwise,
/// with g = (1/n) X^T (y - Xw - b).
double kkt_residual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LassoFit& fit);

/// Log-spaced grid from lambda_max down to ratio * lambda_max. A zero
/// lambda_max collapses the grid to the single value 0.
std::vector<double> lambda_grid(double lambda_max, std::size_t n_lambda, double ratio);

/// Warm-started fits along a grid.
std::vector<LassoFit> lasso_path(const GramStats& stats, const std::vector<double>& lambdas,
                                 const LassoOptions& options = {});
std::vector<LassoFit> lambda_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::size_t n_lambda = 50,
                                  double ratio = 1e-3, const LassoOptions& options = {});

struct CvOptions {
    std::size_t folds = 10;
    std::size_t n_lambda = 50;
    double lambda_ratio = 1e-3;
    bool time_blocked = false;  // contiguous folds in row order instead of shuffled rows
    LassoOptions solver{};
};

struct CvResult {
    double lambda = 0.0;
    std::size_t lambda_index = 0;
    LassoFit fit;
    std::vector<double> lambdas;
    std::vector<double> cv_mse;
    std::size_t folds_used = 0;
    bool folds_reduced = false;
};

/// K-fold cross-validation over the lambda path; picks the lambda with the
/// lowest mean validation MSE (ties go to the larger lambda) and returns the
/// full-data fit at that lambda. Deterministic given seed. With fewer rows
/// than folds the fold count drops to the row count and folds_reduced is set.
CvResult select_lambda_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::uint64_t seed,
                          const CvOptions& options = {});

/// LASSO fit together with the raw-scale normalization it was trained under.
struct SparseLinearModel {
    std::vector<std::string> columns;
    LassoFit fit;
    NormalizationStats feature_stats;
    NormalizationStats target_stats;  // single column "target"

    double coefficient(std::string_view column) const;
    /// Normalizes a raw feature row with the training stats, evaluates the
    /// linear model and maps the result back to the raw target scale.
    double predict_raw(const Eigen::Ref<const Eigen::RowVectorXd>& raw) const;
};

}  // namespace argonet
