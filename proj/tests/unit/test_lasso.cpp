#include <doctest.h>

#include "oracles.hpp"

#include <argonet/lasso.hpp>

#include <cmath>
#include <limits>
#include <random>

using namespace argonet;

namespace {

struct Instance {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
};

// Standardized columns (population std 1) with a sparse planted signal.
Instance random_instance(std::mt19937_64& rng, Eigen::Index n, Eigen::Index p, double noise = 0.5) {
    std::normal_distribution<double> nd;
    Instance in{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
    for (Eigen::Index i = 0; i < in.X.size(); ++i) in.X.data()[i] = nd(rng);
    for (Eigen::Index j = 1; j < p; j += 2) in.X.col(j) += 0.5 * in.X.col(j - 1);  // some correlation
    for (Eigen::Index j = 0; j < p; ++j) {
        const double m = in.X.col(j).mean();
        in.X.col(j).array() -= m;
        in.X.col(j) /= std::sqrt(in.X.col(j).squaredNorm() / n);
    }
    Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
    for (Eigen::Index j = 0; j < p; j += 3) w(j) = nd(rng);
    in.y = in.X * w;
    for (Eigen::Index i = 0; i < n; ++i) in.y(i) += noise * nd(rng) + 3.0;
    return in;
}

double soft(double z, double l) { return z > l ? z - l : (z < -l ? z + l : 0.0); }

}  // namespace

TEST_CASE("lambda at or above lambda_max gives the zero model") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 10; ++t) {
        const auto in = random_instance(rng, 30, 5);
        const double lmax = lambda_max(in.X, in.y);
        for (double scale : {1.0, 1.5}) {
            const auto fit = fit_lasso(in.X, in.y, lmax * scale);
            CHECK(fit.coefficients.isZero(0.0));
            CHECK(fit.intercept == doctest::Approx(in.y.mean()).epsilon(1e-14));
        }
    }
}

TEST_CASE("lambda_max oracle") {
    std::mt19937_64 rng(2);
    const auto in = random_instance(rng, 25, 4);
    double ref = 0;
    const double ybar = in.y.mean();
    for (Eigen::Index j = 0; j < 4; ++j) {
        double s = 0;
        for (Eigen::Index i = 0; i < 25; ++i) s += in.X(i, j) * (in.y(i) - ybar);
        ref = std::max(ref, std::abs(s / 25));
    }
    CHECK(lambda_max(in.X, in.y) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("univariate fit is the soft-threshold of the OLS slope") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        const auto in = random_instance(rng, 20 + t, 1);
        double z = 0;
        const double ybar = in.y.mean();
        for (Eigen::Index i = 0; i < in.X.rows(); ++i) z += in.X(i, 0) * (in.y(i) - ybar);
        z /= static_cast<double>(in.X.rows());
        CHECK(fit_lasso(in.X, in.y, 0.0).coefficients(0) == doctest::Approx(z).epsilon(1e-10));
        for (double l : {0.01, 0.1, 0.3, 2.0}) {
            CHECK(std::abs(fit_lasso(in.X, in.y, l).coefficients(0) - soft(z, l)) < 1e-10);
        }
    }
}

TEST_CASE("fit matches the projected-gradient oracle objective") {
    std::mt19937_64 rng(4);
    const auto in = random_instance(rng, 40, 5);
    const double lambda = 0.1 * lambda_max(in.X, in.y);
    const auto fit = fit_lasso(in.X, in.y, lambda);
    REQUIRE(fit.diagnostics.converged);
    const auto ref = oracle::projected_gradient_lasso(in.X, in.y, lambda);
    const double ours = lasso_objective(in.X, in.y, fit.coefficients, fit.intercept, lambda);
    CHECK(ours == doctest::Approx(oracle::lasso_objective(in.X, in.y, fit.coefficients, fit.intercept, lambda)).epsilon(1e-14));
    CHECK(std::abs(ours - ref.objective) <= 1e-6 * std::abs(ref.objective));
    CHECK(ours <= ref.objective * (1 + 1e-9));
}

TEST_CASE("KKT conditions hold along the path") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const auto in = random_instance(rng, 15 + 3 * t, 2 + t % 10);
        const auto path = lambda_path(in.X, in.y, 30, 1e-3);
        CHECK(path.front().coefficients.isZero(0.0));
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (!path[i].diagnostics.converged) continue;
            const double tol = LassoOptions{}.tol;
            CHECK(kkt_residual(in.X, in.y, path[i]) <= 10 * tol);
            // written out directly as well
            const Eigen::VectorXd r = (in.y - in.X * path[i].coefficients).array() - path[i].intercept;
            for (Eigen::Index j = 0; j < in.X.cols(); ++j) {
                const double g = in.X.col(j).dot(r) / static_cast<double>(in.X.rows());
                const double w = path[i].coefficients(j);
                if (w != 0)
                    CHECK(std::abs(g - path[i].lambda * (w > 0 ? 1 : -1)) <= 10 * tol);
                else
                    CHECK(std::abs(g) <= path[i].lambda + 10 * tol);
            }
            if (i > 0)
                CHECK(path[i - 1].coefficients.lpNorm<1>() <= path[i].coefficients.lpNorm<1>() + 1e-9);
        }
    }
}

TEST_CASE("n_lambda = 1 gives a single zero fit at lambda_max") {
    std::mt19937_64 rng(6);
    const auto in = random_instance(rng, 20, 3);
    const auto path = lambda_path(in.X, in.y, 1, 1e-3);
    REQUIRE(path.size() == 1);
    CHECK(path[0].lambda == doctest::Approx(lambda_max(in.X, in.y)));
    CHECK(path[0].coefficients.isZero(0.0));
}

TEST_CASE("objective never increases across sweeps") {
    std::mt19937_64 rng(7);
    LassoOptions opt;
    opt.trace_objective = true;
    for (int t = 0; t < 20; ++t) {
        const auto in = random_instance(rng, 30, 8);
        const auto fit = fit_lasso(in.X, in.y, 0.02 * lambda_max(in.X, in.y), opt);
        const auto& tr = fit.diagnostics.objective_trace;
        REQUIRE(tr.size() == fit.diagnostics.iterations);
        for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr[i] <= tr[i - 1] + 1e-13 * std::abs(tr[i - 1]));
    }
}

TEST_CASE("duplicating every row leaves the coefficients unchanged") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 10; ++t) {
        const auto in = random_instance(rng, 25, 6);
        Eigen::MatrixXd X2(50, 6);
        Eigen::VectorXd y2(50);
        X2 << in.X, in.X;
        y2 << in.y, in.y;
        const double l = 0.05 * lambda_max(in.X, in.y);
        const auto a = fit_lasso(in.X, in.y, l), b = fit_lasso(X2, y2, l);
        CHECK((a.coefficients - b.coefficients).lpNorm<Eigen::Infinity>() < 1e-6);
        CHECK(a.intercept == doctest::Approx(b.intercept).epsilon(1e-6));
    }
}

TEST_CASE("non-convergence is flagged, not thrown") {
    std::mt19937_64 rng(9);
    const auto in = random_instance(rng, 30, 8);
    LassoOptions opt;
    opt.max_iter = 1;
    const auto fit = fit_lasso(in.X, in.y, 1e-4, opt);
    CHECK(!fit.diagnostics.converged);
    CHECK(fit.diagnostics.iterations == 1);
}

TEST_CASE("NaN input is rejected") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 2);
    X(1, 1) = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd y = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(fit_lasso(X, y, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(fit_lasso(Eigen::MatrixXd::Ones(3, 2), y, -1.0), std::invalid_argument);
}

TEST_CASE("cross-validation recovers an exact linear signal") {
    std::mt19937_64 rng(10);
    auto in = random_instance(rng, 60, 5);
    in.y = 0.7 * in.X.col(2);
    in.y.array() += 1.5;
    const auto cv = select_lambda_cv(in.X, in.y, 77);
    CHECK(std::abs(cv.fit.coefficients(2) - 0.7) < 1e-3);
    for (Eigen::Index j : {0, 1, 3, 4}) CHECK(std::abs(cv.fit.coefficients(j)) < 1e-3);
}

TEST_CASE("cross-validation shrinks hard on pure noise") {
    int heavy = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(1000 + seed);
        std::normal_distribution<double> nd;
        auto in = random_instance(rng, 50, 5);
        for (Eigen::Index i = 0; i < in.y.size(); ++i) in.y(i) = nd(rng);
        const auto cv = select_lambda_cv(in.X, in.y, seed);
        if (cv.lambda_index < cv.lambdas.size() / 4) ++heavy;
    }
    MESSAGE("heavy shrinkage in " << heavy << "/20 seeds");
    CHECK(heavy >= 18);
}

TEST_CASE("constant target gives an intercept-only model") {
    std::mt19937_64 rng(11);
    auto in = random_instance(rng, 30, 4);
    in.y.setConstant(4.25);
    const auto cv = select_lambda_cv(in.X, in.y, 1);
    CHECK(cv.fit.coefficients.isZero(0.0));
    CHECK(cv.fit.intercept == 4.25);
}

TEST_CASE("cross-validation is deterministic and reduces folds for few rows") {
    std::mt19937_64 rng(12);
    const auto in = random_instance(rng, 40, 6);
    const auto a = select_lambda_cv(in.X, in.y, 5), b = select_lambda_cv(in.X, in.y, 5);
    CHECK(a.lambda == b.lambda);
    CHECK(a.cv_mse == b.cv_mse);
    CHECK(a.fit.coefficients == b.fit.coefficients);
    CHECK(!a.folds_reduced);

    const auto few = random_instance(rng, 6, 2);
    const auto r = select_lambda_cv(few.X, few.y, 5);
    CHECK(r.folds_reduced);
    CHECK(r.folds_used == 6);
}

TEST_CASE("grid is log spaced from lambda_max") {
    const auto g = lambda_grid(2.0, 5, 1e-4);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 2.0);
    CHECK(g.back() == doctest::Approx(2e-4));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(0.1));
    CHECK(lambda_grid(0.0, 5, 1e-3) == std::vector<double>{0.0});
}

TEST_CASE("sparse model maps raw rows through its training stats") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd raw(40, 2);
    Eigen::VectorXd y(40);
    for (Eigen::Index i = 0; i < 40; ++i) {
        raw(i, 0) = 100 + 10 * nd(rng);
        raw(i, 1) = nd(rng);
        y(i) = 3 * raw(i, 0) + 5;
    }
    const std::vector<std::string> cols{"a", "b"};
    auto fs = zscore_fit(raw, cols);
    auto ts = zscore_fit(y, {"target"});
    const Eigen::MatrixXd z = zscore_apply(raw, cols, fs);
    const Eigen::VectorXd zy = zscore_apply(y, std::vector<std::string>{"target"}, ts).col(0);
    SparseLinearModel m{cols, fit_lasso(z, zy, 0.0), fs, ts};
    Eigen::RowVectorXd probe(2);
    probe << 110, 0.3;
    CHECK(m.predict_raw(probe) == doctest::Approx(335.0).epsilon(1e-9));
    CHECK(m.coefficient("b") == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(m.coefficient("zz"), std::invalid_argument);
}
