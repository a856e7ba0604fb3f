#include <doctest.h>

#include "oracles.hpp"
#include "panels.hpp"

#include <argonet/timeseries.hpp>

#include <cmath>
#include <random>
#include <set>

using namespace argonet;
using testdata::day;

namespace {

SignalPanel daily_confirmed(const std::vector<double>& values) {
    auto p = SignalPanel::daily({"A"}, day(2020, 1, 1), values.size());
    p.add_signal("confirmed");
    for (std::size_t d = 0; d < values.size(); ++d) p.set("confirmed", 0, d, values[d]);
    return p;
}

std::vector<double> bins_of(const AggregatedPanel& a, std::string_view name = signal::confirmed, std::size_t r = 0) {
    auto s = a.series(name, r);
    return {s.begin(), s.end()};
}

}  // namespace

TEST_CASE("aggregate sums flow signals into two-day bins") {
    CHECK(bins_of(aggregate(daily_confirmed({0, 0, 0, 0}))) == std::vector<double>{0, 0});
    CHECK(bins_of(aggregate(daily_confirmed({1, 2, 3, 4}))) == std::vector<double>{3, 7});
}

TEST_CASE("aggregate drops the oldest leftover day") {
    const auto a = aggregate(daily_confirmed({5, 1, 2, 3, 4}));
    CHECK(bins_of(a) == std::vector<double>{3, 7});
    REQUIRE(a.bin_count() == 2);
    CHECK(a.bin_ends()[0] == day(2020, 1, 3));
    CHECK(a.bin_ends()[1] == day(2020, 1, 5));
}

TEST_CASE("cumulative takes the bin-final value") {
    auto p = SignalPanel::daily({"A"}, day(2020, 1, 1), 4);
    p.add_signal("cumulative");
    const double v[] = {1, 3, 6, 10};
    for (std::size_t d = 0; d < 4; ++d) p.set("cumulative", 0, d, v[d]);
    CHECK(bins_of(aggregate(p), signal::cumulative) == std::vector<double>{3, 10});
}

TEST_CASE("aggregate errors") {
    CHECK_THROWS_WITH_AS(aggregate(SignalPanel{}), "empty input", DataError);
    SignalPanel gap({"A"}, {day(2020, 1, 1), day(2020, 1, 2), day(2020, 1, 4)});
    gap.add_signal("confirmed");
    CHECK_THROWS_WITH_AS(aggregate(gap), "calendar gap at 2020-01-04", DataError);
    CHECK_THROWS_AS(SignalPanel({"A"}, {day(2020, 1, 2), day(2020, 1, 2)}), DataError);
    auto p = daily_confirmed({1, 2});
    CHECK_THROWS_AS(p.set("confirmed", 0, 0, -1.0), DataError);
}

TEST_CASE("aggregate is additive for flow signals") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 50);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t days = 5 + trial % 6;
        std::vector<double> a(days), b(days), ab(days);
        for (std::size_t d = 0; d < days; ++d) {
            a[d] = std::floor(u(rng));
            b[d] = std::floor(u(rng));
            ab[d] = a[d] + b[d];
        }
        const auto sa = bins_of(aggregate(daily_confirmed(a)));
        const auto sb = bins_of(aggregate(daily_confirmed(b)));
        const auto sab = bins_of(aggregate(daily_confirmed(ab)));
        for (std::size_t i = 0; i < sab.size(); ++i) CHECK(sa[i] + sb[i] == sab[i]);
    }
}

TEST_CASE("imputation zero-fills flows and forward-fills cumulative up to the horizon") {
    auto p = SignalPanel::daily({"A", "B"}, day(2020, 1, 1), 4);
    p.add_signal("confirmed");
    p.add_signal("cumulative");
    for (std::size_t d = 0; d < 4; ++d) {
        p.set("confirmed", 1, d, 1.0);
        p.set("cumulative", 1, d, d + 1.0);
    }
    p.set("confirmed", 0, 0, 2.0);
    p.set("cumulative", 0, 0, 2.0);
    const auto imp = impute(p);
    CHECK(imp.imputed.size() == 6);
    CHECK(imp.panel.get("confirmed", 0, 3) == 0.0);
    CHECK(imp.panel.get("cumulative", 0, 3) == 2.0);
}

TEST_CASE("cumulative decreases are reported, not repaired") {
    auto p = SignalPanel::daily({"A"}, day(2020, 1, 1), 3);
    p.add_signal("cumulative");
    p.set("cumulative", 0, 0, 5);
    p.set("cumulative", 0, 1, 4);
    p.set("cumulative", 0, 2, 6);
    const auto v = cumulative_violations(p);
    REQUIRE(v.size() == 1);
    CHECK(v[0].previous == 5);
    CHECK(v[0].value == 4);
    CHECK(p.get("cumulative", 0, 1) == 4.0);
}

TEST_CASE("zscore_fit examples") {
    Eigen::MatrixXd c(3, 1);
    c << 1, 1, 1;
    auto s = zscore_fit(c, {"c"});
    CHECK(s.mean[0] == 1.0);
    CHECK(s.std[0] == 0.0);
    CHECK(s.constant[0]);

    Eigen::MatrixXd t(2, 1);
    t << 0, 2;
    s = zscore_fit(t, {"t"});
    CHECK(s.mean[0] == 1.0);
    CHECK(s.std[0] == 1.0);

    Eigen::MatrixXd f(4, 1);
    f << 1, 2, 3, 4;
    s = zscore_fit(f, {"f"});
    CHECK(s.mean[0] == 2.5);
    CHECK(s.std[0] == doctest::Approx(oracle::pop_std({1, 2, 3, 4})).epsilon(1e-14));

    Eigen::MatrixXd one(1, 1);
    one << 3;
    CHECK_THROWS_WITH_AS(zscore_fit(one, {"x"}), "insufficient training rows", std::invalid_argument);
}

TEST_CASE("zscore_apply examples") {
    Eigen::MatrixXd x(4, 2);
    x << 1, 7, 2, 7, 3, 7, 4, 7;
    const std::vector<std::string> cols{"a", "b"};
    const auto s = zscore_fit(x, cols);
    Eigen::MatrixXd probe(3, 2);
    probe << s.mean[0], 100, s.mean[0] + s.std[0], -3, 0, 7;
    const auto z = zscore_apply(probe, cols, s);
    CHECK(z(0, 0) == 0.0);
    CHECK(z(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(z(0, 1) == 0.0);
    CHECK(z(1, 1) == 0.0);
    CHECK(z(2, 1) == 0.0);
    const std::vector<std::string> wrong{"a", "nope"};
    CHECK_THROWS_AS(zscore_apply(probe, wrong, s), std::invalid_argument);
}

TEST_CASE("zscore round trip gives unit-scale columns") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(5, 3);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd x(15 + trial, 4);
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = n(rng) * (j + 1) + 100 * j;
        const std::vector<std::string> cols{"a", "b", "c", "d"};
        const auto z = zscore_apply(x, cols, zscore_fit(x, cols));
        for (Eigen::Index j = 0; j < z.cols(); ++j) {
            std::vector<double> col(z.col(j).data(), z.col(j).data() + z.rows());
            CHECK(std::abs(oracle::mean(col)) < 1e-9);
            CHECK(std::abs(oracle::pop_std(col) - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("augment row counts and zero-noise resampling") {
    Dataset d;
    d.columns = {"a", "b"};
    d.features.resize(3, 2);
    d.features << 1, 2, 3, 4, 5, 6;
    d.target.resize(3);
    d.target << 10, 20, 30;

    AugmentOptions opt;
    const auto big = augment(d, opt, 1);
    CHECK(big.data.rows() == 300);
    CHECK(big.source_row.size() == 300);

    opt.n_bootstrap = 1;
    opt.noise_sd = 0.0;
    const auto same = augment(d, opt, 5);
    REQUIRE(same.data.rows() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto src = static_cast<Eigen::Index>(same.source_row[i]);
        CHECK(same.data.features.row(static_cast<Eigen::Index>(i)) == d.features.row(src));
        CHECK(same.data.target(static_cast<Eigen::Index>(i)) == d.target(src));
    }
}

TEST_CASE("augment is reproducible and seed dependent") {
    Dataset d;
    d.columns = {"a"};
    d.features = Eigen::MatrixXd::Random(6, 1);
    d.target = Eigen::VectorXd::Random(6);
    const auto a = augment(d, {}, 42);
    const auto b = augment(d, {}, 42);
    const auto c = augment(d, {}, 43);
    CHECK(a.data.features == b.data.features);
    CHECK(a.data.target == b.data.target);
    CHECK(a.source_row == b.source_row);
    CHECK(a.data.features != c.data.features);
}

TEST_CASE("augment noise of one column does not depend on other columns") {
    Dataset one;
    one.columns = {"a"};
    one.features = Eigen::MatrixXd::Zero(4, 1);
    one.target = Eigen::VectorXd::Zero(4);
    Dataset two = one;
    two.columns = {"a", "b"};
    two.features = Eigen::MatrixXd::Zero(4, 2);
    const auto x = augment(one, {}, 9);
    const auto y = augment(two, {}, 9);
    CHECK(x.data.features.col(0) == y.data.features.col(0));
}

TEST_CASE("augment leaves noiseless columns untouched") {
    Dataset d;
    d.columns = {"a", "k"};
    d.features = Eigen::MatrixXd::Zero(5, 2);
    d.target = Eigen::VectorXd::Zero(5);
    const auto out = augment(d, {}, 3, {false, true});
    CHECK(out.data.features.col(1).isZero(0.0));
    CHECK(!out.data.features.col(0).isZero(0.0));
}

TEST_CASE("augment errors") {
    Dataset empty;
    empty.columns = {"a"};
    empty.features.resize(0, 1);
    empty.target.resize(0);
    CHECK_THROWS_AS(augment(empty, {}, 1), std::invalid_argument);
    Dataset d;
    d.columns = {"a"};
    d.features = Eigen::MatrixXd::Zero(2, 1);
    d.target = Eigen::VectorXd::Zero(2);
    AugmentOptions neg;
    neg.noise_sd = -0.1;
    CHECK_THROWS_AS(augment(d, neg, 1), std::invalid_argument);
}

TEST_CASE("augment noise statistics on a zero row") {
    Dataset d;
    d.columns = {"a", "b", "c"};
    d.features = Eigen::MatrixXd::Zero(1, 3);
    d.target = Eigen::VectorXd::Zero(1);
    AugmentOptions opt;
    opt.n_bootstrap = 10000;
    const auto out = augment(d, opt, 2024);
    CHECK(out.data.rows() == 10000);
    const double mean_tol = 4.0 * 0.01 / std::sqrt(10000.0);
    auto check_column = [&](const Eigen::VectorXd& col) {
        std::vector<double> v(col.data(), col.data() + col.size());
        CHECK(std::abs(oracle::mean(v)) <= mean_tol);
        CHECK(std::abs(oracle::sample_std(v) - 0.01) <= 0.05 * 0.01);
    };
    for (Eigen::Index c = 0; c < 3; ++c) check_column(out.data.features.col(c));
    check_column(out.data.target);
}

TEST_CASE("truncated panel hides observed values after as_of") {
    auto p = testdata::confirmed_panel({{1, 2, 3, 4, 5}});
    testdata::fill(p, signal::mechanistic, {{10, 20, 30, 40, 50}});
    const auto t = p.truncated(2);
    CHECK(t.bin_count() == 4);
    CHECK(t.value(signal::confirmed, 0, 2) == 3);
    CHECK(!t.available(signal::confirmed, 0, 3));
    CHECK(t.value(signal::mechanistic, 0, 3) == 40);
}
