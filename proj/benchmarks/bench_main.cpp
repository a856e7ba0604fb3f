#include <argonet/clustering.hpp>
#include <argonet/lasso.hpp>
#include <argonet/mechanistic.hpp>
#include <argonet/synthetic.hpp>
#include <argonet/timeseries.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace argonet;

namespace {

void BM_LassoFit(benchmark::State& state) {
    const auto n = static_cast<Eigen::Index>(state.range(0));
    const Eigen::Index p = 12;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = nd(rng);
    Eigen::VectorXd y = X.col(0) * 2 - X.col(3);
    for (Eigen::Index i = 0; i < n; ++i) y(i) += nd(rng);
    const double lambda = 0.05 * lambda_max(X, y);
    for (auto _ : state) benchmark::DoNotOptimize(fit_lasso(X, y, lambda));
}
BENCHMARK(BM_LassoFit)->Arg(60)->Arg(600)->Arg(6000);

void BM_LassoCv(benchmark::State& state) {
    const auto n = static_cast<Eigen::Index>(state.range(0));
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd X(n, 10);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = nd(rng);
    Eigen::VectorXd y = X.col(1) + 0.5 * X.col(2);
    for (Eigen::Index i = 0; i < n; ++i) y(i) += nd(rng);
    for (auto _ : state) benchmark::DoNotOptimize(select_lambda_cv(X, y, 3));
}
BENCHMARK(BM_LassoCv)->Arg(200)->Arg(2000);

void BM_CompleteLinkage(benchmark::State& state) {
    const auto n = static_cast<Eigen::Index>(state.range(0));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 2);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(complete_linkage(d));
}
BENCHMARK(BM_CompleteLinkage)->Arg(32)->Arg(128)->Arg(512);

void BM_ClusterRegions(benchmark::State& state) {
    SyntheticOptions opt;
    opt.regions = static_cast<std::size_t>(state.range(0));
    const AggregatedPanel panel = aggregate(generate_synthetic(opt).panel, 2);
    const std::size_t as_of = panel.bin_count() - 2;
    for (auto _ : state) benchmark::DoNotOptimize(cluster_regions(panel, as_of));
}
BENCHMARK(BM_ClusterRegions)->Arg(32)->Arg(128);

void BM_SimulatorStep(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    std::vector<std::string> names;
    std::vector<std::int64_t> sizes;
    for (std::size_t i = 0; i < k; ++i) {
        names.push_back("P" + std::to_string(i));
        sizes.push_back(100000 + 5000 * static_cast<std::int64_t>(i));
    }
    auto m = Metapopulation::susceptible(names, sizes);
    m.mobility = hub_mobility(sizes, 2, 4.0, 0.01);
    for (auto& c : m.state) {
        c.S -= 500;
        c.I += 500;
    }
    const auto params = EpiParams::from_r0(2.0, 4.0, 3.0);
    std::mt19937_64 rng(4);
    for (auto _ : state) {
        auto copy = m;
        step(copy, params, rng);
        benchmark::DoNotOptimize(copy.state.data());
    }
}
BENCHMARK(BM_SimulatorStep)->Arg(1)->Arg(32)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
