#include "argonet/mechanistic.hpp"

#include "argonet/rng.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace argonet {

namespace {

std::int64_t binomial(std::mt19937_64& rng, std::int64_t n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    return std::binomial_distribution<std::int64_t>(n, p)(rng);
}

std::int64_t& compartment(Compartments& c, int k) {
    switch (k) {
        case 0: return c.S;
        case 1: return c.L;
        case 2: return c.I;
        default: return c.R;
    }
}

void epidemic_substep(Metapopulation& m, const EpiParams& params, double dt, std::mt19937_64& rng,
                      std::vector<std::int64_t>& infections) {
    const double p_onset = 1.0 - std::exp(-dt / params.latent_period());
    const double p_removal = 1.0 - std::exp(-dt / params.infectious_period());
    for (std::size_t i = 0; i < m.size(); ++i) {
        Compartments& c = m.state[i];
        const std::int64_t n = c.total();
        if (n == 0) continue;
        const double force = params.beta() * static_cast<double>(c.I) / static_cast<double>(n);
        const std::int64_t new_l = binomial(rng, c.S, 1.0 - std::exp(-force * dt));
        const std::int64_t new_i = binomial(rng, c.L, p_onset);
        const std::int64_t new_r = binomial(rng, c.I, p_removal);
        c.S -= new_l;
        c.L += new_l - new_i;
        c.I += new_i - new_r;
        c.R += new_r;
        infections[i] += new_l;
    }
}

void travel(Metapopulation& m, const SimOptions& options, std::mt19937_64& rng) {
    const std::size_t n = m.size();
    std::vector<Compartments> delta(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < 4; ++k) {
            if (k == 2 && !options.infectious_travel) continue;
            std::int64_t remaining = compartment(m.state[i], k);
            double mass = 1.0;
            // Multinomial split as a chain of conditional binomials.
            for (std::size_t j = 0; j < n && remaining > 0; ++j) {
                const double f = m.mobility(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (j == i || f <= 0.0) continue;
                const std::int64_t moved = binomial(rng, remaining, std::min(1.0, f / mass));
                mass -= f;
                remaining -= moved;
                compartment(delta[i], k) -= moved;
                compartment(delta[j], k) += moved;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < 4; ++k) compartment(m.state[i], k) += compartment(delta[i], k);
    }
}

}  // namespace

std::int64_t Metapopulation::total_population() const {
    std::int64_t total = 0;
    for (const auto& c : state) total += c.total();
    return total;
}

void Metapopulation::validate() const {
    const auto n = static_cast<Eigen::Index>(state.size());
    if (!names.empty() && names.size() != state.size()) throw std::invalid_argument("metapopulation names do not match state");
    if (mobility.rows() != n || mobility.cols() != n) throw std::invalid_argument("mobility matrix has the wrong shape");
    for (const auto& c : state) {
        if (c.S < 0 || c.L < 0 || c.I < 0 || c.R < 0) throw std::invalid_argument("negative compartment count");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        double out = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double f = mobility(i, j);
            if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("travel fraction outside [0, 1]");
            out += f;
        }
        if (out > 1.0 + 1e-12) throw std::invalid_argument("travel fractions of a subpopulation exceed 1");
    }
}

Metapopulation Metapopulation::susceptible(std::vector<std::string> names, const std::vector<std::int64_t>& sizes) {
    Metapopulation m;
    m.names = std::move(names);
    for (std::int64_t s : sizes) m.state.push_back({s, 0, 0, 0});
    m.mobility = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sizes.size()), static_cast<Eigen::Index>(sizes.size()));
    m.validate();
    return m;
}

Eigen::MatrixXd hub_mobility(const std::vector<std::int64_t>& sizes, std::size_t hubs, double hub_weight, double max_outflow) {
    const auto n = static_cast<Eigen::Index>(sizes.size());
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
    if (n < 2) return f;
    auto weight = [&](Eigen::Index i) { return static_cast<std::size_t>(i) < hubs ? hub_weight : 1.0; };
    // f_ij proportional to N_j h_i h_j, so N_i f_ij is symmetric.
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) f(i, j) = static_cast<double>(sizes[static_cast<std::size_t>(j)]) * weight(i) * weight(j);
        }
    }
    const double busiest = f.rowwise().sum().maxCoeff();
    if (busiest > 0.0) f *= max_outflow / busiest;
    return f;
}

EpiParams::EpiParams(double beta, double latent_period, double infectious_period, Seeding seeding)
    : beta_(beta), latent_(latent_period), infectious_(infectious_period), r0_(beta * infectious_period), seeding_(seeding) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be non-negative");
    if (!(latent_period > 0.0) || !(infectious_period > 0.0)) throw std::invalid_argument("periods must be positive");
    if (seeding.latent < 0) throw std::invalid_argument("seeding count must be non-negative");
    if (r0_ != beta_ * infectious_) throw std::logic_error("r0 must equal beta times the infectious period");
}

EpiParams EpiParams::from_r0(double r0, double latent_period, double infectious_period, Seeding seeding) {
    if (!(infectious_period > 0.0)) throw std::invalid_argument("periods must be positive");
    return EpiParams(r0 / infectious_period, latent_period, infectious_period, seeding);
}

std::vector<std::int64_t> step(Metapopulation& state, const EpiParams& params, std::mt19937_64& rng, const SimOptions& options) {
    try {
        state.validate();
    } catch (const std::invalid_argument& e) {
        throw std::logic_error(std::string("invalid simulator state: ") + e.what());
    }
    if (options.steps_per_day < 1) throw std::invalid_argument("steps_per_day must be at least 1");
    std::vector<std::int64_t> infections(state.size(), 0);
    const double dt = 1.0 / options.steps_per_day;
    for (int s = 0; s < options.steps_per_day; ++s) epidemic_substep(state, params, dt, rng, infections);
    travel(state, options, rng);
    return infections;
}

Trajectory simulate(Metapopulation state, const EpiParams& params, std::size_t days, std::uint64_t seed, const SimOptions& options) {
    state.validate();
    const Seeding& seeding = params.seeding();
    if (seeding.subpopulation >= state.size()) throw std::invalid_argument("seeding subpopulation out of range");
    Compartments& origin = state.state[seeding.subpopulation];
    const std::int64_t seeded = std::min(seeding.latent, origin.S);
    origin.S -= seeded;
    origin.L += seeded;

    Trajectory out;
    out.incidence = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(state.size()), static_cast<Eigen::Index>(days));
    out.global_total.push_back(state.total_population());
    std::mt19937_64 rng(seed);
    for (std::size_t d = 0; d < days; ++d) {
        const auto inf = step(state, params, rng, options);
        for (std::size_t i = 0; i < inf.size(); ++i) {
            out.incidence(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = static_cast<double>(inf[i]);
        }
        out.global_total.push_back(state.total_population());
    }
    return out;
}

Eigen::MatrixXd bin_incidence(const Eigen::MatrixXd& daily, int bin_days) {
    if (bin_days < 1) throw std::invalid_argument("bin width must be positive");
    const Eigen::Index bins = daily.cols() / bin_days;
    const Eigen::Index offset = daily.cols() - bins * bin_days;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(daily.rows(), bins);
    for (Eigen::Index b = 0; b < bins; ++b) {
        for (int k = 0; k < bin_days; ++k) out.col(b) += daily.col(offset + b * bin_days + k);
    }
    return out;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

EnsembleSummary simulate_ensemble(const Metapopulation& state, const EpiParams& params, std::size_t days, std::size_t runs,
                                  std::uint64_t seed, const SimOptions& options, std::size_t jobs, int bin_days) {
    if (runs < 1) throw std::invalid_argument("ensemble needs at least one run");
    std::vector<Trajectory> traj(runs);
    detail::parallel_for(runs, jobs, [&](std::size_t r) {
        traj[r] = simulate(state, params, days, derive_seed(seed, "simulate.run", r), options);
    });

    EnsembleSummary out;
    for (std::size_t d = 0; d < days; ++d) out.dates.push_back(params.seeding().start + Days{static_cast<int>(d)});
    const auto rows = static_cast<Eigen::Index>(state.size());
    const auto cols = static_cast<Eigen::Index>(days);
    out.mean = Eigen::MatrixXd::Zero(rows, cols);
    out.median.resize(rows, cols);
    std::vector<Eigen::MatrixXd> binned;
    for (const auto& t : traj) {
        out.mean += t.incidence;
        binned.push_back(bin_incidence(t.incidence, bin_days));
        for (std::int64_t total : t.global_total) out.conserved = out.conserved && total == t.global_total.front();
    }
    out.mean /= static_cast<double>(runs);

    std::vector<double> sample(runs);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index d = 0; d < cols; ++d) {
            for (std::size_t r = 0; r < runs; ++r) sample[r] = traj[r].incidence(i, d);
            out.median(i, d) = quantile(sample, 0.5);
        }
    }
    const Eigen::Index bins = binned.front().cols();
    out.bin_median.resize(rows, bins);
    out.bin_q05.resize(rows, bins);
    out.bin_q95.resize(rows, bins);
    const Eigen::Index offset = cols - bins * bin_days;
    for (Eigen::Index b = 0; b < bins; ++b) {
        out.bin_ends.push_back(out.dates[static_cast<std::size_t>(offset + (b + 1) * bin_days - 1)]);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (std::size_t r = 0; r < runs; ++r) sample[r] = binned[r](i, b);
            out.bin_median(i, b) = quantile(sample, 0.5);
            out.bin_q05(i, b) = quantile(sample, 0.05);
            out.bin_q95(i, b) = quantile(sample, 0.95);
        }
    }
    return out;
}

void AbcConfig::validate() const {
    if (!(prior_low > 0.0) || !(prior_high >= prior_low)) throw std::invalid_argument("R0 prior must be a positive interval");
    if (epsilon && !(*epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(epsilon_quantile > 0.0 && epsilon_quantile <= 1.0)) throw std::invalid_argument("epsilon quantile must be in (0, 1]");
    if (n_samples < 1) throw std::invalid_argument("ABC needs at least one sample");
    if (bin_days < 1) throw std::invalid_argument("bin width must be positive");
}

double AbcResult::posterior_mean() const {
    if (accepted.empty()) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (double a : accepted) sum += a;
    return sum / static_cast<double>(accepted.size());
}

AbcResult abc_calibrate(const Metapopulation& state, const Eigen::MatrixXd& observed_bins, const EpiParams& template_params,
                        const AbcConfig& config, std::uint64_t seed, std::size_t jobs) {
    config.validate();
    if (observed_bins.size() == 0) throw std::invalid_argument("observed curve is empty");
    const auto expected_rows = config.pooled ? Eigen::Index{1} : static_cast<Eigen::Index>(state.size());
    if (observed_bins.rows() != expected_rows) {
        throw std::invalid_argument("observed curve does not match the subpopulations");
    }
    const auto days = static_cast<std::size_t>(observed_bins.cols() * config.bin_days);

    AbcResult out;
    out.draws.resize(config.n_samples);
    out.distances.resize(config.n_samples);
    detail::parallel_for(config.n_samples, jobs, [&](std::size_t k) {
        const double u = uniform_from_key(derive_seed(seed, "abc.draw", k));
        const double r0 = config.prior_low + (config.prior_high - config.prior_low) * u;
        const EpiParams p = EpiParams::from_r0(r0, template_params.latent_period(), template_params.infectious_period(),
                                               template_params.seeding());
        const Trajectory t = simulate(state, p, days, derive_seed(seed, "abc.sim", k), config.sim);
        const Eigen::MatrixXd sim = config.pooled ? Eigen::MatrixXd(t.incidence.colwise().sum()) : t.incidence;
        const Eigen::MatrixXd diff = bin_incidence(sim, config.bin_days) - observed_bins;
        out.draws[k] = r0;
        out.distances[k] = std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()));
    });

    out.epsilon = config.epsilon ? *config.epsilon : quantile(out.distances, config.epsilon_quantile);
    for (std::size_t k = 0; k < config.n_samples; ++k) {
        if (out.distances[k] <= out.epsilon) out.accepted.push_back(out.draws[k]);
    }
    if (out.accepted.empty()) {
        const double best = *std::min_element(out.distances.begin(), out.distances.end());
        throw std::runtime_error("ABC accepted no samples (smallest distance " + std::to_string(best) + ", epsilon " +
                                 std::to_string(out.epsilon) + ")");
    }
    out.acceptance_rate = static_cast<double>(out.accepted.size()) / static_cast<double>(config.n_samples);
    return out;
}

}  // namespace argonet
