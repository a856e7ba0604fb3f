#pragma once

#include "argonet/date.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace argonet {

struct Compartments {
    std::int64_t S = 0;
    std::int64_t L = 0;
    std::int64_t I = 0;
    std::int64_t R = 0;

    std::int64_t total() const { return S + L + I + R; }
};

/// Subpopulations coupled by daily travel. mobility(i, j) is the fraction of
/// subpopulation i travelling to j per day; the diagonal is unused and each
/// row's off-diagonal sum is at most 1.
struct Metapopulation {
    std::vector<std::string> names;
    std::vector<Compartments> state;
    Eigen::MatrixXd mobility;

    std::size_t size() const { return state.size(); }
    std::int64_t total_population() const;
    /// Throws std::invalid_argument on negative counts, bad mobility shape or
    /// fractions outside [0, 1].
    void validate() const;

    /// Fully susceptible subpopulations with the given sizes and no travel.
    static Metapopulation susceptible(std::vector<std::string> names, const std::vector<std::int64_t>& sizes);
};

/// Symmetric hub-weighted flows N_i f_ij = N_j f_ji, scaled so that the
/// busiest subpopulation sends out `max_outflow` of its residents per day.
/// The first `hubs` subpopulations carry weight `hub_weight`.
Eigen::MatrixXd hub_mobility(const std::vector<std::int64_t>& sizes, std::size_t hubs = 3, double hub_weight = 4.0,
                             double max_outflow = 0.002);

struct Seeding {
    std::size_t subpopulation = 0;
    std::int64_t latent = 40;
    Date start{};
};

class EpiParams {
public:
    /// Throws std::invalid_argument unless every rate and period is positive
    /// (beta may be 0).
    EpiParams(double beta, double latent_period, double infectious_period, Seeding seeding = {});
    static EpiParams from_r0(double r0, double latent_period, double infectious_period, Seeding seeding = {});

    double beta() const { return beta_; }
    double latent_period() const { return latent_; }
    double infectious_period() const { return infectious_; }
    double r0() const { return r0_; }
    double generation_time() const { return latent_ + infectious_; }
    const Seeding& seeding() const { return seeding_; }

private:
    double beta_;
    double latent_;
    double infectious_;
    double r0_;
    Seeding seeding_;
};

struct SimOptions {
    int steps_per_day = 24;  // epidemic substeps per day; travel happens once a day
    bool infectious_travel = true;
};

/// Advances one day in place and returns the new infections (S to L) per
/// subpopulation. Throws std::logic_error if the state is invalid on entry.
std::vector<std::int64_t> step(Metapopulation& state, const EpiParams& params, std::mt19937_64& rng,
                               const SimOptions& options = {});

struct Trajectory {
    Eigen::MatrixXd incidence;                 // subpopulation x day
    std::vector<std::int64_t> global_total;    // after each day, index 0 = initial
};

/// Seeds `latent` individuals into the seeding subpopulation (moved out of S)
/// and runs `days` steps.
Trajectory simulate(Metapopulation state, const EpiParams& params, std::size_t days, std::uint64_t seed,
                    const SimOptions& options = {});

struct EnsembleSummary {
    std::vector<Date> dates;     // daily, first = seeding start
    Eigen::MatrixXd mean;        // subpopulation x day
    Eigen::MatrixXd median;      // subpopulation x day
    std::vector<Date> bin_ends;  // two-day bins anchored at the last day
    Eigen::MatrixXd bin_median;  // subpopulation x bin
    Eigen::MatrixXd bin_q05;
    Eigen::MatrixXd bin_q95;
    bool conserved = true;       // global population constant on every step of every run
};

/// Runs r use seed derive_seed(seed, "simulate.run", r).
EnsembleSummary simulate_ensemble(const Metapopulation& state, const EpiParams& params, std::size_t days,
                                  std::size_t runs, std::uint64_t seed, const SimOptions& options = {},
                                  std::size_t jobs = 1, int bin_days = 2);

/// Sums daily columns into bins ending at the last column; leftover days at
/// the start are dropped.
Eigen::MatrixXd bin_incidence(const Eigen::MatrixXd& daily, int bin_days = 2);

double quantile(std::vector<double> values, double q);

struct AbcConfig {
    double prior_low = 1.0;
    double prior_high = 4.0;
    std::optional<double> epsilon;  // unset: quantile of the prior-predictive distances
    double epsilon_quantile = 0.05;
    std::size_t n_samples = 400;
    int bin_days = 2;
    bool pooled = false;  // compare incidence summed over subpopulations (observed is 1 x bins)
    SimOptions sim{};

    void validate() const;
};

struct AbcResult {
    std::vector<double> accepted;
    std::vector<double> draws;
    std::vector<double> distances;
    double epsilon = 0.0;
    double acceptance_rate = 0.0;

    double posterior_mean() const;
};

/// Rejection ABC on R0 with latent and infectious periods held at the
/// template's values. The distance is the RMSE between simulated and
/// observed binned incidence (subpopulation x bin, or 1 x bin when pooled). Throws
/// std::runtime_error when nothing is accepted, reporting the smallest
/// distance seen.
AbcResult abc_calibrate(const Metapopulation& state, const Eigen::MatrixXd& observed_bins, const EpiParams& template_params,
                        const AbcConfig& config, std::uint64_t seed, std::size_t jobs = 1);

}  // namespace argonet
