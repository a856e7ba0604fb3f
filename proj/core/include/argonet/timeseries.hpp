#pragma once

#include "argonet/date.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace argonet {

namespace signal {
inline constexpr std::string_view confirmed = "confirmed";
inline constexpr std::string_view suspected = "suspected";
inline constexpr std::string_view deaths = "deaths";
inline constexpr std::string_view cumulative = "cumulative";
inline constexpr std::string_view media = "media";
inline constexpr std::string_view mechanistic = "mechanistic";
// Search terms are stored one signal per term as "search:<term>", or as a
// single summed "search" signal when terms are combined at ingest.
inline constexpr std::string_view search = "search";
inline constexpr std::string_view search_prefix = "search:";
}  // namespace signal

enum class SignalKind { Flow, Cumulative };

SignalKind signal_kind(std::string_view name);
bool is_search_signal(std::string_view name);

/// Date-indexed daily values of named signals per region. Missing cells are
/// explicit (std::nullopt from get()).
class SignalPanel {
public:
    SignalPanel() = default;
    /// Throws DataError when the calendar is not strictly increasing.
    SignalPanel(std::vector<std::string> regions, std::vector<Date> calendar);

    /// Contiguous daily calendar of `n_days` starting at `first`.
    static SignalPanel daily(std::vector<std::string> regions, Date first, std::size_t n_days);

    const std::vector<std::string>& regions() const { return regions_; }
    const std::vector<Date>& calendar() const { return calendar_; }
    std::size_t region_count() const { return regions_.size(); }
    std::size_t day_count() const { return calendar_.size(); }

    std::optional<std::size_t> find_region(std::string_view name) const;
    std::optional<std::size_t> day_index(Date d) const;

    void add_signal(std::string name);
    void remove_signal(std::string_view name);
    bool has_signal(std::string_view name) const;
    std::vector<std::string> signals() const;

    /// Throws DataError on negative or non-finite values.
    void set(std::string_view name, std::size_t region, std::size_t day, double value);
    void clear(std::string_view name, std::size_t region, std::size_t day);
    std::optional<double> get(std::string_view name, std::size_t region, std::size_t day) const;

    /// Raw storage for one (signal, region) series; missing cells are NaN.
    std::span<const double> raw(std::string_view name, std::size_t region) const;

private:
    std::vector<double>& storage(std::string_view name);
    const std::vector<double>& storage(std::string_view name) const;

    std::vector<std::string> regions_;
    std::vector<Date> calendar_;
    std::map<std::string, std::vector<double>, std::less<>> values_;  // region-major
};

struct PanelCell {
    std::string signal;
    std::size_t region = 0;
    Date date{};
};

struct MonotonicityViolation {
    std::size_t region = 0;
    Date date{};
    double previous = 0.0;
    double value = 0.0;
};

/// Cells at or before a signal's reporting horizon (the last date any region
/// reported it) that are missing. Flow signals are zero-filled, the
/// cumulative signal forward-filled. Cells after the horizon stay missing.
struct Imputation {
    SignalPanel panel;
    std::vector<PanelCell> imputed;
};

Imputation impute(const SignalPanel& panel);

/// Reports (does not repair) decreases of the cumulative signal.
std::vector<MonotonicityViolation> cumulative_violations(const SignalPanel& panel);

/// Panel over non-overlapping bins, each labeled by its last day. Bins are
/// anchored at the newest date; a leftover day at the oldest end is dropped.
/// Values for unavailable bins are NaN.
class AggregatedPanel {
public:
    AggregatedPanel() = default;
    AggregatedPanel(std::vector<std::string> regions, std::vector<Date> bin_ends, int window_days);

    const std::vector<std::string>& regions() const { return regions_; }
    const std::vector<Date>& bin_ends() const { return bin_ends_; }
    std::size_t region_count() const { return regions_.size(); }
    std::size_t bin_count() const { return bin_ends_.size(); }
    int window_days() const { return window_days_; }

    std::optional<std::size_t> find_region(std::string_view name) const;
    std::optional<std::size_t> bin_index(Date end) const;

    void add_signal(std::string name);
    bool has_signal(std::string_view name) const;
    std::vector<std::string> signals() const;
    std::vector<std::string> search_signals() const;

    void set(std::string_view name, std::size_t region, std::size_t bin, double value);
    double value(std::string_view name, std::size_t region, std::size_t bin) const;
    bool available(std::string_view name, std::size_t region, std::size_t bin) const;
    std::span<const double> series(std::string_view name, std::size_t region) const;

    /// Last bin with a confirmed count for at least one region.
    std::optional<std::size_t> last_observed_bin() const;

    /// Copy holding only the information available at `as_of`: every signal
    /// up to and including that bin, plus the mechanistic forecast for the
    /// following bin (a forecast is issued ahead of the period it covers).
    AggregatedPanel truncated(std::size_t as_of) const;

private:
    std::vector<double>& storage(std::string_view name);
    const std::vector<double>& storage(std::string_view name) const;

    std::vector<std::string> regions_;
    std::vector<Date> bin_ends_;
    int window_days_ = 2;
    std::map<std::string, std::vector<double>, std::less<>> values_;
};

/// Sums flow signals and takes the bin-final value of the cumulative signal,
/// after applying the imputation rules. Throws DataError("empty input") for
/// an empty panel and DataError("calendar gap at <date>") for a
/// non-contiguous calendar.
AggregatedPanel aggregate(const SignalPanel& panel, int window_days = 2);

struct NormalizationStats {
    static constexpr double kStdFloor = 1e-12;

    std::vector<std::string> columns;
    std::vector<double> mean;
    std::vector<double> std;  // population std, before flooring
    std::vector<bool> constant;
    double floor = kStdFloor;

    std::optional<std::size_t> find(std::string_view column) const;
    double normalize(std::size_t column, double x) const;
    double denormalize(std::size_t column, double z) const;
};

/// Per-column mean and population standard deviation. Throws
/// std::invalid_argument("insufficient training rows") with fewer than 2 rows.
NormalizationStats zscore_fit(const Eigen::MatrixXd& rows, std::vector<std::string> columns);

/// (x - mean) / max(std, floor); constant columns map to 0. Columns are
/// matched by name; an unknown column throws std::invalid_argument.
Eigen::MatrixXd zscore_apply(const Eigen::MatrixXd& rows, std::span<const std::string> columns,
                             const NormalizationStats& stats);

struct Dataset {
    std::vector<std::string> columns;
    Eigen::MatrixXd features;
    Eigen::VectorXd target;

    std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
};

struct AugmentOptions {
    std::size_t n_bootstrap = 100;
    double noise_sd = 0.01;
    bool noise_on_target = true;
};

struct AugmentedDataset {
    Dataset data;
    std::vector<std::size_t> source_row;
    std::vector<std::uint64_t> noise_seed;
};

/// Bootstrap resampling with Gaussian jitter on the normalized scale. Output
/// holds n_bootstrap x |rows| rows, each a uniformly drawn source row plus
/// N(0, noise_sd^2) on every feature (and the target when enabled). Columns
/// flagged in `noiseless` are copied without jitter. Noise for a cell depends
/// only on (row seed, column name), so adding or removing a column does not
/// perturb the others.
AugmentedDataset augment(const Dataset& rows, const AugmentOptions& options, std::uint64_t seed,
                         const std::vector<bool>& noiseless = {});

}  // namespace argonet
