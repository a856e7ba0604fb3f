#include "argonet/timeseries.hpp"

#include "argonet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace argonet {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

template <class Container>
std::optional<std::size_t> index_of(const Container& items, std::string_view name) {
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i] == name) return i;
    }
    return std::nullopt;
}

}  // namespace

SignalKind signal_kind(std::string_view name) {
    return name == signal::cumulative ? SignalKind::Cumulative : SignalKind::Flow;
}

bool is_search_signal(std::string_view name) {
    return name == signal::search || name.starts_with(signal::search_prefix);
}

// --- SignalPanel -------------------------------------------------------------

SignalPanel::SignalPanel(std::vector<std::string> regions, std::vector<Date> calendar)
    : regions_(std::move(regions)), calendar_(std::move(calendar)) {
    for (std::size_t i = 1; i < calendar_.size(); ++i) {
        if (calendar_[i] <= calendar_[i - 1]) {
            throw DataError("calendar not strictly increasing at " + format_date(calendar_[i]));
        }
    }
}

SignalPanel SignalPanel::daily(std::vector<std::string> regions, Date first, std::size_t n_days) {
    std::vector<Date> calendar;
    calendar.reserve(n_days);
    for (std::size_t i = 0; i < n_days; ++i) calendar.push_back(first + Days{static_cast<int>(i)});
    return SignalPanel(std::move(regions), std::move(calendar));
}

std::optional<std::size_t> SignalPanel::find_region(std::string_view name) const {
    return index_of(regions_, name);
}

std::optional<std::size_t> SignalPanel::day_index(Date d) const {
    auto it = std::lower_bound(calendar_.begin(), calendar_.end(), d);
    if (it == calendar_.end() || *it != d) return std::nullopt;
    return static_cast<std::size_t>(it - calendar_.begin());
}

void SignalPanel::add_signal(std::string name) {
    values_.try_emplace(std::move(name), regions_.size() * calendar_.size(), kMissing);
}

void SignalPanel::remove_signal(std::string_view name) {
    if (auto it = values_.find(name); it != values_.end()) values_.erase(it);
}

bool SignalPanel::has_signal(std::string_view name) const { return values_.find(name) != values_.end(); }

std::vector<std::string> SignalPanel::signals() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : values_) out.push_back(name);
    return out;
}

std::vector<double>& SignalPanel::storage(std::string_view name) {
    auto it = values_.find(name);
    if (it == values_.end()) throw std::invalid_argument("unknown signal '" + std::string(name) + "'");
    return it->second;
}

const std::vector<double>& SignalPanel::storage(std::string_view name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw std::invalid_argument("unknown signal '" + std::string(name) + "'");
    return it->second;
}

void SignalPanel::set(std::string_view name, std::size_t region, std::size_t day, double value) {
    if (!std::isfinite(value) || value < 0.0) {
        throw DataError("signal '" + std::string(name) + "' has invalid count " + std::to_string(value));
    }
    storage(name).at(region * calendar_.size() + day) = value;
}

void SignalPanel::clear(std::string_view name, std::size_t region, std::size_t day) {
    storage(name).at(region * calendar_.size() + day) = kMissing;
}

std::optional<double> SignalPanel::get(std::string_view name, std::size_t region, std::size_t day) const {
    const double v = storage(name).at(region * calendar_.size() + day);
    if (std::isnan(v)) return std::nullopt;
    return v;
}

std::span<const double> SignalPanel::raw(std::string_view name, std::size_t region) const {
    const auto& s = storage(name);
    return std::span<const double>(s).subspan(region * calendar_.size(), calendar_.size());
}

// --- imputation and validation ----------------------------------------------

Imputation impute(const SignalPanel& panel) {
    Imputation out{panel, {}};
    const std::size_t days = panel.day_count();
    for (const auto& name : panel.signals()) {
        std::optional<std::size_t> horizon;
        for (std::size_t r = 0; r < panel.region_count(); ++r) {
            const auto series = panel.raw(name, r);
            for (std::size_t d = days; d-- > 0;) {
                if (!std::isnan(series[d])) {
                    horizon = std::max(horizon.value_or(0), d);
                    break;
                }
            }
        }
        if (!horizon) continue;
        const bool cumulative = signal_kind(name) == SignalKind::Cumulative;
        for (std::size_t r = 0; r < panel.region_count(); ++r) {
            const auto series = panel.raw(name, r);
            double last = 0.0;
            for (std::size_t d = 0; d <= *horizon; ++d) {
                if (!std::isnan(series[d])) {
                    last = series[d];
                    continue;
                }
                out.panel.set(name, r, d, cumulative ? last : 0.0);
                out.imputed.push_back({name, r, panel.calendar()[d]});
            }
        }
    }
    return out;
}

std::vector<MonotonicityViolation> cumulative_violations(const SignalPanel& panel) {
    std::vector<MonotonicityViolation> out;
    if (!panel.has_signal(signal::cumulative)) return out;
    for (std::size_t r = 0; r < panel.region_count(); ++r) {
        const auto series = panel.raw(signal::cumulative, r);
        std::optional<double> prev;
        for (std::size_t d = 0; d < series.size(); ++d) {
            if (std::isnan(series[d])) continue;
            if (prev && series[d] < *prev) {
                out.push_back({r, panel.calendar()[d], *prev, series[d]});
            }
            prev = series[d];
        }
    }
    return out;
}

// --- AggregatedPanel ---------------------------------------------------------

AggregatedPanel::AggregatedPanel(std::vector<std::string> regions, std::vector<Date> bin_ends, int window_days)
    : regions_(std::move(regions)), bin_ends_(std::move(bin_ends)), window_days_(window_days) {}

std::optional<std::size_t> AggregatedPanel::find_region(std::string_view name) const {
    return index_of(regions_, name);
}

std::optional<std::size_t> AggregatedPanel::bin_index(Date end) const {
    auto it = std::lower_bound(bin_ends_.begin(), bin_ends_.end(), end);
    if (it == bin_ends_.end() || *it != end) return std::nullopt;
    return static_cast<std::size_t>(it - bin_ends_.begin());
}

void AggregatedPanel::add_signal(std::string name) {
    values_.try_emplace(std::move(name), regions_.size() * bin_ends_.size(), kMissing);
}

bool AggregatedPanel::has_signal(std::string_view name) const { return values_.find(name) != values_.end(); }

std::vector<std::string> AggregatedPanel::signals() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : values_) out.push_back(name);
    return out;
}

std::vector<std::string> AggregatedPanel::search_signals() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : values_) {
        if (is_search_signal(name)) out.push_back(name);
    }
    return out;
}

std::vector<double>& AggregatedPanel::storage(std::string_view name) {
    auto it = values_.find(name);
    if (it == values_.end()) throw std::invalid_argument("unknown signal '" + std::string(name) + "'");
    return it->second;
}

const std::vector<double>& AggregatedPanel::storage(std::string_view name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw std::invalid_argument("unknown signal '" + std::string(name) + "'");
    return it->second;
}

void AggregatedPanel::set(std::string_view name, std::size_t region, std::size_t bin, double value) {
    storage(name).at(region * bin_ends_.size() + bin) = value;
}

double AggregatedPanel::value(std::string_view name, std::size_t region, std::size_t bin) const {
    return storage(name).at(region * bin_ends_.size() + bin);
}

bool AggregatedPanel::available(std::string_view name, std::size_t region, std::size_t bin) const {
    return has_signal(name) && bin < bin_ends_.size() && !std::isnan(value(name, region, bin));
}

std::span<const double> AggregatedPanel::series(std::string_view name, std::size_t region) const {
    const auto& s = storage(name);
    return std::span<const double>(s).subspan(region * bin_ends_.size(), bin_ends_.size());
}

std::optional<std::size_t> AggregatedPanel::last_observed_bin() const {
    if (!has_signal(signal::confirmed)) return std::nullopt;
    std::optional<std::size_t> last;
    for (std::size_t r = 0; r < regions_.size(); ++r) {
        const auto s = series(signal::confirmed, r);
        for (std::size_t b = s.size(); b-- > 0;) {
            if (!std::isnan(s[b])) {
                last = std::max(last.value_or(0), b);
                break;
            }
        }
    }
    return last;
}

AggregatedPanel AggregatedPanel::truncated(std::size_t as_of) const {
    if (as_of >= bin_ends_.size()) throw std::out_of_range("as_of bin beyond panel");
    const std::size_t keep = std::min(as_of + 2, bin_ends_.size());
    AggregatedPanel out(regions_, std::vector<Date>(bin_ends_.begin(), bin_ends_.begin() + keep), window_days_);
    for (const auto& [name, _] : values_) {
        out.add_signal(name);
        const bool lead = name == signal::mechanistic;
        for (std::size_t r = 0; r < regions_.size(); ++r) {
            for (std::size_t b = 0; b < keep; ++b) {
                if (b > as_of && !lead) continue;
                out.set(name, r, b, value(name, r, b));
            }
        }
    }
    return out;
}

AggregatedPanel aggregate(const SignalPanel& panel, int window_days) {
    if (panel.region_count() == 0 || panel.day_count() == 0) throw DataError("empty input");
    if (window_days < 1) throw std::invalid_argument("aggregation window must be positive");
    const auto& cal = panel.calendar();
    for (std::size_t i = 1; i < cal.size(); ++i) {
        if (cal[i] - cal[i - 1] != Days{1}) throw DataError("calendar gap at " + format_date(cal[i]));
    }
    const auto w = static_cast<std::size_t>(window_days);
    if (cal.size() < w) throw DataError("panel shorter than one aggregation window");

    const std::size_t n_bins = cal.size() / w;
    const std::size_t offset = cal.size() - n_bins * w;
    std::vector<Date> ends;
    for (std::size_t b = 0; b < n_bins; ++b) ends.push_back(cal[offset + (b + 1) * w - 1]);

    const Imputation filled = impute(panel);
    AggregatedPanel out(panel.regions(), std::move(ends), window_days);
    for (const auto& name : panel.signals()) {
        out.add_signal(name);
        const bool cumulative = signal_kind(name) == SignalKind::Cumulative;
        for (std::size_t r = 0; r < panel.region_count(); ++r) {
            const auto daily = filled.panel.raw(name, r);
            for (std::size_t b = 0; b < n_bins; ++b) {
                const std::size_t first = offset + b * w;
                double acc = 0.0;
                for (std::size_t d = first; d < first + w; ++d) acc += daily[d];
                // NaN propagates when any day in the bin is past the horizon.
                out.set(name, r, b, cumulative ? (std::isnan(acc) ? acc : daily[first + w - 1]) : acc);
            }
        }
    }
    return out;
}

// --- z-score -----------------------------------------------------------------

std::optional<std::size_t> NormalizationStats::find(std::string_view column) const {
    return index_of(columns, column);
}

double NormalizationStats::normalize(std::size_t column, double x) const {
    if (constant[column]) return 0.0;
    return (x - mean[column]) / std::max(std[column], floor);
}

double NormalizationStats::denormalize(std::size_t column, double z) const {
    return mean[column] + z * std::max(std[column], floor);
}

NormalizationStats zscore_fit(const Eigen::MatrixXd& rows, std::vector<std::string> columns) {
    if (rows.rows() < 2) throw std::invalid_argument("insufficient training rows");
    if (static_cast<std::size_t>(rows.cols()) != columns.size()) {
        throw std::invalid_argument("column names do not match matrix width");
    }
    NormalizationStats stats;
    stats.columns = std::move(columns);
    const auto n = static_cast<double>(rows.rows());
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < rows.rows(); ++i) sum += rows(i, c);
        const double mean = sum / n;
        double ss = 0.0;
        for (Eigen::Index i = 0; i < rows.rows(); ++i) ss += (rows(i, c) - mean) * (rows(i, c) - mean);
        const double var = ss / n;
        const double sd = std::sqrt(var);
        stats.mean.push_back(mean);
        stats.std.push_back(sd);
        stats.constant.push_back(sd < NormalizationStats::kStdFloor);
    }
    return stats;
}

Eigen::MatrixXd zscore_apply(const Eigen::MatrixXd& rows, std::span<const std::string> columns,
                             const NormalizationStats& stats) {
    if (static_cast<std::size_t>(rows.cols()) != columns.size()) {
        throw std::invalid_argument("column names do not match matrix width");
    }
    Eigen::MatrixXd out(rows.rows(), rows.cols());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const auto idx = stats.find(columns[c]);
        if (!idx) throw std::invalid_argument("unknown column '" + columns[c] + "'");
        const auto col = static_cast<Eigen::Index>(c);
        if (stats.constant[*idx]) {
            out.col(col).setZero();
        } else {
            out.col(col) = (rows.col(col).array() - stats.mean[*idx]) / std::max(stats.std[*idx], stats.floor);
        }
    }
    return out;
}

// --- augmentation ------------------------------------------------------------

AugmentedDataset augment(const Dataset& rows, const AugmentOptions& options, std::uint64_t seed,
                         const std::vector<bool>& noiseless) {
    const std::size_t n = rows.rows();
    if (n == 0) throw std::invalid_argument("cannot augment an empty dataset");
    if (options.n_bootstrap < 1) throw std::invalid_argument("n_bootstrap must be at least 1");
    if (!(options.noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be non-negative");
    if (!noiseless.empty() && noiseless.size() != rows.columns.size()) {
        throw std::invalid_argument("noiseless mask does not match column count");
    }

    const std::size_t p = rows.columns.size();
    const std::size_t total = n * options.n_bootstrap;
    std::vector<std::uint64_t> column_keys;
    for (const auto& name : rows.columns) column_keys.push_back(hash_name(name));
    const std::uint64_t target_key = hash_name("<target>");
    const std::uint64_t resample_key = hash_name("<resample>");

    AugmentedDataset out;
    out.data.columns = rows.columns;
    out.data.features.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(p));
    out.data.target.resize(static_cast<Eigen::Index>(total));
    out.source_row.resize(total);
    out.noise_seed.resize(total);

    const double sd = options.noise_sd;
    for (std::size_t i = 0; i < total; ++i) {
        const std::uint64_t row_seed = derive_seed(seed, "augment.row", i);
        const auto src = static_cast<Eigen::Index>(index_from_key(row_seed ^ resample_key, n));
        const auto dst = static_cast<Eigen::Index>(i);
        out.source_row[i] = static_cast<std::size_t>(src);
        out.noise_seed[i] = row_seed;
        for (std::size_t c = 0; c < p; ++c) {
            const auto col = static_cast<Eigen::Index>(c);
            double v = rows.features(src, col);
            if (sd > 0.0 && (noiseless.empty() || !noiseless[c])) {
                v += sd * normal_from_key(row_seed ^ column_keys[c]);
            }
            out.data.features(dst, col) = v;
        }
        double t = rows.target(src);
        if (sd > 0.0 && options.noise_on_target) t += sd * normal_from_key(row_seed ^ target_key);
        out.data.target(dst) = t;
    }
    return out;
}

}  // namespace argonet
