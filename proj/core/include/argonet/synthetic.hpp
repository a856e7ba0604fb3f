#pragma once

#include "argonet/timeseries.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace argonet {

struct SyntheticOptions {
    std::size_t regions = 32;
    std::size_t days = 40;
    std::size_t groups = 3;
    std::size_t mechanistic_lead = 2;  // days of mechanistic forecast past the last case date
    std::uint64_t seed = 20200221;
    Date start = Date{std::chrono::year{2020} / 1 / 13};
};

struct SyntheticData {
    SignalPanel panel;                 // daily; every signal present
    std::vector<std::size_t> group;    // generating group per region
    std::vector<std::vector<double>> intensity;  // true daily case intensity per region
};

/// Regional outbreaks in staggered groups: a smooth epidemic curve per
/// group, times a persistent lognormal shock per region and bin, observed
/// through Poisson noise. Search counts lead the intensity by one day,
/// media coverage follows the group total weakly, and the mechanistic
/// column is the true intensity with small multiplicative error.
SyntheticData generate_synthetic(const SyntheticOptions& options = {});

/// Writes cases.csv, search.csv, media.csv and mechanistic.csv in the ingest
/// format. Signals absent from the panel produce header-only files; missing
/// cells are skipped (or left empty in cases.csv).
void write_inputs(const SignalPanel& panel, const std::filesystem::path& dir);

}  // namespace argonet
