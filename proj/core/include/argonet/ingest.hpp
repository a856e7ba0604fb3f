#pragma once

#include "argonet/timeseries.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace argonet {

struct InputFiles {
    std::filesystem::path cases;
    std::filesystem::path search;       // empty path: not used
    std::filesystem::path media;
    std::filesystem::path mechanistic;
    bool sum_search_terms = false;
};

struct ValidationReport {
    std::vector<PanelCell> imputed;
    std::vector<MonotonicityViolation> violations;
    std::vector<PanelCell> uncovered;  // (region, date) with no cases row, up to the last case date
    std::vector<std::string> warnings;

    std::size_t findings() const { return imputed.size() + violations.size() + uncovered.size() + warnings.size(); }
};

struct IngestResult {
    SignalPanel panel;  // as read; imputation happens at aggregation
    ValidationReport report;
    bool mechanistic_available = false;
};

/// Reads the CSV inputs. The calendar is the union of all dates seen and the
/// regions are those of cases.csv, sorted. Blank lines and lines starting
/// with '#' are skipped. Malformed rows, negative values
/// and duplicate keys throw DataError("<file>:<line>:<column>: ...").
IngestResult ingest(const InputFiles& files);

/// Splits one CSV line, honouring double quotes.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace argonet
