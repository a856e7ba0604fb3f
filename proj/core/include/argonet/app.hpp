#pragma once

#include "argonet/config.hpp"
#include "argonet/evaluation.hpp"
#include "argonet/ingest.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace argonet {

struct CommandLine {
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::optional<std::string> models;
    std::filesystem::path out = "out";
};

/// Config file plus flag overrides; flags win.
RunConfig resolve_config(const CommandLine& cl);

struct LoadedData {
    IngestResult ingest;
    AggregatedPanel panel;
    RunConfig config;  // with the augmented model dropped when no mechanistic input exists
};

LoadedData load_data(const RunConfig& config, std::ostream& log);

/// Every output file starts with this line.
std::string output_header(const RunConfig& config);

void write_forecasts(std::ostream& os, const RunConfig& config, std::span<const ForecastRecord> records);
/// Reads forecasts.csv back; throws DataError on malformed rows.
std::vector<ForecastRecord> read_forecasts(std::istream& is);
void write_eval(std::ostream& os, const RunConfig& config, const EvalReport& report);
void write_traces(std::ostream& os, const RunConfig& config, std::span<const TracePoint> traces);

/// Subcommands. Each writes its files under cl.out plus resolved_config.json
/// and returns normally; errors propagate as exceptions.
void cmd_ingest(const CommandLine& cl, std::ostream& log);
void cmd_cluster(const CommandLine& cl, std::ostream& log);
void cmd_simulate(const CommandLine& cl, std::ostream& log);
void cmd_forecast(const CommandLine& cl, std::ostream& log);
void cmd_backtest(const CommandLine& cl, std::ostream& log);
void cmd_report(const CommandLine& cl, std::ostream& log);

/// Maps an exception from a subcommand to the process exit code:
/// ConfigError 1, DataError 2, anything else 3.
int exit_code_for(const std::exception& e);

}  // namespace argonet
