#include "argonet/app.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Epidemic case-count forecasting with clustered, augmented LASSO models"};
    app.require_subcommand(1);

    argonet::CommandLine cl;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    std::string models;

    struct Command {
        const char* name;
        const char* help;
        void (*run)(const argonet::CommandLine&, std::ostream&);
    };
    const Command commands[] = {
        {"ingest", "Read and validate the input files", argonet::cmd_ingest},
        {"cluster", "Cluster regions at one date", argonet::cmd_cluster},
        {"simulate", "Run the metapopulation model and write mechanistic.csv", argonet::cmd_simulate},
        {"forecast", "Forecast the next bin for every region", argonet::cmd_forecast},
        {"backtest", "Walk-forward evaluation of every enabled model", argonet::cmd_backtest},
        {"report", "Recompute metrics and traces from backtest output", argonet::cmd_report},
    };
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", cl.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Base seed (overrides the config)");
        sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--models", models, "Comma-separated model list: persistence,ar,argo,argonet,augmented");
        sub->add_option("--out", cl.out, "Output directory");
        subs.emplace_back(sub, &c);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    for (const auto& [sub, command] : subs) {
        if (!sub->parsed()) continue;
        if (sub->count("--seed")) cl.seed = seed;
        if (sub->count("--jobs")) cl.jobs = jobs;
        if (sub->count("--models")) cl.models = models;
        try {
            command->run(cl, std::cout);
        } catch (const std::exception& e) {
            std::cerr << "argonet " << command->name << ": " << e.what() << '\n';
            return argonet::exit_code_for(e);
        }
    }
    return 0;
}
