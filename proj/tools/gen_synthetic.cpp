// Regenerates the bundled synthetic dataset.
#include "argonet/synthetic.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Write a synthetic input set (cases, search, media, mechanistic)"};
    std::string out;
    argonet::SyntheticOptions opts;
    app.add_option("out", out, "Output directory")->required();
    app.add_option("--seed", opts.seed, "Generator seed");
    app.add_option("--regions", opts.regions, "Number of regions")->check(CLI::PositiveNumber);
    app.add_option("--days", opts.days, "Number of days")->check(CLI::PositiveNumber);
    app.add_option("--groups", opts.groups, "Number of outbreak groups")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    const auto data = argonet::generate_synthetic(opts);
    argonet::write_inputs(data.panel, out);
    std::cout << "wrote " << data.panel.region_count() << " regions x " << opts.days << " days to " << out << '\n';
    return 0;
}
