#include "argonet/synthetic.hpp"

#include "argonet/rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>

namespace argonet {

namespace {

const char* const kTerms[] = {"fever", "cough", "pneumonia"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticOptions& o) {
    if (o.regions == 0 || o.days < 4 || o.groups == 0) throw std::invalid_argument("synthetic panel too small");
    const std::size_t total_days = o.days + o.mechanistic_lead + 1;  // one more day drives the search lead
    const std::size_t bins = (total_days + 1) / 2;

    std::vector<std::string> names;
    for (std::size_t r = 0; r < o.regions; ++r) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "R%02zu", r + 1);
        names.emplace_back(buf);
    }
    SyntheticData out;
    out.panel = SignalPanel::daily(names, o.start, o.days + o.mechanistic_lead);
    SignalPanel& p = out.panel;
    for (const char* s : {"confirmed", "suspected", "deaths", "cumulative", "media", "mechanistic"}) p.add_signal(s);
    for (const char* t : kTerms) p.add_signal(std::string(signal::search_prefix) + t);

    std::vector<std::vector<double>> group_curve(o.groups, std::vector<double>(total_days));
    for (std::size_t g = 0; g < o.groups; ++g) {
        const double centre = static_cast<double>(o.days) * (0.35 + 0.25 * static_cast<double>(g) / std::max<double>(1.0, o.groups - 1.0));
        const double width = static_cast<double>(o.days) * (0.16 + 0.03 * static_cast<double>(g));
        for (std::size_t d = 0; d < total_days; ++d) {
            const double x = (static_cast<double>(d) - centre) / width;
            group_curve[g][d] = std::exp(-0.5 * x * x);
        }
    }

    out.intensity.assign(o.regions, std::vector<double>(total_days));
    out.group.resize(o.regions);
    for (std::size_t r = 0; r < o.regions; ++r) {
        std::mt19937_64 rng(derive_seed(o.seed, "synthetic.region", r));
        std::normal_distribution<double> z(0.0, 1.0);
        const std::size_t g = r % o.groups;
        out.group[r] = g;
        const double scale = 60.0 * std::exp(0.6 * z(rng));
        // Persistent shock on the log scale, one innovation per bin.
        std::vector<double> shock(bins);
        double log_s = 0.0;
        for (std::size_t b = 0; b < bins; ++b) {
            log_s = 0.6 * log_s + 0.3 * z(rng);
            shock[b] = std::exp(log_s);
        }
        for (std::size_t d = 0; d < total_days; ++d) {
            out.intensity[r][d] = 1.0 + scale * group_curve[g][d] * shock[d / 2];
        }

        double cumulative = 0.0;
        for (std::size_t d = 0; d < p.day_count(); ++d) {
            const double mu = out.intensity[r][d];
            if (d < o.days) {
                const double cases = static_cast<double>(std::poisson_distribution<long>(mu)(rng));
                cumulative += cases;
                p.set(signal::confirmed, r, d, cases);
                p.set(signal::suspected, r, d, static_cast<double>(std::poisson_distribution<long>(0.6 * mu)(rng)));
                const double lagged = d >= 3 ? out.intensity[r][d - 3] : 1.0;
                p.set(signal::deaths, r, d, static_cast<double>(std::poisson_distribution<long>(0.02 * lagged)(rng)));
                p.set(signal::cumulative, r, d, cumulative);
                double group_total = 0.0;
                for (std::size_t k = 0; k < o.groups; ++k) group_total += group_curve[k][d];
                p.set(signal::media, r, d, static_cast<double>(std::poisson_distribution<long>(3.0 + 2.0 * group_total)(rng)));
                for (std::size_t t = 0; t < std::size(kTerms); ++t) {
                    const double lead = out.intensity[r][d + 1];
                    const double frac = 1e-4 * (0.5 + 0.25 * static_cast<double>(t)) * lead * std::exp(0.2 * z(rng));
                    p.set(std::string(signal::search_prefix) + kTerms[t], r, d, frac);
                }
            }
            p.set(signal::mechanistic, r, d, mu * std::exp(0.05 * z(rng)));
        }
    }
    return out;
}

void write_inputs(const SignalPanel& panel, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto& cal = panel.calendar();
    auto cell = [&](std::string_view s, std::size_t r, std::size_t d) -> std::string {
        if (!panel.has_signal(s)) return "";
        const auto v = panel.get(s, r, d);
        return v ? num(*v) : "";
    };

    auto cases = open_out(dir / "cases.csv");
    cases << "date,region,confirmed,suspected,deaths,cumulative\n";
    for (std::size_t d = 0; d < cal.size(); ++d) {
        for (std::size_t r = 0; r < panel.region_count(); ++r) {
            if (!panel.get(signal::confirmed, r, d)) continue;
            cases << format_date(cal[d]) << ',' << panel.regions()[r] << ',' << cell(signal::confirmed, r, d) << ','
                  << cell(signal::suspected, r, d) << ',' << cell(signal::deaths, r, d) << ','
                  << cell(signal::cumulative, r, d) << '\n';
        }
    }

    auto search = open_out(dir / "search.csv");
    search << "date,region,term,fraction\n";
    for (std::size_t d = 0; d < cal.size(); ++d) {
        for (std::size_t r = 0; r < panel.region_count(); ++r) {
            for (const auto& s : panel.signals()) {
                if (!s.starts_with(signal::search_prefix)) continue;
                if (const auto v = panel.get(s, r, d)) {
                    search << format_date(cal[d]) << ',' << panel.regions()[r] << ',' << s.substr(signal::search_prefix.size())
                           << ',' << num(*v) << '\n';
                }
            }
        }
    }

    auto single = [&](const char* file, const char* header, std::string_view s) {
        auto os = open_out(dir / file);
        os << header << '\n';
        if (!panel.has_signal(s)) return;
        for (std::size_t d = 0; d < cal.size(); ++d) {
            for (std::size_t r = 0; r < panel.region_count(); ++r) {
                if (const auto v = panel.get(s, r, d)) os << format_date(cal[d]) << ',' << panel.regions()[r] << ',' << num(*v) << '\n';
            }
        }
    };
    single("media.csv", "date,region,article_count", signal::media);
    single("mechanistic.csv", "date,region,forecast_new_cases", signal::mechanistic);
}

}  // namespace argonet
