#include "argonet/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <tuple>

namespace argonet {

namespace {

struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

struct Table {
    std::string file;
    std::vector<Row> rows;
};

[[noreturn]] void fail(const std::string& file, std::size_t line, std::size_t column, const std::string& what) {
    throw DataError(file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what);
}

Table read_table(const std::filesystem::path& path, const std::vector<std::string>& header, bool allow_empty) {
    Table t{path.string(), {}};
    std::ifstream in(path);
    if (!in) throw DataError(t.file + ": cannot open file");
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_csv_line(line);
        if (!have_header) {
            for (auto& f : fields) {
                const auto b = f.find_first_not_of(' ');
                f = b == std::string::npos ? "" : f.substr(b, f.find_last_not_of(' ') - b + 1);
            }
            if (fields != header) {
                std::string expected;
                for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
                fail(t.file, lineno, 1, "header must be '" + expected + "'");
            }
            have_header = true;
            continue;
        }
        if (fields.size() != header.size()) {
            fail(t.file, lineno, std::min(fields.size(), header.size()) + 1,
                 "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
        }
        t.rows.push_back({lineno, std::move(fields)});
    }
    if (!have_header && !allow_empty) throw DataError(t.file + ":1:1: missing header row");
    return t;
}

Date date_field(const Table& t, const Row& r, std::size_t col) {
    try {
        return parse_date(r.fields[col]);
    } catch (const std::invalid_argument&) {
        fail(t.file, r.line, col + 1, "invalid date '" + r.fields[col] + "'");
    }
}

std::optional<double> count_field(const Table& t, const Row& r, std::size_t col) {
    const std::string& s = r.fields[col];
    if (s.empty() || s == "NA") return std::nullopt;
    double v = 0.0;
    try {
        std::size_t used = 0;
        v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
        fail(t.file, r.line, col + 1, "not a number: '" + s + "'");
    }
    if (!std::isfinite(v)) fail(t.file, r.line, col + 1, "non-finite value");
    if (v < 0.0) fail(t.file, r.line, col + 1, "negative count");
    return v;
}

const std::string& region_field(const Table& t, const Row& r, std::size_t col) {
    if (r.fields[col].empty()) fail(t.file, r.line, col + 1, "empty region");
    return r.fields[col];
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    return out;
}

IngestResult ingest(const InputFiles& files) {
    const Table cases = read_table(files.cases, {"date", "region", "confirmed", "suspected", "deaths", "cumulative"}, false);
    std::optional<Table> search, media, mech;
    if (!files.search.empty()) search = read_table(files.search, {"date", "region", "term", "fraction"}, false);
    if (!files.media.empty()) media = read_table(files.media, {"date", "region", "article_count"}, false);
    if (!files.mechanistic.empty()) mech = read_table(files.mechanistic, {"date", "region", "forecast_new_cases"}, true);
    if (cases.rows.empty()) throw DataError(cases.file + ": empty input");

    std::set<std::string> region_set;
    std::set<Date> dates;
    for (const auto& r : cases.rows) region_set.insert(region_field(cases, r, 1));
    for (const Table* t : std::initializer_list<const Table*>{&cases, search ? &*search : nullptr, media ? &*media : nullptr, mech ? &*mech : nullptr}) {
        if (!t) continue;
        for (const auto& r : t->rows) dates.insert(date_field(*t, r, 0));
    }

    IngestResult out;
    out.panel = SignalPanel(std::vector<std::string>(region_set.begin(), region_set.end()),
                            std::vector<Date>(dates.begin(), dates.end()));
    SignalPanel& panel = out.panel;
    ValidationReport& report = out.report;

    auto locate = [&](const Table& t, const Row& r) -> std::optional<std::pair<std::size_t, std::size_t>> {
        const auto region = panel.find_region(r.fields[1]);
        if (!region) {
            report.warnings.push_back(t.file + ":" + std::to_string(r.line) + ": region '" + r.fields[1] +
                                      "' not in cases file, row ignored");
            return std::nullopt;
        }
        return std::pair{*region, *panel.day_index(date_field(t, r, 0))};
    };

    const char* case_signals[] = {"confirmed", "suspected", "deaths", "cumulative"};
    for (const char* s : case_signals) panel.add_signal(s);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    Date last_case = Date::min();
    for (const auto& r : cases.rows) {
        const auto [region, day] = *locate(cases, r);
        if (!seen.insert({region, day}).second) fail(cases.file, r.line, 1, "duplicate (date, region) row");
        last_case = std::max(last_case, panel.calendar()[day]);
        for (std::size_t k = 0; k < 4; ++k) {
            if (const auto v = count_field(cases, r, k + 2)) panel.set(case_signals[k], region, day, *v);
        }
    }
    for (std::size_t reg = 0; reg < panel.region_count(); ++reg) {
        for (std::size_t d = 0; d < panel.day_count() && panel.calendar()[d] <= last_case; ++d) {
            if (!seen.contains({reg, d})) report.uncovered.push_back({"cases", reg, panel.calendar()[d]});
        }
    }

    if (search) {
        std::set<std::tuple<std::size_t, std::size_t, std::string>> keys;
        for (const auto& r : search->rows) {
            const auto loc = locate(*search, r);
            if (!loc) continue;
            const std::string& term = r.fields[2];
            if (term.empty()) fail(search->file, r.line, 3, "empty search term");
            if (!keys.insert({loc->first, loc->second, term}).second) {
                fail(search->file, r.line, 1, "duplicate (date, region, term) row");
            }
            const auto v = count_field(*search, r, 3);
            if (!v) continue;
            const std::string name = files.sum_search_terms ? std::string(signal::search) : std::string(signal::search_prefix) + term;
            if (!panel.has_signal(name)) panel.add_signal(name);
            const double prev = panel.get(name, loc->first, loc->second).value_or(0.0);
            panel.set(name, loc->first, loc->second, files.sum_search_terms ? prev + *v : *v);
        }
    }

    auto single_value = [&](const Table& t, std::string_view name) {
        panel.add_signal(std::string(name));
        std::set<std::pair<std::size_t, std::size_t>> keys;
        for (const auto& r : t.rows) {
            const auto loc = locate(t, r);
            if (!loc) continue;
            if (!keys.insert(*loc).second) fail(t.file, r.line, 1, "duplicate (date, region) row");
            if (const auto v = count_field(t, r, 2)) panel.set(name, loc->first, loc->second, *v);
        }
    };
    if (media) single_value(*media, signal::media);
    if (mech && !mech->rows.empty()) {
        single_value(*mech, signal::mechanistic);
        out.mechanistic_available = true;
    } else if (mech) {
        report.warnings.push_back(mech->file + ": no mechanistic rows; augmented model disabled");
    }

    report.imputed = impute(panel).imputed;
    report.violations = cumulative_violations(panel);
    return out;
}

}  // namespace argonet
