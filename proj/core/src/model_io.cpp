#include "argonet/model_io.hpp"

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace argonet {

namespace {

std::string real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

double to_real(const std::string& v, std::size_t line) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw DataError("line " + std::to_string(line) + ": bad number '" + v + "'");
    }
}

struct Entry {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

struct Block {
    std::size_t line = 0;
    std::vector<Entry> entries;

    const Entry& entry(const std::string& key) const {
        for (const auto& e : entries) {
            if (e.key == key) return e;
        }
        throw DataError("model block at line " + std::to_string(line) + " lacks '" + key + "'");
    }
    const std::string& get(const std::string& key) const { return entry(key).value; }
    double number(const std::string& key) const {
        const Entry& e = entry(key);
        return to_real(e.value, e.line);
    }
};

StoredModel decode(const Block& b) {
    StoredModel sm;
    try {
        sm.as_of = parse_date(b.get("as_of"));
    } catch (const std::invalid_argument&) {
        throw DataError("line " + std::to_string(b.entry("as_of").line) + ": bad date");
    }
    sm.variant = b.get("variant");
    sm.run = static_cast<std::size_t>(b.number("run"));
    sm.cluster_id = static_cast<std::size_t>(b.number("cluster"));
    sm.members = split(b.get("members"), ';');
    LassoFit& fit = sm.model.fit;
    fit.lambda = b.number("lambda");
    fit.intercept = b.number("intercept");
    fit.diagnostics.converged = b.get("converged") == "1";
    fit.diagnostics.iterations = static_cast<std::size_t>(b.number("iterations"));
    fit.diagnostics.kkt_residual = b.number("kkt_residual");

    std::vector<double> coefs;
    for (const auto& e : b.entries) {
        if (e.key.starts_with("coef.")) {
            sm.model.columns.push_back(e.key.substr(5));
            coefs.push_back(to_real(e.value, e.line));
        }
    }
    fit.coefficients = Eigen::Map<const Eigen::VectorXd>(coefs.data(), static_cast<Eigen::Index>(coefs.size()));

    NormalizationStats& fs = sm.model.feature_stats;
    fs.columns = sm.model.columns;
    for (const auto& c : fs.columns) {
        fs.mean.push_back(b.number("norm." + c + ".mean"));
        fs.std.push_back(b.number("norm." + c + ".std"));
        fs.constant.push_back(fs.std.back() < NormalizationStats::kStdFloor);
    }
    NormalizationStats& ts = sm.model.target_stats;
    ts.columns = {"target"};
    ts.mean = {b.number("target.mean")};
    ts.std = {b.number("target.std")};
    ts.constant = {ts.std[0] < NormalizationStats::kStdFloor};
    return sm;
}

}  // namespace

void write_models(std::ostream& os, std::span<const StoredModel> models) {
    for (const auto& sm : models) {
        const SparseLinearModel& m = sm.model;
        os << "[model]\n";
        os << "as_of = " << format_date(sm.as_of) << '\n';
        os << "variant = " << sm.variant << '\n';
        os << "run = " << sm.run << '\n';
        os << "cluster = " << sm.cluster_id << '\n';
        os << "members = ";
        for (std::size_t i = 0; i < sm.members.size(); ++i) os << (i ? ";" : "") << sm.members[i];
        os << '\n';
        os << "lambda = " << real(m.fit.lambda) << '\n';
        os << "intercept = " << real(m.fit.intercept) << '\n';
        os << "converged = " << (m.fit.diagnostics.converged ? 1 : 0) << '\n';
        os << "iterations = " << m.fit.diagnostics.iterations << '\n';
        os << "kkt_residual = " << real(m.fit.diagnostics.kkt_residual) << '\n';
        os << "target.mean = " << real(m.target_stats.mean.at(0)) << '\n';
        os << "target.std = " << real(m.target_stats.std.at(0)) << '\n';
        for (std::size_t c = 0; c < m.columns.size(); ++c) {
            os << "coef." << m.columns[c] << " = " << real(m.fit.coefficients(static_cast<Eigen::Index>(c))) << '\n';
        }
        for (std::size_t c = 0; c < m.columns.size(); ++c) {
            const auto idx = m.feature_stats.find(m.columns[c]).value();
            os << "norm." << m.columns[c] << ".mean = " << real(m.feature_stats.mean[idx]) << '\n';
            os << "norm." << m.columns[c] << ".std = " << real(m.feature_stats.std[idx]) << '\n';
        }
        os << '\n';
    }
}

std::vector<StoredModel> read_models(std::istream& is) {
    std::vector<Block> blocks;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t == "[model]") {
            blocks.push_back({lineno, {}});
            continue;
        }
        if (blocks.empty()) throw DataError("line " + std::to_string(lineno) + ": entry outside a [model] block");
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw DataError("line " + std::to_string(lineno) + ": expected key = value");
        blocks.back().entries.push_back({trim(t.substr(0, eq)), trim(t.substr(eq + 1)), lineno});
    }
    std::vector<StoredModel> out;
    for (const auto& b : blocks) out.push_back(decode(b));
    return out;
}

}  // namespace argonet
