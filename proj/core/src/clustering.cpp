#include "argonet/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace argonet {

namespace {

constexpr double kSymmetryTolerance = 1e-12;

void validate_dissimilarity(const Eigen::MatrixXd& d) {
    if (d.rows() != d.cols()) throw std::invalid_argument("dissimilarity matrix must be square");
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        if (d(i, i) != 0.0) throw std::invalid_argument("dissimilarity matrix must have a zero diagonal");
        for (Eigen::Index j = 0; j < d.cols(); ++j) {
            if (!std::isfinite(d(i, j))) throw std::invalid_argument("dissimilarity matrix has non-finite entries");
            if (d(i, j) < 0.0) throw std::invalid_argument("dissimilarity matrix has negative entries");
            if (std::abs(d(i, j) - d(j, i)) > kSymmetryTolerance) {
                throw std::invalid_argument("dissimilarity matrix is not symmetric");
            }
        }
    }
}

}  // namespace

CorrelationMatrix correlation_from_series(std::vector<std::string> regions, const Eigen::MatrixXd& series) {
    if (series.cols() < 3) throw std::invalid_argument("window too short");
    const Eigen::Index n = series.rows();
    const auto len = static_cast<double>(series.cols());

    Eigen::MatrixXd centered = series.colwise() - series.rowwise().mean();
    Eigen::VectorXd norms(n);
    for (Eigen::Index i = 0; i < n; ++i) norms(i) = std::sqrt(centered.row(i).squaredNorm() / len);

    CorrelationMatrix out;
    out.regions = std::move(regions);
    out.values = Eigen::MatrixXd::Identity(n, n);
    out.valid.setConstant(n, n, true);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double r = 0.0;
            const bool ok = norms(i) > 0.0 && norms(j) > 0.0;
            if (ok) {
                r = centered.row(i).dot(centered.row(j)) / len / (norms(i) * norms(j));
                r = std::clamp(r, -1.0, 1.0);
            }
            out.values(i, j) = out.values(j, i) = r;
            out.valid(i, j) = out.valid(j, i) = ok;
        }
        if (norms(i) == 0.0) out.valid(i, i) = false;
    }
    return out;
}

CorrelationMatrix pairwise_correlation(const AggregatedPanel& panel, std::string_view signal_name,
                                       std::size_t first_bin, std::size_t last_bin,
                                       std::span<const std::size_t> regions) {
    if (last_bin < first_bin || last_bin >= panel.bin_count()) {
        throw std::invalid_argument("correlation window outside panel");
    }
    if (last_bin - first_bin + 1 < 3) throw std::invalid_argument("window too short");
    std::vector<std::size_t> chosen(regions.begin(), regions.end());
    if (chosen.empty()) {
        chosen.resize(panel.region_count());
        std::iota(chosen.begin(), chosen.end(), std::size_t{0});
    }
    const auto width = static_cast<Eigen::Index>(last_bin - first_bin + 1);
    Eigen::MatrixXd series(static_cast<Eigen::Index>(chosen.size()), width);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        names.push_back(panel.regions().at(chosen[i]));
        const auto s = panel.series(signal_name, chosen[i]);
        for (Eigen::Index b = 0; b < width; ++b) {
            const double v = s[first_bin + static_cast<std::size_t>(b)];
            if (std::isnan(v)) throw std::invalid_argument("correlation window contains unavailable bins");
            series(static_cast<Eigen::Index>(i), b) = v;
        }
    }
    return correlation_from_series(std::move(names), series);
}

Eigen::MatrixXd dissimilarity(const CorrelationMatrix& corr) {
    Eigen::MatrixXd d = (1.0 - corr.values.array()).matrix();
    d.diagonal().setZero();
    return d;
}

Dendrogram complete_linkage(const Eigen::MatrixXd& input) {
    validate_dissimilarity(input);
    const auto n = static_cast<std::size_t>(input.rows());
    Dendrogram out;
    out.leaves = n;
    if (n < 2) return out;

    // Slot s always holds the cluster whose smallest leaf is s, so scanning
    // slots in order realizes the lowest-index tie break.
    Eigen::MatrixXd dist = input;
    std::vector<bool> active(n, true);
    std::vector<std::size_t> node(n), size(n, 1);
    std::iota(node.begin(), node.end(), std::size_t{0});

    for (std::size_t step = 0; step + 1 < n; ++step) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                const double v = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (v < best) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        out.merges.push_back({node[bi], node[bj], best, size[bi] + size[bj]});
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == bi || k == bj) continue;
            const auto ki = static_cast<Eigen::Index>(k);
            const double v = std::max(dist(ki, static_cast<Eigen::Index>(bi)), dist(ki, static_cast<Eigen::Index>(bj)));
            dist(ki, static_cast<Eigen::Index>(bi)) = dist(static_cast<Eigen::Index>(bi), ki) = v;
        }
        active[bj] = false;
        node[bi] = n + step;
        size[bi] += size[bj];
    }
    return out;
}

std::vector<std::vector<std::size_t>> ClusterPartition::members() const {
    std::vector<std::vector<std::size_t>> out(k);
    for (std::size_t i = 0; i < assignment.size(); ++i) out.at(assignment[i]).push_back(i);
    return out;
}

ClusterPartition cut(const Dendrogram& dendrogram, std::size_t k) {
    const std::size_t n = dendrogram.leaves;
    if (k < 1 || k > n) throw std::invalid_argument("cut: k out of range");

    std::vector<std::size_t> parent(n + dendrogram.merges.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t m = 0; m < n - k; ++m) {
        const auto& merge = dendrogram.merges.at(m);
        parent[find(merge.left)] = n + m;
        parent[find(merge.right)] = n + m;
    }

    ClusterPartition out;
    out.k = k;
    out.assignment.assign(n, 0);
    std::vector<std::size_t> label(parent.size(), static_cast<std::size_t>(-1));
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = find(i);
        if (label[root] == static_cast<std::size_t>(-1)) label[root] = next++;
        out.assignment[i] = label[root];
    }
    return out;
}

double calinski_harabasz(const Eigen::MatrixXd& features, const ClusterPartition& partition) {
    const auto n = static_cast<std::size_t>(features.rows());
    const std::size_t k = partition.k;
    if (partition.assignment.size() != n) throw std::invalid_argument("partition does not match features");
    if (k < 2 || k >= n) throw std::invalid_argument("CH undefined");

    const Eigen::RowVectorXd global = features.colwise().mean();
    Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), features.cols());
    std::vector<double> counts(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        centroids.row(static_cast<Eigen::Index>(partition.assignment[i])) += features.row(static_cast<Eigen::Index>(i));
        counts[partition.assignment[i]] += 1.0;
    }
    double between = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0.0) throw std::invalid_argument("partition has an empty cluster");
        const auto ci = static_cast<Eigen::Index>(c);
        centroids.row(ci) /= counts[c];
        between += counts[c] * (centroids.row(ci) - global).squaredNorm();
    }
    double within = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        within += (features.row(static_cast<Eigen::Index>(i)) -
                   centroids.row(static_cast<Eigen::Index>(partition.assignment[i])))
                      .squaredNorm();
    }
    if (within == 0.0) return std::numeric_limits<double>::infinity();
    return (between / static_cast<double>(k - 1)) / (within / static_cast<double>(n - k));
}

ClusterPartition select_k(const Dendrogram& dendrogram, const Eigen::MatrixXd& features, KRange range) {
    const std::size_t n = dendrogram.leaves;
    const std::size_t lo = std::max<std::size_t>(range.min, 2);
    const std::size_t hi = n >= 1 ? std::min(range.max, n - 1) : 0;

    auto single = [&](std::string warning) {
        ClusterPartition p = cut(dendrogram, 1);
        p.fallback = true;
        p.warning = std::move(warning);
        p.ch_score = std::numeric_limits<double>::quiet_NaN();
        return p;
    };
    if (n == 0) {
        ClusterPartition p;
        p.k = 0;
        p.fallback = true;
        p.warning = "no regions to cluster";
        return p;
    }
    if (lo > hi) return single("no feasible cluster count; using a single cluster");

    const Eigen::RowVectorXd global = features.colwise().mean();
    if ((features.rowwise() - global).squaredNorm() == 0.0) {
        return single("all regions coincide; using a single cluster");
    }

    ClusterPartition best;
    double best_score = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t k = lo; k <= hi; ++k) {
        ClusterPartition p = cut(dendrogram, k);
        const double score = calinski_harabasz(features, p);
        if (!found || score > best_score) {
            best = std::move(p);
            best_score = score;
            found = true;
        }
    }
    best.ch_score = best_score;
    return best;
}

namespace {

void split_by_history(const AggregatedPanel& panel, std::size_t as_of, ClusteringResult& out) {
    for (std::size_t r = 0; r < panel.region_count(); ++r) {
        bool usable = true;
        bool nonzero = false;
        for (std::size_t b = 0; b <= as_of; ++b) {
            const double v = panel.value(signal::confirmed, r, b);
            if (std::isnan(v)) {
                usable = false;
                break;
            }
            nonzero = nonzero || v != 0.0;
        }
        (usable && nonzero ? out.included : out.excluded).push_back(r);
    }
}

}  // namespace

ClusteringResult singleton_clusters(const AggregatedPanel& panel, std::size_t as_of) {
    ClusteringResult out;
    split_by_history(panel, as_of, out);
    const std::size_t n = out.included.size();
    out.dendrogram.leaves = n;
    out.partition.k = n;
    out.partition.assignment.resize(n);
    std::iota(out.partition.assignment.begin(), out.partition.assignment.end(), std::size_t{0});
    return out;
}

ClusteringResult cluster_regions(const AggregatedPanel& panel, std::size_t as_of, const ClusteringOptions& options) {
    ClusteringResult out;
    split_by_history(panel, as_of, out);

    const std::size_t n = out.included.size();
    const std::size_t window = as_of + 1;
    if (n == 0) {
        out.partition.k = 0;
        out.partition.fallback = true;
        out.partition.warning = "no regions with case history";
        return out;
    }
    if (window < 3) {
        out.dendrogram.leaves = n;
        out.partition.k = 1;
        out.partition.assignment.assign(n, 0);
        out.partition.fallback = true;
        out.partition.warning = "correlation window too short; using a single cluster";
        return out;
    }

    out.correlation = pairwise_correlation(panel, signal::confirmed, 0, as_of, out.included);
    out.dendrogram = complete_linkage(dissimilarity(out.correlation));

    Eigen::MatrixXd features;
    if (options.embedding == ChEmbedding::CorrelationRows) {
        features = out.correlation.values;
    } else {
        features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(window));
        for (std::size_t i = 0; i < n; ++i) {
            const auto s = panel.series(signal::confirmed, out.included[i]);
            Eigen::RowVectorXd row(static_cast<Eigen::Index>(window));
            for (std::size_t b = 0; b < window; ++b) row(static_cast<Eigen::Index>(b)) = s[b];
            const double mean = row.mean();
            const double sd = std::sqrt((row.array() - mean).square().mean());
            if (sd < NormalizationStats::kStdFloor) row.setZero();
            else row = ((row.array() - mean) / sd).matrix();
            features.row(static_cast<Eigen::Index>(i)) = row;
        }
    }
    out.partition = select_k(out.dendrogram, features, options.k_range);
    return out;
}

}  // namespace argonet
