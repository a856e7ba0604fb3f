#pragma once

#include "argonet/date.hpp"
#include "argonet/timeseries.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace argonet {

struct CorrelationMatrix {
    std::vector<std::string> regions;
    Eigen::MatrixXd values;                                 // symmetric, unit diagonal
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> valid;  // false for pairs with a zero-variance series
};

/// Pearson correlation between the rows of `series` (one row per region,
/// one column per bin). Throws std::invalid_argument("window too short")
/// with fewer than 3 columns.
CorrelationMatrix correlation_from_series(std::vector<std::string> regions, const Eigen::MatrixXd& series);

/// Correlation of `signal_name` over bins [first_bin, last_bin] for the
/// given regions (all regions when empty).
CorrelationMatrix pairwise_correlation(const AggregatedPanel& panel, std::string_view signal_name,
                                       std::size_t first_bin, std::size_t last_bin,
                                       std::span<const std::size_t> regions = {});

/// d = 1 - r with a zero diagonal; invalid pairs have r = 0 and hence d = 1.
Eigen::MatrixXd dissimilarity(const CorrelationMatrix& corr);

/// Leaves are nodes 0..n-1; merge m creates node n+m.
struct Merge {
    std::size_t left = 0;
    std::size_t right = 0;
    double height = 0.0;
    std::size_t size = 0;
};

struct Dendrogram {
    std::size_t leaves = 0;
    std::vector<Merge> merges;
};

/// Agglomerative clustering with complete (maximum) linkage. Ties are broken
/// toward the lowest pair of cluster indices, where a cluster is indexed by
/// its smallest member. Throws std::invalid_argument on non-square,
/// asymmetric, negative or non-zero-diagonal input.
Dendrogram complete_linkage(const Eigen::MatrixXd& dissimilarity);

struct ClusterPartition {
    std::size_t k = 1;
    std::vector<std::size_t> assignment;  // cluster ids numbered by first member
    std::optional<Date> as_of;
    double ch_score = 0.0;
    bool fallback = false;
    std::string warning;

    std::vector<std::vector<std::size_t>> members() const;
};

/// Undoes the last k-1 merges. Throws std::invalid_argument unless 1 <= k <= n.
ClusterPartition cut(const Dendrogram& dendrogram, std::size_t k);

/// [B/(k-1)] / [W/(n-k)] over the rows of `features`. Throws
/// std::invalid_argument("CH undefined") unless 2 <= k < n; returns +inf
/// when W = 0.
double calinski_harabasz(const Eigen::MatrixXd& features, const ClusterPartition& partition);

struct KRange {
    std::size_t min = 2;
    std::size_t max = 10;
};

/// Cut maximizing the Calinski-Harabasz index over `range` clipped to
/// [2, n-1]; ties go to the smaller k. With no feasible k, or when every
/// point coincides, returns a single cluster with `fallback` set.
ClusterPartition select_k(const Dendrogram& dendrogram, const Eigen::MatrixXd& features, KRange range = {});

enum class ChEmbedding { CorrelationRows, ZScoredSeries };

struct ClusteringOptions {
    KRange k_range{};
    ChEmbedding embedding = ChEmbedding::CorrelationRows;
};

/// Clustering of a panel at one recalibration bin. Regions whose confirmed
/// history up to `as_of` is all zero (or unavailable) are excluded and listed
/// separately; `partition.assignment` is indexed like `included`.
struct ClusteringResult {
    std::vector<std::size_t> included;
    std::vector<std::size_t> excluded;
    CorrelationMatrix correlation;
    Dendrogram dendrogram;
    ClusterPartition partition;
};

ClusteringResult cluster_regions(const AggregatedPanel& panel, std::size_t as_of,
                                 const ClusteringOptions& options = {});

/// Same exclusion rule, but every included region forms its own cluster.
ClusteringResult singleton_clusters(const AggregatedPanel& panel, std::size_t as_of);

}  // namespace argonet
