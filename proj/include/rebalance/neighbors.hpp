#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rebalance/dataset.hpp"
#include "rebalance/error.hpp"
#include "rebalance/parallel.hpp"

namespace rebalance {

/// Squared Euclidean distance. Neighbor ordering uses this to avoid sqrt rounding.
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("distance between vectors of different dimension (" + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()) + ")");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

struct NeighborList {
    std::size_t query_index = 0;
    std::vector<std::size_t> indices;  // nearest first
    std::vector<double> distances;     // Euclidean, non-decreasing
};

/**
 * Exhaustive k-nearest-neighbor search for row `query` of `points`.
 *
 * Candidates are all rows, or only `restrict_to` when given; the query row is
 * always excluded. Ties in distance go to the lower row index, which makes the
 * result a pure function of the inputs.
 */
inline NeighborList knn(MatrixView points, std::size_t query, std::size_t k,
                        std::optional<std::span<const std::size_t>> restrict_to = std::nullopt) {
    const std::size_t n = points.rows();
    if (query >= n) {
        throw InvalidArgument("query index " + std::to_string(query) + " out of range");
    }
    if (k == 0) {
        throw InvalidArgument("k must be positive");
    }
    const auto q = points.row(query);
    std::vector<std::pair<double, std::size_t>> cand;
    auto consider = [&](std::size_t j) {
        if (j != query) {
            cand.emplace_back(squared_distance(q, points.row(j)), j);
        }
    };
    if (restrict_to) {
        cand.reserve(restrict_to->size());
        for (std::size_t j : *restrict_to) {
            if (j >= n) {
                throw InvalidArgument("candidate index " + std::to_string(j) + " out of range");
            }
            consider(j);
        }
    } else {
        cand.reserve(n);
        for (std::size_t j = 0; j < n; ++j) {
            consider(j);
        }
    }
    if (k > cand.size()) {
        throw InvalidArgument("k = " + std::to_string(k) + " exceeds the " + std::to_string(cand.size()) +
                              " available neighbor candidates");
    }
    // Lexicographic (distance, index) order is total, so the selection is unique.
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());

    NeighborList out;
    out.query_index = query;
    out.indices.reserve(k);
    out.distances.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        out.indices.push_back(cand[i].second);
        out.distances.push_back(std::sqrt(cand[i].first));
    }
    return out;
}

/// knn for many queries; results are identical for any thread count.
inline std::vector<NeighborList> knn_batch(MatrixView points, std::span<const std::size_t> queries, std::size_t k,
                                           std::optional<std::span<const std::size_t>> restrict_to = std::nullopt,
                                           unsigned threads = 1) {
    std::vector<NeighborList> out(queries.size());
    parallel_for(queries.size(), threads, [&](std::size_t i) { out[i] = knn(points, queries[i], k, restrict_to); });
    return out;
}

/**
 * All Tomek links as pairs (i, j) with i < j.
 *
 * (i, j) from different classes is a link when no third row is strictly closer
 * to either member than they are to each other, i.e. d(i, j) equals the
 * nearest-neighbor distance of both i and j. Equidistant ties can give a row
 * more than one link.
 */
inline std::vector<std::pair<std::size_t, std::size_t>> find_tomek_links(MatrixView points, std::span<const Label> labels,
                                                                    unsigned threads = 1) {
    const std::size_t n = points.rows();
    if (labels.size() != n) {
        throw InvalidArgument("label count does not match row count");
    }
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    parallel_for(n, threads, [&](std::size_t i) {
        const auto a = points.row(i);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                best = std::min(best, squared_distance(a, points.row(j)));
            }
        }
        nearest[i] = best;
    });

    std::vector<std::vector<std::size_t>> partners(n);
    parallel_for(n, threads, [&](std::size_t i) {
        const auto a = points.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            if (labels[i] == labels[j]) {
                continue;
            }
            const double d = squared_distance(a, points.row(j));
            if (d == nearest[i] && d == nearest[j]) {
                partners[i].push_back(j);
            }
        }
    });

    std::vector<std::pair<std::size_t, std::size_t>> links;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : partners[i]) {
            links.emplace_back(i, j);
        }
    }
    return links;
}

} // namespace rebalance
