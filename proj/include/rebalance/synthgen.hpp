#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "rebalance/dataset.hpp"
#include "rebalance/error.hpp"
#include "rebalance/random.hpp"

namespace rebalance {

/// Parameters for a two-class Gaussian dataset with controllable overlap and minority fragmentation.
struct GenSpec {
    std::size_t n_negative = 900;
    std::size_t n_positive = 100;
    std::size_t dims = 2;
    /// 0 places the minority center 6 sigma from the majority center, 1 makes them coincide.
    double overlap = 0.0;
    /// More than one splits the minority into sub-clusters (small disjuncts).
    std::size_t minority_subclusters = 1;
    std::uint64_t seed = 0;
};

inline constexpr double cluster_sigma = 1.0;
inline constexpr double separated_distance = 6.0 * cluster_sigma;
inline constexpr double subcluster_radius = 3.0 * cluster_sigma;

inline void validate(const GenSpec& spec) {
    if (spec.n_negative == 0 || spec.n_positive == 0) {
        throw InvalidArgument("both class counts must be positive");
    }
    if (spec.dims == 0) {
        throw InvalidArgument("dims must be positive");
    }
    if (!(spec.overlap >= 0.0 && spec.overlap <= 1.0)) {
        throw InvalidArgument("overlap must lie in [0, 1]");
    }
    if (spec.minority_subclusters == 0) {
        throw InvalidArgument("minority_subclusters must be positive");
    }
}

/**
 * Centers of the minority sub-clusters. The nominal minority center sits on the
 * first axis at (1 - overlap) * 6 sigma from the origin; with several
 * sub-clusters their centers are spread on a ring of radius 3 sigma around it
 * in the plane of the first two axes (or evenly along the axis when dims = 1).
 */
inline std::vector<std::vector<double>> minority_centers(const GenSpec& spec) {
    validate(spec);
    const double offset = (1.0 - spec.overlap) * separated_distance;
    const std::size_t m = spec.minority_subclusters;
    std::vector<std::vector<double>> centers(m, std::vector<double>(spec.dims, 0.0));
    for (std::size_t c = 0; c < m; ++c) {
        centers[c][0] = offset;
        if (m == 1) {
            continue;
        }
        if (spec.dims == 1) {
            centers[c][0] += -subcluster_radius + 2.0 * subcluster_radius * static_cast<double>(c) /
                                                      static_cast<double>(m - 1);
        } else {
            const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(m);
            centers[c][0] += subcluster_radius * std::cos(angle);
            centers[c][1] += subcluster_radius * std::sin(angle);
        }
    }
    return centers;
}

/**
 * Negative rows first (isotropic Gaussian at the origin), then positive rows
 * split evenly across sub-clusters with the remainder going to the first ones.
 */
inline Dataset generate(const GenSpec& spec) {
    const auto centers = minority_centers(spec);
    Rng rng(spec.seed);
    const std::size_t total = spec.n_negative + spec.n_positive;
    std::vector<double> values;
    values.reserve(total * spec.dims);
    std::vector<Label> labels;
    labels.reserve(total);

    for (std::size_t i = 0; i < spec.n_negative; ++i) {
        for (std::size_t d = 0; d < spec.dims; ++d) {
            values.push_back(cluster_sigma * rng.normal());
        }
        labels.push_back(Label::negative);
    }
    const std::size_t m = centers.size();
    for (std::size_t c = 0; c < m; ++c) {
        const std::size_t share = spec.n_positive / m + (c < spec.n_positive % m ? 1 : 0);
        for (std::size_t i = 0; i < share; ++i) {
            for (std::size_t d = 0; d < spec.dims; ++d) {
                values.push_back(centers[c][d] + cluster_sigma * rng.normal());
            }
            labels.push_back(Label::positive);
        }
    }
    return Dataset(std::move(values), std::move(labels), Dataset::default_feature_names(spec.dims), "label");
}

} // namespace rebalance
