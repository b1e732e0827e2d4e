#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rebalance/dataset.hpp"
#include "rebalance/error.hpp"
#include "rebalance/neighbors.hpp"
#include "rebalance/random.hpp"

namespace rebalance {

enum class Method {
    random_undersample,
    tomek_links,
    enn,
    random_oversample,
    smote,
    adasyn,
    smote_tomek,
    smote_enn,
};

inline constexpr Method all_methods[] = {Method::random_undersample, Method::tomek_links, Method::enn,
                                         Method::random_oversample,  Method::smote,       Method::adasyn,
                                         Method::smote_tomek,        Method::smote_enn};

inline std::string_view method_name(Method m) {
    switch (m) {
    case Method::random_undersample: return "rus";
    case Method::tomek_links: return "tomek";
    case Method::enn: return "enn";
    case Method::random_oversample: return "ros";
    case Method::smote: return "smote";
    case Method::adasyn: return "adasyn";
    case Method::smote_tomek: return "smote-tomek";
    case Method::smote_enn: return "smote-enn";
    }
    return "unknown";
}

inline std::optional<Method> parse_method(std::string_view name) {
    for (Method m : all_methods) {
        if (method_name(m) == name) {
            return m;
        }
    }
    return std::nullopt;
}

/// Which rows a cleaning method (Tomek, ENN) may remove.
enum class CleaningStrategy {
    majority,  // only the majority class
    all,       // both classes ("auto")
};

inline std::string_view strategy_name(CleaningStrategy s) { return s == CleaningStrategy::majority ? "majority" : "auto"; }

inline std::optional<CleaningStrategy> parse_strategy(std::string_view name) {
    if (name == "majority") {
        return CleaningStrategy::majority;
    }
    if (name == "auto" || name == "all") {
        return CleaningStrategy::all;
    }
    return std::nullopt;
}

inline constexpr std::size_t default_smote_k = 5;
inline constexpr std::size_t default_enn_k = 3;

struct SamplerConfig {
    std::uint64_t seed = 0;
    /// Neighbors for SMOTE/ADASYN (default 5) or standalone ENN (default 3).
    std::optional<std::size_t> k_neighbors;
    /// Neighbors for the ENN stage of smote_enn (default 3).
    std::optional<std::size_t> enn_k_neighbors;
    /// Cleaners default to majority; hybrids default to all.
    std::optional<CleaningStrategy> strategy;
    /// Search neighbors on z-scored features. Output rows stay in raw units.
    bool standardize_distances = false;
    /// Worker cap for distance computations; never changes the result.
    unsigned threads = 1;
};

/// The configuration actually applied, defaults filled in.
struct ResolvedParameters {
    std::uint64_t seed = 0;
    std::optional<std::size_t> k_neighbors;
    std::optional<std::size_t> enn_k_neighbors;
    std::optional<CleaningStrategy> strategy;
    bool standardize_distances = false;
};

/// Where a synthetic row came from: base + gap * (neighbor - base), indices into the sampler's input.
struct SyntheticOrigin {
    std::size_t base = 0;
    std::size_t neighbor = 0;
    double gap = 0.0;
};

/**
 * Result of any sampler. Synthetic rows are appended after the retained
 * original rows, in generation order, and origins[t] describes synthetic row t.
 *
 * For the hybrid methods, `origins` refers to the input dataset while
 * `removed_indices` refers to the intermediate SMOTE output (input rows first,
 * then synthetic rows).
 */
struct ResampleOutcome {
    Dataset data;
    ClassCounts before;
    ClassCounts after;
    Method method = Method::random_undersample;
    ResolvedParameters parameters;
    std::vector<std::size_t> removed_indices;
    std::size_t synthetic_count = 0;
    std::vector<SyntheticOrigin> origins;
    std::vector<std::string> warnings;
};

/// Minority/majority assignment. On a tie the positive class counts as minority.
struct ClassRoles {
    Label minority = Label::positive;
    Label majority = Label::negative;
    std::size_t n_minority = 0;
    std::size_t n_majority = 0;
};

inline ClassRoles class_roles(const ClassCounts& counts) {
    ClassRoles r;
    if (counts.n_positive > counts.n_negative) {
        r.minority = Label::negative;
        r.majority = Label::positive;
    }
    r.n_minority = counts.of(r.minority);
    r.n_majority = counts.of(r.majority);
    return r;
}

namespace detail {

inline void require_both_classes(const ClassCounts& counts, std::string_view method) {
    if (counts.n_negative == 0 || counts.n_positive == 0) {
        throw InvalidArgument(std::string(method) + " requires both classes to be present");
    }
}

inline std::vector<std::size_t> rows_of(const Dataset& ds, Label label) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        if (ds.label(i) == label) {
            out.push_back(i);
        }
    }
    return out;
}

/// Feature matrix that neighbor searches run on: raw, or z-scored on request.
class SearchSpace {
public:
    SearchSpace(const Dataset& ds, bool standardize) {
        if (standardize) {
            scaled_ = FeatureScaling::fit(ds.view()).apply(ds.view());
            view_ = MatrixView{scaled_, ds.features()};
        } else {
            view_ = ds.view();
        }
    }
    MatrixView view() const { return view_; }

private:
    std::vector<double> scaled_;
    MatrixView view_;
};

inline ResampleOutcome start_outcome(const Dataset& ds, Method method, const SamplerConfig& cfg) {
    ResampleOutcome out;
    out.before = class_counts(ds);
    out.method = method;
    out.parameters.seed = cfg.seed;
    out.parameters.standardize_distances = cfg.standardize_distances;
    return out;
}

inline void finish_outcome(ResampleOutcome& out, Dataset data) {
    out.data = std::move(data);
    out.after = class_counts(out.data);
}

/// Keeps every row not flagged for removal, in original order.
inline Dataset drop_rows(const Dataset& ds, const std::vector<char>& remove, std::vector<std::size_t>& removed) {
    std::vector<std::size_t> keep;
    keep.reserve(ds.rows());
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        (remove[i] ? removed : keep).push_back(i);
    }
    return ds.select(keep);
}

/// Original rows followed by `extra` synthetic rows of class `label`.
inline Dataset append_rows(const Dataset& ds, const std::vector<double>& extra, Label label) {
    std::vector<double> values(ds.values().begin(), ds.values().end());
    values.insert(values.end(), extra.begin(), extra.end());
    std::vector<Label> labels(ds.labels().begin(), ds.labels().end());
    labels.insert(labels.end(), extra.size() / ds.features(), label);
    return Dataset(std::move(values), std::move(labels), ds.feature_names(), ds.label_name());
}

/// Writes base + gap * (neighbor - base) into `out`, clamped per dimension to the segment's box.
inline void interpolate(std::span<const double> base, std::span<const double> neighbor, double gap,
                        std::vector<double>& out) {
    for (std::size_t d = 0; d < base.size(); ++d) {
        const double lo = std::min(base[d], neighbor[d]);
        const double hi = std::max(base[d], neighbor[d]);
        out.push_back(std::clamp(base[d] + gap * (neighbor[d] - base[d]), lo, hi));
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Undersampling

/// Drops majority rows, chosen uniformly without replacement, until both classes match.
inline ResampleOutcome random_undersample(const Dataset& ds, const SamplerConfig& cfg = {}) {
    ResampleOutcome out = detail::start_outcome(ds, Method::random_undersample, cfg);
    detail::require_both_classes(out.before, "random undersampling");
    const ClassRoles roles = class_roles(out.before);

    std::vector<std::size_t> majority = detail::rows_of(ds, roles.majority);
    Rng rng(cfg.seed);
    rng.shuffle(majority.begin(), majority.end());
    std::vector<char> remove(ds.rows(), 0);
    for (std::size_t i = roles.n_minority; i < majority.size(); ++i) {
        remove[majority[i]] = 1;
    }
    detail::finish_outcome(out, detail::drop_rows(ds, remove, out.removed_indices));
    return out;
}

namespace detail {

inline CleaningStrategy resolve_strategy(const SamplerConfig& cfg, CleaningStrategy fallback) {
    return cfg.strategy.value_or(fallback);
}

inline ResampleOutcome clean_tomek(const Dataset& ds, const SamplerConfig& cfg, CleaningStrategy strategy) {
    ResampleOutcome out = start_outcome(ds, Method::tomek_links, cfg);
    out.parameters.strategy = strategy;
    require_both_classes(out.before, "Tomek links");
    const ClassRoles roles = class_roles(out.before);

    const SearchSpace space(ds, cfg.standardize_distances);
    std::vector<char> remove(ds.rows(), 0);
    for (const auto& [i, j] : find_tomek_links(space.view(), ds.labels(), cfg.threads)) {
        for (std::size_t member : {i, j}) {
            if (strategy == CleaningStrategy::all || ds.label(member) == roles.majority) {
                remove[member] = 1;
            }
        }
    }
    finish_outcome(out, drop_rows(ds, remove, out.removed_indices));
    return out;
}

inline ResampleOutcome clean_enn(const Dataset& ds, const SamplerConfig& cfg, std::size_t k,
                                 CleaningStrategy strategy) {
    ResampleOutcome out = start_outcome(ds, Method::enn, cfg);
    out.parameters.k_neighbors = k;
    out.parameters.strategy = strategy;
    require_both_classes(out.before, "ENN");
    if (k == 0) {
        throw InvalidArgument("ENN requires k_neighbors >= 1");
    }
    if (k >= ds.rows()) {
        throw InvalidArgument("ENN k_neighbors = " + std::to_string(k) + " must be below the row count " +
                              std::to_string(ds.rows()));
    }
    const ClassRoles roles = class_roles(out.before);

    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        if (strategy == CleaningStrategy::all || ds.label(i) == roles.majority) {
            candidates.push_back(i);
        }
    }
    // Every decision is made against the unmodified input, then applied at once.
    const SearchSpace space(ds, cfg.standardize_distances);
    const auto neighborhoods = knn_batch(space.view(), candidates, k, std::nullopt, cfg.threads);
    std::vector<char> remove(ds.rows(), 0);
    for (const auto& nl : neighborhoods) {
        const Label own = ds.label(nl.query_index);
        const auto disagree = static_cast<std::size_t>(
            std::count_if(nl.indices.begin(), nl.indices.end(), [&](std::size_t j) { return ds.label(j) != own; }));
        // Strict majority; a k/2 tie keeps the row.
        if (2 * disagree > k) {
            remove[nl.query_index] = 1;
        }
    }
    finish_outcome(out, drop_rows(ds, remove, out.removed_indices));
    return out;
}

} // namespace detail

/**
 * Removes Tomek-link members found in a single pass over the input. With the
 * default majority strategy only the majority member of each link goes.
 */
inline ResampleOutcome tomek_links(const Dataset& ds, const SamplerConfig& cfg = {}) {
    return detail::clean_tomek(ds, cfg, detail::resolve_strategy(cfg, CleaningStrategy::majority));
}

/**
 * Edited nearest neighbours: a candidate row is removed when strictly more than
 * k/2 of its k nearest neighbors in the full input belong to the other class.
 */
inline ResampleOutcome enn(const Dataset& ds, const SamplerConfig& cfg = {}) {
    return detail::clean_enn(ds, cfg, cfg.k_neighbors.value_or(default_enn_k),
                             detail::resolve_strategy(cfg, CleaningStrategy::majority));
}

// ---------------------------------------------------------------------------
// Oversampling

/// Appends uniform-with-replacement copies of minority rows until both classes match.
inline ResampleOutcome random_oversample(const Dataset& ds, const SamplerConfig& cfg = {}) {
    ResampleOutcome out = detail::start_outcome(ds, Method::random_oversample, cfg);
    detail::require_both_classes(out.before, "random oversampling");
    const ClassRoles roles = class_roles(out.before);

    const std::vector<std::size_t> minority = detail::rows_of(ds, roles.minority);
    const std::size_t needed = roles.n_majority - roles.n_minority;
    Rng rng(cfg.seed);
    std::vector<double> extra;
    extra.reserve(needed * ds.features());
    for (std::size_t t = 0; t < needed; ++t) {
        const std::size_t src = minority[rng.below(minority.size())];
        const auto r = ds.row(src);
        extra.insert(extra.end(), r.begin(), r.end());
        out.origins.push_back({src, src, 0.0});
    }
    out.synthetic_count = needed;
    detail::finish_outcome(out, detail::append_rows(ds, extra, roles.minority));
    return out;
}

namespace detail {

inline void require_minority_k(std::size_t n_minority, std::size_t k, std::string_view method) {
    if (k == 0) {
        throw InvalidArgument(std::string(method) + " requires k_neighbors >= 1");
    }
    if (n_minority <= k) {
        throw InvalidArgument(std::string(method) + ": minority class has " + std::to_string(n_minority) +
                              " rows, needs more than k_neighbors = " + std::to_string(k));
    }
}

/// Minority-only neighbor lists keyed by position in `minority`.
inline std::vector<NeighborList> minority_neighbors(MatrixView space, const std::vector<std::size_t>& minority,
                                                    std::size_t k, unsigned threads) {
    return knn_batch(space, minority, k, std::span<const std::size_t>(minority), threads);
}

/// One synthetic row from `base`: draws the neighbor slot, then the gap, in that order.
inline void synthesize(const Dataset& ds, std::size_t base, const NeighborList& neighbors, Rng& rng,
                       std::vector<double>& extra, std::vector<SyntheticOrigin>& origins) {
    const std::size_t neighbor = neighbors.indices[rng.below(neighbors.indices.size())];
    const double gap = rng.unit();
    interpolate(ds.row(base), ds.row(neighbor), gap, extra);
    origins.push_back({base, neighbor, gap});
}

} // namespace detail

/**
 * SMOTE, balancing to the majority count.
 *
 * Each synthetic row interpolates between a minority row and one of its
 * k nearest minority neighbors. Base rows are taken round-robin over a seeded
 * shuffle of the minority rows, so any remainder lands on the first rows of
 * that shuffle. Random draws: the shuffle, then (neighbor slot, gap) per row.
 */
inline ResampleOutcome smote(const Dataset& ds, const SamplerConfig& cfg = {}) {
    ResampleOutcome out = detail::start_outcome(ds, Method::smote, cfg);
    const std::size_t k = cfg.k_neighbors.value_or(default_smote_k);
    out.parameters.k_neighbors = k;
    detail::require_both_classes(out.before, "SMOTE");
    const ClassRoles roles = class_roles(out.before);
    const std::size_t needed = roles.n_majority - roles.n_minority;
    if (needed == 0) {
        detail::finish_outcome(out, ds);
        return out;
    }
    detail::require_minority_k(roles.n_minority, k, "SMOTE");

    const std::vector<std::size_t> minority = detail::rows_of(ds, roles.minority);
    const detail::SearchSpace space(ds, cfg.standardize_distances);
    const auto neighbors = detail::minority_neighbors(space.view(), minority, k, cfg.threads);

    Rng rng(cfg.seed);
    std::vector<std::size_t> order(minority.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order.begin(), order.end());

    std::vector<double> extra;
    extra.reserve(needed * ds.features());
    for (std::size_t t = 0; t < needed; ++t) {
        const std::size_t slot = order[t % order.size()];
        detail::synthesize(ds, minority[slot], neighbors[slot], rng, extra, out.origins);
    }
    out.synthetic_count = needed;
    detail::finish_outcome(out, detail::append_rows(ds, extra, roles.minority));
    return out;
}

/**
 * ADASYN: SMOTE-style generation weighted toward hard minority rows.
 *
 * For minority row i, r_i is the fraction of majority rows among its k nearest
 * neighbors in the full input. Row i receives round(r_i / sum(r) * G)
 * synthetics (halves round up), G = n_majority - n_minority, so the final
 * minority count may drift from G. If no minority row has a majority neighbor
 * the allocation falls back to round(G / n_minority) per row and a warning is
 * recorded. Rows are processed in input order; each draws (neighbor slot, gap).
 */
inline ResampleOutcome adasyn(const Dataset& ds, const SamplerConfig& cfg = {}) {
    ResampleOutcome out = detail::start_outcome(ds, Method::adasyn, cfg);
    const std::size_t k = cfg.k_neighbors.value_or(default_smote_k);
    out.parameters.k_neighbors = k;
    detail::require_both_classes(out.before, "ADASYN");
    const ClassRoles roles = class_roles(out.before);
    const std::size_t target = roles.n_majority - roles.n_minority;
    if (target == 0) {
        detail::finish_outcome(out, ds);
        return out;
    }
    detail::require_minority_k(roles.n_minority, k, "ADASYN");

    const std::vector<std::size_t> minority = detail::rows_of(ds, roles.minority);
    const detail::SearchSpace space(ds, cfg.standardize_distances);
    const auto full = knn_batch(space.view(), minority, k, std::nullopt, cfg.threads);
    const auto within = detail::minority_neighbors(space.view(), minority, k, cfg.threads);

    std::vector<double> hardness(minority.size());
    double total = 0.0;
    for (std::size_t i = 0; i < minority.size(); ++i) {
        const auto majority_hits = std::count_if(full[i].indices.begin(), full[i].indices.end(),
                                                 [&](std::size_t j) { return ds.label(j) == roles.majority; });
        hardness[i] = static_cast<double>(majority_hits) / static_cast<double>(k);
        total += hardness[i];
    }

    const double g = static_cast<double>(target);
    std::vector<std::size_t> allocation(minority.size());
    if (total == 0.0) {
        out.warnings.emplace_back("adasyn: no minority row has a majority neighbor; using uniform allocation");
        const auto each = static_cast<std::size_t>(std::floor(g / static_cast<double>(minority.size()) + 0.5));
        std::fill(allocation.begin(), allocation.end(), each);
    } else {
        for (std::size_t i = 0; i < minority.size(); ++i) {
            allocation[i] = static_cast<std::size_t>(std::floor(hardness[i] / total * g + 0.5));
        }
    }

    Rng rng(cfg.seed);
    std::vector<double> extra;
    for (std::size_t i = 0; i < minority.size(); ++i) {
        for (std::size_t t = 0; t < allocation[i]; ++t) {
            detail::synthesize(ds, minority[i], within[i], rng, extra, out.origins);
        }
    }
    out.synthetic_count = out.origins.size();
    detail::finish_outcome(out, detail::append_rows(ds, extra, roles.minority));
    return out;
}

// ---------------------------------------------------------------------------
// Hybrids

namespace detail {

inline ResampleOutcome hybrid(const Dataset& ds, const SamplerConfig& cfg, Method method) {
    ResampleOutcome over = smote(ds, cfg);
    const CleaningStrategy strategy = resolve_strategy(cfg, CleaningStrategy::all);
    ResampleOutcome cleaned;
    std::optional<std::size_t> enn_k;
    if (method == Method::smote_tomek) {
        cleaned = clean_tomek(over.data, cfg, strategy);
    } else {
        enn_k = cfg.enn_k_neighbors.value_or(default_enn_k);
        cleaned = clean_enn(over.data, cfg, *enn_k, strategy);
    }

    ResampleOutcome out = std::move(over);
    out.method = method;
    out.parameters.strategy = strategy;
    out.parameters.enn_k_neighbors = enn_k;
    out.removed_indices = std::move(cleaned.removed_indices);
    out.warnings.insert(out.warnings.end(), cleaned.warnings.begin(), cleaned.warnings.end());
    finish_outcome(out, std::move(cleaned.data));
    return out;
}

} // namespace detail

/// SMOTE followed by Tomek-link cleaning of the oversampled data.
inline ResampleOutcome smote_tomek(const Dataset& ds, const SamplerConfig& cfg = {}) {
    return detail::hybrid(ds, cfg, Method::smote_tomek);
}

/// SMOTE followed by ENN cleaning of the oversampled data.
inline ResampleOutcome smote_enn(const Dataset& ds, const SamplerConfig& cfg = {}) {
    return detail::hybrid(ds, cfg, Method::smote_enn);
}

inline ResampleOutcome resample(const Dataset& ds, Method method, const SamplerConfig& cfg = {}) {
    switch (method) {
    case Method::random_undersample: return random_undersample(ds, cfg);
    case Method::tomek_links: return tomek_links(ds, cfg);
    case Method::enn: return enn(ds, cfg);
    case Method::random_oversample: return random_oversample(ds, cfg);
    case Method::smote: return smote(ds, cfg);
    case Method::adasyn: return adasyn(ds, cfg);
    case Method::smote_tomek: return smote_tomek(ds, cfg);
    case Method::smote_enn: return smote_enn(ds, cfg);
    }
    throw InvalidArgument("unknown resampling method");
}

} // namespace rebalance
