#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rebalance/dataset.hpp"
#include "rebalance/error.hpp"

namespace rebalance {

/// Counts of (actual, predicted) pairs for a binary problem.
struct ConfusionMatrix {
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tp = 0;

    std::uint64_t total() const { return tn + fp + fn + tp; }
    bool operator==(const ConfusionMatrix&) const = default;
};

/**
 * A metric value in [0, 1]. When the defining ratio has a zero denominator the
 * value is 0 and `degenerate` is set, so reports can tell "0 because nothing was
 * predicted" apart from a genuinely poor score.
 */
struct Score {
    double value = 0.0;
    bool degenerate = false;

    operator double() const { return value; }
};

namespace detail {

inline Score ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) {
        return {0.0, true};
    }
    return {static_cast<double>(num) / static_cast<double>(den), false};
}

inline void require_nonempty(const ConfusionMatrix& cm) {
    if (cm.total() == 0) {
        throw InvalidArgument("confusion matrix is empty");
    }
}

} // namespace detail

inline ConfusionMatrix confusion_matrix(std::span<const Label> truth, std::span<const Label> predicted) {
    if (truth.size() != predicted.size()) {
        throw InvalidArgument("truth and prediction lengths differ (" + std::to_string(truth.size()) + " vs " +
                              std::to_string(predicted.size()) + ")");
    }
    if (truth.empty()) {
        throw InvalidArgument("confusion matrix of empty vectors");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool actual = truth[i] == Label::positive;
        const bool guess = predicted[i] == Label::positive;
        if (actual) {
            (guess ? cm.tp : cm.fn) += 1;
        } else {
            (guess ? cm.fp : cm.tn) += 1;
        }
    }
    return cm;
}

inline double accuracy(const ConfusionMatrix& cm) {
    detail::require_nonempty(cm);
    return static_cast<double>(cm.tn + cm.tp) / static_cast<double>(cm.total());
}

inline Score precision(const ConfusionMatrix& cm) {
    detail::require_nonempty(cm);
    return detail::ratio(cm.tp, cm.tp + cm.fp);
}

/// Also called sensitivity or true positive rate.
inline Score recall(const ConfusionMatrix& cm) {
    detail::require_nonempty(cm);
    return detail::ratio(cm.tp, cm.tp + cm.fn);
}

/// True negative rate.
inline Score specificity(const ConfusionMatrix& cm) {
    detail::require_nonempty(cm);
    return detail::ratio(cm.tn, cm.tn + cm.fp);
}

/**
 * Weighted harmonic mean of precision and recall,
 * (1+b^2)PR / (b^2 P + R), evaluated in count form
 * (1+b^2)tp / ((1+b^2)tp + b^2 fn + fp) so it stays defined when P or R is 0/0.
 */
inline Score f_beta(const ConfusionMatrix& cm, double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw InvalidArgument("f_beta requires beta > 0");
    }
    detail::require_nonempty(cm);
    const double b2 = beta * beta;
    const double tp = static_cast<double>(cm.tp);
    const double den = (1.0 + b2) * tp + b2 * static_cast<double>(cm.fn) + static_cast<double>(cm.fp);
    const bool degenerate = precision(cm).degenerate || recall(cm).degenerate;
    if (den == 0.0) {
        return {0.0, true};
    }
    return {(1.0 + b2) * tp / den, degenerate};
}

inline Score f1(const ConfusionMatrix& cm) { return f_beta(cm, 1.0); }

/// sqrt(precision * recall).
inline Score g_measure(const ConfusionMatrix& cm) {
    const Score p = precision(cm);
    const Score r = recall(cm);
    return {std::sqrt(p.value * r.value), p.degenerate || r.degenerate};
}

/// sqrt(sensitivity * specificity), the G-mean most libraries report.
inline Score balanced_g_mean(const ConfusionMatrix& cm) {
    const Score sens = recall(cm);
    const Score spec = specificity(cm);
    return {std::sqrt(sens.value * spec.value), sens.degenerate || spec.degenerate};
}

// ---------------------------------------------------------------------------
// ROC

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    bool operator==(const RocPoint&) const = default;
};

/**
 * Step ROC curve. thresholds[i] is the score cut that produced points[i]
 * (predict positive iff score >= threshold); the (0,0) anchor uses +infinity.
 */
struct RocCurve {
    std::vector<RocPoint> points;
    std::vector<double> thresholds;
};

inline RocCurve roc_curve(std::span<const Label> truth, std::span<const double> scores) {
    if (truth.size() != scores.size()) {
        throw InvalidArgument("truth and score lengths differ");
    }
    const ClassCounts counts = count_labels(truth);
    if (counts.n_positive == 0 || counts.n_negative == 0) {
        throw InvalidArgument("ROC curve undefined: truth contains a single class");
    }
    for (double s : scores) {
        if (!std::isfinite(s)) {
            throw InvalidArgument("ROC curve requires finite scores");
        }
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    const double pos = static_cast<double>(counts.n_positive);
    const double neg = static_cast<double>(counts.n_negative);
    RocCurve curve;
    curve.points.push_back({0.0, 0.0});
    curve.thresholds.push_back(std::numeric_limits<double>::infinity());

    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        // Equal scores flip together.
        while (i < order.size() && scores[order[i]] == threshold) {
            (truth[order[i]] == Label::positive ? tp : fp) += 1;
            ++i;
        }
        curve.points.push_back({static_cast<double>(fp) / neg, static_cast<double>(tp) / pos});
        curve.thresholds.push_back(threshold);
    }
    return curve;
}

/// Trapezoidal area under the curve.
inline double auc(const RocCurve& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const RocPoint& a = curve.points[i - 1];
        const RocPoint& b = curve.points[i];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
    }
    return area;
}

// ---------------------------------------------------------------------------
// Reports

/// Every scalar metric for one evaluation, plus the curve when scores were given.
struct MetricBlock {
    ConfusionMatrix cm;
    double accuracy = 0.0;
    Score precision;
    Score recall;
    Score f1;
    Score g_measure;
    Score balanced_g_mean;
    std::optional<double> auc;
    std::optional<RocCurve> roc;

    /// Names of metrics whose value fell back to 0 on a zero denominator.
    std::vector<std::string> degenerate_metrics() const {
        std::vector<std::string> names;
        const std::pair<const char*, const Score*> all[] = {{"precision", &precision}, {"recall", &recall},
                                                            {"f1", &f1},               {"g_measure", &g_measure},
                                                            {"balanced_g_mean", &balanced_g_mean}};
        for (const auto& [name, score] : all) {
            if (score->degenerate) {
                names.emplace_back(name);
            }
        }
        return names;
    }
};

inline MetricBlock evaluate(const ConfusionMatrix& cm) {
    MetricBlock m;
    m.cm = cm;
    m.accuracy = accuracy(cm);
    m.precision = precision(cm);
    m.recall = recall(cm);
    m.f1 = f1(cm);
    m.g_measure = g_measure(cm);
    m.balanced_g_mean = balanced_g_mean(cm);
    return m;
}

inline MetricBlock evaluate(std::span<const Label> truth, std::span<const Label> predicted,
                            std::optional<std::span<const double>> scores = std::nullopt) {
    MetricBlock m = evaluate(confusion_matrix(truth, predicted));
    if (scores) {
        m.roc = roc_curve(truth, *scores);
        m.auc = auc(*m.roc);
    }
    return m;
}

} // namespace rebalance
