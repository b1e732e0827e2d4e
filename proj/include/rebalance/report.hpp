#pragma once

#include <fstream>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <json.hpp>

#include "rebalance/dataset.hpp"
#include "rebalance/error.hpp"
#include "rebalance/metrics.hpp"
#include "rebalance/model.hpp"
#include "rebalance/resample.hpp"

namespace rebalance {

inline constexpr int report_schema_version = 1;

using json = nlohmann::ordered_json;

inline json to_json(const ClassCounts& c) { return json{{"negative", c.n_negative}, {"positive", c.n_positive}}; }

inline json to_json(const ConfusionMatrix& cm) {
    return json{{"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}, {"tp", cm.tp}};
}

/// Flat metric object: scalar metrics, auc (null without scores), and the four matrix cells.
inline json metrics_json(const MetricBlock& m) {
    json j{{"accuracy", m.accuracy},
           {"precision", m.precision.value},
           {"recall", m.recall.value},
           {"f1", m.f1.value},
           {"g_measure", m.g_measure.value},
           {"balanced_g_mean", m.balanced_g_mean.value}};
    j["auc"] = m.auc ? json(*m.auc) : json(nullptr);
    j["tn"] = m.cm.tn;
    j["fp"] = m.cm.fp;
    j["fn"] = m.cm.fn;
    j["tp"] = m.cm.tp;
    return j;
}

/// Column-wise curve; the +inf anchor threshold is written as null.
inline json roc_json(const RocCurve& curve) {
    json fpr = json::array();
    json tpr = json::array();
    json thr = json::array();
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        fpr.push_back(curve.points[i].fpr);
        tpr.push_back(curve.points[i].tpr);
        thr.push_back(std::isfinite(curve.thresholds[i]) ? json(curve.thresholds[i]) : json(nullptr));
    }
    return json{{"fpr", fpr}, {"tpr", tpr}, {"thresholds", thr}};
}

inline void write_roc_csv(const RocCurve& curve, std::ostream& out) {
    out << "fpr,tpr,threshold\n";
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        out << format_double(curve.points[i].fpr) << ',' << format_double(curve.points[i].tpr) << ','
            << (std::isfinite(curve.thresholds[i]) ? format_double(curve.thresholds[i]) : std::string("inf")) << '\n';
    }
}

inline json to_json(const ResolvedParameters& p) {
    json j{{"seed", p.seed}};
    if (p.k_neighbors) {
        j["k_neighbors"] = *p.k_neighbors;
    }
    if (p.enn_k_neighbors) {
        j["enn_k_neighbors"] = *p.enn_k_neighbors;
    }
    if (p.strategy) {
        j["strategy"] = std::string(strategy_name(*p.strategy));
    }
    j["standardize_distances"] = p.standardize_distances;
    return j;
}

/// Sidecar describing a resampling run; the rows themselves go to CSV.
inline json to_json(const ResampleOutcome& out) {
    return json{{"schema_version", report_schema_version},
                {"method", std::string(method_name(out.method))},
                {"parameters", to_json(out.parameters)},
                {"before", to_json(out.before)},
                {"after", to_json(out.after)},
                {"removed_count", out.removed_indices.size()},
                {"removed_indices", out.removed_indices},
                {"synthetic_count", out.synthetic_count},
                {"warnings", out.warnings}};
}

inline json to_json(const LogisticModel& m) {
    json j{{"weights", m.weights}, {"intercept", m.intercept}};
    if (m.scaling) {
        j["standardization"] = json{{"mean", m.scaling->mean}, {"scale", m.scaling->scale}};
    } else {
        j["standardization"] = nullptr;
    }
    j["training"] = json{{"iterations", m.meta.iterations},
                         {"final_loss", m.meta.final_loss},
                         {"converged", m.meta.converged}};
    return j;
}

inline void write_json(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

} // namespace rebalance
