#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rebalance/dataset.hpp"
#include "rebalance/error.hpp"

namespace rebalance {

struct TrainConfig {
    double learning_rate = 0.1;
    std::size_t max_iterations = 1000;
    /// Weight of 0.5 * ||w||^2 against the summed log-loss; the intercept is never penalized.
    double l2_penalty = 1.0;
    /// Stop once the loss changes by less than this between iterations.
    double tolerance = 1e-6;
    bool standardize = true;
};

struct TrainingMeta {
    std::size_t iterations = 0;
    double final_loss = 0.0;
    bool converged = false;
    /// Objective before each update, then the final value.
    std::vector<double> loss_history;
};

/**
 * Binary logistic model on raw features. When training standardized the data,
 * the scaling is already folded into `weights`/`intercept`; `scaling` is kept
 * only for inspection and serialization.
 */
struct LogisticModel {
    std::vector<double> weights;
    double intercept = 0.0;
    std::optional<FeatureScaling> scaling;
    TrainingMeta meta;
};

inline double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

struct LossGradient {
    double loss = 0.0;
    std::vector<double> weight_gradient;
    double intercept_gradient = 0.0;
};

/**
 * Regularized objective and its gradient:
 *   L(w, b) = (1/n) sum_i [softplus(z_i) - y_i z_i] + (l2 / 2n) ||w||^2,  z_i = w.x_i + b
 */
inline LossGradient logistic_loss(MatrixView x, std::span<const Label> y, std::span<const double> w, double b,
                                  double l2_penalty) {
    const std::size_t n = x.rows();
    if (y.size() != n || w.size() != x.cols) {
        throw InvalidArgument("logistic_loss: shape mismatch");
    }
    if (n == 0) {
        throw InvalidArgument("logistic_loss: no rows");
    }
    LossGradient out;
    out.weight_gradient.assign(w.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = x.row(i);
        double z = b;
        for (std::size_t j = 0; j < r.size(); ++j) {
            z += w[j] * r[j];
        }
        const double target = y[i] == Label::positive ? 1.0 : 0.0;
        out.loss += softplus(z) - target * z;
        const double residual = sigmoid(z) - target;
        for (std::size_t j = 0; j < r.size(); ++j) {
            out.weight_gradient[j] += residual * r[j];
        }
        out.intercept_gradient += residual;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    double norm2 = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        norm2 += w[j] * w[j];
        out.weight_gradient[j] = out.weight_gradient[j] * inv_n + l2_penalty * inv_n * w[j];
    }
    out.loss = out.loss * inv_n + 0.5 * l2_penalty * inv_n * norm2;
    out.intercept_gradient *= inv_n;
    return out;
}

/// Full-batch gradient descent from zero weights.
inline LogisticModel fit(const Dataset& train, const TrainConfig& cfg = {}) {
    if (!(cfg.learning_rate > 0.0) || cfg.max_iterations == 0 || cfg.l2_penalty < 0.0 || !(cfg.tolerance > 0.0)) {
        throw InvalidArgument("invalid training configuration");
    }
    const ClassCounts counts = class_counts(train);
    if (counts.n_negative == 0 || counts.n_positive == 0) {
        throw InvalidArgument("training data must contain both classes");
    }

    std::optional<FeatureScaling> scaling;
    std::vector<double> scaled;
    MatrixView x = train.view();
    if (cfg.standardize) {
        scaling = FeatureScaling::fit(x);
        scaled = scaling->apply(x);
        x = MatrixView{scaled, train.features()};
    }

    std::vector<double> w(train.features(), 0.0);
    double b = 0.0;
    TrainingMeta meta;
    LossGradient lg = logistic_loss(x, train.labels(), w, b, cfg.l2_penalty);
    meta.loss_history.push_back(lg.loss);
    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
        for (std::size_t j = 0; j < w.size(); ++j) {
            w[j] -= cfg.learning_rate * lg.weight_gradient[j];
        }
        b -= cfg.learning_rate * lg.intercept_gradient;
        const double previous = lg.loss;
        lg = logistic_loss(x, train.labels(), w, b, cfg.l2_penalty);
        meta.iterations = it + 1;
        meta.loss_history.push_back(lg.loss);
        if (!std::isfinite(lg.loss)) {
            throw TrainingError("loss diverged at iteration " + std::to_string(it + 1));
        }
        if (std::abs(previous - lg.loss) < cfg.tolerance) {
            meta.converged = true;
            break;
        }
    }
    meta.final_loss = lg.loss;

    LogisticModel model;
    model.meta = std::move(meta);
    model.scaling = scaling;
    if (scaling) {
        // w.(x - m)/s + b  ==  (w/s).x + (b - sum w m / s)
        model.weights.resize(w.size());
        model.intercept = b;
        for (std::size_t j = 0; j < w.size(); ++j) {
            model.weights[j] = w[j] / scaling->scale[j];
            model.intercept -= w[j] * scaling->mean[j] / scaling->scale[j];
        }
    } else {
        model.weights = std::move(w);
        model.intercept = b;
    }
    return model;
}

inline std::vector<double> predict_proba(const LogisticModel& model, MatrixView x) {
    if (x.cols != model.weights.size()) {
        throw InvalidArgument("model expects " + std::to_string(model.weights.size()) + " features, got " +
                              std::to_string(x.cols));
    }
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto r = x.row(i);
        double z = model.intercept;
        for (std::size_t j = 0; j < r.size(); ++j) {
            z += model.weights[j] * r[j];
        }
        out[i] = sigmoid(z);
    }
    return out;
}

/// Positive iff predicted probability >= threshold.
inline std::vector<Label> predict(const LogisticModel& model, MatrixView x, double threshold = 0.5) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw InvalidArgument("threshold must lie strictly between 0 and 1");
    }
    const auto proba = predict_proba(model, x);
    std::vector<Label> out(proba.size());
    for (std::size_t i = 0; i < proba.size(); ++i) {
        out[i] = proba[i] >= threshold ? Label::positive : Label::negative;
    }
    return out;
}

} // namespace rebalance
