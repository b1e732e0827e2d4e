#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rebalance/rebalance.hpp"

namespace rebalance::cli {
namespace {

/// Error raised by a named pipeline stage; the stage prefixes the message.
class StageError : public Error {
public:
    StageError(const std::string& stage, const std::string& what) : Error(stage + ": " + what) {}
};

template <typename F>
auto stage(const std::string& name, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

struct LabelOptions {
    std::string column = "label";
    std::string positive = "1";
    std::string negative = "0";

    CsvLabelSpec spec() const { return {column, positive, negative}; }
};

void add_label_options(CLI::App* cmd, LabelOptions& opt) {
    cmd->add_option("--label", opt.column, "Name of the label column")->capture_default_str();
    cmd->add_option("--pos-value", opt.positive, "Label value of the positive (minority) class")
        ->capture_default_str();
    cmd->add_option("--neg-value", opt.negative, "Label value of the negative (majority) class")
        ->capture_default_str();
}

struct SamplerOptions {
    std::string method;
    std::optional<std::size_t> k;
    std::optional<std::size_t> enn_k;
    std::optional<std::string> strategy;
    std::uint64_t seed = 0;
    bool scale = false;

    SamplerConfig config(unsigned threads) const {
        SamplerConfig cfg;
        cfg.seed = seed;
        cfg.k_neighbors = k;
        cfg.enn_k_neighbors = enn_k;
        if (strategy) {
            cfg.strategy = parse_strategy(*strategy);
        }
        cfg.standardize_distances = scale;
        cfg.threads = threads;
        return cfg;
    }
};

std::vector<std::string> method_names() {
    std::vector<std::string> names;
    for (Method m : all_methods) {
        names.emplace_back(method_name(m));
    }
    return names;
}

void add_sampler_options(CLI::App* cmd, SamplerOptions& opt, bool required) {
    auto* m = cmd->add_option("--method", opt.method, "Resampling method")->check(CLI::IsMember(method_names()));
    if (required) {
        m->required();
    }
    cmd->add_option("--k", opt.k, "Neighbors for SMOTE/ADASYN (default 5) or ENN (default 3)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--enn-k", opt.enn_k, "Neighbors for the ENN stage of smote-enn (default 3)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--strategy", opt.strategy, "Cleaning strategy for tomek/enn: majority or auto")
        ->check(CLI::IsMember({"majority", "auto"}));
    cmd->add_flag("--scale", opt.scale, "Search neighbors on standardized features");
}

void write_report(const json& report, const std::optional<std::string>& path, std::ostream& out) {
    if (path) {
        write_json(report, *path);
    } else {
        out << report.dump(2) << '\n';
    }
}

void write_roc(const RocCurve& curve, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    write_roc_csv(curve, f);
}

json degenerate_warnings(const MetricBlock& m) {
    json w = json::array();
    for (const auto& name : m.degenerate_metrics()) {
        w.push_back(name + ": zero denominator, reported as 0");
    }
    return w;
}

json dataset_summary(const Dataset& ds) {
    const ClassCounts c = class_counts(ds);
    json j{{"rows", ds.rows()}, {"features", ds.features()}, {"counts", to_json(c)}};
    j["imbalance_ratio"] = c.n_positive > 0 ? json(imbalance_ratio(c)) : json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------
// Column access for eval, which does not require every column to be numeric.

struct CsvColumns {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t index(const std::string& name, const std::string& path) const {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == name) {
                return c;
            }
        }
        throw DataError(path + ": column '" + name + "' not found");
    }
};

CsvColumns read_columns(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    CsvColumns t;
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(path + ": missing header row");
    }
    for (auto f : detail::split_fields(line)) {
        t.header.emplace_back(f);
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        std::vector<std::string> row;
        for (auto f : detail::split_fields(line)) {
            row.emplace_back(f);
        }
        if (row.size() != t.header.size()) {
            throw DataError(path + ": line " + std::to_string(line_no) + " has the wrong number of fields");
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::vector<Label> label_column(const CsvColumns& t, const std::string& path, const LabelOptions& opt,
                                const std::string& column) {
    const std::size_t c = t.index(column, path);
    std::vector<Label> out;
    out.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const std::string& cell = t.rows[i][c];
        if (detail::label_matches(cell, opt.positive)) {
            out.push_back(Label::positive);
        } else if (detail::label_matches(cell, opt.negative)) {
            out.push_back(Label::negative);
        } else {
            throw DataError(path + ": line " + std::to_string(i + 2) + ": label '" + cell + "' is neither '" +
                            opt.positive + "' nor '" + opt.negative + "'");
        }
    }
    return out;
}

std::vector<double> score_column(const CsvColumns& t, const std::string& path, const std::string& column) {
    const std::size_t c = t.index(column, path);
    std::vector<double> out;
    out.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto v = detail::parse_double(t.rows[i][c]);
        if (!v || !std::isfinite(*v)) {
            throw DataError(path + ": line " + std::to_string(i + 2) + ", column '" + column + "': cannot parse '" +
                            t.rows[i][c] + "' as a finite number");
        }
        out.push_back(*v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// gen

struct GenOptions {
    GenSpec spec;
    std::string output;
};

void setup_gen(CLI::App& app, GenOptions& opt, std::function<void()>& action) {
    auto* cmd = app.add_subcommand("gen", "Generate a synthetic imbalanced dataset as CSV");
    cmd->add_option("--neg", opt.spec.n_negative, "Negative (majority) rows")->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--pos", opt.spec.n_positive, "Positive (minority) rows")->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--dims", opt.spec.dims, "Feature count")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--overlap", opt.spec.overlap, "Class overlap in [0, 1]")->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--subclusters", opt.spec.minority_subclusters, "Minority sub-clusters")
        ->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--seed", opt.spec.seed, "Random seed")->capture_default_str();
    cmd->add_option("-o,--output", opt.output, "Output CSV path")->required();
    cmd->callback([&] {
        action = [&] { write_csv(generate(opt.spec), opt.output); };
    });
}

// ---------------------------------------------------------------------------
// resample

struct ResampleOptions {
    std::string input;
    std::string output;
    std::optional<std::string> sidecar;
    LabelOptions labels;
    SamplerOptions sampler;
};

void setup_resample(CLI::App& app, ResampleOptions& opt, std::function<void()>& action) {
    auto* cmd = app.add_subcommand("resample", "Rebalance a CSV dataset with one of the sampling methods");
    cmd->add_option("-i,--input", opt.input, "Input CSV")->required();
    cmd->add_option("-o,--output", opt.output, "Output CSV")->required();
    cmd->add_option("--sidecar", opt.sidecar, "JSON sidecar path (default: <output>.json)");
    cmd->add_option("--seed", opt.sampler.seed, "Random seed")->capture_default_str();
    add_label_options(cmd, opt.labels);
    add_sampler_options(cmd, opt.sampler, true);
    cmd->callback([&] {
        action = [&] {
            const Dataset ds = stage("load", [&] { return load_csv(opt.input, opt.labels.spec()); });
            const Method method = *parse_method(opt.sampler.method);
            const ResampleOutcome outcome =
                stage("resample", [&] { return resample(ds, method, opt.sampler.config(threads_from_env())); });
            stage("write", [&] {
                write_csv(outcome.data, opt.output);
                write_json(to_json(outcome), opt.sidecar.value_or(opt.output + ".json"));
                return 0;
            });
        };
    });
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
    std::string truth;
    std::optional<std::string> predictions;
    LabelOptions labels;
    std::optional<std::string> pred_column;
    std::optional<std::string> score_column;
    double threshold = 0.5;
    std::optional<std::string> output;
    std::optional<std::string> roc_csv;
};

void setup_eval(CLI::App& app, EvalOptions& opt, std::function<void()>& action, std::ostream& out) {
    auto* cmd = app.add_subcommand("eval", "Compute the metric report from truth labels and predictions/scores");
    cmd->add_option("--truth", opt.truth, "CSV holding the true labels")->required();
    cmd->add_option("--predictions", opt.predictions, "CSV holding predictions/scores (default: the truth file)");
    add_label_options(cmd, opt.labels);
    cmd->add_option("--pred-column", opt.pred_column, "Column of predicted labels (same values as --label)");
    cmd->add_option("--score-column", opt.score_column, "Column of positive-class scores");
    cmd->add_option("--threshold", opt.threshold, "Score threshold when no prediction column is given")
        ->capture_default_str()->check(CLI::Range(0.0, 1.0));
    cmd->add_option("-o,--output", opt.output, "Report JSON path (default: stdout)");
    cmd->add_option("--roc-csv", opt.roc_csv, "Write ROC points as CSV");
    cmd->callback([&] {
        if (!opt.pred_column && !opt.score_column) {
            throw CLI::ValidationError("eval", "one of --pred-column or --score-column is required");
        }
        if (opt.roc_csv && !opt.score_column) {
            throw CLI::ValidationError("eval", "--roc-csv requires --score-column");
        }
        action = [&] {
            const CsvColumns truth_table = read_columns(opt.truth);
            const std::string pred_path = opt.predictions.value_or(opt.truth);
            const CsvColumns pred_table = opt.predictions ? read_columns(pred_path) : truth_table;
            const std::vector<Label> truth = label_column(truth_table, opt.truth, opt.labels, opt.labels.column);
            if (pred_table.rows.size() != truth.size()) {
                throw DataError("prediction file has " + std::to_string(pred_table.rows.size()) +
                                " rows, truth has " + std::to_string(truth.size()));
            }
            std::optional<std::vector<double>> scores;
            if (opt.score_column) {
                scores = score_column(pred_table, pred_path, *opt.score_column);
            }
            std::vector<Label> predicted;
            if (opt.pred_column) {
                predicted = label_column(pred_table, pred_path, opt.labels, *opt.pred_column);
            } else {
                if (!(opt.threshold > 0.0 && opt.threshold < 1.0)) {
                    throw InvalidArgument("threshold must lie strictly between 0 and 1");
                }
                for (double s : *scores) {
                    predicted.push_back(s >= opt.threshold ? Label::positive : Label::negative);
                }
            }
            std::optional<std::span<const double>> score_view;
            if (scores) {
                score_view = std::span<const double>(*scores);
            }
            const MetricBlock m = evaluate(truth, predicted, score_view);

            json report{{"schema_version", report_schema_version}, {"command", "eval"}};
            report["truth"] = json{{"rows", truth.size()}, {"counts", to_json(count_labels(truth))}};
            report["threshold"] = opt.pred_column ? json(nullptr) : json(opt.threshold);
            report["metrics"] = metrics_json(m);
            report["roc"] = m.roc ? roc_json(*m.roc) : json(nullptr);
            report["warnings"] = degenerate_warnings(m);
            if (opt.roc_csv) {
                write_roc(*m.roc, *opt.roc_csv);
            }
            write_report(report, opt.output, out);
        };
    });
}

// ---------------------------------------------------------------------------
// pipeline

struct PipelineOptions {
    std::string input;
    LabelOptions labels;
    double test_fraction = 0.3;
    std::uint64_t seed = 0;
    bool stratified = false;
    SamplerOptions sampler;
    std::optional<std::uint64_t> resample_seed;
    bool resample_full = false;
    TrainConfig train;
    bool no_standardize = false;
    double threshold = 0.5;
    std::optional<std::string> output;
    std::optional<std::string> roc_csv;
    std::optional<std::string> model_out;
};

void run_pipeline(const PipelineOptions& opt, std::ostream& out) {
    const unsigned threads = threads_from_env();
    const Dataset ds = stage("load", [&] { return load_csv(opt.input, opt.labels.spec()); });

    json report{{"schema_version", report_schema_version}, {"command", "pipeline"}};
    report["dataset"] = dataset_summary(ds);
    json warnings = json::array();

    std::optional<Method> method;
    if (!opt.sampler.method.empty()) {
        method = parse_method(opt.sampler.method);
    }
    SamplerOptions sampler = opt.sampler;
    sampler.seed = opt.resample_seed.value_or(opt.seed);

    auto do_resample = [&](const Dataset& data, const char* mode) {
        const ResampleOutcome outcome =
            stage("resample", [&] { return resample(data, *method, sampler.config(threads)); });
        json r = to_json(outcome);
        r.erase("schema_version");
        r.erase("removed_indices");
        r["mode"] = mode;
        report["resampling"] = r;
        for (const auto& w : outcome.warnings) {
            warnings.push_back(w);
        }
        return outcome.data;
    };

    const SplitSpec split_spec{opt.test_fraction, opt.seed, opt.stratified};
    Dataset train;
    Dataset test;
    if (method && opt.resample_full) {
        // Resample everything, then split.
        const Dataset resampled = do_resample(ds, "full");
        auto parts = stage("split", [&] { return split(resampled, split_spec); });
        train = std::move(parts.train);
        test = std::move(parts.test);
    } else {
        auto parts = stage("split", [&] { return split(ds, split_spec); });
        train = std::move(parts.train);
        test = std::move(parts.test);
        if (method) {
            train = do_resample(train, "train");
        } else {
            report["resampling"] = nullptr;
        }
    }
    report["split"] = json{{"test_fraction", opt.test_fraction},
                           {"seed", opt.seed},
                           {"stratified", opt.stratified},
                           {"train_rows", train.rows()},
                           {"test_rows", test.rows()},
                           {"train_counts", to_json(class_counts(train))},
                           {"test_counts", to_json(class_counts(test))}};

    TrainConfig train_cfg = opt.train;
    train_cfg.standardize = !opt.no_standardize;
    const LogisticModel model = stage("fit", [&] { return fit(train, train_cfg); });
    if (!model.meta.converged) {
        warnings.push_back("fit: stopped at max_iterations before reaching tolerance");
    }

    const MetricBlock m = stage("evaluate", [&] {
        const auto scores = predict_proba(model, test.view());
        const auto predicted = predict(model, test.view(), opt.threshold);
        return evaluate(test.labels(), predicted, std::span<const double>(scores));
    });
    report["model"] = to_json(model);
    report["threshold"] = opt.threshold;
    report["metrics"] = metrics_json(m);
    report["roc"] = roc_json(*m.roc);
    for (const auto& w : degenerate_warnings(m)) {
        warnings.push_back(w);
    }
    report["warnings"] = warnings;

    stage("report", [&] {
        if (opt.model_out) {
            write_json(to_json(model), *opt.model_out);
        }
        if (opt.roc_csv) {
            write_roc(*m.roc, *opt.roc_csv);
        }
        write_report(report, opt.output, out);
        return 0;
    });
}

void setup_pipeline(CLI::App& app, PipelineOptions& opt, std::function<void()>& action, std::ostream& out) {
    auto* cmd = app.add_subcommand("pipeline", "Load, split, optionally resample the training part, fit, evaluate");
    cmd->add_option("-i,--input", opt.input, "Input CSV")->required();
    add_label_options(cmd, opt.labels);
    cmd->add_option("--split", opt.test_fraction, "Test fraction")->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--seed", opt.seed, "Split seed (also the resampling seed unless --resample-seed)")
        ->capture_default_str();
    cmd->add_flag("--stratified", opt.stratified, "Stratify the split by class");
    add_sampler_options(cmd, opt.sampler, false);
    cmd->add_option("--resample-seed", opt.resample_seed, "Resampling seed");
    cmd->add_flag("--resample-full", opt.resample_full, "Resample the whole dataset before splitting");
    cmd->add_option("--lr", opt.train.learning_rate, "Learning rate")->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-iter", opt.train.max_iterations, "Maximum gradient steps")->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--l2", opt.train.l2_penalty, "L2 penalty")->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--tol", opt.train.tolerance, "Loss-change tolerance")->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--no-standardize", opt.no_standardize, "Train on raw features");
    cmd->add_option("--threshold", opt.threshold, "Decision threshold")->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("-o,--output", opt.output, "Report JSON path (default: stdout)");
    cmd->add_option("--roc-csv", opt.roc_csv, "Write ROC points as CSV");
    cmd->add_option("--model-out", opt.model_out, "Write the fitted model as JSON");
    cmd->callback([&] {
        if (opt.resample_full && opt.sampler.method.empty()) {
            throw CLI::ValidationError("--resample-full", "requires --method");
        }
        action = [&] { run_pipeline(opt, out); };
    });
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Class-imbalance toolkit: synthetic data, resampling, logistic baseline, metrics", "rebalance"};
    app.require_subcommand(1);

    std::function<void()> action;
    GenOptions gen;
    ResampleOptions res;
    EvalOptions ev;
    PipelineOptions pipe;
    setup_gen(app, gen, action);
    setup_resample(app, res, action);
    setup_eval(app, ev, action, out);
    setup_pipeline(app, pipe, action, out);

    // CLI11 expects arguments in reverse order.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        if (e.get_exit_code() == 0) {
            return exit_ok;
        }
        err << "run with --help for usage\n";
        return exit_usage_error;
    }

    try {
        if (action) {
            action();
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime_error;
    }
    return exit_ok;
}

} // namespace rebalance::cli
