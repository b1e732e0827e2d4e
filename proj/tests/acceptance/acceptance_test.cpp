// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "../oracles.hpp"
#include "cli.hpp"
#include "rebalance/rebalance.hpp"

using namespace rebalance;

namespace {

// Pinned tolerances.
constexpr double paper_anchor_tol = 0.005;
constexpr double accuracy_display_tol = 0.005;
constexpr double auc_exact_tol = 1e-12;
constexpr double auc_tied_tol = 1e-9;
constexpr double gradient_tol = 1e-5;
constexpr double fd_step = 1e-6;
constexpr double baseline_accuracy_tol = 0.01;
constexpr double recovered_recall_min = 0.4;
constexpr double collapsed_accuracy_max = 0.75;
constexpr double box_slack = 1e-12;

/// Collects failure notes for one criterion.
class Check {
public:
    void expect(bool ok, const std::string& what) {
        ++checks_;
        if (!ok) {
            if (failures_.size() < 5) {
                failures_.push_back(what);
            }
            ++failed_;
        }
    }
    void note(const std::string& text) { notes_.push_back(text); }
    bool ok() const { return failed_ == 0; }

    bool report(int id, const std::string& title, double seconds) const {
        std::ostringstream line;
        line << (ok() ? "PASS" : "FAIL") << "  criterion " << id << ": " << title << " (" << checks_ << " checks";
        if (failed_ > 0) {
            line << ", " << failed_ << " failed";
        }
        line << ", " << std::fixed;
        line.precision(2);
        line << seconds << " s)";
        std::cout << line.str() << '\n';
        for (const auto& n : notes_) {
            std::cout << "      " << n << '\n';
        }
        for (const auto& f : failures_) {
            std::cout << "      failed: " << f << '\n';
        }
        return ok();
    }

private:
    std::size_t checks_ = 0;
    std::size_t failed_ = 0;
    std::vector<std::string> failures_;
    std::vector<std::string> notes_;
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// ---------------------------------------------------------------------------

Check metric_fixtures() {
    Check c;
    const ConfusionMatrix all_negative{172085, 0, 6479, 0};
    c.expect(near(accuracy(all_negative), 0.96, accuracy_display_tol),
             "accuracy " + fmt(accuracy(all_negative)) + " does not display as 0.96");
    c.expect(near(accuracy(all_negative), 0.9637, 5e-5), "accuracy " + fmt(accuracy(all_negative)) + " != 0.9637");
    for (const auto& [name, v] : {std::pair{"precision", precision(all_negative).value},
                                  std::pair{"recall", recall(all_negative).value},
                                  std::pair{"f1", f1(all_negative).value},
                                  std::pair{"g_measure", g_measure(all_negative).value}}) {
        c.expect(v == 0.0, std::string(name) + " = " + fmt(v) + ", expected 0");
    }
    const ConfusionMatrix undersampled{4115, 2402, 2878, 3622};
    c.expect(near(f1(undersampled), 0.58, paper_anchor_tol), "F1 " + fmt(f1(undersampled)));
    c.expect(near(balanced_g_mean(undersampled), 0.59, paper_anchor_tol),
             "balanced G-mean " + fmt(balanced_g_mean(undersampled)));
    c.note("all-negative accuracy " + fmt(accuracy(all_negative)) + ", undersampled F1 " + fmt(f1(undersampled)) +
           ", balanced G-mean " + fmt(balanced_g_mean(undersampled)));
    return c;
}

// ---------------------------------------------------------------------------

Check count_invariants() {
    Check c;
    std::mt19937_64 gen(2024);
    std::uniform_int_distribution<std::size_t> size(40, 2000);
    std::uniform_int_distribution<std::size_t> dims(1, 5);
    for (int trial = 0; trial < 50; ++trial) {
        const Dataset ds = oracle::random_imbalanced(gen, size(gen), dims(gen), 8);
        const ClassCounts before = class_counts(ds);
        const std::size_t n_min = before.n_positive;
        const std::string tag = "dataset " + std::to_string(trial) + ": ";
        const SamplerConfig cfg{.seed = static_cast<std::uint64_t>(trial)};

        for (Method m : {Method::random_undersample, Method::random_oversample, Method::smote}) {
            const ClassCounts after = resample(ds, m, cfg).after;
            c.expect(after.n_negative == after.n_positive, tag + std::string(method_name(m)) + " not balanced");
        }
        c.expect(resample(ds, Method::random_undersample, cfg).after.n_positive == n_min, tag + "rus changed minority");
        c.expect(resample(ds, Method::random_oversample, cfg).after.n_negative == before.n_negative,
                 tag + "ros changed majority");
        c.expect(resample(ds, Method::smote, cfg).after.n_negative == before.n_negative,
                 tag + "smote changed majority");

        for (Method m : {Method::tomek_links, Method::enn}) {
            const ResampleOutcome o = resample(ds, m, cfg);
            c.expect(o.after.n_positive == n_min, tag + std::string(method_name(m)) + " changed minority");
            c.expect(o.after.n_negative <= before.n_negative, tag + std::string(method_name(m)) + " grew majority");
        }

        const ResampleOutcome a = resample(ds, Method::adasyn, cfg);
        const long long gap = static_cast<long long>(a.after.n_positive) - static_cast<long long>(a.after.n_negative);
        c.expect(static_cast<std::size_t>(std::llabs(gap)) <= n_min,
                 tag + "adasyn imbalance " + std::to_string(gap) + " exceeds n_min " + std::to_string(n_min));
        c.expect(a.after.n_negative == before.n_negative, tag + "adasyn changed majority");
    }
    return c;
}

// ---------------------------------------------------------------------------

Check oracle_equivalence() {
    Check c;
    std::mt19937_64 gen(31337);
    std::uniform_int_distribution<std::size_t> small(4, 100);
    std::uniform_int_distribution<std::size_t> dims(1, 4);
    std::uniform_real_distribution<double> rate(0.1, 0.5);
    for (int trial = 0; trial < 25; ++trial) {
        const Dataset ds = oracle::random_dataset(gen, small(gen), dims(gen), rate(gen), trial % 2 ? 2 : 0);
        const auto expected = oracle::tomek_links(ds);
        std::set<std::pair<std::size_t, std::size_t>> got;
        for (const auto& [i, j] : find_tomek_links(ds.view(), ds.labels(), 2)) {
            got.emplace(i, j);
            got.emplace(j, i);
        }
        c.expect(got == expected, "tomek links differ on dataset " + std::to_string(trial));
    }

    std::uniform_int_distribution<std::size_t> medium(12, 200);
    for (int trial = 0; trial < 30; ++trial) {
        const Dataset ds = oracle::random_dataset(gen, medium(gen), dims(gen), rate(gen), trial % 3 == 0 ? 2 : 0);
        const ClassCounts counts = class_counts(ds);
        const Label majority = class_roles(counts).majority;
        for (std::size_t k : {1u, 3u, 5u}) {
            for (CleaningStrategy s : {CleaningStrategy::majority, CleaningStrategy::all}) {
                const SamplerConfig cfg{.k_neighbors = k, .strategy = s};
                const auto got = enn(ds, cfg).removed_indices;
                const auto expected = oracle::enn_removed(ds, k, s == CleaningStrategy::majority, majority);
                c.expect(got == expected, "enn removals differ on dataset " + std::to_string(trial) + ", k=" +
                                              std::to_string(k) + ", strategy " + std::string(strategy_name(s)));
            }
        }
    }

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const bool tied = trial >= 100;
        const std::size_t n = 10 + static_cast<std::size_t>(trial % 100) * 3;
        std::vector<Label> truth(n);
        std::vector<double> scores(n);
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = unit(gen) < 0.35 ? Label::positive : Label::negative;
            scores[i] = tied ? std::round(unit(gen) * 8) / 8 : unit(gen);
        }
        truth[0] = Label::negative;
        truth[n - 1] = Label::positive;
        const double trapezoid = auc(roc_curve(truth, scores));
        const double pairs = oracle::pair_count_auc(truth, scores);
        c.expect(near(trapezoid, pairs, tied ? auc_tied_tol : auc_exact_tol),
                 std::string(tied ? "tied" : "tie-free") + " vector " + std::to_string(trial) + ": " + fmt(trapezoid) +
                     " vs " + fmt(pairs));
    }
    return c;
}

// ---------------------------------------------------------------------------

Check synthetic_geometry() {
    Check c;
    std::mt19937_64 gen(99);
    std::uniform_int_distribution<std::size_t> size(60, 600);
    std::uniform_int_distribution<std::size_t> dims(1, 6);
    std::size_t total = 0;
    for (int run = 0; run < 20; ++run) {
        const Dataset ds = oracle::random_imbalanced(gen, size(gen), dims(gen), 8);
        for (Method m : {Method::smote, Method::adasyn}) {
            const ResampleOutcome o = resample(ds, m, {.seed = static_cast<std::uint64_t>(run)});
            c.expect(o.origins.size() == o.synthetic_count, "origin count mismatch");
            const std::size_t first = ds.rows();
            c.expect(o.data.rows() == first + o.synthetic_count, "synthetic rows are not appended");
            for (std::size_t s = 0; s < o.synthetic_count; ++s) {
                const SyntheticOrigin& org = o.origins[s];
                const auto x = o.data.row(first + s);
                const auto a = ds.row(org.base);
                const auto b = ds.row(org.neighbor);
                bool inside = ds.label(org.base) == Label::positive && ds.label(org.neighbor) == Label::positive &&
                              o.data.label(first + s) == Label::positive;
                for (std::size_t d = 0; d < ds.features(); ++d) {
                    const double lo = std::min(a[d], b[d]) - box_slack;
                    const double hi = std::max(a[d], b[d]) + box_slack;
                    inside = inside && x[d] >= lo && x[d] <= hi;
                }
                c.expect(inside, std::string(method_name(m)) + " run " + std::to_string(run) + " sample " +
                                     std::to_string(s) + " leaves its bounding box");
                ++total;
            }
        }
    }
    c.note(std::to_string(total) + " synthetic samples checked");
    return c;
}

// ---------------------------------------------------------------------------

Check synthetic_reproduction() {
    Check c;
    // IR 26 over 30000 rows.
    const std::size_t n = 30000;
    const std::size_t n_pos = n / 27;
    const GenSpec spec{.n_negative = n - n_pos, .n_positive = n_pos, .dims = 2, .overlap = 0.8, .seed = 0};
    const Dataset ds = generate(spec);
    const auto parts = split(ds, {.test_fraction = 0.3, .seed = 0});

    auto score = [&](const Dataset& train) {
        const LogisticModel m = fit(train);
        return confusion_matrix(parts.test.labels(), predict(m, parts.test.view()));
    };
    const ConfusionMatrix base = score(parts.train);
    const double ir = imbalance_ratio(ds);
    const double target = ir / (ir + 1.0);
    c.expect(recall(base).value == 0.0, "baseline recall " + fmt(recall(base)) + " (tp=" + std::to_string(base.tp) +
                                            ", fn=" + std::to_string(base.fn) + "), expected 0");
    c.expect(near(accuracy(base), target, baseline_accuracy_tol),
             "baseline accuracy " + fmt(accuracy(base)) + " vs " + fmt(target));

    const Dataset balanced = random_oversample(parts.train, {.seed = 0}).data;
    const ConfusionMatrix after = score(balanced);
    c.expect(recall(after) >= recovered_recall_min, "oversampled recall " + fmt(recall(after)));
    c.expect(accuracy(after) < collapsed_accuracy_max, "oversampled accuracy " + fmt(accuracy(after)));

    c.note("IR " + fmt(ir) + "; baseline accuracy " + fmt(accuracy(base)) + ", recall " + fmt(recall(base)) +
           " (tp=" + std::to_string(base.tp) + "); after oversampling accuracy " + fmt(accuracy(after)) + ", recall " +
           fmt(recall(after)));
    return c;
}

// ---------------------------------------------------------------------------

Check gradient_check() {
    Check c;
    std::mt19937_64 gen(6);
    std::uniform_int_distribution<std::size_t> rows(2, 50);
    std::uniform_int_distribution<std::size_t> dims(1, 8);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> l2(0.0, 2.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Dataset ds = oracle::random_dataset(gen, rows(gen), dims(gen), 0.4);
        const double penalty = l2(gen);
        std::vector<double> theta(ds.features() + 1);
        for (double& t : theta) {
            t = normal(gen);
        }
        const auto objective = [&](const std::vector<double>& p) {
            return logistic_loss(ds.view(), ds.labels(), std::span<const double>(p.data(), ds.features()), p.back(),
                                 penalty)
                .loss;
        };
        const auto numeric = oracle::central_difference(objective, theta, fd_step);
        const auto analytic = logistic_loss(ds.view(), ds.labels(),
                                            std::span<const double>(theta.data(), ds.features()), theta.back(), penalty);
        double diff = std::abs(analytic.intercept_gradient - numeric.back());
        for (std::size_t j = 0; j < ds.features(); ++j) {
            diff = std::max(diff, std::abs(analytic.weight_gradient[j] - numeric[j]));
        }
        worst = std::max(worst, diff);
        c.expect(diff < gradient_tol, "instance " + std::to_string(trial) + " max difference " + fmt(diff));
    }
    c.note("max abs difference " + fmt(worst));
    return c;
}

// ---------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

bool same_outcome(const ResampleOutcome& a, const ResampleOutcome& b) {
    if (!(a.data == b.data) || a.removed_indices != b.removed_indices || a.origins.size() != b.origins.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.origins.size(); ++i) {
        if (a.origins[i].base != b.origins[i].base || a.origins[i].neighbor != b.origins[i].neighbor ||
            a.origins[i].gap != b.origins[i].gap) {
            return false;
        }
    }
    return true;
}

Check determinism() {
    Check c;
    std::mt19937_64 gen(5);
    const Dataset ds = oracle::random_imbalanced(gen, 700, 3, 40);
    for (Method m : all_methods) {
        const auto serial = resample(ds, m, {.seed = 11, .threads = 1});
        const auto first = resample(ds, m, {.seed = 11, .threads = 4});
        const auto second = resample(ds, m, {.seed = 11, .threads = 4});
        c.expect(same_outcome(first, second), std::string(method_name(m)) + " differs between runs");
        c.expect(same_outcome(serial, first), std::string(method_name(m)) + " depends on thread count");
    }
    const auto s1 = split(ds, {.seed = 3, .stratified = true});
    const auto s2 = split(ds, {.seed = 3, .stratified = true});
    c.expect(s1.train_indices == s2.train_indices && s1.test_indices == s2.test_indices, "split differs");
    const LogisticModel m1 = fit(s1.train);
    const LogisticModel m2 = fit(s2.train);
    c.expect(m1.weights == m2.weights && m1.intercept == m2.intercept, "fit differs");

    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "rebalance_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string data = (dir / "data.csv").string();
    std::ostringstream sink;
    c.expect(cli::run({"gen", "--neg", "1500", "--pos", "120", "--overlap", "0.6", "--subclusters", "2", "--seed", "8",
                       "-o", data},
                      sink, sink) == 0,
             "gen failed");

    auto run_all = [&](const std::string& tag, const char* threads) {
        setenv("REBALANCE_THREADS", threads, 1);
        std::vector<std::string> files;
        auto out = [&](const std::string& name) {
            files.push_back((dir / (tag + "_" + name)).string());
            return files.back();
        };
        int rc = cli::run({"gen", "--seed", "8", "--overlap", "0.3", "-o", out("gen.csv")}, sink, sink);
        for (Method m : all_methods) {
            const std::string name(method_name(m));
            rc |= cli::run({"resample", "-i", data, "-o", out(name + ".csv"), "--sidecar", out(name + ".json"),
                            "--method", name, "--seed", "4"},
                           sink, sink);
        }
        rc |= cli::run({"pipeline", "-i", data, "--method", "smote-enn", "--stratified", "-o", out("pipe.json"),
                        "--roc-csv", out("pipe.roc"), "--model-out", out("pipe.model")},
                       sink, sink);
        rc |= cli::run({"eval", "--truth", data, "--score-column", "f0", "-o", out("eval.json")}, sink, sink);
        c.expect(rc == 0, "a CLI command failed in " + tag);
        return files;
    };
    const auto a = run_all("a", "4");
    const auto b = run_all("b", "4");
    const auto serial = run_all("serial", "1");
    unsetenv("REBALANCE_THREADS");
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string bytes = slurp(a[i]);
        c.expect(!bytes.empty(), a[i] + " is empty");
        c.expect(bytes == slurp(b[i]), fs::path(a[i]).filename().string() + " differs between runs");
        c.expect(bytes == slurp(serial[i]), fs::path(a[i]).filename().string() + " depends on thread count");
    }
    c.note(std::to_string(a.size()) + " CLI outputs compared across 3 runs");
    fs::remove_all(dir);
    return c;
}

template <typename F>
bool criterion(int id, const std::string& title, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
        c = body();
    } catch (const std::exception& e) {
        c.expect(false, std::string("exception: ") + e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return c.report(id, title, s);
}

} // namespace

int main() {
    bool ok = true;
    ok &= criterion(1, "metric fixtures", metric_fixtures);
    ok &= criterion(2, "resampling count invariants", count_invariants);
    ok &= criterion(3, "Tomek, ENN and AUC oracle equivalence", oracle_equivalence);
    ok &= criterion(4, "SMOTE/ADASYN bounding boxes", synthetic_geometry);
    ok &= criterion(5, "imbalanced baseline vs oversampling on synthetic data", synthetic_reproduction);
    ok &= criterion(6, "logistic gradient vs finite differences", gradient_check);
    ok &= criterion(7, "determinism across runs and thread counts", determinism);
    std::cout << (ok ? "all criteria passed" : "some criteria failed") << '\n';
    return ok ? 0 : 1;
}
