#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "rebalance/error.hpp"
#include "rebalance/random.hpp"

namespace rebalance {

/// Binary class mark. The positive class is the class of interest.
enum class Label : std::uint8_t { negative = 0, positive = 1 };

inline Label other(Label label) {
    return label == Label::negative ? Label::positive : Label::negative;
}

/// Builds a label vector from 0/1 integers; any nonzero value is positive.
inline std::vector<Label> labels_from(std::initializer_list<int> marks) {
    std::vector<Label> out;
    out.reserve(marks.size());
    for (int m : marks) {
        out.push_back(m != 0 ? Label::positive : Label::negative);
    }
    return out;
}

/// Non-owning row-major view of a dense matrix.
struct MatrixView {
    std::span<const double> data;
    std::size_t cols = 0;

    std::size_t rows() const { return cols == 0 ? 0 : data.size() / cols; }
    std::span<const double> row(std::size_t i) const { return data.subspan(i * cols, cols); }
};

struct ClassCounts {
    std::size_t n_negative = 0;
    std::size_t n_positive = 0;

    std::size_t total() const { return n_negative + n_positive; }
    std::size_t of(Label label) const { return label == Label::negative ? n_negative : n_positive; }
    bool operator==(const ClassCounts&) const = default;
};

inline ClassCounts count_labels(std::span<const Label> labels) {
    ClassCounts counts;
    for (Label l : labels) {
        (l == Label::positive ? counts.n_positive : counts.n_negative) += 1;
    }
    return counts;
}

/**
 * Feature matrix plus binary labels. Immutable once constructed; samplers
 * produce new datasets rather than editing existing ones.
 */
class Dataset {
public:
    Dataset() = default;

    /// Empty dataset with the given column layout.
    Dataset(std::vector<std::string> feature_names, std::string label_name)
        : Dataset({}, {}, std::move(feature_names), std::move(label_name)) {}

    Dataset(std::vector<double> values, std::vector<Label> labels, std::vector<std::string> feature_names,
            std::string label_name = "label")
        : values_(std::move(values)), labels_(std::move(labels)), feature_names_(std::move(feature_names)),
          label_name_(std::move(label_name)) {
        if (feature_names_.empty()) {
            throw InvalidArgument("dataset needs at least one feature column");
        }
        if (values_.size() != labels_.size() * feature_names_.size()) {
            throw InvalidArgument("dataset shape mismatch: " + std::to_string(values_.size()) + " values for " +
                                  std::to_string(labels_.size()) + " rows of " +
                                  std::to_string(feature_names_.size()) + " features");
        }
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                throw DataError("non-finite feature value at row " + std::to_string(i / feature_names_.size()) +
                                ", column '" + feature_names_[i % feature_names_.size()] + "'");
            }
        }
    }

    /// Convenience constructor that names features f0, f1, ...
    static Dataset from_rows(const std::vector<std::vector<double>>& rows, std::vector<Label> labels) {
        if (rows.empty()) {
            throw InvalidArgument("from_rows needs at least one row to infer the feature count");
        }
        const std::size_t cols = rows.front().size();
        std::vector<double> values;
        values.reserve(rows.size() * cols);
        for (const auto& r : rows) {
            if (r.size() != cols) {
                throw InvalidArgument("ragged rows");
            }
            values.insert(values.end(), r.begin(), r.end());
        }
        return Dataset(std::move(values), std::move(labels), default_feature_names(cols));
    }

    static std::vector<std::string> default_feature_names(std::size_t n) {
        std::vector<std::string> names;
        names.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            names.push_back("f" + std::to_string(i));
        }
        return names;
    }

    std::size_t rows() const { return labels_.size(); }
    std::size_t features() const { return feature_names_.size(); }

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(values_).subspan(i * features(), features());
    }
    Label label(std::size_t i) const { return labels_[i]; }
    std::span<const Label> labels() const { return labels_; }
    std::span<const double> values() const { return values_; }
    MatrixView view() const { return MatrixView{values_, features()}; }

    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::string& label_name() const { return label_name_; }

    /// New dataset holding the given rows, in the given order.
    Dataset select(std::span<const std::size_t> indices) const {
        std::vector<double> values;
        std::vector<Label> labels;
        values.reserve(indices.size() * features());
        labels.reserve(indices.size());
        for (std::size_t idx : indices) {
            const auto r = row(idx);
            values.insert(values.end(), r.begin(), r.end());
            labels.push_back(labels_[idx]);
        }
        return Dataset(std::move(values), std::move(labels), feature_names_, label_name_);
    }

    bool operator==(const Dataset&) const = default;

private:
    std::vector<double> values_;
    std::vector<Label> labels_;
    std::vector<std::string> feature_names_;
    std::string label_name_ = "label";
};

inline ClassCounts class_counts(const Dataset& ds) { return count_labels(ds.labels()); }

/// Negative count over positive count. Values below 1 are legal and not clamped.
inline double imbalance_ratio(const ClassCounts& counts) {
    if (counts.n_positive == 0) {
        throw InvalidArgument("imbalance ratio undefined: no positive examples");
    }
    return static_cast<double>(counts.n_negative) / static_cast<double>(counts.n_positive);
}

inline double imbalance_ratio(const Dataset& ds) { return imbalance_ratio(class_counts(ds)); }

// ---------------------------------------------------------------------------
// Splitting

struct SplitSpec {
    double test_fraction = 0.3;
    std::uint64_t seed = 0;
    bool stratified = false;
};

struct TrainTestSplit {
    Dataset train;
    Dataset test;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
};

namespace detail {

inline std::size_t round_count(double x) { return static_cast<std::size_t>(std::llround(x)); }

} // namespace detail

/**
 * Seeded train/test partition. The test partition gets round(test_fraction * n)
 * rows; with stratification each class contributes in proportion, the positive
 * share rounded and the negative share taking the remainder. Both partitions
 * keep the original row order.
 */
inline TrainTestSplit split(const Dataset& ds, const SplitSpec& spec) {
    if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
        throw InvalidArgument("test fraction must lie strictly between 0 and 1");
    }
    const std::size_t n = ds.rows();
    const std::size_t n_test = detail::round_count(spec.test_fraction * static_cast<double>(n));
    Rng rng(spec.seed);
    std::vector<char> in_test(n, 0);

    if (!spec.stratified) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order.begin(), order.end());
        for (std::size_t i = 0; i < n_test; ++i) {
            in_test[order[i]] = 1;
        }
    } else {
        std::vector<std::size_t> negatives;
        std::vector<std::size_t> positives;
        for (std::size_t i = 0; i < n; ++i) {
            (ds.label(i) == Label::positive ? positives : negatives).push_back(i);
        }
        if (negatives.empty() || positives.empty()) {
            throw InvalidArgument("stratified split requires both classes to be present");
        }
        std::size_t pos_test =
            std::min(positives.size(), detail::round_count(spec.test_fraction * static_cast<double>(positives.size())));
        std::size_t neg_test = n_test >= pos_test ? n_test - pos_test : 0;
        if (neg_test > negatives.size()) {
            pos_test += neg_test - negatives.size();
            neg_test = negatives.size();
        }
        rng.shuffle(negatives.begin(), negatives.end());
        rng.shuffle(positives.begin(), positives.end());
        for (std::size_t i = 0; i < neg_test; ++i) {
            in_test[negatives[i]] = 1;
        }
        for (std::size_t i = 0; i < pos_test; ++i) {
            in_test[positives[i]] = 1;
        }
    }

    TrainTestSplit out;
    for (std::size_t i = 0; i < n; ++i) {
        (in_test[i] ? out.test_indices : out.train_indices).push_back(i);
    }
    out.train = ds.select(out.train_indices);
    out.test = ds.select(out.test_indices);
    return out;
}

// ---------------------------------------------------------------------------
// Standardization

/// Per-feature affine scaling (x - mean) / scale, fit on one matrix and applied to others.
struct FeatureScaling {
    std::vector<double> mean;
    std::vector<double> scale;

    /// Population mean and standard deviation; constant columns get scale 1.
    static FeatureScaling fit(MatrixView x) {
        FeatureScaling s;
        s.mean.assign(x.cols, 0.0);
        s.scale.assign(x.cols, 1.0);
        const std::size_t n = x.rows();
        if (n == 0) {
            return s;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = x.row(i);
            for (std::size_t j = 0; j < x.cols; ++j) {
                s.mean[j] += r[j];
            }
        }
        for (double& m : s.mean) {
            m /= static_cast<double>(n);
        }
        std::vector<double> var(x.cols, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = x.row(i);
            for (std::size_t j = 0; j < x.cols; ++j) {
                const double d = r[j] - s.mean[j];
                var[j] += d * d;
            }
        }
        for (std::size_t j = 0; j < x.cols; ++j) {
            const double sd = std::sqrt(var[j] / static_cast<double>(n));
            s.scale[j] = sd > 0.0 ? sd : 1.0;
        }
        return s;
    }

    std::vector<double> apply(MatrixView x) const {
        std::vector<double> out(x.data.begin(), x.data.end());
        for (std::size_t i = 0; i < out.size(); ++i) {
            const std::size_t j = i % x.cols;
            out[i] = (out[i] - mean[j]) / scale[j];
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// CSV

/// Shortest decimal text that parses back to exactly the same double.
inline std::string format_double(double value) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, result.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            return fields;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

inline std::optional<double> parse_double(std::string_view text) {
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    double value = 0.0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc() || result.ptr != text.data() + text.size() || text.empty()) {
        return std::nullopt;
    }
    return value;
}

inline bool label_matches(std::string_view cell, std::string_view declared) {
    if (cell == declared) {
        return true;
    }
    // "1.0" matches a declared "1".
    const auto a = parse_double(cell);
    const auto b = parse_double(declared);
    return a && b && *a == *b;
}

} // namespace detail

struct CsvLabelSpec {
    std::string column = "label";
    std::string positive_value = "1";
    std::string negative_value = "0";
};

/// Parses CSV text; `source` names the input in error messages.
inline Dataset parse_csv(std::istream& in, const CsvLabelSpec& spec, const std::string& source = "<input>") {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(source + ": missing header row");
    }
    std::vector<std::string> header;
    for (auto f : detail::split_fields(line)) {
        header.emplace_back(f);
    }
    std::optional<std::size_t> label_col;
    std::vector<std::string> feature_names;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == spec.column && !label_col) {
            label_col = c;
        } else {
            feature_names.emplace_back(header[c]);
        }
    }
    if (!label_col) {
        throw DataError(source + ": label column '" + spec.column + "' not found in header");
    }
    if (feature_names.empty()) {
        throw DataError(source + ": no feature columns besides the label");
    }

    std::vector<double> values;
    std::vector<Label> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto fields = detail::split_fields(line);
        if (fields.size() != header.size()) {
            throw DataError(source + ": line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                            " fields, header has " + std::to_string(header.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (c == *label_col) {
                if (detail::label_matches(fields[c], spec.positive_value)) {
                    labels.push_back(Label::positive);
                } else if (detail::label_matches(fields[c], spec.negative_value)) {
                    labels.push_back(Label::negative);
                } else {
                    throw DataError(source + ": line " + std::to_string(line_no) + ": label '" +
                                    std::string(fields[c]) + "' is neither '" + spec.positive_value + "' nor '" +
                                    spec.negative_value + "'");
                }
                continue;
            }
            const auto v = detail::parse_double(fields[c]);
            if (!v || !std::isfinite(*v)) {
                throw DataError(source + ": line " + std::to_string(line_no) + ", column '" +
                                header[c] + "': cannot parse '" + std::string(fields[c]) +
                                "' as a finite number");
            }
            values.push_back(*v);
        }
    }
    return Dataset(std::move(values), std::move(labels), std::move(feature_names), spec.column);
}

inline Dataset load_csv(const std::string& path, const CsvLabelSpec& spec = {}) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    return parse_csv(in, spec, path);
}

/// Features in stored order followed by the label column written as 0/1.
inline void write_csv(const Dataset& ds, std::ostream& out) {
    for (const auto& name : ds.feature_names()) {
        out << name << ',';
    }
    out << ds.label_name() << '\n';
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        for (double v : ds.row(i)) {
            out << format_double(v) << ',';
        }
        out << (ds.label(i) == Label::positive ? '1' : '0') << '\n';
    }
}

inline void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    write_csv(ds, out);
    out.flush();
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

} // namespace rebalance
