#pragma once

// Multi-label evaluation metrics. Ranks are 1-based by descending score with
// ties broken by ascending label index.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "camcf/error.hpp"

namespace camcf::eval {

/// Dense row-major matrix; rows are instances, columns are labels.
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<T>> init)
    {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        for (const auto& r : init) {
            if (r.size() != cols_) throw Error("ragged matrix initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Matrix select_rows(const std::vector<std::size_t>& rows) const
    {
        Matrix out(rows.size(), cols_);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < cols_; ++j) out(i, j) = (*this)(rows[i], j);
        }
        return out;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using LabelMatrix = Matrix<std::uint8_t>;
using ScoreMatrix = Matrix<double>;

struct EvalReport {
    double hamming_loss = 0.0;
    double subset_accuracy = 0.0;
    double average_precision = 0.0;
    double coverage_raw = 0.0;
    double coverage_normalized = 0.0;
    double ranking_loss = 0.0;
    double macro_f1 = 0.0;
    double micro_f1 = 0.0;
    // Instances left out of the ranking metrics.
    std::size_t excluded_no_relevant = 0;
    std::size_t excluded_ranking_loss = 0;
    // Labels whose F1 is 0/0 (no positives predicted or present).
    std::size_t degenerate_labels = 0;
};

namespace detail {

template <class A, class B>
void require_same_shape(const Matrix<A>& a, const Matrix<B>& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error("shape mismatch: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
}

inline bool relevant(const LabelMatrix& t, std::size_t i, std::size_t j) { return t(i, j) != 0; }

} // namespace detail

/// ranks[j] = 1-based rank of label j in row i.
inline std::vector<std::size_t> label_ranks(const ScoreMatrix& scores, std::size_t row)
{
    const std::size_t L = scores.cols();
    std::vector<std::size_t> order(L);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double sa = scores(row, a), sb = scores(row, b);
        if (sa != sb) return sa > sb;
        return a < b;
    });
    std::vector<std::size_t> ranks(L);
    for (std::size_t r = 0; r < L; ++r) ranks[order[r]] = r + 1;
    return ranks;
}

inline double hamming_loss(const LabelMatrix& truth, const LabelMatrix& pred)
{
    detail::require_same_shape(truth, pred);
    const std::size_t total = truth.rows() * truth.cols();
    if (total == 0) return 0.0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < truth.rows(); ++i) {
        for (std::size_t j = 0; j < truth.cols(); ++j) {
            wrong += (truth(i, j) != 0) != (pred(i, j) != 0);
        }
    }
    return static_cast<double>(wrong) / static_cast<double>(total);
}

inline double subset_accuracy(const LabelMatrix& truth, const LabelMatrix& pred)
{
    detail::require_same_shape(truth, pred);
    if (truth.rows() == 0) return 0.0;
    std::size_t exact = 0;
    for (std::size_t i = 0; i < truth.rows(); ++i) {
        bool same = true;
        for (std::size_t j = 0; j < truth.cols() && same; ++j) same = (truth(i, j) != 0) == (pred(i, j) != 0);
        exact += same;
    }
    return static_cast<double>(exact) / static_cast<double>(truth.rows());
}

/// Rows with no relevant label are skipped; `excluded` receives their count.
inline double average_precision(const LabelMatrix& truth, const ScoreMatrix& scores, std::size_t* excluded = nullptr)
{
    detail::require_same_shape(truth, scores);
    double sum = 0.0;
    std::size_t used = 0, skipped = 0;
    for (std::size_t i = 0; i < truth.rows(); ++i) {
        const auto ranks = label_ranks(scores, i);
        std::vector<std::size_t> rel;
        for (std::size_t j = 0; j < truth.cols(); ++j) {
            if (detail::relevant(truth, i, j)) rel.push_back(ranks[j]);
        }
        if (rel.empty()) {
            ++skipped;
            continue;
        }
        double inner = 0.0;
        for (auto r : rel) {
            const auto above = std::count_if(rel.begin(), rel.end(), [&](std::size_t q) { return q <= r; });
            inner += static_cast<double>(above) / static_cast<double>(r);
        }
        sum += inner / static_cast<double>(rel.size());
        ++used;
    }
    if (excluded) *excluded = skipped;
    return used ? sum / static_cast<double>(used) : 0.0;
}

struct Coverage {
    double raw = 0.0;
    double normalized = 0.0;
};

/// Rows with no relevant label are skipped.
inline Coverage coverage(const LabelMatrix& truth, const ScoreMatrix& scores, std::size_t* excluded = nullptr)
{
    detail::require_same_shape(truth, scores);
    double sum = 0.0;
    std::size_t used = 0, skipped = 0;
    for (std::size_t i = 0; i < truth.rows(); ++i) {
        const auto ranks = label_ranks(scores, i);
        std::size_t worst = 0;
        for (std::size_t j = 0; j < truth.cols(); ++j) {
            if (detail::relevant(truth, i, j)) worst = std::max(worst, ranks[j]);
        }
        if (worst == 0) {
            ++skipped;
            continue;
        }
        sum += static_cast<double>(worst - 1);
        ++used;
    }
    if (excluded) *excluded = skipped;
    Coverage c;
    c.raw = used ? sum / static_cast<double>(used) : 0.0;
    c.normalized = truth.cols() ? c.raw / static_cast<double>(truth.cols()) : 0.0;
    return c;
}

/// Rows whose labels are all relevant or all irrelevant are skipped.
inline double ranking_loss(const LabelMatrix& truth, const ScoreMatrix& scores, std::size_t* excluded = nullptr)
{
    detail::require_same_shape(truth, scores);
    double sum = 0.0;
    std::size_t used = 0, skipped = 0;
    for (std::size_t i = 0; i < truth.rows(); ++i) {
        std::size_t pos = 0, neg = 0, bad = 0;
        for (std::size_t a = 0; a < truth.cols(); ++a) {
            if (!detail::relevant(truth, i, a)) {
                ++neg;
                continue;
            }
            ++pos;
            for (std::size_t b = 0; b < truth.cols(); ++b) {
                if (!detail::relevant(truth, i, b) && scores(i, a) <= scores(i, b)) ++bad;
            }
        }
        if (pos == 0 || neg == 0) {
            ++skipped;
            continue;
        }
        sum += static_cast<double>(bad) / static_cast<double>(pos * neg);
        ++used;
    }
    if (excluded) *excluded = skipped;
    return used ? sum / static_cast<double>(used) : 0.0;
}

struct LabelCounts {
    std::size_t tp = 0, fp = 0, fn = 0;
};

inline std::vector<LabelCounts> confusion_counts(const LabelMatrix& truth, const LabelMatrix& pred)
{
    detail::require_same_shape(truth, pred);
    std::vector<LabelCounts> out(truth.cols());
    for (std::size_t i = 0; i < truth.rows(); ++i) {
        for (std::size_t j = 0; j < truth.cols(); ++j) {
            const bool t = truth(i, j) != 0, p = pred(i, j) != 0;
            out[j].tp += t && p;
            out[j].fp += !t && p;
            out[j].fn += t && !p;
        }
    }
    return out;
}

/// 0/0 counts as 0; `degenerate` receives the number of such labels.
inline double macro_f1(const LabelMatrix& truth, const LabelMatrix& pred, std::size_t* degenerate = nullptr)
{
    const auto counts = confusion_counts(truth, pred);
    if (counts.empty()) return 0.0;
    double sum = 0.0;
    std::size_t zero_den = 0;
    for (const auto& c : counts) {
        const std::size_t den = 2 * c.tp + c.fp + c.fn;
        if (den == 0) {
            ++zero_den;
            continue;
        }
        sum += 2.0 * static_cast<double>(c.tp) / static_cast<double>(den);
    }
    if (degenerate) *degenerate = zero_den;
    return sum / static_cast<double>(counts.size());
}

inline double micro_f1(const LabelMatrix& truth, const LabelMatrix& pred)
{
    const auto counts = confusion_counts(truth, pred);
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& c : counts) {
        tp += c.tp;
        fp += c.fp;
        fn += c.fn;
    }
    const std::size_t den = 2 * tp + fp + fn;
    return den ? 2.0 * static_cast<double>(tp) / static_cast<double>(den) : 0.0;
}

inline EvalReport evaluate(const LabelMatrix& truth, const LabelMatrix& pred, const ScoreMatrix& scores)
{
    EvalReport r;
    r.hamming_loss = hamming_loss(truth, pred);
    r.subset_accuracy = subset_accuracy(truth, pred);
    r.average_precision = average_precision(truth, scores, &r.excluded_no_relevant);
    const auto cov = coverage(truth, scores);
    r.coverage_raw = cov.raw;
    r.coverage_normalized = cov.normalized;
    r.ranking_loss = ranking_loss(truth, scores, &r.excluded_ranking_loss);
    r.macro_f1 = macro_f1(truth, pred, &r.degenerate_labels);
    r.micro_f1 = micro_f1(truth, pred);
    return r;
}

/// Field-wise mean; exclusion counts are summed.
inline EvalReport mean_report(const std::vector<EvalReport>& reports)
{
    EvalReport m;
    if (reports.empty()) return m;
    for (const auto& r : reports) {
        m.hamming_loss += r.hamming_loss;
        m.subset_accuracy += r.subset_accuracy;
        m.average_precision += r.average_precision;
        m.coverage_raw += r.coverage_raw;
        m.coverage_normalized += r.coverage_normalized;
        m.ranking_loss += r.ranking_loss;
        m.macro_f1 += r.macro_f1;
        m.micro_f1 += r.micro_f1;
        m.excluded_no_relevant += r.excluded_no_relevant;
        m.excluded_ranking_loss += r.excluded_ranking_loss;
        m.degenerate_labels += r.degenerate_labels;
    }
    const double n = static_cast<double>(reports.size());
    m.hamming_loss /= n;
    m.subset_accuracy /= n;
    m.average_precision /= n;
    m.coverage_raw /= n;
    m.coverage_normalized /= n;
    m.ranking_loss /= n;
    m.macro_f1 /= n;
    m.micro_f1 /= n;
    return m;
}

} // namespace camcf::eval
