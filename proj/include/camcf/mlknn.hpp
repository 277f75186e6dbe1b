#pragma once

// ML-kNN: per-label MAP decision over the number of neighbours carrying the
// label, with Laplace-smoothed priors and likelihoods.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "camcf/error.hpp"
#include "camcf/metrics.hpp"

namespace camcf::eval {

using FeatureMatrix = Matrix<double>;

struct Prediction {
    LabelMatrix labels;
    ScoreMatrix scores;  // posterior probability of each label being present
};

namespace detail {

inline double squared_distance(const FeatureMatrix& a, std::size_t i, const FeatureMatrix& b, std::size_t j)
{
    double d = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        const double diff = a(i, c) - b(j, c);
        d += diff * diff;
    }
    return d;
}

/// k nearest training rows to `query` row q; ties by ascending training index.
inline std::vector<std::size_t> nearest(const FeatureMatrix& train, const FeatureMatrix& query, std::size_t q,
                                        std::size_t k, std::size_t exclude = SIZE_MAX)
{
    std::vector<std::pair<double, std::size_t>> d;
    d.reserve(train.rows());
    for (std::size_t t = 0; t < train.rows(); ++t) {
        if (t != exclude) d.emplace_back(squared_distance(query, q, train, t), t);
    }
    const std::size_t take = std::min(k, d.size());
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(take), d.end());
    std::vector<std::size_t> out(take);
    for (std::size_t i = 0; i < take; ++i) out[i] = d[i].second;
    return out;
}

} // namespace detail

class MlKnn {
public:
    MlKnn(FeatureMatrix train_features, LabelMatrix train_labels, std::size_t k = 10, double smoothing = 1.0)
        : x_(std::move(train_features)), y_(std::move(train_labels)), k_(k), s_(smoothing)
    {
        const std::size_t n = x_.rows();
        if (y_.rows() != n) throw Error("ML-kNN: feature and label row counts differ");
        if (k_ == 0) throw Error("ML-kNN: k must be >= 1");
        if (k_ > n) throw Error("ML-kNN: k = " + std::to_string(k_) + " exceeds training size " + std::to_string(n));
        if (!(s_ > 0)) throw Error("ML-kNN: smoothing must be > 0");

        const std::size_t L = y_.cols();
        prior_.assign(L, 0.0);
        like_pos_.assign(L, std::vector<double>(k_ + 1, 0.0));
        like_neg_.assign(L, std::vector<double>(k_ + 1, 0.0));

        for (std::size_t j = 0; j < L; ++j) {
            std::size_t pos = 0;
            for (std::size_t i = 0; i < n; ++i) pos += y_(i, j) != 0;
            prior_[j] = (s_ + static_cast<double>(pos)) / (2.0 * s_ + static_cast<double>(n));
        }

        std::vector<std::vector<std::size_t>> count_pos(L, std::vector<std::size_t>(k_ + 1, 0));
        std::vector<std::vector<std::size_t>> count_neg(L, std::vector<std::size_t>(k_ + 1, 0));
        for (std::size_t i = 0; i < n; ++i) {
            // Leave-one-out: a training row is never its own neighbour.
            const auto nb = detail::nearest(x_, x_, i, k_, i);
            for (std::size_t j = 0; j < L; ++j) {
                std::size_t c = 0;
                for (auto t : nb) c += y_(t, j) != 0;
                if (y_(i, j) != 0) ++count_pos[j][c];
                else ++count_neg[j][c];
            }
        }
        for (std::size_t j = 0; j < L; ++j) {
            const double tot_pos = std::accumulate(count_pos[j].begin(), count_pos[j].end(), 0.0);
            const double tot_neg = std::accumulate(count_neg[j].begin(), count_neg[j].end(), 0.0);
            for (std::size_t c = 0; c <= k_; ++c) {
                like_pos_[j][c] = (s_ + static_cast<double>(count_pos[j][c])) /
                                  (s_ * static_cast<double>(k_ + 1) + tot_pos);
                like_neg_[j][c] = (s_ + static_cast<double>(count_neg[j][c])) /
                                  (s_ * static_cast<double>(k_ + 1) + tot_neg);
            }
        }
    }

    Prediction predict(const FeatureMatrix& test) const
    {
        if (test.cols() != x_.cols()) throw Error("ML-kNN: test feature count differs from training");
        const std::size_t L = y_.cols();
        Prediction p{LabelMatrix(test.rows(), L), ScoreMatrix(test.rows(), L)};
        for (std::size_t q = 0; q < test.rows(); ++q) {
            const auto nb = detail::nearest(x_, test, q, k_);
            for (std::size_t j = 0; j < L; ++j) {
                std::size_t c = 0;
                for (auto t : nb) c += y_(t, j) != 0;
                const double a = prior_[j] * like_pos_[j][c];
                const double b = (1.0 - prior_[j]) * like_neg_[j][c];
                p.scores(q, j) = a / (a + b);
                p.labels(q, j) = a > b ? 1 : 0;
            }
        }
        return p;
    }

    std::size_t k() const { return k_; }
    const std::vector<double>& priors() const { return prior_; }
    /// P(c neighbours carry label j | label j present), c in [0, k].
    const std::vector<double>& likelihood_present(std::size_t j) const { return like_pos_.at(j); }
    const std::vector<double>& likelihood_absent(std::size_t j) const { return like_neg_.at(j); }

private:
    FeatureMatrix x_;
    LabelMatrix y_;
    std::size_t k_;
    double s_;
    std::vector<double> prior_;
    std::vector<std::vector<double>> like_pos_;
    std::vector<std::vector<double>> like_neg_;
};

inline MlKnn mlknn_fit(FeatureMatrix train_features, LabelMatrix train_labels, std::size_t k = 10,
                       double smoothing = 1.0)
{
    return MlKnn(std::move(train_features), std::move(train_labels), k, smoothing);
}

inline Prediction mlknn_predict(const MlKnn& model, const FeatureMatrix& test) { return model.predict(test); }

} // namespace camcf::eval
