#pragma once

// Train/test protocol around the selector: seeded hold-out or k-fold
// splits, selection on the training rows, ML-kNN on the selected columns.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <utility>
#include <span>
#include <vector>

#include "camcf/dataset.hpp"
#include "camcf/metrics.hpp"
#include "camcf/mlknn.hpp"
#include "camcf/pipeline.hpp"
#include "camcf/synth.hpp"

namespace camcf::eval {

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

inline std::vector<std::size_t> shuffled_rows(std::size_t n, std::uint64_t seed)
{
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    synth::Rng rng(seed);
    rng.shuffle(rows);
    return rows;
}

/// Hold-out split; both parts are returned in ascending row order.
inline Split train_test_split(std::size_t n, double train_fraction, std::uint64_t seed)
{
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw Error("train fraction must lie in (0, 1)");
    auto rows = shuffled_rows(n, seed);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n > 1 ? n - 1 : 1);
    Split s;
    s.train.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.assign(rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

/// Seeded k-fold partition; fold sizes differ by at most one.
inline std::vector<Split> kfold(std::size_t n, std::size_t folds, std::uint64_t seed)
{
    if (folds < 2 || folds > n) throw Error("fold count must lie in [2, n]");
    const auto rows = shuffled_rows(n, seed);
    std::vector<Split> out(folds);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t f = i % folds;
        for (std::size_t g = 0; g < folds; ++g) {
            (g == f ? out[g].test : out[g].train).push_back(rows[i]);
        }
    }
    for (auto& s : out) {
        std::sort(s.train.begin(), s.train.end());
        std::sort(s.test.begin(), s.test.end());
    }
    return out;
}

/// Numeric feature matrix of the given rows and columns (codes as numbers).
inline FeatureMatrix feature_matrix(const Dataset& ds, const std::vector<std::size_t>& rows,
                                    const std::vector<std::size_t>& features)
{
    FeatureMatrix x(rows.size(), features.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < features.size(); ++j) x(i, j) = ds.feature(features[j]).codes[rows[i]];
    }
    return x;
}

/// Binary label matrix: a label with at most two codes contributes its
/// 0/1 column; a label with more categories contributes one indicator per code.
inline LabelMatrix label_matrix(const Dataset& ds, const std::vector<std::size_t>& rows)
{
    std::vector<std::pair<std::size_t, Code>> outputs;  // (label, code) ; code == max => binary passthrough
    constexpr Code kPass = std::numeric_limits<Code>::max();
    for (std::size_t l = 0; l < ds.n_labels(); ++l) {
        if (ds.label(l).arity <= 2) {
            outputs.emplace_back(l, kPass);
        } else {
            for (Code c = 0; c < ds.label(l).arity; ++c) outputs.emplace_back(l, c);
        }
    }
    LabelMatrix y(rows.size(), outputs.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < outputs.size(); ++j) {
            const auto [l, c] = outputs[j];
            const Code v = ds.label(l).codes[rows[i]];
            y(i, j) = c == kPass ? (v != 0) : (v == c);
        }
    }
    return y;
}

struct EvalOptions {
    std::size_t knn = 10;
    double smoothing = 1.0;
    double train_fraction = 0.7;
    std::size_t folds = 0;  // 0 selects the hold-out split
    std::uint64_t seed = 0;
};

struct FoldOutcome {
    std::size_t fold = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::vector<std::size_t> selected;
    EvalReport report;
};

inline std::vector<Split> make_splits(std::size_t n, const EvalOptions& opts)
{
    if (opts.folds > 0) return kfold(n, opts.folds, opts.seed);
    return {train_test_split(n, opts.train_fraction, opts.seed)};
}

/// Scores a fixed feature subset on one split.
inline EvalReport score_subset(const Dataset& ds, const std::vector<std::size_t>& features, const Split& split,
                               const EvalOptions& opts)
{
    const auto model = mlknn_fit(feature_matrix(ds, split.train, features), label_matrix(ds, split.train), opts.knn,
                                 opts.smoothing);
    const auto pred = model.predict(feature_matrix(ds, split.test, features));
    return evaluate(label_matrix(ds, split.test), pred.labels, pred.scores);
}

/// Scores keyed by (fold, feature subset); identical subsets score identically.
using ScoreCache = std::map<std::pair<std::size_t, std::vector<std::size_t>>, EvalReport>;

/// Fold outcomes for each k2 value in `k2_values`; selection phases 1-3 are shared.
inline std::vector<std::vector<FoldOutcome>> evaluate_k2_sweep(const Dataset& ds, const CamcfConfig& config,
                                                               std::span<const double> k2_values,
                                                               const EvalOptions& opts, ScoreCache* cache = nullptr)
{
    const auto splits = make_splits(ds.n_samples(), opts);
    std::vector<std::vector<FoldOutcome>> out(k2_values.size());
    for (std::size_t f = 0; f < splits.size(); ++f) {
        const auto& split = splits[f];
        const auto train = ds.subset_rows(split.train);
        auto selections = run_camcf_k2_sweep(train, config, k2_values);
        for (std::size_t k = 0; k < k2_values.size(); ++k) {
            FoldOutcome fo;
            fo.fold = f;
            fo.n_train = split.train.size();
            fo.n_test = split.test.size();
            fo.selected = std::move(selections[k].global_selected);
            if (cache) {
                auto [it, fresh] = cache->try_emplace({f, fo.selected});
                if (fresh) it->second = score_subset(ds, fo.selected, split, opts);
                fo.report = it->second;
            } else {
                fo.report = score_subset(ds, fo.selected, split, opts);
            }
            out[k].push_back(std::move(fo));
        }
    }
    return out;
}

/// Selection on each training part, scoring on the matching test part.
inline std::vector<FoldOutcome> evaluate_selection(const Dataset& ds, const CamcfConfig& config,
                                                   const EvalOptions& opts)
{
    const double k2 = config.k2_fraction;
    return std::move(evaluate_k2_sweep(ds, config, {&k2, 1}, opts).front());
}

inline EvalReport mean_of(const std::vector<FoldOutcome>& folds)
{
    std::vector<EvalReport> r;
    for (const auto& f : folds) r.push_back(f.report);
    return mean_report(r);
}

struct Grid {
    std::vector<double> delta1{0.01, 0.02, 0.05, 0.1};
    std::vector<double> delta2{0.01, 0.02, 0.05, 0.1};
    std::vector<double> k1{0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<double> k2{0.2, 0.4, 0.6, 0.8, 1.0};
};

struct GridOutcome {
    CamcfConfig best;
    EvalReport best_mean;
    std::vector<FoldOutcome> best_folds;
    std::size_t evaluated = 0;
};

/// Exhaustive grid over (delta1, delta2, k1, k2). Lowest mean Hamming loss
/// wins; ties go to the higher macro-F1, then to the earlier grid point.
inline GridOutcome grid_search(const Dataset& ds, const CamcfConfig& base, const Grid& grid, const EvalOptions& opts)
{
    GridOutcome best;
    bool have = false;
    ScoreCache cache;
    for (double d1 : grid.delta1) {
        for (double d2 : grid.delta2) {
            for (double k1 : grid.k1) {
                CamcfConfig c = base;
                c.delta1 = d1;
                c.delta2 = d2;
                c.k1_fraction = k1;
                auto sweep = evaluate_k2_sweep(ds, c, grid.k2, opts, &cache);
                for (std::size_t k = 0; k < grid.k2.size(); ++k) {
                    c.k2_fraction = grid.k2[k];
                    const auto mean = mean_of(sweep[k]);
                    ++best.evaluated;
                    const bool better = !have || mean.hamming_loss < best.best_mean.hamming_loss ||
                                        (mean.hamming_loss == best.best_mean.hamming_loss &&
                                         mean.macro_f1 > best.best_mean.macro_f1);
                    if (better) {
                        have = true;
                        best.best = c;
                        best.best_mean = mean;
                        best.best_folds = std::move(sweep[k]);
                    }
                }
            }
        }
    }
    if (!have) throw Error("grid search needs at least one value per parameter");
    return best;
}

} // namespace camcf::eval
