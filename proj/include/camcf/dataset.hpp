#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "camcf/column.hpp"
#include "camcf/error.hpp"

namespace camcf {

/// Rectangular table of discrete feature columns plus discrete label columns.
/// Immutable after construction.
class Dataset {
public:
    Dataset(std::vector<DiscreteColumn> features, std::vector<DiscreteColumn> labels,
            std::vector<std::string> feature_names = {}, std::vector<std::string> label_names = {})
        : features_(std::move(features)),
          labels_(std::move(labels)),
          feature_names_(std::move(feature_names)),
          label_names_(std::move(label_names))
    {
        if (features_.empty()) throw Error("dataset needs at least one feature column");
        if (labels_.empty()) throw Error("dataset needs at least one label column");
        n_samples_ = features_.front().size();
        if (n_samples_ == 0) throw Error("dataset needs at least one sample");

        fill_names(feature_names_, features_.size(), "f");
        fill_names(label_names_, labels_.size(), "L");
        for (std::size_t j = 0; j < features_.size(); ++j) check_column(features_[j], feature_names_[j]);
        for (std::size_t j = 0; j < labels_.size(); ++j) check_column(labels_[j], label_names_[j]);
    }

    /// Builds a dataset from raw code columns, deriving arity as max code + 1.
    static Dataset from_codes(const std::vector<std::vector<Code>>& features,
                              const std::vector<std::vector<Code>>& labels,
                              std::vector<std::string> feature_names = {},
                              std::vector<std::string> label_names = {})
    {
        std::vector<DiscreteColumn> f, l;
        f.reserve(features.size());
        l.reserve(labels.size());
        for (const auto& c : features) f.push_back(DiscreteColumn::from_codes(c));
        for (const auto& c : labels) l.push_back(DiscreteColumn::from_codes(c));
        return Dataset(std::move(f), std::move(l), std::move(feature_names), std::move(label_names));
    }

    std::size_t n_samples() const { return n_samples_; }
    std::size_t n_features() const { return features_.size(); }
    std::size_t n_labels() const { return labels_.size(); }

    const DiscreteColumn& feature(std::size_t j) const { return features_.at(j); }
    const DiscreteColumn& label(std::size_t j) const { return labels_.at(j); }
    const std::vector<DiscreteColumn>& features() const { return features_; }
    const std::vector<DiscreteColumn>& labels() const { return labels_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::vector<std::string>& label_names() const { return label_names_; }

    /// Row `i` of the result is row `order[i]` of this dataset.
    Dataset permute_rows(const std::vector<std::size_t>& order) const
    {
        if (order.size() != n_samples_) throw Error("row permutation has wrong length");
        auto apply = [&](const std::vector<DiscreteColumn>& cols) {
            std::vector<DiscreteColumn> out;
            out.reserve(cols.size());
            for (const auto& c : cols) {
                std::vector<Code> codes(n_samples_);
                for (std::size_t i = 0; i < n_samples_; ++i) codes[i] = c.codes.at(order[i]);
                out.emplace_back(std::move(codes), c.arity);
            }
            return out;
        };
        return Dataset(apply(features_), apply(labels_), feature_names_, label_names_);
    }

    /// Keeps only the listed feature columns (in the given order).
    Dataset select_features(const std::vector<std::size_t>& keep) const
    {
        std::vector<DiscreteColumn> f;
        std::vector<std::string> names;
        for (auto j : keep) {
            f.push_back(features_.at(j));
            names.push_back(feature_names_.at(j));
        }
        return Dataset(std::move(f), labels_, std::move(names), label_names_);
    }

    Dataset subset_rows(const std::vector<std::size_t>& rows) const
    {
        auto apply = [&](const std::vector<DiscreteColumn>& cols) {
            std::vector<DiscreteColumn> out;
            for (const auto& c : cols) {
                std::vector<Code> codes;
                codes.reserve(rows.size());
                for (auto r : rows) codes.push_back(c.codes.at(r));
                out.emplace_back(std::move(codes), c.arity);
            }
            return out;
        };
        return Dataset(apply(features_), apply(labels_), feature_names_, label_names_);
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    static void fill_names(std::vector<std::string>& names, std::size_t count, const char* prefix)
    {
        if (names.empty()) {
            for (std::size_t j = 0; j < count; ++j) names.push_back(prefix + std::to_string(j));
        }
        if (names.size() != count) throw Error("column name count does not match column count");
    }

    void check_column(const DiscreteColumn& col, const std::string& name) const
    {
        if (col.size() != n_samples_) {
            throw Error("column '" + name + "' has " + std::to_string(col.size()) + " rows, expected " +
                        std::to_string(n_samples_));
        }
        if (col.arity == 0) throw Error("column '" + name + "' has arity 0");
        check_codes(col.view(), "column '" + name + "'");
    }

    std::size_t n_samples_ = 0;
    std::vector<DiscreteColumn> features_;
    std::vector<DiscreteColumn> labels_;
    std::vector<std::string> feature_names_;
    std::vector<std::string> label_names_;
};

/// One flattened label category: the 0/1 indicator of `label == value`.
struct CategoryNode {
    std::size_t label_index = 0;
    Code category_value = 0;
    DiscreteColumn indicator;
    std::size_t support = 0;  // number of positive entries

    ColumnView view() const { return indicator.view(); }

    bool same_category(const CategoryNode& o) const
    {
        return label_index == o.label_index && category_value == o.category_value;
    }
};

inline DiscreteColumn make_indicator(ColumnView label, Code value)
{
    std::vector<Code> ind(label.size());
    for (std::size_t i = 0; i < ind.size(); ++i) ind[i] = label.codes[i] == value ? 1 : 0;
    return DiscreteColumn(std::move(ind), 2);
}

inline std::vector<Code> category_indicator(const Dataset& ds, std::size_t label_index, Code category_value)
{
    if (label_index >= ds.n_labels()) {
        throw Error("label index " + std::to_string(label_index) + " out of range");
    }
    const auto& col = ds.label(label_index);
    auto ind = make_indicator(col.view(), category_value);
    bool any = false;
    for (Code v : ind.codes) any = any || v == 1;
    if (!any) {
        throw Error("category not present: label '" + ds.label_names()[label_index] + "' has no value " +
                    std::to_string(category_value));
    }
    return std::move(ind.codes);
}

/// One node per (label, observed category) with at least `min_support`
/// positives, in ascending (label_index, category_value) order.
inline std::vector<CategoryNode> flatten_labels(const Dataset& ds, std::size_t min_support = 1)
{
    std::vector<CategoryNode> nodes;
    for (std::size_t li = 0; li < ds.n_labels(); ++li) {
        const auto& col = ds.label(li);
        std::vector<std::size_t> counts(col.arity, 0);
        for (Code v : col.codes) ++counts[v];
        for (Code c = 0; c < col.arity; ++c) {
            if (counts[c] == 0 || counts[c] < min_support) continue;
            nodes.push_back(CategoryNode{li, c, make_indicator(col.view(), c), counts[c]});
        }
    }
    return nodes;
}

enum class ThresholdMode { absolute, quantile_adaptive };

/// Parameters for one selection run. Thresholds are in bits.
struct CamcfConfig {
    double delta1 = 0.02;
    double delta2 = 0.02;
    double k1_fraction = 1.0;
    double k2_fraction = 1.0;
    double gamma = 1.2;
    ThresholdMode threshold_mode = ThresholdMode::absolute;
    double adaptive_quantile = 0.75;
    std::size_t min_category_support = 5;
    bool dedup_binary = false;
    std::uint64_t seed = 0;
    std::optional<std::size_t> max_conditioning_size;
    std::size_t threads = 1;

    void validate() const
    {
        auto fail = [](const std::string& m) { throw Error("invalid configuration: " + m); };
        if (!(delta1 > 0) || !std::isfinite(delta1)) fail("delta1 must be > 0");
        if (!(delta2 > 0) || !std::isfinite(delta2)) fail("delta2 must be > 0");
        if (!(gamma >= 1) || !std::isfinite(gamma)) fail("gamma must be >= 1");
        if (!(k1_fraction > 0 && k1_fraction <= 1)) fail("k1 must lie in (0, 1]");
        if (!(k2_fraction > 0 && k2_fraction <= 1)) fail("k2 must lie in (0, 1]");
        if (!(adaptive_quantile > 0 && adaptive_quantile < 1)) fail("adaptive quantile must lie in (0, 1)");
        if (max_conditioning_size && *max_conditioning_size == 0) fail("max conditioning size must be >= 1");
        if (threads == 0) fail("threads must be >= 1");
    }
};

} // namespace camcf
