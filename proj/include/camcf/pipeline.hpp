#pragma once

// Category-level multi-label causal feature selection.
//
// For every flattened label category the selection runs four phases:
//   1. label skeleton: other-label categories that carry information about
//      the target beyond each other (greedy conditional admission);
//   2. local structure: parents/children by conditional elimination given the
//      remaining candidates and the skeleton, then spouses via V-structures;
//   3. recovery: features masked by a correlated label category are restored
//      when they explain the target better than that category does;
//   4. refinement: top-k2 truncation, marginal dependency check and
//      cross-label redundancy removal.
// The final per-category blankets are unioned into one feature subset.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <compare>
#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "camcf/dataset.hpp"
#include "camcf/error.hpp"
#include "camcf/info.hpp"

namespace camcf {

struct CategoryKey {
    std::size_t label_index = 0;
    Code category_value = 0;

    friend auto operator<=>(const CategoryKey&, const CategoryKey&) = default;
};

inline CategoryKey key_of(const CategoryNode& n) { return {n.label_index, n.category_value}; }

struct SkeletonMember {
    CategoryKey key;
    const CategoryNode* node = nullptr;  // into the candidate list; cleared in returned results
    double score = 0.0;                  // unconditional DCSMI with the target
};

/// Other-label categories kept as conditioning context for one target, in admission order.
struct LabelSkeleton {
    CategoryKey target;
    std::vector<SkeletonMember> members;

    std::size_t size() const { return members.size(); }
    bool empty() const { return members.empty(); }
};

enum Phase : std::size_t { kSkeleton = 0, kStructure = 1, kRecovery = 2, kRefinement = 3 };
inline constexpr std::size_t kPhaseCount = 4;

/// Per-phase bookkeeping for one category.
///
/// `phase_sets` holds the feature set visible after each phase: the screened
/// PC candidates after phase 1, PC plus spouses after phase 2, the recovered
/// blanket after phase 3 and the final blanket after phase 4.
struct PhaseTrace {
    std::array<std::vector<std::size_t>, kPhaseCount> phase_sets;
    std::array<double, kPhaseCount> duration_ms{};
    std::array<std::size_t, kPhaseCount> ci_tests{};
    std::size_t capped_conditioning = 0;

    std::size_t total_tests() const
    {
        std::size_t t = 0;
        for (auto c : ci_tests) t += c;
        return t;
    }
};

struct CausalNeighborhood {
    CategoryKey target;
    std::size_t support = 0;
    double delta1 = 0.0;  // threshold actually used (differs from config in adaptive mode)
    LabelSkeleton skeleton;         // as built in phase 1
    LabelSkeleton pruned_skeleton;  // after phase-3 evictions
    std::vector<std::size_t> pc;
    std::vector<std::size_t> sp;
    std::vector<std::size_t> recovered;
    std::vector<std::size_t> final_cmb;
    PhaseTrace trace;
};

struct SkippedCategory {
    CategoryKey key;
    std::size_t support = 0;
    std::string reason;
};

struct SelectionResult {
    std::map<CategoryKey, CausalNeighborhood> per_category;
    std::vector<std::size_t> global_selected;  // sorted, unique
    std::array<std::vector<std::size_t>, kPhaseCount> per_phase_snapshots;
    std::vector<SkippedCategory> skipped;
};

/// Counts and evaluates the information tests of one target category.
///
/// Unconditional feature scores against the target are computed once and
/// reused; every other call is one counted test.
class CategoryScorer {
public:
    CategoryScorer(const Dataset& ds, const CategoryNode& target,
                   std::optional<std::size_t> max_conditioning = std::nullopt)
        : ds_(ds), target_(target), max_conditioning_(max_conditioning),
          marginal_(ds.n_features(), -1.0)
    {
        if (target.indicator.size() != ds.n_samples()) throw Error("target indicator length mismatch");
    }

    const Dataset& dataset() const { return ds_; }
    const CategoryNode& target() const { return target_; }
    std::size_t n_features() const { return ds_.n_features(); }

    double marginal(std::size_t f)
    {
        if (marginal_.at(f) < 0.0) {
            ++tests_;
            marginal_[f] = info::scsmi(ds_.feature(f).view(), target_);
        }
        return marginal_[f];
    }

    double feature_given(std::size_t f, const info::EncodedConditioning& s)
    {
        ++tests_;
        return info::scsmi(ds_.feature(f).view(), target_, s);
    }

    double category_marginal(const CategoryNode& other)
    {
        ++tests_;
        return info::dcsmi(target_, other);
    }

    double category_given(const CategoryNode& other, const info::EncodedConditioning& s)
    {
        ++tests_;
        return info::dcsmi(target_, other, s);
    }

    /// SCSMI of a feature against some other (non-target) category.
    double feature_against(std::size_t f, const CategoryNode& other)
    {
        ++tests_;
        return info::scsmi(ds_.feature(f).view(), other);
    }

    /// Joint conditioning on skeleton categories followed by features. When a
    /// cap is configured, members beyond it are dropped from the tail.
    info::EncodedConditioning encode(const std::vector<std::size_t>& features,
                                     const std::vector<const CategoryNode*>& categories)
    {
        std::vector<ColumnView> members;
        members.reserve(features.size() + categories.size());
        for (const auto* c : categories) members.push_back(c->view());
        for (auto f : features) members.push_back(ds_.feature(f).view());
        if (max_conditioning_ && members.size() > *max_conditioning_) {
            members.resize(*max_conditioning_);
            ++capped_;
        }
        return info::EncodedConditioning(members, ds_.n_samples());
    }

    std::size_t tests() const { return tests_; }
    std::size_t capped() const { return capped_; }

private:
    const Dataset& ds_;
    const CategoryNode& target_;
    std::optional<std::size_t> max_conditioning_;
    std::vector<double> marginal_;
    std::size_t tests_ = 0;
    std::size_t capped_ = 0;
};

/// ceil(fraction * total) with a floor of 1; fractions are in (0, 1].
inline std::size_t fraction_cap(double fraction, std::size_t total)
{
    const double raw = fraction * static_cast<double>(total);
    auto cap = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    return std::max<std::size_t>(cap, 1);
}

/// Orders feature indices by descending score, ties by ascending index.
template <class ScoreFn>
void sort_by_score(std::vector<std::size_t>& features, ScoreFn score)
{
    std::stable_sort(features.begin(), features.end(), [&](std::size_t a, std::size_t b) {
        const double sa = score(a), sb = score(b);
        if (sa != sb) return sa > sb;
        return a < b;
    });
}

namespace detail {

inline std::vector<const CategoryNode*> nodes_of(const LabelSkeleton& sk, std::size_t skip = SIZE_MAX)
{
    std::vector<const CategoryNode*> out;
    out.reserve(sk.members.size());
    for (std::size_t i = 0; i < sk.members.size(); ++i) {
        if (i != skip) out.push_back(sk.members[i].node);
    }
    return out;
}

inline bool contains(const std::vector<std::size_t>& v, std::size_t x)
{
    return std::find(v.begin(), v.end(), x) != v.end();
}

} // namespace detail

/// Phase 1. `others` must not contain categories of the target's label.
inline LabelSkeleton build_label_skeleton(CategoryScorer& scorer, const std::vector<CategoryNode>& others,
                                          double delta2)
{
    const CategoryNode& target = scorer.target();
    LabelSkeleton skeleton{key_of(target), {}};

    std::vector<SkeletonMember> candidates;
    for (const auto& other : others) {
        if (other.label_index == target.label_index) {
            throw Error("label skeleton candidates must come from labels other than the target's");
        }
        const double score = scorer.category_marginal(other);
        if (score > delta2) candidates.push_back({key_of(other), &other, score});
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.key < b.key;
    });

    for (const auto& cand : candidates) {
        bool admit = skeleton.empty();
        if (!admit) {
            const auto s = scorer.encode({}, detail::nodes_of(skeleton));
            admit = scorer.category_given(*cand.node, s) > delta2;
        }
        if (admit) skeleton.members.push_back(cand);
    }
    return skeleton;
}

struct PcDiscovery {
    std::vector<std::size_t> screened;  // marginal filter + k1 truncation, in score order
    std::vector<std::size_t> pc;        // survivors, in score order
};

/// Phase 2a: parents and children.
inline PcDiscovery discover_pc(CategoryScorer& scorer, const LabelSkeleton& skeleton, double delta1,
                               double k1_fraction)
{
    const std::size_t m = scorer.n_features();
    std::vector<std::size_t> cand;
    for (std::size_t f = 0; f < m; ++f) {
        if (scorer.marginal(f) > delta1) cand.push_back(f);
    }
    sort_by_score(cand, [&](std::size_t f) { return scorer.marginal(f); });
    if (!cand.empty()) cand.resize(std::min(cand.size(), fraction_cap(k1_fraction, m)));

    PcDiscovery out;
    out.screened = cand;
    const auto skeleton_nodes = detail::nodes_of(skeleton);
    for (std::size_t f : out.screened) {
        std::vector<std::size_t> rest;
        rest.reserve(cand.size());
        for (auto g : cand) {
            if (g != f) rest.push_back(g);
        }
        const auto s = scorer.encode(rest, skeleton_nodes);
        if (scorer.feature_given(f, s) <= delta1) {
            cand.erase(std::find(cand.begin(), cand.end(), f));
        }
    }
    out.pc = std::move(cand);
    return out;
}

/// Phase 2b: spouses found through V-structures with a PC member.
inline std::vector<std::size_t> discover_spouses(CategoryScorer& scorer, const std::vector<std::size_t>& pc,
                                                 const LabelSkeleton& skeleton, double delta1)
{
    std::vector<std::size_t> spouses;
    if (pc.empty()) return spouses;

    const auto skeleton_nodes = detail::nodes_of(skeleton);
    const auto given_skeleton = scorer.encode({}, skeleton_nodes);

    // Independence given the skeleton does not depend on x; evaluate it once per z.
    std::vector<std::size_t> independent;
    for (std::size_t z = 0; z < scorer.n_features(); ++z) {
        if (detail::contains(pc, z)) continue;
        const double v = skeleton.empty() ? scorer.marginal(z) : scorer.feature_given(z, given_skeleton);
        if (v <= delta1) independent.push_back(z);
    }

    for (std::size_t x : pc) {
        const auto s = scorer.encode({x}, skeleton_nodes);
        for (std::size_t z : independent) {
            if (detail::contains(spouses, z)) continue;
            if (scorer.feature_given(z, s) > delta1) spouses.push_back(z);
        }
    }
    return spouses;
}

struct Recovery {
    std::vector<std::size_t> cmb;        // input blanket with recovered features appended
    std::vector<std::size_t> recovered;  // appended features, in order
    LabelSkeleton skeleton;              // skeleton minus evicted blockers
};

/// Phase 3: restore features masked by a correlated label category.
inline Recovery recover_features(CategoryScorer& scorer, const std::vector<std::size_t>& cmb,
                                 LabelSkeleton skeleton, const std::vector<std::size_t>& pc, double delta1)
{
    Recovery out{cmb, {}, std::move(skeleton)};
    if (out.skeleton.empty()) return out;

    // Per-blocker conditioning and blocker score; rebuilt after each eviction.
    struct BlockerCache {
        std::optional<info::EncodedConditioning> base;
        double blocker_score = 0.0;
    };
    std::vector<BlockerCache> cache;
    auto reset_cache = [&] { cache.assign(out.skeleton.size(), BlockerCache{}); };
    reset_cache();

    for (std::size_t f = 0; f < scorer.n_features(); ++f) {
        if (detail::contains(cmb, f)) continue;
        if (scorer.marginal(f) < delta1 / 2.0) continue;
        for (std::size_t b = 0; b < out.skeleton.size(); ++b) {
            auto& entry = cache[b];
            if (!entry.base) {
                entry.base.emplace(scorer.encode(pc, detail::nodes_of(out.skeleton, b)));
                entry.blocker_score = scorer.category_given(*out.skeleton.members[b].node, *entry.base);
            }
            if (scorer.feature_given(f, *entry.base) > entry.blocker_score) {
                out.cmb.push_back(f);
                out.recovered.push_back(f);
                out.skeleton.members.erase(out.skeleton.members.begin() + static_cast<std::ptrdiff_t>(b));
                reset_cache();
                break;
            }
        }
        if (out.skeleton.empty()) break;
    }
    return out;
}

/// Phase 4: truncation, marginal dependency check and cross-label redundancy.
/// `other_categories` are all categories of labels other than the target's.
inline std::vector<std::size_t> refine_cmb(CategoryScorer& scorer, std::vector<std::size_t> cmb,
                                           const std::vector<CategoryNode>& other_categories, double delta1,
                                           double k2_fraction, double gamma)
{
    sort_by_score(cmb, [&](std::size_t f) { return scorer.marginal(f); });
    if (!cmb.empty()) cmb.resize(std::min(cmb.size(), fraction_cap(k2_fraction, scorer.n_features())));

    std::erase_if(cmb, [&](std::size_t f) { return scorer.marginal(f) <= delta1; });

    const auto target_label = scorer.target().label_index;
    std::erase_if(cmb, [&](std::size_t f) {
        const double own = scorer.marginal(f);
        for (const auto& other : other_categories) {
            if (other.label_index == target_label) continue;
            if (scorer.feature_against(f, other) > gamma * own) return true;
        }
        return false;
    });
    return cmb;
}

/// Linear-interpolation quantile of the strictly positive values; nullopt if none.
inline std::optional<double> positive_quantile(std::vector<double> values, double q)
{
    std::erase_if(values, [](double v) { return !(v > 0.0); });
    if (values.empty()) return std::nullopt;
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

/// Runs all four phases for one target category.
/// Runs phases 1-3 once, then finishes phase 4 for each value in `k2_values`.
/// Phase 4 is the only place k2 enters, so each result equals a full run with that k2.
inline std::vector<CausalNeighborhood> select_for_category_k2(const Dataset& ds, const CategoryNode& target,
                                                              const std::vector<CategoryNode>& all_categories,
                                                              const CamcfConfig& config,
                                                              std::span<const double> k2_values)
{
    using clock = std::chrono::steady_clock;
    CategoryScorer scorer(ds, target, config.max_conditioning_size);
    CausalNeighborhood hood;
    hood.target = key_of(target);
    hood.support = target.support;

    std::vector<CategoryNode> others;
    for (const auto& c : all_categories) {
        if (c.label_index != target.label_index) others.push_back(c);
    }

    std::size_t tests_before = 0;
    auto t0 = clock::now();
    auto close_phase = [&](CausalNeighborhood& h, Phase p) {
        const auto t1 = clock::now();
        h.trace.duration_ms[p] = std::chrono::duration<double, std::milli>(t1 - t0).count();
        h.trace.ci_tests[p] = scorer.tests() - tests_before;
        tests_before = scorer.tests();
        t0 = t1;
    };

    double delta1 = config.delta1;
    if (config.threshold_mode == ThresholdMode::quantile_adaptive) {
        std::vector<double> scores(ds.n_features());
        for (std::size_t f = 0; f < ds.n_features(); ++f) scores[f] = scorer.marginal(f);
        if (auto q = positive_quantile(scores, config.adaptive_quantile)) delta1 = *q;
    }
    hood.delta1 = delta1;

    hood.skeleton = build_label_skeleton(scorer, others, config.delta2);
    close_phase(hood, kSkeleton);

    auto pcd = discover_pc(scorer, hood.skeleton, delta1, config.k1_fraction);
    hood.pc = pcd.pc;
    hood.sp = discover_spouses(scorer, hood.pc, hood.skeleton, delta1);
    std::vector<std::size_t> cmb = hood.pc;
    cmb.insert(cmb.end(), hood.sp.begin(), hood.sp.end());
    hood.trace.phase_sets[kSkeleton] = std::move(pcd.screened);
    hood.trace.phase_sets[kStructure] = cmb;
    close_phase(hood, kStructure);

    auto rec = recover_features(scorer, cmb, hood.skeleton, hood.pc, delta1);
    hood.recovered = std::move(rec.recovered);
    hood.pruned_skeleton = std::move(rec.skeleton);
    hood.trace.phase_sets[kRecovery] = rec.cmb;
    close_phase(hood, kRecovery);

    hood.trace.capped_conditioning = scorer.capped();
    // Node pointers refer to `others`, which does not outlive this call.
    for (auto& m : hood.skeleton.members) m.node = nullptr;
    for (auto& m : hood.pruned_skeleton.members) m.node = nullptr;

    std::vector<CausalNeighborhood> out;
    out.reserve(k2_values.size());
    for (double k2 : k2_values) {
        CausalNeighborhood h = hood;
        h.final_cmb = refine_cmb(scorer, rec.cmb, others, delta1, k2, config.gamma);
        h.trace.phase_sets[kRefinement] = h.final_cmb;
        close_phase(h, kRefinement);
        out.push_back(std::move(h));
    }
    return out;
}

inline CausalNeighborhood select_for_category(const Dataset& ds, const CategoryNode& target,
                                              const std::vector<CategoryNode>& all_categories,
                                              const CamcfConfig& config)
{
    const double k2 = config.k2_fraction;
    return std::move(select_for_category_k2(ds, target, all_categories, config, {&k2, 1}).front());
}

/// Splits flattened categories into selection targets and skipped ones.
inline std::vector<std::size_t> eligible_targets(const Dataset& ds, const std::vector<CategoryNode>& categories,
                                                 const CamcfConfig& config, std::vector<SkippedCategory>* skipped)
{
    std::vector<std::size_t> targets;
    for (std::size_t i = 0; i < categories.size(); ++i) {
        const auto& c = categories[i];
        if (c.support < config.min_category_support) {
            if (skipped) skipped->push_back({key_of(c), c.support, "support below minimum"});
            continue;
        }
        if (config.dedup_binary && ds.label(c.label_index).arity == 2 && c.category_value == 0) {
            if (skipped) skipped->push_back({key_of(c), c.support, "binary complement skipped"});
            continue;
        }
        targets.push_back(i);
    }
    return targets;
}

/// One selection per value in `k2_values`, sharing phases 1-3. Result i equals
/// run_camcf with k2_fraction = k2_values[i].
inline std::vector<SelectionResult> run_camcf_k2_sweep(const Dataset& ds, const CamcfConfig& config,
                                                       std::span<const double> k2_values)
{
    config.validate();
    for (double k2 : k2_values) {
        auto c = config;
        c.k2_fraction = k2;
        c.validate();
    }
    const std::size_t variants = k2_values.size();
    std::vector<SelectionResult> results(variants);
    const auto categories = flatten_labels(ds, 1);
    std::vector<SkippedCategory> skipped;
    const auto targets = eligible_targets(ds, categories, config, &skipped);

    std::vector<std::vector<CausalNeighborhood>> hoods(targets.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (std::size_t i = next++; i < targets.size(); i = next++) {
            try {
                hoods[i] = select_for_category_k2(ds, categories[targets[i]], categories, config, k2_values);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::min(config.threads, std::max<std::size_t>(targets.size(), 1));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);

    auto dedup = [](std::vector<std::size_t>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    for (std::size_t k = 0; k < variants; ++k) {
        auto& result = results[k];
        result.skipped = skipped;
        std::array<std::vector<std::size_t>, kPhaseCount> snapshots;
        for (auto& per_target : hoods) {
            auto& hood = per_target[k];
            result.global_selected.insert(result.global_selected.end(), hood.final_cmb.begin(),
                                          hood.final_cmb.end());
            for (std::size_t p = 0; p < kPhaseCount; ++p) {
                const auto& set = hood.trace.phase_sets[p];
                snapshots[p].insert(snapshots[p].end(), set.begin(), set.end());
            }
            result.per_category.emplace(hood.target, std::move(hood));
        }
        dedup(result.global_selected);
        for (auto& s : snapshots) dedup(s);
        result.per_phase_snapshots = std::move(snapshots);
    }
    return results;
}

/// Full selection over every eligible category; the union of final blankets
/// is the selected subset. Deterministic for a given dataset and config,
/// independent of the thread count.
inline SelectionResult run_camcf(const Dataset& ds, const CamcfConfig& config)
{
    const double k2 = config.k2_fraction;
    return std::move(run_camcf_k2_sweep(ds, config, {&k2, 1}).front());
}

} // namespace camcf
