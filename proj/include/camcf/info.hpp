#pragma once

// Plug-in (maximum-likelihood) information measures over discrete columns.
// All values are in bits.
//
// Every quantity is reduced to sums of c*log2(c) over the cell counts of a
// contingency table. Those sums are accumulated from a histogram of counts
// ("count of counts") in ascending count order, so results are bit-identical
// under any permutation of rows and any relabeling of codes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "camcf/column.hpp"
#include "camcf/dataset.hpp"
#include "camcf/error.hpp"

namespace camcf::info {

/// Ordered conditioning members; may be empty.
using ConditioningSet = std::vector<ColumnView>;

namespace detail {

struct Scratch {
    std::vector<std::uint32_t> table;   // dense cell counts, kept all-zero between calls
    std::vector<std::uint32_t> freq;    // count-of-counts, kept all-zero between calls
    std::vector<std::uint32_t> remap;   // dense key -> compact code, kept at sentinel
    std::vector<std::uint64_t> keys;
};

inline Scratch& scratch()
{
    thread_local Scratch s;
    return s;
}

constexpr std::uint32_t kUnmapped = std::numeric_limits<std::uint32_t>::max();

inline std::uint64_t dense_limit(std::size_t n)
{
    return std::max<std::uint64_t>(std::uint64_t{1} << 16, std::uint64_t{8} * n);
}

inline double clogc(std::uint64_t c)
{
    const double d = static_cast<double>(c);
    return d * std::log2(d);
}

/// Sum of c*log2(c) over the nonzero cell counts of `key(i)`, i in [0, n).
template <class KeyFn>
double sum_clogc(std::size_t n, std::uint64_t key_space, KeyFn key)
{
    auto& s = scratch();
    if (s.freq.size() < n + 1) s.freq.resize(n + 1, 0);

    std::size_t top = 0;  // largest cell count seen
    if (key_space <= dense_limit(n)) {
        if (s.table.size() < key_space) s.table.resize(key_space, 0);
        for (std::size_t i = 0; i < n; ++i) ++s.table[key(i)];
        for (std::size_t i = 0; i < n; ++i) {
            auto& cell = s.table[key(i)];
            if (cell != 0) {
                ++s.freq[cell];
                top = std::max<std::size_t>(top, cell);
                cell = 0;
            }
        }
    } else {
        s.keys.resize(n);
        for (std::size_t i = 0; i < n; ++i) s.keys[i] = key(i);
        std::sort(s.keys.begin(), s.keys.end());
        std::size_t run = 1;
        for (std::size_t i = 1; i <= n; ++i) {
            if (i < n && s.keys[i] == s.keys[i - 1]) {
                ++run;
            } else {
                ++s.freq[run];
                top = std::max(top, run);
                run = 1;
            }
        }
    }

    double total = 0.0;
    for (std::size_t c = 1; c <= top; ++c) {
        if (s.freq[c] != 0) {
            total += static_cast<double>(s.freq[c]) * clogc(c);
            s.freq[c] = 0;
        }
    }
    return total;
}

/// Codes (a, b) -> compact joint code in first-appearance order.
inline DiscreteColumn compact_pair(ColumnView a, ColumnView b)
{
    const std::size_t n = a.size();
    const std::uint64_t space = std::uint64_t{a.arity} * b.arity;
    std::vector<Code> out(n);
    Code next = 0;
    if (space <= dense_limit(n)) {
        auto& remap = scratch().remap;
        if (remap.size() < space) remap.resize(space, kUnmapped);
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint64_t k = std::uint64_t{a.codes[i]} * b.arity + b.codes[i];
            if (remap[k] == kUnmapped) remap[k] = next++;
            out[i] = remap[k];
        }
        for (std::size_t i = 0; i < n; ++i) {
            remap[std::uint64_t{a.codes[i]} * b.arity + b.codes[i]] = kUnmapped;
        }
    } else {
        std::unordered_map<std::uint64_t, Code> remap;
        remap.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint64_t k = std::uint64_t{a.codes[i]} * b.arity + b.codes[i];
            auto [it, fresh] = remap.try_emplace(k, next);
            if (fresh) ++next;
            out[i] = it->second;
        }
    }
    return DiscreteColumn(std::move(out), std::max<Code>(next, 1));
}

inline void require_same_length(std::size_t a, std::size_t b)
{
    if (a != b) {
        throw Error("column length mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
    }
}

/// Keeps key spaces bounded: columns with arity above their length are compacted.
class Tamed {
public:
    explicit Tamed(ColumnView v)
    {
        if (v.arity > v.size() + 1) {
            const std::vector<Code> zeros(v.size(), 0);
            owned_ = compact_pair(ColumnView{zeros, 1}, v);
            view_ = owned_.view();
        } else {
            view_ = v;
        }
    }
    ColumnView view() const { return view_; }

private:
    DiscreteColumn owned_;
    ColumnView view_;
};

inline double sum_clogc(ColumnView x)
{
    return sum_clogc(x.size(), x.arity, [&](std::size_t i) { return std::uint64_t{x.codes[i]}; });
}

inline double sum_clogc(ColumnView x, ColumnView y)
{
    return sum_clogc(x.size(), std::uint64_t{x.arity} * y.arity,
                     [&](std::size_t i) { return std::uint64_t{x.codes[i]} * y.arity + y.codes[i]; });
}

inline double sum_clogc(ColumnView x, ColumnView y, ColumnView z)
{
    return sum_clogc(x.size(), std::uint64_t{x.arity} * y.arity * z.arity, [&](std::size_t i) {
        return (std::uint64_t{x.codes[i]} * y.arity + y.codes[i]) * z.arity + z.codes[i];
    });
}

inline double clamp_nonnegative(double v) { return v < 0.0 ? 0.0 : v; }

} // namespace detail

/// Joint encoding: two rows share a code iff they agree on every input column.
/// Arity is the number of distinct observed joint states. The empty sequence
/// encodes as the constant column of length `n_samples`.
inline DiscreteColumn joint_encode(std::span<const ColumnView> columns, std::size_t n_samples)
{
    for (const auto& c : columns) detail::require_same_length(c.size(), n_samples);
    DiscreteColumn acc(std::vector<Code>(n_samples, 0), 1);
    for (const auto& c : columns) acc = detail::compact_pair(acc.view(), c);
    return acc;
}

inline DiscreteColumn joint_encode(std::span<const ColumnView> columns)
{
    if (columns.empty()) throw Error("joint_encode of an empty sequence needs an explicit sample count");
    return joint_encode(columns, columns.front().size());
}

/// A conditioning set collapsed into a single joint column, reusable across tests.
class EncodedConditioning {
public:
    EncodedConditioning(std::span<const ColumnView> members, std::size_t n_samples)
        : column_(joint_encode(members, n_samples)), members_(members.size())
    {
    }

    ColumnView view() const { return column_.view(); }
    std::size_t member_count() const { return members_; }
    Code states() const { return column_.arity; }

private:
    DiscreteColumn column_;
    std::size_t members_ = 0;
};

inline double entropy(ColumnView x)
{
    if (x.size() == 0) throw Error("entropy of an empty column");
    const detail::Tamed tx(x);
    const double n = static_cast<double>(x.size());
    return detail::clamp_nonnegative(std::log2(n) - detail::sum_clogc(tx.view()) / n);
}

inline double mutual_information(ColumnView x, ColumnView y)
{
    detail::require_same_length(x.size(), y.size());
    if (x.size() == 0) return 0.0;
    const detail::Tamed tx(x), ty(y);
    const std::size_t n = x.size();
    const double v = detail::sum_clogc(tx.view(), ty.view()) + detail::clogc(n) -
                     detail::sum_clogc(tx.view()) - detail::sum_clogc(ty.view());
    return detail::clamp_nonnegative(v / static_cast<double>(n));
}

/// I(X;Y|S) with S given as an already-encoded joint column.
inline double conditional_mutual_information(ColumnView x, ColumnView y, const EncodedConditioning& s)
{
    detail::require_same_length(x.size(), y.size());
    detail::require_same_length(x.size(), s.view().size());
    if (x.size() == 0) return 0.0;
    if (s.states() == 1) return mutual_information(x, y);
    const detail::Tamed tx(x), ty(y);
    const ColumnView sv = s.view();
    const double v = detail::sum_clogc(sv, tx.view(), ty.view()) + detail::sum_clogc(sv) -
                     detail::sum_clogc(sv, tx.view()) - detail::sum_clogc(sv, ty.view());
    return detail::clamp_nonnegative(v / static_cast<double>(x.size()));
}

inline double conditional_mutual_information(ColumnView x, ColumnView y, std::span<const ColumnView> s)
{
    detail::require_same_length(x.size(), y.size());
    if (s.empty()) return mutual_information(x, y);
    return conditional_mutual_information(x, y, EncodedConditioning(s, x.size()));
}

/// Feature-to-category information, optionally conditioned.
inline double scsmi(ColumnView feature, const CategoryNode& target, std::span<const ColumnView> s = {})
{
    return conditional_mutual_information(feature, target.view(), s);
}

inline double scsmi(ColumnView feature, const CategoryNode& target, const EncodedConditioning& s)
{
    return conditional_mutual_information(feature, target.view(), s);
}

/// Category-to-category information, optionally conditioned.
inline double dcsmi(const CategoryNode& a, const CategoryNode& b, std::span<const ColumnView> s = {})
{
    return conditional_mutual_information(a.view(), b.view(), s);
}

inline double dcsmi(const CategoryNode& a, const CategoryNode& b, const EncodedConditioning& s)
{
    return conditional_mutual_information(a.view(), b.view(), s);
}

} // namespace camcf::info
