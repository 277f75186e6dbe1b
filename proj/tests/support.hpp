#pragma once

// Shared fixtures and independent oracles for the test binaries.
// The oracles work from explicit probability tables and never call into
// the count-based estimator they are checking.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "camcf/camcf.hpp"

namespace fixture {

using camcf::Code;
using camcf::ColumnView;
using camcf::DiscreteColumn;
using Codes = std::vector<Code>;

inline DiscreteColumn col(Codes c) { return DiscreteColumn::from_codes(std::move(c)); }

inline camcf::CategoryNode node_from(const Codes& indicator, std::size_t label = 0, Code value = 1)
{
    camcf::CategoryNode n;
    n.label_index = label;
    n.category_value = value;
    n.indicator = DiscreteColumn(indicator, 2);
    for (auto c : indicator) n.support += c;
    return n;
}

// --- probability-table oracle --------------------------------------------

using Key = std::vector<Code>;

inline std::map<Key, double> joint_probs(const std::vector<const Codes*>& cols)
{
    std::map<Key, double> p;
    const std::size_t n = cols.front()->size();
    for (std::size_t i = 0; i < n; ++i) {
        Key k;
        for (const auto* c : cols) k.push_back((*c)[i]);
        p[k] += 1.0 / static_cast<double>(n);
    }
    return p;
}

inline double oracle_entropy(const Codes& x)
{
    double h = 0.0;
    for (const auto& [k, p] : joint_probs({&x})) h -= p * std::log2(p);
    return h;
}

/// I(X;Y|S) = sum p(x,y,s) log2[p(x,y,s) p(s) / (p(x,s) p(y,s))].
inline double oracle_cmi(const Codes& x, const Codes& y, const std::vector<Codes>& s)
{
    std::vector<const Codes*> xys{&x, &y}, xs{&x}, ys{&y}, ss;
    for (const auto& c : s) {
        xys.push_back(&c);
        xs.push_back(&c);
        ys.push_back(&c);
        ss.push_back(&c);
    }
    const auto pxys = joint_probs(xys);
    const auto pxs = joint_probs(xs);
    const auto pys = joint_probs(ys);
    std::map<Key, double> ps;
    if (ss.empty()) ps[{}] = 1.0;
    else ps = joint_probs(ss);
    double total = 0.0;
    for (const auto& [k, p] : pxys) {
        Key kx{k[0]}, ky{k[1]}, kz;
        for (std::size_t i = 2; i < k.size(); ++i) {
            kx.push_back(k[i]);
            ky.push_back(k[i]);
            kz.push_back(k[i]);
        }
        total += p * std::log2(p * ps.at(kz) / (pxs.at(kx) * pys.at(ky)));
    }
    return total < 0.0 ? 0.0 : total;
}

inline double oracle_mi(const Codes& x, const Codes& y) { return oracle_cmi(x, y, {}); }

// --- random data ------------------------------------------------------------

inline Codes random_codes(camcf::synth::Rng& rng, std::size_t n, Code arity)
{
    Codes c(n);
    for (auto& v : c) v = static_cast<Code>(rng.below(arity));
    return c;
}

/// Small random dataset with planted dependence so selections are nonempty.
inline camcf::Dataset random_dataset(std::uint64_t seed, std::size_t n = 300, std::size_t m = 8,
                                     std::size_t l = 3)
{
    camcf::synth::Rng rng(seed);
    std::vector<Codes> features, labels;
    for (std::size_t j = 0; j < m; ++j) features.push_back(random_codes(rng, n, static_cast<Code>(2 + rng.below(3))));
    for (std::size_t j = 0; j < l; ++j) {
        const Code arity = static_cast<Code>(2 + rng.below(2));
        const auto& src = features[rng.below(m)];
        Codes lab(n);
        for (std::size_t i = 0; i < n; ++i) {
            lab[i] = rng.coin(0.8) ? src[i] % arity : static_cast<Code>(rng.below(arity));
        }
        labels.push_back(std::move(lab));
    }
    return camcf::Dataset::from_codes(features, labels);
}

// --- hand-built networks ------------------------------------------------------

using camcf::synth::BnNode;
using camcf::synth::BnSpec;
using camcf::synth::NodeKind;

inline std::vector<std::vector<double>> uniform_root(Code k = 2)
{
    return {std::vector<double>(k, 1.0 / k)};
}

/// Binary child that copies its single binary parent with probability p.
inline std::vector<std::vector<double>> copy_rows(double p) { return {{p, 1.0 - p}, {1.0 - p, p}}; }

inline void add_noise(BnSpec& bn, std::size_t count)
{
    for (std::size_t i = 0; i < count; ++i) {
        bn.nodes.push_back({"noise" + std::to_string(i), NodeKind::feature, 2, {}, uniform_root()});
    }
}

/// X -> C plus `noise` independent features. Feature 0 is X.
inline BnSpec chain_bn(std::size_t noise = 10, double p = 0.9)
{
    BnSpec bn;
    bn.nodes.push_back({"X", NodeKind::feature, 2, {}, uniform_root()});
    bn.nodes.push_back({"C", NodeKind::label, 2, {0}, copy_rows(p)});
    add_noise(bn, noise);
    return bn;
}

/// C -> W <- Z where W leans to 1 with each parent that is 1. Z is feature 0, W feature 1.
inline BnSpec collider_bn(std::size_t noise = 4, double p = 0.95)
{
    BnSpec bn;
    bn.nodes.push_back({"C", NodeKind::label, 2, {}, uniform_root()});
    bn.nodes.push_back({"Z", NodeKind::feature, 2, {}, uniform_root()});
    // parents (C, Z): rows 00, 01, 10, 11.
    bn.nodes.push_back({"W", NodeKind::feature, 2, {0, 1}, {{p, 1 - p}, {0.5, 0.5}, {0.5, 0.5}, {1 - p, p}}});
    add_noise(bn, noise);
    return bn;
}

/// X drives the target label Ci (copy prob p_target) and a second label Cj
/// (copy prob p_other). Given Cj, X carries little extra information about
/// Ci, so a skeleton containing Cj masks X. Feature 0 is X.
inline BnSpec blocking_bn(std::size_t noise = 6, double p_target = 0.85, double p_other = 0.98)
{
    BnSpec bn;
    bn.nodes.push_back({"X", NodeKind::feature, 2, {}, uniform_root()});
    bn.nodes.push_back({"Ci", NodeKind::label, 2, {0}, copy_rows(p_target)});
    bn.nodes.push_back({"Cj", NodeKind::label, 2, {0}, copy_rows(p_other)});
    add_noise(bn, noise);
    return bn;
}

inline double set_f1(const std::vector<std::size_t>& got, const std::vector<std::size_t>& want)
{
    if (got.empty() && want.empty()) return 1.0;
    std::size_t tp = 0;
    for (auto g : got) tp += std::find(want.begin(), want.end(), g) != want.end();
    if (tp == 0) return 0.0;
    const double prec = static_cast<double>(tp) / static_cast<double>(got.size());
    const double rec = static_cast<double>(tp) / static_cast<double>(want.size());
    return 2.0 * prec * rec / (prec + rec);
}

} // namespace fixture
