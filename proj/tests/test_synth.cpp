#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "support.hpp"

using namespace camcf;
using namespace camcf::synth;
using namespace fixture;

namespace {

std::size_t edge_count(const BnSpec& bn)
{
    std::size_t e = 0;
    for (const auto& n : bn.nodes) e += n.parents.size();
    return e;
}

/// Column of node v in a sampled dataset.
const DiscreteColumn& column(const Dataset& ds, const BnSpec& bn, std::size_t v)
{
    return bn.nodes[v].kind == NodeKind::feature ? ds.feature(bn.column_of(v)) : ds.label(bn.column_of(v));
}

std::set<std::size_t> node_blanket(const BnSpec& bn, std::size_t v)
{
    std::set<std::size_t> mb(bn.nodes[v].parents.begin(), bn.nodes[v].parents.end());
    for (std::size_t c = 0; c < bn.size(); ++c) {
        const auto& ps = bn.nodes[c].parents;
        if (std::find(ps.begin(), ps.end(), v) == ps.end()) continue;
        mb.insert(c);
        mb.insert(ps.begin(), ps.end());
    }
    mb.erase(v);
    return mb;
}

} // namespace

TEST(GenerateDag, NoEdgesAtZeroProbability)
{
    const auto bn = generate_dag(5, 2, 0.0, 2, 1);
    EXPECT_EQ(edge_count(bn), 0u);
    EXPECT_NO_THROW(bn.validate());
}

TEST(GenerateDag, FullDagAtProbabilityOne)
{
    const auto bn = generate_dag(2, 1, 1.0, 2, 9);
    EXPECT_EQ(edge_count(bn), 3u);
    const auto order = bn.topological_order();
    for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(bn.nodes[order[i]].parents.size(), i);
}

TEST(GenerateDag, SeedRepeatable)
{
    EXPECT_EQ(generate_dag(8, 3, 0.3, 3, 42).nodes, generate_dag(8, 3, 0.3, 3, 42).nodes);
    EXPECT_NE(generate_dag(8, 3, 0.3, 3, 42).nodes, generate_dag(8, 3, 0.3, 3, 43).nodes);
}

TEST(GenerateDag, StrongEdgeRows)
{
    DagOptions opts;
    opts.mode = CptMode::strong_edge;
    const auto bn = generate_dag(6, 2, 0.5, 2, 5, opts);
    bn.validate();
    for (const auto& n : bn.nodes) {
        for (const auto& row : n.cpt) {
            const double top = *std::max_element(row.begin(), row.end());
            if (n.parents.empty()) EXPECT_NEAR(top, 1.0 / n.arity, 1e-12);
            else EXPECT_NEAR(top, 0.9, 1e-12);
        }
    }
}

TEST(BnSpec, CycleAndBadRowsRejected)
{
    BnSpec bn;
    bn.nodes.push_back({"a", NodeKind::feature, 2, {1}, copy_rows(0.9)});
    bn.nodes.push_back({"b", NodeKind::label, 2, {0}, copy_rows(0.9)});
    EXPECT_THROW(bn.topological_order(), Error);
    BnSpec bad;
    bad.nodes.push_back({"a", NodeKind::feature, 2, {}, {{0.5, 0.4}}});
    EXPECT_THROW(bad.validate(), Error);
    BnSpec short_cpt;
    short_cpt.nodes.push_back({"a", NodeKind::feature, 2, {}, uniform_root()});
    short_cpt.nodes.push_back({"b", NodeKind::label, 2, {0}, uniform_root()});
    EXPECT_THROW(short_cpt.validate(), Error);
}

TEST(ForwardSample, ConstantCptsGiveConstantColumns)
{
    BnSpec bn;
    bn.nodes.push_back({"a", NodeKind::feature, 3, {}, {{0.0, 0.0, 1.0}}});
    bn.nodes.push_back({"b", NodeKind::label, 2, {0}, {{1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}}});
    const auto ds = forward_sample(bn, 100, 3);
    EXPECT_EQ(ds.feature(0).codes, Codes(100, 2));
    EXPECT_EQ(ds.label(0).codes, Codes(100, 0));
}

TEST(ForwardSample, FairCoinMean)
{
    const auto ds = forward_sample(chain_bn(0), 10000, 17);
    double mean = 0;
    for (auto c : ds.feature(0).codes) mean += c;
    mean /= 10000.0;
    // Binomial standard error 0.005; 3 sigma is about 0.015.
    EXPECT_NEAR(mean, 0.5, 0.02);
}

TEST(ForwardSample, SeedRepeatable)
{
    const auto bn = generate_dag(6, 2, 0.3, 2, 1);
    EXPECT_EQ(forward_sample(bn, 500, 9), forward_sample(bn, 500, 9));
    EXPECT_FALSE(forward_sample(bn, 500, 9) == forward_sample(bn, 500, 10));
}

TEST(TrueMarkovBlanket, Examples)
{
    BnSpec iso;
    iso.nodes.push_back({"f", NodeKind::feature, 2, {}, uniform_root()});
    iso.nodes.push_back({"C", NodeKind::label, 2, {}, uniform_root()});
    EXPECT_TRUE(true_markov_blanket(iso, 1).empty());

    // X -> C -> Y.
    BnSpec chain;
    chain.nodes.push_back({"X", NodeKind::feature, 2, {}, uniform_root()});
    chain.nodes.push_back({"C", NodeKind::label, 2, {0}, copy_rows(0.9)});
    chain.nodes.push_back({"Y", NodeKind::feature, 2, {1}, copy_rows(0.9)});
    chain.nodes.push_back({"N", NodeKind::feature, 2, {}, uniform_root()});
    EXPECT_EQ(true_markov_blanket(chain, 1), (std::vector<std::size_t>{0, 1}));

    // C -> W <- Z: Z is feature 0, W feature 1.
    EXPECT_EQ(true_markov_blanket(collider_bn(), 0), (std::vector<std::size_t>{0, 1}));
}

TEST(TrueMarkovBlanket, SpouseRelationIsSymmetric)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto bn = generate_dag(6, 3, 0.35, 2, seed);
        for (std::size_t u = 0; u < bn.size(); ++u) {
            for (std::size_t v = 0; v < bn.size(); ++v) {
                if (u == v) continue;
                EXPECT_EQ(node_blanket(bn, u).count(v), node_blanket(bn, v).count(u));
            }
            if (bn.nodes[u].kind != NodeKind::label) continue;
            std::vector<std::size_t> want;
            for (auto w : node_blanket(bn, u)) {
                if (bn.nodes[w].kind == NodeKind::feature) want.push_back(bn.column_of(w));
            }
            std::sort(want.begin(), want.end());
            EXPECT_EQ(true_markov_blanket(bn, u), want);
        }
    }
}

TEST(DSeparation, Basics)
{
    // C -> W <- Z plus independent noise.
    const auto bn = collider_bn(1);
    EXPECT_TRUE(d_separated(bn, 0, 1, {}));
    EXPECT_FALSE(d_separated(bn, 0, 1, {2}));
    EXPECT_FALSE(d_separated(bn, 0, 2, {}));
    EXPECT_TRUE(d_separated(bn, 3, 0, {2}));
}

TEST(DSeparation, SamplesRespectIndependences)
{
    // Plug-in CMI bias is about df / (2 N ln 2); with df <= 36 and N = 20000
    // that is below 0.0013 bits, well inside the 0.01 tolerance.
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto bn = generate_dag(4, 2, 0.4, static_cast<Code>(2 + seed % 2), seed);
        const auto ds = forward_sample(bn, 20000, seed + 100);
        const std::size_t n = bn.size();
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                std::vector<std::vector<std::size_t>> sets{{}};
                for (std::size_t s = 0; s < n; ++s) {
                    if (s == a || s == b) continue;
                    sets.push_back({s});
                    for (std::size_t t = s + 1; t < n; ++t) {
                        if (t != a && t != b) sets.push_back({s, t});
                    }
                }
                for (const auto& s : sets) {
                    if (!d_separated(bn, a, b, s)) continue;
                    std::vector<ColumnView> views;
                    for (auto v : s) views.push_back(column(ds, bn, v));
                    const double v = info::conditional_mutual_information(column(ds, bn, a), column(ds, bn, b), views);
                    EXPECT_LT(v, 0.01) << "seed " << seed << " pair " << a << "," << b;
                    ++checked;
                }
            }
        }
    }
    EXPECT_GT(checked, 50u);
}

TEST(BruteForceMb, Examples)
{
    synth::Rng rng(3);
    const std::size_t n = 5000;
    std::vector<Codes> f(4);
    for (auto& c : f) c = random_codes(rng, n, 2);
    const auto t = random_codes(rng, n, 2);
    const auto indep = Dataset::from_codes(f, {t});
    EXPECT_TRUE(brute_force_mb(indep, flatten_labels(indep)[1], 0.01).empty());

    f[2] = t;
    const auto copy = Dataset::from_codes(f, {t});
    EXPECT_EQ(brute_force_mb(copy, flatten_labels(copy)[1], 0.01), (std::vector<std::size_t>{2}));

    const auto col = forward_sample(collider_bn(), n, 4);
    const auto mb = brute_force_mb(col, flatten_labels(col)[1], 0.01);
    EXPECT_EQ(mb, (std::vector<std::size_t>{0, 1}));
}

TEST(BruteForceMb, RefusesLargeProblems)
{
    const auto ds = forward_sample(generate_dag(13, 1, 0.1, 2, 1), 50, 1);
    EXPECT_THROW(brute_force_mb(ds, flatten_labels(ds)[0], 0.01), Error);
}

TEST(BnText, RoundTrip)
{
    DagOptions opts;
    opts.label_arity = 3;
    const auto bn = generate_dag(5, 2, 0.4, 3, 8, opts);
    const auto text = to_text(bn);
    const auto back = from_text(text);
    EXPECT_EQ(back.nodes, bn.nodes);
    EXPECT_EQ(to_text(back), text);
    EXPECT_EQ(text.rfind("camcf-bn 1\n", 0), 0u);
}

TEST(BnText, MalformedInputRejected)
{
    EXPECT_THROW(from_text("not-a-bn 1\n"), Error);
    EXPECT_THROW(from_text("camcf-bn 2\nnodes 0\nend\n"), Error);
    auto text = to_text(chain_bn(1));
    text.resize(text.size() / 2);
    EXPECT_THROW(from_text(text), Error);
}
