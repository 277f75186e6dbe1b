#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "support.hpp"

using namespace camcf;
using namespace fixture;
namespace ci = camcf::info;

namespace {

double cmi(const Codes& x, const Codes& y, const std::vector<Codes>& s)
{
    std::vector<DiscreteColumn> cols;
    for (const auto& c : s) cols.push_back(col(c));
    std::vector<ColumnView> views(cols.begin(), cols.end());
    return ci::conditional_mutual_information(col(x).view(), col(y).view(), views);
}

double mi(const Codes& x, const Codes& y) { return ci::mutual_information(col(x).view(), col(y).view()); }

} // namespace

TEST(Entropy, HandValues)
{
    EXPECT_DOUBLE_EQ(ci::entropy(col({0, 1, 0, 1})), 1.0);
    EXPECT_DOUBLE_EQ(ci::entropy(col({0, 0, 0, 0})), 0.0);
    // -(1/2)log(1/2) - 2(1/4)log(1/4) = 0.5 + 1.0
    EXPECT_NEAR(ci::entropy(col({0, 0, 1, 2})), 1.5, 1e-12);
}

TEST(Entropy, EmptyColumnThrows)
{
    EXPECT_THROW(ci::entropy(DiscreteColumn{}), Error);
}

TEST(JointEncode, DistinctStates)
{
    auto a = col({0, 1, 0, 1}), b = col({0, 0, 1, 1});
    std::vector<ColumnView> v{a, b};
    auto j = ci::joint_encode(v);
    EXPECT_EQ(j.arity, 4u);
    EXPECT_EQ(std::set<Code>(j.codes.begin(), j.codes.end()).size(), 4u);
}

TEST(JointEncode, DuplicateColumnAddsNothing)
{
    auto a = col({0, 0, 1, 1});
    std::vector<ColumnView> v{a, a};
    EXPECT_EQ(ci::joint_encode(v).arity, 2u);
}

TEST(JointEncode, EmptySetIsConstant)
{
    auto j = ci::joint_encode({}, 3);
    EXPECT_EQ(j.codes, (Codes{0, 0, 0}));
    EXPECT_EQ(j.arity, 1u);
}

TEST(JointEncode, FirstAppearanceCodes)
{
    auto a = col({2, 0, 2, 1}), b = col({1, 1, 1, 0});
    std::vector<ColumnView> v{a, b};
    EXPECT_EQ(ci::joint_encode(v).codes, (Codes{0, 1, 0, 2}));
}

TEST(MutualInformation, HandValues)
{
    EXPECT_NEAR(mi({0, 0, 1, 1}, {0, 0, 1, 1}), 1.0, 1e-12);
    EXPECT_NEAR(mi({0, 0, 1, 1}, {0, 1, 0, 1}), 0.0, 1e-12);
    // Joint counts (0,0):1 (0,1):1 (1,1):2; marginals X {2,2}, Y {1,3}.
    // I = 1/4 log2(1/4 / (1/2*1/4)) + 1/4 log2(1/4 / (1/2*3/4)) + 1/2 log2(1/2 / (1/2*3/4))
    const double want = 0.25 * std::log2(2.0) + 0.25 * std::log2(2.0 / 3.0) + 0.5 * std::log2(4.0 / 3.0);
    EXPECT_NEAR(mi({0, 0, 1, 1}, {0, 1, 1, 1}), want, 1e-12);
    EXPECT_NEAR(want, 0.311278124459133, 1e-12);
}

TEST(ConditionalMutualInformation, XorCollider)
{
    const Codes x{0, 0, 1, 1}, y{0, 1, 0, 1}, z{0, 1, 1, 0};
    EXPECT_NEAR(cmi(x, z, {}), 0.0, 1e-12);
    EXPECT_NEAR(cmi(x, z, {y}), 1.0, 1e-12);
}

TEST(ConditionalMutualInformation, ConditioningOnYRemovesDependence)
{
    synth::Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        auto x = random_codes(rng, 20, 3), y = random_codes(rng, 20, 3), w = random_codes(rng, 20, 2);
        EXPECT_NEAR(cmi(x, y, {y}), 0.0, 1e-12);
        EXPECT_NEAR(cmi(x, y, {w, y}), 0.0, 1e-12);
    }
}

TEST(ConditionalMutualInformation, EmptySetEqualsMi)
{
    synth::Rng rng(4);
    for (int t = 0; t < 50; ++t) {
        auto x = random_codes(rng, 30, 3), y = random_codes(rng, 30, 4);
        EXPECT_EQ(cmi(x, y, {}), mi(x, y));
    }
}

TEST(ConditionalMutualInformation, LengthMismatchThrows)
{
    EXPECT_THROW(mi({0, 1}, {0, 1, 1}), Error);
}

TEST(Scsmi, IdentityAndConstant)
{
    const Codes ind{0, 1, 1, 0, 1, 0, 0, 0};
    auto target = node_from(ind);
    EXPECT_NEAR(ci::scsmi(col(ind), target), ci::entropy(col(ind)), 1e-12);
    EXPECT_EQ(ci::scsmi(col({3, 3, 3, 3, 3, 3, 3, 3}), target), 0.0);
}

TEST(Scsmi, ColliderSpouse)
{
    const auto bn = collider_bn();
    const auto ds = synth::forward_sample(bn, 5000, 11);
    const auto target = flatten_labels(ds)[1];  // category 1 of C
    const auto& z = ds.feature(0);
    const auto& w = ds.feature(1);
    const double marginal = ci::scsmi(z, target);
    std::vector<ColumnView> s{w};
    const double given_child = ci::scsmi(z, target, s);
    EXPECT_LT(marginal, 0.005);
    EXPECT_GT(given_child, 0.03);
    EXPECT_NEAR(marginal, oracle_mi(z.codes, target.indicator.codes), 1e-12);
    EXPECT_NEAR(given_child, oracle_cmi(z.codes, target.indicator.codes, {w.codes}), 1e-12);
}

TEST(Dcsmi, SelfAndComplement)
{
    const Codes label{0, 1, 1, 0, 1, 0, 0, 0, 1};
    const auto ds = Dataset::from_codes({label}, {label});
    const auto cats = flatten_labels(ds);
    ASSERT_EQ(cats.size(), 2u);
    const double h = ci::entropy(cats[1].indicator);
    EXPECT_NEAR(ci::dcsmi(cats[1], cats[1]), h, 1e-12);
    EXPECT_NEAR(ci::dcsmi(cats[0], cats[1]), h, 1e-12);
}

TEST(Dcsmi, IndependentLabelsFullEnumeration)
{
    // Every joint state of two binary labels exactly once: an exact product distribution.
    const auto ds = Dataset::from_codes({{0, 0, 0, 0}}, {{0, 0, 1, 1}, {0, 1, 0, 1}});
    const auto cats = flatten_labels(ds);
    EXPECT_EQ(ci::dcsmi(cats[1], cats[3]), 0.0);
}

TEST(Dcsmi, IndependentLabelsSampled)
{
    BnSpec bn;
    bn.nodes.push_back({"f", NodeKind::feature, 2, {}, uniform_root()});
    bn.nodes.push_back({"a", NodeKind::label, 2, {}, {{0.3, 0.7}}});
    bn.nodes.push_back({"b", NodeKind::label, 2, {}, {{0.6, 0.4}}});
    const auto ds = synth::forward_sample(bn, 5000, 2);
    const auto cats = flatten_labels(ds);
    const double v = ci::dcsmi(cats[1], cats[3]);
    EXPECT_LT(v, 0.002);
    EXPECT_NEAR(v, oracle_mi(cats[1].indicator.codes, cats[3].indicator.codes), 1e-12);
}

// --- properties ----------------------------------------------------------------

class InfoProperties : public ::testing::TestWithParam<int> {};

TEST_P(InfoProperties, NonnegativeSymmetricBounded)
{
    synth::Rng rng(static_cast<std::uint64_t>(GetParam()));
    const std::size_t n = 5 + rng.below(60);
    auto x = random_codes(rng, n, static_cast<Code>(1 + rng.below(4)));
    auto y = random_codes(rng, n, static_cast<Code>(1 + rng.below(4)));
    auto s1 = random_codes(rng, n, static_cast<Code>(1 + rng.below(3)));
    auto s2 = random_codes(rng, n, static_cast<Code>(1 + rng.below(3)));

    const double ixy = mi(x, y), iyx = mi(y, x);
    EXPECT_GE(ixy, 0.0);
    EXPECT_LE(std::abs(ixy - iyx), 1e-12);
    EXPECT_LE(ixy, std::min(ci::entropy(col(x)), ci::entropy(col(y))) + 1e-12);

    const double c1 = cmi(x, y, {s1, s2}), c2 = cmi(y, x, {s1, s2});
    EXPECT_GE(c1, 0.0);
    EXPECT_LE(std::abs(c1 - c2), 1e-12);
}

TEST_P(InfoProperties, ChainRule)
{
    synth::Rng rng(1000 + static_cast<std::uint64_t>(GetParam()));
    const std::size_t n = 5 + rng.below(80);
    auto x = random_codes(rng, n, 3), y = random_codes(rng, n, 3), z = random_codes(rng, n, 2);
    auto yc = col(y), zc = col(z);
    std::vector<ColumnView> yz{yc, zc};
    const auto joint = ci::joint_encode(yz);
    const double lhs = ci::mutual_information(col(x), joint);
    const double rhs = mi(x, z) + cmi(x, y, {z});
    EXPECT_LE(std::abs(lhs - rhs), 1e-9);
}

TEST_P(InfoProperties, RelabelingInvariance)
{
    synth::Rng rng(2000 + static_cast<std::uint64_t>(GetParam()));
    const std::size_t n = 10 + rng.below(50);
    auto x = random_codes(rng, n, 4), y = random_codes(rng, n, 3), s = random_codes(rng, n, 3);
    auto relabel = [&](Codes c, Code arity) {
        std::vector<Code> perm(arity);
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        for (auto& v : c) v = perm[v] + 7;  // also shifts into a sparse alphabet
        return c;
    };
    const double base = cmi(x, y, {s});
    EXPECT_NEAR(cmi(relabel(x, 4), relabel(y, 3), {relabel(s, 3)}), base, 1e-12);
    EXPECT_NEAR(ci::entropy(col(relabel(x, 4))), ci::entropy(col(x)), 1e-12);
}

TEST_P(InfoProperties, RowPermutationBitIdentical)
{
    synth::Rng rng(3000 + static_cast<std::uint64_t>(GetParam()));
    const std::size_t n = 10 + rng.below(200);
    auto x = random_codes(rng, n, 5), y = random_codes(rng, n, 3), s = random_codes(rng, n, 4);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    auto apply = [&](const Codes& c) {
        Codes out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = c[order[i]];
        return out;
    };
    EXPECT_EQ(cmi(apply(x), apply(y), {apply(s)}), cmi(x, y, {s}));
    EXPECT_EQ(mi(apply(x), apply(y)), mi(x, y));
}

TEST_P(InfoProperties, MatchesProbabilityTableOracle)
{
    synth::Rng rng(4000 + static_cast<std::uint64_t>(GetParam()));
    const std::size_t n = 1 + rng.below(300);
    auto x = random_codes(rng, n, 6), y = random_codes(rng, n, 4);
    auto s1 = random_codes(rng, n, 3), s2 = random_codes(rng, n, 5);
    EXPECT_NEAR(ci::entropy(col(x)), oracle_entropy(x), 1e-12);
    EXPECT_NEAR(mi(x, y), oracle_mi(x, y), 1e-12);
    EXPECT_NEAR(cmi(x, y, {s1}), oracle_cmi(x, y, {s1}), 1e-12);
    EXPECT_NEAR(cmi(x, y, {s1, s2}), oracle_cmi(x, y, {s1, s2}), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Random, InfoProperties, ::testing::Range(0, 200));

TEST(InfoLarge, SparseKeySpaceMatchesOracle)
{
    // Huge alphabets force the hashed path instead of the dense table.
    synth::Rng rng(77);
    const std::size_t n = 400;
    Codes x(n), y(n), s(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = static_cast<Code>(rng.below(50) * 100003);
        y[i] = static_cast<Code>(rng.below(40) * 99991);
        s[i] = static_cast<Code>(rng.below(30) * 7919);
    }
    EXPECT_NEAR(cmi(x, y, {s}), oracle_cmi(x, y, {s}), 1e-12);
    EXPECT_NEAR(mi(x, y), oracle_mi(x, y), 1e-12);
}

TEST(EncodedConditioning, ReusedEncodingMatchesFresh)
{
    synth::Rng rng(5);
    auto x = col(random_codes(rng, 100, 3)), y = col(random_codes(rng, 100, 3));
    auto a = col(random_codes(rng, 100, 2)), b = col(random_codes(rng, 100, 3));
    std::vector<ColumnView> s{a, b};
    const ci::EncodedConditioning enc(s, 100);
    EXPECT_EQ(enc.member_count(), 2u);
    EXPECT_EQ(ci::conditional_mutual_information(x, y, enc), ci::conditional_mutual_information(x, y, s));
}
