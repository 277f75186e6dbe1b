#include <gtest/gtest.h>

#include <numeric>

#include "support.hpp"

using namespace camcf;
using fixture::Codes;

TEST(Dataset, RejectsBadShapes)
{
    EXPECT_THROW(Dataset::from_codes({}, {{0, 1}}), Error);
    EXPECT_THROW(Dataset::from_codes({{0, 1}}, {}), Error);
    EXPECT_THROW(Dataset::from_codes({{0, 1}}, {{0, 1, 0}}), Error);
    EXPECT_THROW(Dataset({DiscreteColumn({0, 3}, 2)}, {DiscreteColumn({0, 1}, 2)}), Error);
}

TEST(Dataset, DefaultNamesAndArity)
{
    const auto ds = Dataset::from_codes({{0, 2, 1}, {1, 1, 1}}, {{0, 1, 1}});
    EXPECT_EQ(ds.feature_names(), (std::vector<std::string>{"f0", "f1"}));
    EXPECT_EQ(ds.label_names(), (std::vector<std::string>{"L0"}));
    EXPECT_EQ(ds.feature(0).arity, 3u);
    EXPECT_EQ(ds.feature(1).arity, 2u);
}

TEST(Dataset, PermuteAndSubset)
{
    const auto ds = Dataset::from_codes({{0, 1, 2}, {2, 2, 0}}, {{1, 0, 1}});
    const auto p = ds.permute_rows({2, 0, 1});
    EXPECT_EQ(p.feature(0).codes, (Codes{2, 0, 1}));
    EXPECT_EQ(p.label(0).codes, (Codes{1, 1, 0}));
    const auto s = ds.subset_rows({1, 2});
    EXPECT_EQ(s.n_samples(), 2u);
    EXPECT_EQ(s.feature(1).codes, (Codes{2, 0}));
    const auto f = ds.select_features({1});
    EXPECT_EQ(f.n_features(), 1u);
    EXPECT_EQ(f.feature_names()[0], "f1");
}

TEST(FlattenLabels, BinaryLabelGivesBothCategories)
{
    const auto ds = Dataset::from_codes({{0, 0, 0, 0}}, {{0, 1, 0, 1}});
    const auto cats = flatten_labels(ds, 1);
    ASSERT_EQ(cats.size(), 2u);
    EXPECT_EQ(cats[0].category_value, 0u);
    EXPECT_EQ(cats[0].indicator.codes, (Codes{1, 0, 1, 0}));
    EXPECT_EQ(cats[1].category_value, 1u);
    EXPECT_EQ(cats[1].indicator.codes, (Codes{0, 1, 0, 1}));
    EXPECT_EQ(cats[1].support, 2u);
}

TEST(FlattenLabels, SingleCategory)
{
    const auto ds = Dataset::from_codes({{0, 0, 0}}, {{2, 2, 2}});
    const auto cats = flatten_labels(ds, 1);
    ASSERT_EQ(cats.size(), 1u);
    EXPECT_EQ(cats[0].category_value, 2u);
    EXPECT_EQ(cats[0].indicator.codes, (Codes{1, 1, 1}));
}

TEST(FlattenLabels, MinSupportAndOrder)
{
    const auto ds = Dataset::from_codes({{0, 0, 0, 0, 0}}, {{0, 0, 0, 1, 1}, {2, 0, 2, 2, 2}});
    const auto cats = flatten_labels(ds, 2);
    std::vector<std::pair<std::size_t, Code>> keys;
    for (const auto& c : cats) keys.emplace_back(c.label_index, c.category_value);
    EXPECT_EQ(keys, (std::vector<std::pair<std::size_t, Code>>{{0, 0}, {0, 1}, {1, 2}}));
}

TEST(FlattenLabels, PartitionAndComplement)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto ds = fixture::random_dataset(seed, 80, 3, 3);
        const auto cats = flatten_labels(ds);
        for (std::size_t l = 0; l < ds.n_labels(); ++l) {
            Codes sum(ds.n_samples(), 0);
            std::vector<const CategoryNode*> of_label;
            for (const auto& c : cats) {
                if (c.label_index != l) continue;
                of_label.push_back(&c);
                for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += c.indicator.codes[i];
            }
            EXPECT_EQ(sum, Codes(ds.n_samples(), 1));
            if (of_label.size() == 2 && ds.label(l).arity == 2) {
                for (std::size_t i = 0; i < sum.size(); ++i) {
                    EXPECT_NE(of_label[0]->indicator.codes[i], of_label[1]->indicator.codes[i]);
                }
            }
        }
    }
}

TEST(FlattenLabels, RowPermutationPermutesIndicators)
{
    const auto ds = fixture::random_dataset(9, 50, 3, 2);
    std::vector<std::size_t> order(ds.n_samples());
    std::iota(order.begin(), order.end(), 0);
    synth::Rng rng(1);
    rng.shuffle(order);
    const auto a = flatten_labels(ds);
    const auto b = flatten_labels(ds.permute_rows(order));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t c = 0; c < a.size(); ++c) {
        for (std::size_t i = 0; i < order.size(); ++i) {
            EXPECT_EQ(b[c].indicator.codes[i], a[c].indicator.codes[order[i]]);
        }
    }
}

TEST(CategoryIndicator, Examples)
{
    const auto ds = Dataset::from_codes({{0, 0, 0, 0}}, {{0, 1, 2, 1}});
    EXPECT_EQ(category_indicator(ds, 0, 1), (Codes{0, 1, 0, 1}));
    const auto ds2 = Dataset::from_codes({{0, 0}}, {{0, 0}});
    EXPECT_EQ(category_indicator(ds2, 0, 0), (Codes{1, 1}));
    try {
        category_indicator(ds2, 0, 5);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("category not present"), std::string::npos);
    }
}

TEST(Config, Validation)
{
    CamcfConfig c;
    EXPECT_NO_THROW(c.validate());
    auto bad = [](auto mutate) {
        CamcfConfig c;
        mutate(c);
        EXPECT_THROW(c.validate(), Error);
    };
    bad([](CamcfConfig& c) { c.delta1 = 0; });
    bad([](CamcfConfig& c) { c.delta2 = -1; });
    bad([](CamcfConfig& c) { c.gamma = 0.5; });
    bad([](CamcfConfig& c) { c.k1_fraction = 0; });
    bad([](CamcfConfig& c) { c.k2_fraction = 1.5; });
}
