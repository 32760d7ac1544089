#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "xtract/ranking.hpp"

namespace xtract {
namespace {

Suggestion useful(int id, int first, int last, std::string name)
{
    Suggestion s;
    s.id = id;
    s.proposed_name = std::move(name);
    s.raw_range = {first, last};
    s.normalized_range = LineRange{first, last};
    s.fragment = std::vector<StmtId>{first};
    s.state = SuggestionState::useful;
    return s;
}

RankedGroup group(int first, int last, int frequency)
{
    RankedGroup g;
    g.canonical_range = {first, last};
    g.frequency = frequency;
    for (int i = 0; i < frequency; ++i) g.members.push_back(first * 100 + i);
    return g;
}

TEST(Aggregate, CountsByExactRange)
{
    auto groups = aggregate({useful(0, 85, 90, "writeMethods"), useful(1, 85, 90, "writeMethods"),
                             useful(2, 70, 80, "writeFields")});
    ASSERT_EQ(groups.size(), 2u);
    EXPECT_EQ(groups[0].canonical_range, (LineRange{70, 80}));
    EXPECT_EQ(groups[0].frequency, 1);
    EXPECT_EQ(groups[1].frequency, 2);
    EXPECT_EQ(groups[1].members, (std::vector<int>{0, 1}));
}

TEST(Aggregate, ModalName)
{
    auto groups = aggregate({useful(0, 85, 90, "emitMethods"), useful(1, 85, 90, "writeMethods"),
                             useful(2, 85, 90, "writeMethods")});
    ASSERT_EQ(groups.size(), 1u);
    EXPECT_EQ(groups[0].representative_name, "writeMethods");
    EXPECT_EQ(groups[0].names, (std::vector<std::string>{"emitMethods", "writeMethods", "writeMethods"}));
    EXPECT_EQ(modal_name({"b", "a", "b", "a"}), "a");
}

TEST(Aggregate, EmptyInput) { EXPECT_TRUE(aggregate({}).empty()); }

TEST(Aggregate, RejectsNonUseful)
{
    auto s = useful(0, 1, 2, "x");
    s.state = SuggestionState::valid;
    EXPECT_THROW((void)aggregate({s}), std::invalid_argument);
}

TEST(Rank, ByFrequency)
{
    auto r = rank({group(1, 2, 1), group(10, 12, 7), group(20, 21, 3)}, 3);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0].frequency, 7);
    EXPECT_EQ(r[1].frequency, 3);
    EXPECT_EQ(r[2].frequency, 1);
}

TEST(Rank, LongerFragmentWinsTies)
{
    auto r = rank({group(5, 8, 2), group(30, 39, 2)}, 3);
    EXPECT_EQ(r[0].canonical_range, (LineRange{30, 39}));
    auto same = rank({group(30, 33, 2), group(5, 8, 2)}, 3);
    EXPECT_EQ(same[0].canonical_range, (LineRange{5, 8}));
}

TEST(Rank, TruncatesToTopN)
{
    std::vector<RankedGroup> gs;
    for (int i = 0; i < 5; ++i) gs.push_back(group(i * 10 + 1, i * 10 + 3, i + 1));
    EXPECT_EQ(rank(gs).size(), 3u);
    EXPECT_EQ(rank(gs, 1).size(), 1u);
    EXPECT_EQ(rank(gs, 9).size(), 5u);
    EXPECT_THROW((void)rank(gs, 0), std::invalid_argument);
}

TEST(Aggregate, OverlapMergingIsOptIn)
{
    std::vector<Suggestion> in{useful(0, 10, 29, "a"), useful(1, 10, 29, "a"), useful(2, 10, 30, "b"),
                               useful(3, 50, 52, "c")};
    EXPECT_EQ(aggregate(in).size(), 3u);
    auto merged = aggregate(in, AggregateOptions{0.9});
    ASSERT_EQ(merged.size(), 2u);
    EXPECT_EQ(merged[0].canonical_range, (LineRange{10, 29}));
    EXPECT_EQ(merged[0].frequency, 3);
    EXPECT_EQ(merged[0].members, (std::vector<int>{0, 1, 2}));
    EXPECT_DOUBLE_EQ(line_jaccard({10, 29}, {10, 30}), 20.0 / 21.0);
    EXPECT_DOUBLE_EQ(line_jaccard({1, 2}, {3, 4}), 0.0);
}

std::vector<Suggestion> random_suggestions(std::mt19937& rng, int n)
{
    std::uniform_int_distribution<int> start(1, 12);
    std::uniform_int_distribution<int> len(0, 3);
    std::uniform_int_distribution<int> name(0, 3);
    const char* names[] = {"alpha", "beta", "gamma", "delta"};
    std::vector<Suggestion> out;
    for (int i = 0; i < n; ++i) {
        int a = start(rng);
        out.push_back(useful(i, a, a + len(rng), names[name(rng)]));
    }
    return out;
}

bool same(const std::vector<RankedGroup>& a, const std::vector<RankedGroup>& b)
{
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].canonical_range != b[i].canonical_range || a[i].frequency != b[i].frequency
            || a[i].members != b[i].members || a[i].names != b[i].names
            || a[i].representative_name != b[i].representative_name) {
            return false;
        }
    }
    return true;
}

TEST(RankingProperties, PermutationConservationPrefix)
{
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> count(0, 40);
    for (int trial = 0; trial < 300; ++trial) {
        auto in = random_suggestions(rng, count(rng));
        for (auto options : {AggregateOptions{}, AggregateOptions{0.5}}) {
            auto groups = aggregate(in, options);
            int total = std::accumulate(groups.begin(), groups.end(), 0,
                                        [](int acc, const RankedGroup& g) { return acc + g.frequency; });
            EXPECT_EQ(total, static_cast<int>(in.size()));
            for (const auto& g : groups) {
                EXPECT_EQ(g.frequency, static_cast<int>(g.members.size()));
                EXPECT_GE(g.frequency, 1);
            }

            auto shuffled = in;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            EXPECT_TRUE(same(rank(aggregate(shuffled, options), 5), rank(groups, 5)));

            auto top2 = rank(groups, 2);
            auto top6 = rank(groups, 6);
            ASSERT_LE(top2.size(), top6.size());
            EXPECT_TRUE(same(top2, std::vector<RankedGroup>(top6.begin(), top6.begin() + static_cast<long>(top2.size()))));
        }
    }
}

}  // namespace
}  // namespace xtract
