#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "../support/raag_oracle.hpp"
#include "omega/raag/raag.hpp"

using namespace omega;
using namespace omega::raag;

namespace {

DefiningGraph path(int n) {
    DefiningGraph g;
    for (int i = 0; i < n; ++i) g.add_vertex("p" + std::to_string(i));
    for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
    return g;
}

DefiningGraph cycle(int n) {
    auto g = path(n);
    g.add_edge(n - 1, 0);
    return g;
}

DefiningGraph discrete(int n) {
    DefiningGraph g;
    for (int i = 0; i < n; ++i) g.add_vertex("d" + std::to_string(i));
    return g;
}

}  // namespace

TEST(IsJoin, FourCycle) {
    auto j = is_join(cycle(4));
    EXPECT_TRUE(j.join);
    // Sides are the two non-adjacent pairs.
    EXPECT_EQ(j.left, (std::vector<int>{0, 2}));
    EXPECT_EQ(j.right, (std::vector<int>{1, 3}));
    EXPECT_TRUE(oracle::join_by_bipartition(cycle(4)));
}

TEST(IsJoin, SingleEdge) { EXPECT_TRUE(is_join(path(2)).join); }

TEST(IsJoin, PathFourIsNotAJoin) {
    EXPECT_FALSE(is_join(path(4)).join);
    EXPECT_FALSE(oracle::join_by_bipartition(path(4)));
}

TEST(IsJoin, TooSmallIsPrecondition) {
    try {
        is_join(discrete(1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Precondition);
    }
}

TEST(IsJoin, WitnessSidesAreCompletelyJoined) {
    for (int n = 2; n <= 5; ++n)
        for (const auto& g : oracle::all_labelled_graphs(n)) {
            auto j = is_join(g);
            if (!j.join) continue;
            ASSERT_FALSE(j.left.empty());
            ASSERT_FALSE(j.right.empty());
            EXPECT_EQ(j.left.size() + j.right.size(), static_cast<size_t>(n));
            for (int a : j.left)
                for (int b : j.right) EXPECT_TRUE(g.adjacent(a, b));
        }
}

TEST(Classify, RegressionCases) {
    EXPECT_EQ(classify(discrete(0)), BoundaryClass::Empty);
    EXPECT_EQ(classify(discrete(1)), BoundaryClass::TwoPoints);
    EXPECT_EQ(classify(discrete(2)), BoundaryClass::Cantor);
    EXPECT_EQ(classify(cycle(4)), BoundaryClass::Empty);
    EXPECT_EQ(classify(path(3)), BoundaryClass::Empty);
    EXPECT_EQ(classify(path(4)), BoundaryClass::OmegaCantor);
    EXPECT_EQ(classify(cycle(5)), BoundaryClass::OmegaCantor);
}

TEST(Classify, AgreesWithBipartitionOracleUpToFiveVertices) {
    int total = 0;
    std::map<BoundaryClass, int> tally;
    for (int n = 0; n <= 5; ++n)
        for (const auto& g : oracle::all_labelled_graphs(n)) {
            ++total;
            BoundaryClass expect;
            if (n == 0) expect = BoundaryClass::Empty;
            else if (n == 1) expect = BoundaryClass::TwoPoints;
            else if (oracle::join_by_bipartition(g)) expect = BoundaryClass::Empty;
            else if (g.edges.empty()) expect = BoundaryClass::Cantor;
            else expect = BoundaryClass::OmegaCantor;
            EXPECT_EQ(classify(g), expect);
            if (n >= 2) {
                EXPECT_EQ(is_join(g).join, oracle::join_by_bipartition(g));
            }
            ++tally[classify(g)];
        }
    EXPECT_EQ(total, 1 + 1 + 2 + 8 + 64 + 1024);
    EXPECT_EQ(tally[BoundaryClass::TwoPoints], 1);
    EXPECT_EQ(tally[BoundaryClass::Cantor], 4);  // discrete graphs on 2..5 vertices
}

TEST(Classify, InvariantUnderRelabelling) {
    std::mt19937_64 rng(5);
    for (int n = 2; n <= 5; ++n)
        for (const auto& g : oracle::all_labelled_graphs(n)) {
            std::vector<int> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            EXPECT_EQ(classify(g), classify(permuted(g, perm)));
        }
}

TEST(Formats, JsonRoundTripAndErrors) {
    auto g = path(4);
    auto h = graph_from_json(to_json(g));
    EXPECT_EQ(h.vertices, g.vertices);
    EXPECT_EQ(h.edges, g.edges);
    auto bad = nlohmann::json::parse(R"({"vertices":["a","b"],"edges":[["a","z"]]})");
    try {
        graph_from_json(bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Schema);
        EXPECT_NE(std::string(e.what()).find("$.edges[0]"), std::string::npos);
    }
    auto loop = nlohmann::json::parse(R"({"vertices":["a"],"edges":[["a","a"]]})");
    EXPECT_THROW(graph_from_json(loop), Error);
}

TEST(Formats, OneLineAdjacency) {
    auto g = graph_from_line("a-b b-c c-d e");
    EXPECT_EQ(g.size(), 5);
    EXPECT_EQ(g.edges.size(), 3u);
    EXPECT_EQ(classify(g), BoundaryClass::OmegaCantor);
    EXPECT_EQ(classify(graph_from_line("a-b b-c")), BoundaryClass::Empty);
    EXPECT_EQ(classify(graph_from_line("x y")), BoundaryClass::Cantor);
    EXPECT_THROW(graph_from_line("a-a"), Error);
}

TEST(Formats, BatchCsv) {
    auto csv = classify_csv({{"p4", path(4)}, {"c4", cycle(4)}, {"z", discrete(1)}});
    EXPECT_EQ(csv,
              "graph,class,witness\n"
              "p4,OmegaCantor,\n"
              "c4,Empty,{p0 p2}*{p1 p3}\n"
              "z,TwoPoints,\n");
}
