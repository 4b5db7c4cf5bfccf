#include <gtest/gtest.h>

#include <random>

#include "../support/cantor_oracle.hpp"
#include "omega/cantor/examples.hpp"

using namespace omega;
using namespace omega::cantor;
using oracle::brute_check;
using oracle::brute_five;

namespace {

PresentationPtr ptr(const TreePresentation& T) { return std::make_shared<const TreePresentation>(T); }

TreePresentation restricted_binary(const std::string& state, int a, int b) {
    TreePresentation T;
    T.add_state(state);
    T.add_edge(0, a, 0);
    T.add_edge(0, b, 0);
    return T;
}

// Two-state full shift r -> s so that [0] is representable as a sub-automaton.
TreePresentation rooted_shift() {
    TreePresentation T;
    T.add_state("r");
    T.add_state("s");
    T.add_edge("r", 0, "s");
    T.add_edge("r", 1, "s");
    T.add_edge("s", 0, "s");
    T.add_edge("s", 1, "s");
    return T;
}

TreePresentation first_letter_zero() {
    TreePresentation T;
    T.add_state("r");
    T.add_state("s");
    T.add_edge("r", 0, "s");
    T.add_edge("s", 0, "s");
    T.add_edge("s", 1, "s");
    return T;
}

}  // namespace

// ---------------- validate_presentation ----------------

TEST(Presentation, FullShiftIsPerfect) {
    auto rep = validate_presentation(examples::full_shift());
    EXPECT_TRUE(rep.nonempty);
    EXPECT_TRUE(rep.perfect);
    EXPECT_FALSE(rep.violating_state.has_value());
}

TEST(Presentation, SinglePointIsNotPerfect) {
    auto rep = validate_presentation(examples::single_point());
    EXPECT_TRUE(rep.nonempty);
    EXPECT_FALSE(rep.perfect);
    ASSERT_TRUE(rep.violating_state.has_value());
    EXPECT_EQ(*rep.violating_state, 0);
}

TEST(Presentation, GluedTreeIsPerfectByCylinderEnumeration) {
    auto T = examples::glued_tree();
    auto rep = validate_presentation(T);
    EXPECT_TRUE(rep.perfect);
    // Oracle: every cylinder up to depth 4 has at least two extensions a few levels down.
    for (int d = 0; d <= 4; ++d)
        for (const auto& w : oracle::words_at_depth(T, d)) {
            auto deeper = oracle::members(T, {w}, d + T.size() + 1);
            EXPECT_GE(deeper.size(), 2u);
        }
}

TEST(Presentation, CertificatesReachBranchingStates) {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 50; ++it) {
        auto T = oracle::random_presentation(rng, 1 + it % 8, 3);
        auto rep = validate_presentation(T);
        EXPECT_EQ(rep.perfect, oracle::perfect(T));
        for (int s = 0; s < T.size(); ++s)
            if (rep.branch_certificate[s]) {
                int e = T.walk_from(s, *rep.branch_certificate[s]);
                ASSERT_GE(e, 0);
                EXPECT_GE(T.out_degree(e), 2);
            }
    }
}

TEST(Presentation, StructuralErrorsNameTheState) {
    TreePresentation T;
    T.add_state("a");
    T.add_state("lost");
    T.add_edge(0, 0, 0);
    T.add_edge(0, 1, 0);
    T.add_edge(1, 0, 1);
    try {
        validate_presentation(T);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Structural);
        EXPECT_NE(std::string(e.what()).find("lost"), std::string::npos);
    }
    TreePresentation U;
    U.add_state("a");
    U.add_state("dead");
    U.add_edge(0, 0, 0);
    U.add_edge(0, 1, 1);
    try {
        validate_presentation(U);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("dead"), std::string::npos);
    }
}

TEST(Presentation, JsonRoundTrip) {
    auto T = examples::glued_tree({3, 1, 0, 2});
    auto j = to_json(T);
    auto U = presentation_from_json(j);
    EXPECT_EQ(T, U);
    auto chain = examples::alternate_gluing(3);
    auto back = chain_from_json(chain_to_json(chain));
    ASSERT_EQ(back.size(), chain.size());
    for (size_t i = 0; i < chain.size(); ++i) EXPECT_EQ(back[i], chain[i]);
}

TEST(Presentation, JsonSchemaErrorsCarryPath) {
    nlohmann::json j = {{"states", {"a"}}, {"root", "a"}, {"edges", {{{"from", "a"}, {"label", "x"}, {"to", "a"}}}}};
    try {
        presentation_from_json(j);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Schema);
        EXPECT_NE(std::string(e.what()).find("$.edges[0]"), std::string::npos);
    }
}

// ---------------- ClopenSet ----------------

TEST(Clopen, CanonicalFormMergesFullChildren) {
    auto P = ptr(examples::glued_tree());
    auto X = make_clopen(P, {{0}, {1}, {2}, {3}});
    EXPECT_EQ(X.words, std::vector<Word>{Word{}});
    auto Y = make_clopen(P, {{2, 0}, {2, 1}, {0, 0}, {0}});
    EXPECT_EQ(Y.words, (std::vector<Word>{{0}, {2}}));
}

TEST(Clopen, MembershipMatchesBruteForceAtDepth6) {
    std::mt19937_64 rng(5);
    auto T = examples::glued_tree();
    auto P = ptr(T);
    auto all3 = oracle::words_at_depth(T, 3);
    for (int it = 0; it < 40; ++it) {
        std::vector<Word> a, b;
        for (const auto& w : all3) {
            if (rng() % 4 == 0) a.push_back(Word(w.begin(), w.begin() + 1 + rng() % 3));
            if (rng() % 4 == 0) b.push_back(Word(w.begin(), w.begin() + 1 + rng() % 3));
        }
        auto A = make_clopen(P, a), B = make_clopen(P, b);
        // Antichain.
        for (size_t i = 0; i < A.words.size(); ++i)
            for (size_t j = 0; j < A.words.size(); ++j)
                if (i != j) EXPECT_FALSE(oracle::has_prefix_in({A.words[i]}, A.words[j]));
        auto U = unite(A, B), I = intersect(A, B), M = subtract(A, B);
        for (const auto& w : oracle::words_at_depth(T, 6)) {
            bool ia = oracle::has_prefix_in(a, w), ib = oracle::has_prefix_in(b, w);
            EXPECT_EQ(oracle::has_prefix_in(A.words, w), ia);
            EXPECT_EQ(oracle::has_prefix_in(U.words, w), ia || ib);
            EXPECT_EQ(oracle::has_prefix_in(I.words, w), ia && ib);
            EXPECT_EQ(oracle::has_prefix_in(M.words, w), ia && !ib);
        }
    }
}

TEST(Clopen, DiameterUsesForcedExtension) {
    TreePresentation T;
    T.add_state("a");
    T.add_state("b");
    T.add_edge("a", 0, "b");
    T.add_edge("a", 1, "a");
    T.add_edge("b", 0, "a");
    auto P = ptr(T);
    // [0] = [0 0]: points in [0] agree on two letters.
    EXPECT_DOUBLE_EQ(diameter(cylinder(P, {0})), 0.25);
    EXPECT_DOUBLE_EQ(diameter(whole(P)), 1.0);
    EXPECT_DOUBLE_EQ(diameter(nothing(P)), 0.0);
}

TEST(Clopen, CanonicalSplitGroupsLabels) {
    auto P = ptr(examples::glued_tree());
    auto [a, b] = split_canonical(whole(P));
    EXPECT_EQ(a.words, (std::vector<Word>{{0}, {1}}));
    EXPECT_EQ(b.words, (std::vector<Word>{{2}, {3}}));
    auto [c, d] = split_canonical(a);
    EXPECT_EQ(c.words, (std::vector<Word>{{0}}));
    EXPECT_EQ(d.words, (std::vector<Word>{{1}}));
}

// ---------------- is_entwined ----------------

TEST(Entwined, BinaryTreeInGluedTree) {
    SubPresentation S(ptr(examples::glued_tree()), ptr(restricted_binary("t", 0, 1)));
    auto r = is_entwined(S);
    EXPECT_TRUE(r.entwined);
    EXPECT_FALSE(r.witness.has_value());
}

TEST(Entwined, CylinderIsNotEntwined) {
    SubPresentation S(ptr(rooted_shift()), ptr(first_letter_zero()));
    auto r = is_entwined(S);
    EXPECT_FALSE(r.entwined);
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_EQ(*r.witness, Word{0});
}

TEST(Entwined, EqualSpacesRejected) {
    SubPresentation S(ptr(examples::glued_tree()), ptr(examples::glued_tree()));
    try {
        is_entwined(S);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Precondition);
    }
}

TEST(Entwined, AgreesWithExhaustiveScan) {
    std::mt19937_64 rng(2024);
    int checked = 0, yes = 0;
    for (int it = 0; it < 3000 && checked < 300; ++it) {
        int n = 1 + static_cast<int>(rng() % 8);
        auto D = oracle::random_presentation(rng, n, 3);
        const double keep[] = {0.4, 0.8, 0.95};
        auto C = oracle::random_sub(rng, D, keep[it % 3]);
        if (!oracle::perfect(C) || !oracle::perfect(D)) continue;
        SubPresentation S(ptr(D), ptr(C));
        // C = D makes the question ill-posed; the oracle sees this as the root cylinder inside C.
        if (oracle::cylinder_inside_sub(D, C, {}, C.size() + 1)) {
            EXPECT_THROW(is_entwined(S), Error);
            continue;
        }
        auto r = is_entwined(S);
        auto w = oracle::interior_witness(D, C, D.size(), C.size() + 1);
        EXPECT_EQ(r.entwined, !w.has_value());
        if (r.witness) EXPECT_TRUE(oracle::cylinder_inside_sub(D, C, *r.witness, C.size() + 1));
        ++checked;
        yes += r.entwined;
    }
    EXPECT_GE(checked, 200);
    EXPECT_GT(yes, 20);
    EXPECT_LT(yes, checked);
}

// ---------------- extend_clopen ----------------


TEST(ExtendClopen, GluedTreeAtQuarter) {
    auto D = examples::glued_tree();
    auto C = restricted_binary("t", 0, 1);
    SubPresentation S(ptr(D), ptr(C));
    auto C0 = cylinder(S.C, {0}), C1 = cylinder(S.C, {1});
    auto [D0, D1] = extend_clopen(S, C0, C1, 2);
    auto chk = check_extension(S, whole(S.D), C0, C1, D0, D1, 2);
    EXPECT_TRUE(chk.all());
    auto f = brute_five(D, C, C0.words, C1.words, D0.words, D1.words, 2, 6);
    EXPECT_TRUE(f.restricts && f.disjoint && f.proper && f.near && f.entwined);
    // Contained in depth-2 neighbourhoods: every word has length >= 2.
    for (const auto& w : D0.words) EXPECT_GE(w.size(), 2u);
}

TEST(ExtendClopen, HullCase) {
    SubPresentation S(ptr(examples::glued_tree()), ptr(restricted_binary("t", 0, 1)));
    auto C0 = cylinder(S.C, {0}), C1 = cylinder(S.C, {1});
    auto [D0, D1] = extend_clopen(S, C0, C1, 1);
    EXPECT_EQ(D0.words, std::vector<Word>{{0}});
    EXPECT_EQ(D1.words, std::vector<Word>{{1}});
}

TEST(ExtendClopen, EmptyPieceRejected) {
    SubPresentation S(ptr(examples::glued_tree()), ptr(restricted_binary("t", 0, 1)));
    try {
        extend_clopen(S, whole(S.C), nothing(S.C), 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Precondition);
    }
}

TEST(ExtendClopen, DepthBudgetGivesResolutionError) {
    SubPresentation S(ptr(examples::glued_tree()), ptr(restricted_binary("t", 0, 1)));
    ExtendOptions opt;
    opt.max_depth = 3;
    try {
        extend_clopen(S, cylinder(S.C, {0}), cylinder(S.C, {1}), 5, opt);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Resolution);
    }
}

TEST(ExtendClopen, RandomisedConclusions) {
    std::mt19937_64 rng(77);
    int done = 0;
    for (int it = 0; it < 2000 && done < 50; ++it) {
        auto D = oracle::random_presentation(rng, 1 + static_cast<int>(rng() % 8), 3);
        auto C = oracle::random_sub(rng, D, 0.5);
        if (!oracle::perfect(C) || !oracle::perfect(D)) continue;
        if (oracle::interior_witness(D, C, D.size(), C.size() + 1)) continue;
        SubPresentation S(ptr(D), ptr(C));
        auto [C0, C1] = split_canonical(whole(S.C));
        int m = 1 + static_cast<int>(rng() % 3);
        auto [D0, D1] = extend_clopen(S, C0, C1, m);
        int L = std::max<int>({6, (int)D0.max_length(), (int)D1.max_length(), (int)C0.max_length(), (int)C1.max_length()});
        auto f = brute_five(D, C, C0.words, C1.words, D0.words, D1.words, m, L);
        EXPECT_TRUE(f.restricts && f.disjoint && f.proper && f.near && f.entwined) << "instance " << it;
        ++done;
    }
    EXPECT_EQ(done, 50);
}

// ---------------- nested systems ----------------

TEST(NestedSystem, DepthZero) {
    SubPresentation S(ptr(examples::glued_tree()), ptr(restricted_binary("t", 0, 1)));
    auto sys = build_nested_system(S, 0);
    EXPECT_EQ(sys.C.size(), 1u);
    EXPECT_EQ(sys.D.size(), 1u);
    EXPECT_TRUE(sys.K.empty());
    EXPECT_EQ(sys.C.at(""), whole(S.C));
    EXPECT_EQ(sys.D.at(""), whole(S.D));
}

TEST(NestedSystem, DepthOneLabelSplit) {
    auto D = examples::glued_tree();
    SubPresentation S(ptr(D), ptr(restricted_binary("t", 0, 1)));
    auto sys = build_nested_system(S, 1);
    EXPECT_EQ(sys.C.at("0").words, std::vector<Word>{{0}});
    EXPECT_EQ(sys.C.at("1").words, std::vector<Word>{{1}});
    // K_e by enumeration: depth-3 D-words outside D_0 ∪ D_1.
    int outside = 0;
    for (const auto& w : oracle::words_at_depth(D, 3))
        outside += !oracle::has_prefix_in(sys.D.at("0").words, w) && !oracle::has_prefix_in(sys.D.at("1").words, w);
    EXPECT_GT(outside, 0);
    EXPECT_FALSE(sys.K.at("").empty());
}

TEST(NestedSystem, DepthThreeInvariantSweep) {
    auto D = examples::glued_tree();
    auto C = restricted_binary("t", 0, 1);
    SubPresentation S(ptr(D), ptr(C));
    auto sys = build_nested_system(S, 3);
    EXPECT_TRUE(check_nested_system(S, sys).empty());
    // Oracle: identities by enumeration at depth 7.
    for (const auto& [w, Dw] : sys.D) {
        if (w.size() == 3) continue;
        const auto &D0 = sys.D.at(w + "0").words, &D1 = sys.D.at(w + "1").words, &K = sys.K.at(w).words;
        for (const auto& x : oracle::words_at_depth(D, 7)) {
            bool in = oracle::has_prefix_in(Dw.words, x);
            int parts = oracle::has_prefix_in(D0, x) + oracle::has_prefix_in(D1, x) + oracle::has_prefix_in(K, x);
            EXPECT_EQ(parts, in ? 1 : 0);
            if (oracle::walk(C, x) >= 0)
                EXPECT_EQ(in, oracle::has_prefix_in(sys.C.at(w).words, x));
        }
    }
}

// ---------------- extend_homeo ----------------

TEST(ExtendHomeo, IdentityCase) {
    SubPresentation S(ptr(examples::glued_tree()), ptr(restricted_binary("t", 0, 1)));
    auto sys = build_nested_system(S, 2);
    auto phi = system_correspondence(sys, sys);
    auto out = extend_homeo(phi, sys, sys);
    EXPECT_TRUE(check_correspondence(out).ok());
    for (const auto& p : out.pairs) EXPECT_EQ(p.left, p.right);
    auto r = restrict_correspondence(out, S, S);
    ASSERT_TRUE(r.has_value());
    ASSERT_EQ(r->pairs.size(), phi.pairs.size());
    for (size_t i = 0; i < phi.pairs.size(); ++i) {
        EXPECT_EQ(r->pairs[i].left, phi.pairs[i].left);
        EXPECT_EQ(r->pairs[i].right, phi.pairs[i].right);
    }
}

TEST(ExtendHomeo, DifferentGluingOrdersDepthThree) {
    SubPresentation S(ptr(examples::glued_tree()), ptr(restricted_binary("t", 0, 1)));
    SubPresentation Sp(ptr(examples::glued_tree({2, 3, 0, 1})), ptr(restricted_binary("t", 2, 3)));
    auto sys = build_nested_system(S, 3), sysp = build_nested_system(Sp, 3);
    auto phi = system_correspondence(sys, sysp);
    auto out = extend_homeo(phi, sys, sysp);
    EXPECT_TRUE(check_correspondence(out).ok());
    auto b = brute_check(out, 4);
    EXPECT_TRUE(b.left_partition);
    EXPECT_TRUE(b.right_partition);
    EXPECT_TRUE(b.mesh);
    auto r = restrict_correspondence(out, S, Sp);
    ASSERT_TRUE(r.has_value());
    for (size_t i = 0; i < r->pairs.size(); ++i) {
        EXPECT_EQ(r->pairs[i].left, phi.pairs[i].left);
        EXPECT_EQ(r->pairs[i].right, phi.pairs[i].right);
    }
}

TEST(ExtendHomeo, RefinementChain) {
    SubPresentation S(ptr(examples::glued_tree()), ptr(restricted_binary("t", 0, 1)));
    SubPresentation Sp(ptr(examples::glued_tree({1, 3, 0, 2})), ptr(restricted_binary("t", 1, 3)));
    std::vector<CorrespondenceAtDepth> seq;
    for (int d = 1; d <= 3; ++d) {
        auto sys = build_nested_system(S, d), sysp = build_nested_system(Sp, d);
        seq.push_back(extend_homeo(system_correspondence(sys, sysp), sys, sysp));
    }
    EXPECT_TRUE(refines(seq[1], seq[0]));
    EXPECT_TRUE(refines(seq[2], seq[1]));
    auto dot = refinement_dot(seq);
    EXPECT_NE(dot.find("digraph refinement"), std::string::npos);
}

TEST(ExtendHomeo, IndexMismatchIsStructural) {
    SubPresentation S(ptr(examples::glued_tree()), ptr(restricted_binary("t", 0, 1)));
    auto a = build_nested_system(S, 1), b = build_nested_system(S, 2);
    try {
        extend_homeo(system_correspondence(a, a), a, b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Structural);
    }
}

// ---------------- omega_homeo ----------------

TEST(OmegaHomeo, ConstantChainWithItself) {
    auto X = make_chain(examples::iterated_gluing(3));
    auto st = omega_homeo(X, X, 3);
    ASSERT_EQ(st.size(), 3u);
    for (const auto& c : st) {
        EXPECT_TRUE(check_correspondence(c).ok());
        for (const auto& p : c.pairs) EXPECT_EQ(p.left, p.right);
    }
}

TEST(OmegaHomeo, IteratedVersusAlternateDepthThree) {
    auto X = make_chain(examples::iterated_gluing(3));
    auto Y = make_chain(examples::alternate_gluing(3));
    auto st = omega_homeo(X, Y, 3);
    // Regression baseline for the canonical piece maps.
    std::vector<size_t> counts;
    for (const auto& c : st) counts.push_back(c.pairs.size());
    EXPECT_EQ(counts, (std::vector<size_t>{8, 32, 152}));
    for (size_t n = 0; n < st.size(); ++n) {
        auto b = brute_check(st[n], 6);
        EXPECT_TRUE(b.left_partition && b.right_partition && b.mesh) << "stage " << n + 1;
        if (n > 0) {
            SubPresentation S(X.spaces[n], X.spaces[n - 1]), Sp(Y.spaces[n], Y.spaces[n - 1]);
            auto r = restrict_correspondence(st[n], S, Sp);
            ASSERT_TRUE(r.has_value());
            EXPECT_TRUE(refines(*r, st[n - 1]));
        }
    }
}

TEST(OmegaHomeo, DepthFourRefinesDepthThree) {
    auto X = make_chain(examples::iterated_gluing(3));
    auto Y = make_chain(examples::alternate_gluing(3));
    auto a = omega_homeo(X, Y, 3), b = omega_homeo(X, Y, 4);
    for (size_t n = 0; n < a.size(); ++n) EXPECT_TRUE(refines(b[n], a[n]));
}

TEST(OmegaHomeo, NonEntwinedLinkRejectedWithWitness) {
    Chain X{{ptr(first_letter_zero()), ptr(rooted_shift())}};
    try {
        omega_homeo(X, X, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Precondition);
        EXPECT_NE(std::string(e.what()).find("witness cylinder 0"), std::string::npos);
    }
}
