#include <gtest/gtest.h>

#include <set>

#include "generators.hpp"

using namespace cocycle;
using testgen::naive_reduce;

namespace {

ReducedWord w2(const char* s) { return ReducedWord::parse(2, s); }

TEST(FreeGroup, ParsePrintRoundTrip) {
    EXPECT_EQ(w2("abA").to_string(), "abA");
    EXPECT_EQ(w2("e").to_string(), "e");
    EXPECT_EQ(w2("").to_string(), "e");
    EXPECT_EQ(w2("aAb").to_string(), "b");
    EXPECT_THROW(ReducedWord::parse(2, "ac"), DomainError);
    EXPECT_THROW(ReducedWord::parse(2, "a1"), DomainError);
}

TEST(FreeGroup, GeneratorCodesFollowLexOrder) {
    const auto g = generators(3);
    ASSERT_EQ(g.size(), 6u);
    EXPECT_EQ(generator_char(g[0]), 'a');
    EXPECT_EQ(generator_char(g[1]), 'A');
    EXPECT_EQ(generator_char(g[2]), 'b');
    for (std::size_t i = 0; i + 1 < g.size(); ++i) EXPECT_LT(g[i], g[i + 1]);
    EXPECT_EQ(g[2].inverse(), g[3]);
    EXPECT_EQ(w2("aB").encode(), (std::vector<std::uint8_t>{0, 3}));
}

TEST(FreeGroup, MultiplyFullCancellation) { EXPECT_TRUE((w2("a") * w2("A")).is_identity()); }

TEST(FreeGroup, MultiplyPartialCancellation) { EXPECT_EQ(w2("ab") * w2("Ba"), w2("aa")); }

TEST(FreeGroup, MultiplyMatchesNaiveReductionOnAllShortPairs) {
    const auto words = testgen::brute_reduced_strings(2, 4);
    ASSERT_EQ(words.size(), ball_size(4, 2));
    for (const auto& u : words)
        for (const auto& v : words) {
            const auto got = (ReducedWord::parse(2, u) * ReducedWord::parse(2, v)).to_string();
            ASSERT_EQ(got, naive_reduce(u + v)) << u << " * " << v;
        }
}

TEST(FreeGroup, MultiplyLengthParityAndBound) {
    Rng rng(41);
    for (int t = 0; t < 2000; ++t) {
        const auto u = testgen::random_word(rng, 3, 10);
        const auto v = testgen::random_word(rng, 3, 10);
        const auto uv = u * v;
        EXPECT_LE(uv.length(), u.length() + v.length());
        EXPECT_EQ(uv.length() % 2, (u.length() + v.length()) % 2);
    }
}

TEST(FreeGroup, RankMismatchIsStructural) {
    EXPECT_THROW(multiply(ReducedWord::parse(2, "a"), ReducedWord::parse(3, "a")), StructuralError);
    EXPECT_THROW(distance(ReducedWord::parse(2, "a"), ReducedWord::parse(3, "a")), StructuralError);
    EXPECT_THROW(ReducedWord(1), DomainError);
}

TEST(FreeGroup, AssociativityExhaustiveLengthThree) {
    const auto words = testgen::brute_reduced_strings(2, 3);
    std::vector<ReducedWord> ws;
    for (const auto& s : words) ws.push_back(ReducedWord::parse(2, s));
    for (const auto& a : ws)
        for (const auto& b : ws)
            for (const auto& c : ws) ASSERT_EQ((a * b) * c, a * (b * c));
}

TEST(FreeGroup, InvertExamples) {
    EXPECT_EQ(invert(w2("e")), w2("e"));
    EXPECT_EQ(invert(w2("ab")), w2("BA"));
}

TEST(FreeGroup, InvertIsTwoSidedInverse) {
    Rng rng(7);
    for (int t = 0; t < 1000; ++t) {
        const auto u = testgen::random_word(rng, 2, 10);
        EXPECT_TRUE((u * invert(u)).is_identity());
        EXPECT_TRUE((invert(u) * u).is_identity());
        EXPECT_EQ(invert(invert(u)), u);
    }
}

TEST(FreeGroup, DistanceExamples) {
    EXPECT_EQ(distance(w2("e"), w2("ab")), 2u);
    EXPECT_EQ(distance(w2("a"), w2("a")), 0u);
}

TEST(FreeGroup, DistanceIsMetricOnShortWords) {
    const auto words = testgen::brute_reduced_strings(2, 3);
    std::vector<ReducedWord> ws;
    for (const auto& s : words) ws.push_back(ReducedWord::parse(2, s));
    for (const auto& a : ws)
        for (const auto& b : ws) {
            ASSERT_EQ(distance(a, b), distance(b, a));
            ASSERT_EQ(distance(a, b) == 0, a == b);
            for (const auto& c : ws) ASSERT_LE(distance(a, c), distance(a, b) + distance(b, c));
        }
}

TEST(FreeGroup, SphereExamples) {
    const auto s0 = enumerate_sphere(0, 2);
    ASSERT_EQ(s0.size(), 1u);
    EXPECT_TRUE(s0[0].is_identity());
    EXPECT_EQ(enumerate_sphere(1, 2).size(), 4u);
    const auto s3 = enumerate_sphere(3, 2);
    EXPECT_EQ(s3.size(), 36u);
    for (const auto& w : s3) EXPECT_EQ(naive_reduce(w.to_string()), w.to_string());
}

TEST(FreeGroup, SphereSizeMatchesFormulaAndBruteForce) {
    for (int r : {2, 3}) {
        const auto brute = testgen::brute_reduced_strings(r, 4);
        for (int n = 1; n <= 6; ++n) {
            std::uint64_t formula = 2 * static_cast<std::uint64_t>(r);
            for (int k = 1; k < n; ++k) formula *= static_cast<std::uint64_t>(2 * r - 1);
            const auto sphere = enumerate_sphere(n, r);
            EXPECT_EQ(sphere.size(), formula);
            EXPECT_EQ(sphere_size(n, r), formula);
            EXPECT_TRUE(std::is_sorted(sphere.begin(), sphere.end()));
            std::set<std::string> distinct;
            for (const auto& w : sphere) distinct.insert(w.to_string());
            EXPECT_EQ(distinct.size(), sphere.size());
            if (n <= 4) {
                std::size_t count = 0;
                for (const auto& s : brute) count += static_cast<int>(s.size()) == n;
                EXPECT_EQ(count, formula);
            }
        }
    }
}

TEST(FreeGroup, BallExamples) {
    EXPECT_EQ(enumerate_ball(0, 2).size(), 1u);
    EXPECT_EQ(enumerate_ball(2, 2).size(), 17u);
    for (int n = 0; n < 4; ++n) {
        const auto small = enumerate_ball(n, 2);
        const auto big = enumerate_ball(n + 1, 2);
        std::set<ReducedWord> bigset(big.begin(), big.end());
        for (const auto& w : small) EXPECT_TRUE(bigset.count(w));
    }
}

TEST(FreeGroup, EnumerationErrors) {
    EXPECT_THROW(enumerate_sphere(13, 2), ResourceError);
    EXPECT_THROW(enumerate_sphere(3, 2, 2), ResourceError);
    EXPECT_THROW(enumerate_ball(-1, 2), DomainError);
    EXPECT_THROW(enumerate_sphere(-1, 2), DomainError);
}

TEST(FreeGroup, EvenWordsFormASubgroup) {
    Rng rng(99);
    for (int t = 0; t < 1000; ++t) {
        auto u = testgen::random_word(rng, 2, 9);
        auto v = testgen::random_word(rng, 2, 9);
        if (u.length() % 2) u = u * w2("a");
        if (v.length() % 2) v = v * w2("b");
        EXPECT_EQ((u * v).length() % 2, 0u);
        EXPECT_EQ(invert(u).length() % 2, 0u);
    }
}

}  // namespace
