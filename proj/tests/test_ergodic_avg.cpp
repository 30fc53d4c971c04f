#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "generators.hpp"

using namespace cocycle;

namespace {

ExtendedClassElement start(std::uint64_t seed, const ProbabilityVector& p, int depth, int rank = 2) {
    return {LazyBernoulliPoint(split_seed(seed, 1, 0), rank, p), sample_prefix(depth, rank, split_seed(seed, 2, 0))};
}

// Random rational observable on a finite model, stored per point.
ModelObservable table_observable(const FiniteRelationModel& m, Rng& rng) {
    std::vector<Rational> values(m.size());
    for (auto& v : values) v = Rational(static_cast<std::int64_t>(rng.below(7)), 1 + static_cast<std::int64_t>(rng.below(5)));
    return [values](const FiniteRelationModel&, PointId y) { return values[y]; };
}

TEST(ErgodicAvg, ConstantObservable) {
    const auto f = ExtendedObservable::constant(2.5);
    const auto e = start(1, ProbabilityVector({0.3, 0.7}), 7);
    for (int n = 0; n <= 5; ++n) EXPECT_EQ(class_average(f, e, n), 2.5);
    DiagnosticConfig cfg;
    cfg.n_max = 5;
    const auto rep = ergodicity_diagnostic(f, ProbabilityVector({0.3, 0.7}), cfg);
    for (const auto& row : rep.rows) EXPECT_EQ(row.spread, 0.0);
    EXPECT_FALSE(rep.non_decaying);
}

TEST(ErgodicAvg, ExtendedClassSizeAndProjection) {
    const ProbabilityVector p({0.5, 0.5});
    for (int rank : {2, 3}) {
        for (int n = 0; n <= 4; ++n) {
            const auto e = start(static_cast<std::uint64_t>(n + 10 * rank), p, n + 2, rank);
            const auto cls = extended_class(e, n);
            EXPECT_EQ(cls.size(), class_size(rank, n));
            std::set<BoundaryPrefix> projected;
            for (const auto& w : cls) projected.insert(w.boundary);
            const auto tail = tail_class(e.boundary, n);
            EXPECT_EQ(projected, std::set<BoundaryPrefix>(tail.begin(), tail.end()));
            EXPECT_EQ(projected.size(), cls.size());
        }
    }
}

TEST(ErgodicAvg, ExtendedClassLaw) {
    const ProbabilityVector p({0.2, 0.8});
    const auto e = start(3, p, 5);
    Rng rng(3);
    for (const auto& w : extended_class(e, 3)) {
        const auto alpha = fundamental_cocycle(w.boundary, e.boundary, 3);
        for (int t = 0; t < 5; ++t) {
            const auto h = testgen::random_word(rng, 2, 4);
            EXPECT_EQ(w.point.symbol_at(h), e.point.symbol_at(invert(alpha) * h));
        }
    }
}

TEST(ErgodicAvg, ExtendedTowerProperty) {
    const ProbabilityVector p({0.3, 0.7});
    const auto f = ExtendedObservable::symbol_indicator(2, 1);
    const auto e = start(4, p, 6);
    for (int m = 1; m <= 4; ++m)
        for (int n = 0; n < m; ++n) {
            CompensatedSum s;
            const auto cls = extended_class(e, m);
            for (const auto& w : cls) s.add(class_average(f, w, n));
            EXPECT_NEAR(s.value() / static_cast<double>(cls.size()), class_average(f, e, m), 1e-12);
        }
}

TEST(ErgodicAvg, OdometerCylinderAveragesExact) {
    for (int L = 1; L <= 6; ++L) {
        const auto m = FiniteRelationModel::odometer(L);
        for (int k = 0; k <= L; ++k) {
            const auto f = cylinder_indicator(m, static_cast<PointId>(m.size() - 1), k);
            const Rational target(1, std::int64_t{1} << k);
            EXPECT_EQ(model_integral(m, f), target);
            for (int n = k; n <= L; ++n)
                for (PointId y = 0; y < m.size(); ++y) EXPECT_EQ(class_average(m, f, y, n), target);
        }
    }
}

TEST(ErgodicAvg, ModelTowerProperty) {
    Rng rng(5);
    for (const auto& m : {FiniteRelationModel::odometer(5), FiniteRelationModel::tail(2, 3)}) {
        const auto f = table_observable(m, rng);
        for (int hi = 0; hi <= m.max_level(); ++hi)
            for (int lo = 0; lo <= hi; ++lo)
                for (PointId y = 0; y < m.size(); ++y) {
                    Rational s(0);
                    const auto cls = m.class_members(hi, y);
                    for (PointId z : cls) s += class_average(m, f, z, lo);
                    EXPECT_EQ(s / static_cast<std::int64_t>(cls.size()), class_average(m, f, y, hi));
                }
        // Top level: the average is the integral.
        EXPECT_EQ(class_average(m, f, 0, m.max_level()), model_integral(m, f));
    }
}

TEST(ErgodicAvg, SymbolAverageConcentrates) {
    const ProbabilityVector p({0.7, 0.3});
    const auto f = ExtendedObservable::symbol_indicator(2, 0);
    const auto e = start(6, p, 9);
    const double sigma = std::sqrt(0.7 * 0.3 / std::pow(3.0, 8));
    EXPECT_LE(std::abs(class_average(f, e, 8) - 0.7), 4 * sigma);
}

TEST(ErgodicAvg, DiagnosticSymbolSpreadShrinks) {
    const ProbabilityVector p({0.5, 0.5});
    DiagnosticConfig cfg;
    cfg.n_min = 1;
    cfg.n_max = 8;
    cfg.num_starts = 10;
    cfg.seed = 77;
    const auto rep = ergodicity_diagnostic(ExtendedObservable::symbol_indicator(2, 0), p, cfg);
    ASSERT_EQ(rep.rows.size(), 8u);
    EXPECT_LT(rep.rows.back().spread, 8 * std::sqrt(0.25 / std::pow(3.0, 8)));
    EXPECT_FALSE(rep.non_decaying);
    for (const auto& row : rep.rows) {
        EXPECT_LE(row.min_average, row.max_average);
        EXPECT_EQ(row.spread, row.max_average - row.min_average);
    }
}

TEST(ErgodicAvg, DiagnosticFlagsBoundaryObservable) {
    const ProbabilityVector p({0.5, 0.5});
    DiagnosticConfig cfg;
    cfg.n_min = 1;
    cfg.n_max = 5;
    cfg.num_starts = 10;
    cfg.seed = 3;
    const auto f = ExtendedObservable::boundary_letter_indicator(cfg.n_max + 1, Generator::from_code(0));
    const auto rep = ergodicity_diagnostic(f, p, cfg);
    EXPECT_TRUE(rep.non_decaying);
    EXPECT_EQ(rep.rows.back().spread, 1.0);
}

TEST(ErgodicAvg, ShallowBoundaryIsPrecisionError) {
    const auto e = start(1, ProbabilityVector({0.5, 0.5}), 3);
    EXPECT_THROW(class_average(ExtendedObservable::symbol_indicator(2, 0), e, 3), PrecisionError);
    EXPECT_THROW(class_average(ExtendedObservable::boundary_letter_indicator(5, Generator::from_code(0)), e, 1), PrecisionError);
}

}  // namespace
