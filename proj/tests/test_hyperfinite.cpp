#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "generators.hpp"

using namespace cocycle;

namespace {

using PointSet = std::set<PointId>;

// Oracle: class of y at level n from raw coordinates.
PointSet brute_class(const FiniteRelationModel& m, int n, PointId y) {
    PointSet out;
    const auto& a = m.coords(y);
    for (PointId z = 0; z < m.size(); ++z) {
        const auto& b = m.coords(z);
        if (std::equal(a.begin() + n, a.end(), b.begin() + n)) out.insert(z);
    }
    return out;
}

SubsetFunction random_sf(const FiniteRelationModel& m, Rng& rng, std::size_t max_size) {
    std::vector<std::vector<PointId>> sets(m.size());
    for (auto& s : sets) {
        const auto k = rng.below(max_size + 1);
        for (std::uint64_t i = 0; i < k; ++i) s.push_back(static_cast<PointId>(rng.below(m.size())));
    }
    return SubsetFunction(m, std::move(sets));
}

// Random equivalence relation with classes of size <= 3.
SubsetFunction random_equivalence(const FiniteRelationModel& m, Rng& rng) {
    std::vector<PointId> perm(m.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    std::vector<std::vector<PointId>> sets(m.size());
    for (std::size_t i = 0; i < perm.size();) {
        const std::size_t len = std::min<std::size_t>(1 + rng.below(3), perm.size() - i);
        std::vector<PointId> block(perm.begin() + static_cast<long>(i), perm.begin() + static_cast<long>(i + len));
        for (PointId y : block) sets[y] = block;
        i += len;
    }
    return SubsetFunction(m, std::move(sets));
}

PointSet as_set(std::span<const PointId> s) { return PointSet(s.begin(), s.end()); }

TEST(Hyperfinite, ModelClassSizesAndNesting) {
    for (int L = 1; L <= 4; ++L) {
        const auto tail = FiniteRelationModel::tail(2, L);
        const auto odo = FiniteRelationModel::odometer(L);
        EXPECT_EQ(tail.size(), sphere_size(L, 2));
        EXPECT_EQ(odo.size(), 1u << L);
        for (const auto* m : {&tail, &odo}) {
            const std::size_t base = m == &tail ? 3 : 2;
            for (int n = 0; n <= L; ++n)
                for (PointId y = 0; y < m->size(); ++y) {
                    const auto cls = as_set(m->class_members(n, y));
                    EXPECT_EQ(cls, brute_class(*m, n, y));
                    if (n < L) {
                        EXPECT_EQ(cls.size(), static_cast<std::size_t>(std::pow(base, n)));
                        const auto up = as_set(m->class_members(n + 1, y));
                        EXPECT_TRUE(std::includes(up.begin(), up.end(), cls.begin(), cls.end()));
                    }
                }
        }
    }
    EXPECT_THROW(FiniteRelationModel::odometer(23), DomainError);
}

TEST(Hyperfinite, TailPointsAreBoundaryPrefixes) {
    const auto m = FiniteRelationModel::tail(2, 3);
    for (PointId y = 0; y < m.size(); ++y) {
        const auto xi = m.boundary_point(y);
        EXPECT_EQ(xi.to_string(), m.point_string(y));
        EXPECT_EQ(m.find(m.coords(y)), y);
        if (y > 0) EXPECT_LT(m.coords(y - 1), m.coords(y));
    }
}

TEST(Hyperfinite, ChainIsLaminar) {
    for (const auto& m : {FiniteRelationModel::tail(2, 5), FiniteRelationModel::odometer(5)}) {
        std::vector<PointSet> classes;
        for (int n = 0; n <= m.max_level(); ++n)
            for (std::uint32_t c = 0; c < m.num_classes(n); ++c) classes.push_back(as_set(m.class_by_index(n, c)));
        for (std::size_t i = 0; i < classes.size(); ++i)
            for (std::size_t j = i + 1; j < classes.size(); ++j) {
                const auto& a = classes[i];
                const auto& b = classes[j];
                std::vector<PointId> inter;
                std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
                const bool ok = inter.empty() || inter.size() == a.size() || inter.size() == b.size();
                ASSERT_TRUE(ok);
            }
    }
}

TEST(Hyperfinite, ComposeWithIdentity) {
    const auto m = FiniteRelationModel::tail(2, 3);
    Rng rng(1);
    const auto t = random_sf(m, rng, 4);
    EXPECT_EQ(compose(m, SubsetFunction::identity(m), t), t);
    EXPECT_EQ(compose(m, t, SubsetFunction::identity(m)), t);
    const auto single = SubsetFunction::chain(m, 0);
    EXPECT_EQ(compose(m, single, single), single);
}

TEST(Hyperfinite, ComposeAndInvertMatchNaiveLoops) {
    const auto m = FiniteRelationModel::tail(2, 3);
    Rng rng(2);
    for (int t = 0; t < 50; ++t) {
        const auto s = random_sf(m, rng, 4);
        const auto u = random_sf(m, rng, 4);
        const auto su = compose(m, s, u);
        const auto ui = invert_sf(m, u);
        for (PointId y = 0; y < m.size(); ++y) {
            PointSet expect;
            for (PointId z : u(y))
                for (PointId w : s(z)) expect.insert(w);
            EXPECT_EQ(as_set(su(y)), expect);
            PointSet inv;
            for (PointId z = 0; z < m.size(); ++z)
                for (PointId w : u(z))
                    if (w == y) inv.insert(z);
            EXPECT_EQ(as_set(ui(y)), inv);
        }
        EXPECT_EQ(invert_sf(m, ui), u);
        EXPECT_LE(norm(m, su), norm(m, s) * norm(m, u));
        const auto diff = difference(m, s, u);
        for (PointId y = 0; y < m.size(); ++y)
            for (PointId z : diff(y)) EXPECT_FALSE(std::binary_search(u(y).begin(), u(y).end(), z));
    }
}

TEST(Hyperfinite, InverseOfEquivalenceIsItself) {
    const auto m = FiniteRelationModel::odometer(4);
    EXPECT_EQ(invert_sf(m, SubsetFunction::identity(m)), SubsetFunction::identity(m));
    for (int n = 0; n <= 4; ++n) {
        const auto z = SubsetFunction::chain(m, n);
        EXPECT_TRUE(is_equivalence_relation(z));
        EXPECT_EQ(invert_sf(m, z), z);
        EXPECT_EQ(norm(m, z), std::size_t{1} << n);
    }
}

TEST(Hyperfinite, ModelMismatchIsStructural) {
    const auto a = FiniteRelationModel::odometer(2);
    const auto b = FiniteRelationModel::odometer(2);
    EXPECT_THROW(compose(a, SubsetFunction::identity(a), SubsetFunction::identity(b)), StructuralError);
}

TEST(Hyperfinite, CyclicAutomorphisms) {
    const auto odo = FiniteRelationModel::odometer(3);
    EXPECT_EQ(cyclic_automorphism(odo, 0).permutation(), InnerAutomorphism::identity(odo).permutation());
    const auto swap = cyclic_automorphism(odo, 1);
    for (PointId y = 0; y < odo.size(); ++y) EXPECT_EQ(swap(y), y ^ 4u);  // coordinate 1 is the leading bit
    const auto tail = FiniteRelationModel::tail(2, 4);
    for (int n = 0; n <= 3; ++n) {
        const auto phi = cyclic_automorphism(tail, n);
        for (PointId y = 0; y < tail.size(); ++y) EXPECT_EQ(as_set(orbit(phi, y)), brute_class(tail, n, y));
        const auto inv = phi.inverse(tail);
        for (PointId y = 0; y < tail.size(); ++y) EXPECT_EQ(inv(phi(y)), y);
    }
    std::vector<PointId> bad(odo.size());
    std::iota(bad.begin(), bad.end(), 0);
    std::swap(bad[0], bad[7]);
    EXPECT_THROW(InnerAutomorphism(odo, bad, 2), StructuralError);
    EXPECT_NO_THROW(InnerAutomorphism(odo, bad, 3));
}

// Oracle: Folner defect by explicit per-point symmetric differences.
Rational folner_oracle(const FiniteRelationModel& m, const std::vector<InnerAutomorphism>& d, int n) {
    Rational total(0);
    for (PointId y = 0; y < m.size(); ++y) {
        const auto cls = brute_class(m, n, y);
        PointSet image;
        for (const auto& phi : d)
            for (PointId z : cls) image.insert(phi(z));
        std::vector<PointId> sym;
        std::set_symmetric_difference(cls.begin(), cls.end(), image.begin(), image.end(), std::back_inserter(sym));
        total += Rational(static_cast<std::int64_t>(sym.size()), static_cast<std::int64_t>(cls.size())) * m.weight(y);
    }
    return total;
}

TEST(Hyperfinite, FolnerDefectMatchesBruteForce) {
    for (int L = 1; L <= 4; ++L) {
        for (const auto& m : {FiniteRelationModel::tail(2, L), FiniteRelationModel::odometer(L)}) {
            const std::vector<InnerAutomorphism> ident{InnerAutomorphism::identity(m)};
            for (int n = 0; n <= L; ++n) EXPECT_EQ(folner_defect_exact(m, ident, n), Rational(0));
            for (int order = 1; order <= L; ++order) {
                const std::vector<InnerAutomorphism> d{InnerAutomorphism::identity(m), cyclic_automorphism(m, order)};
                for (int n = 0; n <= L; ++n) {
                    const Rational got = folner_defect_exact(m, d, n);
                    EXPECT_EQ(got, folner_oracle(m, d, n));
                    if (n >= order)
                        EXPECT_EQ(got, Rational(0));
                    else
                        EXPECT_GT(got, Rational(0));
                }
            }
        }
    }
}

TEST(Hyperfinite, InteriorFraction) {
    const auto m = FiniteRelationModel::tail(2, 3);
    for (int n = 0; n <= 3; ++n) {
        EXPECT_EQ(interior_fraction(m, SubsetFunction::identity(m), n).average, Rational(1));
        for (int k = 0; k <= n; ++k) EXPECT_EQ(interior_fraction(m, SubsetFunction::chain(m, k), n).average, Rational(1));
    }
    Rng rng(4);
    for (int t = 0; t < 20; ++t) {
        const auto rel = random_equivalence(m, rng);
        for (int n = 0; n <= 3; ++n) {
            const auto f = interior_fraction(m, rel, n);
            for (PointId y = 0; y < m.size(); ++y) {
                const auto cls = brute_class(m, n, y);
                std::int64_t inside = 0;
                for (PointId z : cls) {
                    bool ok = true;
                    for (PointId w : rel(z)) ok = ok && cls.count(w);
                    inside += ok;
                }
                EXPECT_EQ(f.per_point[y], Rational(inside, static_cast<std::int64_t>(cls.size())));
            }
        }
    }
    EXPECT_THROW(interior_fraction(m, random_sf(m, rng, 3), 1), StructuralError);
}

// Oracle: the distinct maximal sets of a laminar family.
std::set<PointSet> maximal_sets(const std::vector<PointSet>& family) {
    std::set<PointSet> out;
    for (const auto& a : family) {
        bool maximal = true;
        for (const auto& b : family)
            if (b.size() > a.size() && std::includes(b.begin(), b.end(), a.begin(), a.end())) maximal = false;
        if (maximal) out.insert(a);
    }
    return out;
}

TEST(Hyperfinite, DisjointifyExamples) {
    const auto m = FiniteRelationModel::tail(2, 4);
    const std::vector<ChainClass> single{{5, 2}};
    EXPECT_EQ(disjointify(m, single), single);
    const std::vector<ChainClass> chain{{7, 1}, {7, 2}, {7, 3}};
    EXPECT_EQ(disjointify(m, chain), (std::vector<ChainClass>{{7, 3}}));
    const std::vector<std::vector<PointId>> crossing{{1, 2}, {2, 3}};
    EXPECT_THROW(disjointify_sets(crossing), StructuralError);
    const std::vector<std::vector<PointId>> nested{{2}, {1, 2, 3}, {4}};
    EXPECT_EQ(disjointify_sets(nested), (std::vector<std::size_t>{1, 2}));
}

TEST(Hyperfinite, DisjointifyMatchesMaximalOracle) {
    const auto m = FiniteRelationModel::tail(2, 5);
    Rng rng(5);
    for (int t = 0; t < 300; ++t) {
        std::vector<ChainClass> input;
        const std::size_t count = 1 + rng.below(50);
        for (std::size_t i = 0; i < count; ++i)
            input.push_back({static_cast<PointId>(rng.below(m.size())), static_cast<int>(rng.below(5))});
        const auto out = disjointify(m, input);
        std::vector<PointSet> family, chosen;
        for (const auto& c : input) family.push_back(as_set(m.class_members(c.level, c.center)));
        for (const auto& c : out) chosen.push_back(as_set(m.class_members(c.level, c.center)));
        EXPECT_EQ(std::set<PointSet>(chosen.begin(), chosen.end()), maximal_sets(family));
        EXPECT_EQ(chosen.size(), std::set<PointSet>(chosen.begin(), chosen.end()).size());
        std::size_t total = 0;
        for (const auto& s : chosen) total += s.size();
        const auto u = union_of(m, out);
        EXPECT_EQ(total, u.size()) << "not disjoint";
        for (const auto& c : input) EXPECT_TRUE(std::binary_search(u.begin(), u.end(), c.center));
        EXPECT_EQ(disjointify(m, out), out);
    }
}

// Oracle for the covering hypothesis via the subset-function algebra.
PointSet hypothesis_oracle(const FiniteRelationModel& m, const CoveringInstance& inst) {
    PointSet failing;
    for (std::size_t i = 1; i < inst.levels.size(); ++i)
        for (std::size_t j = 0; j < inst.levels[i].size(); ++j) {
            const auto tij = SubsetFunction::chain(m, inst.levels[i][j]);
            std::vector<PointSet> acc(m.size());
            for (std::size_t k = 0; k < i; ++k)
                for (int lk : inst.levels[k]) {
                    const auto s = compose(m, invert_sf(m, SubsetFunction::chain(m, lk)), tij);
                    for (const auto& phi : inst.d) {
                        const auto ds = compose(m, phi.as_subset_function(m), s);
                        for (PointId y = 0; y < m.size(); ++y) acc[y].insert(ds(y).begin(), ds(y).end());
                    }
                }
            for (PointId y = 0; y < m.size(); ++y)
                if (static_cast<double>(acc[y].size()) > (1 + inst.delta) * static_cast<double>(tij(y).size())) failing.insert(y);
        }
    return failing;
}

TEST(Hyperfinite, CoveringHypothesisMatchesOracle) {
    const auto m = FiniteRelationModel::tail(2, 4);
    Rng rng(6);
    for (int t = 0; t < 12; ++t) {
        InstanceShape shape;
        shape.rows = 6;
        shape.order = 1 + static_cast<int>(rng.below(2));
        shape.level_step = 0.4;
        shape.center_density = 0.2;
        shape.adversarial = t % 3 == 0;
        const auto inst = generate_covering_instance(m, static_cast<PointId>(rng.below(m.size())), shape, rng.next());
        const auto rep = check_covering_hypothesis(m, inst);
        const auto oracle = hypothesis_oracle(m, inst);
        EXPECT_EQ(PointSet(rep.failing_points.begin(), rep.failing_points.end()), oracle);
        EXPECT_EQ(rep.holds, oracle.empty());
        if (shape.adversarial) EXPECT_FALSE(rep.holds);
    }
}

TEST(Hyperfinite, CoveringSingleRowCoversCenters) {
    const auto m = FiniteRelationModel::tail(2, 4);
    const PointId y = 17;
    CoveringInstance inst;
    inst.delta = 0.1;
    inst.d = {InnerAutomorphism::identity(m)};
    auto top = m.class_members(4, y);
    inst.levels = {{2}};
    inst.centers = {{std::vector<PointId>(top.begin(), top.end())}};
    const auto r = covering(m, inst, y);
    EXPECT_TRUE(r.disjoint);
    EXPECT_EQ(r.mass, top.size());
    EXPECT_GE(static_cast<double>(r.mass), r.rhs);
    EXPECT_FALSE(r.rows_sufficient);
}

TEST(Hyperfinite, CoveringTwoLevelExhaustive) {
    const auto m = FiniteRelationModel::tail(2, 4);
    Rng rng(7);
    for (PointId y = 0; y < m.size(); ++y) {
        for (int t = 0; t < 5; ++t) {
            CoveringInstance inst;
            inst.delta = 0.1;
            inst.d = {InnerAutomorphism::identity(m)};
            inst.levels = {{1}, {2}};
            auto top = m.class_members(4, y);
            for (int row = 0; row < 2; ++row) {
                std::vector<PointId> b;
                for (PointId w : top)
                    if (rng.coin(0.1)) b.push_back(w);
                if (b.empty()) b.push_back(top[rng.below(top.size())]);
                inst.centers.push_back({b});
            }
            const auto r = covering(m, inst, y);
            EXPECT_TRUE(r.disjoint);
            EXPECT_TRUE(r.hypothesis.holds);
            EXPECT_GE(static_cast<double>(r.mass), r.rhs);
            const auto u = union_of(m, r.selected);
            EXPECT_EQ(u.size(), r.mass);
            for (PointId w : inst.centers[1][0]) EXPECT_TRUE(std::binary_search(u.begin(), u.end(), w));
        }
    }
}

TEST(Hyperfinite, CoveringBoundOnGeneratedInstances) {
    const auto m = FiniteRelationModel::tail(2, 5);
    Rng rng(8);
    for (int t = 0; t < 20; ++t) {
        InstanceShape shape;
        shape.center_density = 0.1 + 0.05 * static_cast<double>(t % 5);
        const auto y = static_cast<PointId>(rng.below(m.size()));
        const auto inst = generate_covering_instance(m, y, shape, rng.next());
        const auto r = covering(m, inst, y);
        EXPECT_TRUE(r.hypothesis.holds);
        EXPECT_TRUE(r.rows_sufficient);
        EXPECT_TRUE(r.bound_asserted);
        EXPECT_TRUE(r.bound_holds);
        EXPECT_TRUE(r.disjoint);
    }
}

TEST(Hyperfinite, CoveringAdversarialStillDisjoint) {
    const auto m = FiniteRelationModel::tail(2, 4);
    InstanceShape shape;
    shape.adversarial = true;
    shape.rows = 20;
    const auto inst = generate_covering_instance(m, 3, shape, 99);
    const auto r = covering(m, inst, 3);
    EXPECT_FALSE(r.hypothesis.holds);
    EXPECT_FALSE(r.bound_asserted);
    EXPECT_TRUE(r.disjoint);
}

TEST(Hyperfinite, StirlingBound) {
    EXPECT_NEAR(stirling_bound_E(2), std::log(2.0), 1e-15);
    EXPECT_THROW(stirling_bound_E(1), DomainError);
    for (int l = 4; l < 1024; ++l) EXPECT_LT(stirling_bound_E(l + 1), stirling_bound_E(l));
    EXPECT_LT(stirling_bound_E(1024), 0.01);
    const int l = choose_ell(0.1);
    EXPECT_LT(stirling_entropy(l / 2.0), 0.02);
    EXPECT_GE(stirling_entropy((l - 1) / 2.0), 0.02);
}

// Oracle: disjoint subcollections of a laminar family by a forest recursion,
// g(v) = 1 + prod over children g(c), total = prod over roots g(r).
std::uint64_t forest_count(const std::vector<PointSet>& family) {
    std::vector<PointSet> sets(family.begin(), family.end());
    std::sort(sets.begin(), sets.end());
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    std::sort(sets.begin(), sets.end(), [](const PointSet& a, const PointSet& b) { return a.size() < b.size(); });
    const std::size_t n = sets.size();
    std::vector<long> parent(n, -1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (sets[j].size() > sets[i].size() && std::includes(sets[j].begin(), sets[j].end(), sets[i].begin(), sets[i].end())) {
                parent[i] = static_cast<long>(j);
                break;
            }
    std::vector<std::uint64_t> prod(n, 1);
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {  // children precede parents
        const std::uint64_t g = 1 + prod[i];
        if (parent[i] < 0)
            total *= g;
        else
            prod[static_cast<std::size_t>(parent[i])] *= g;
    }
    return total;
}

TEST(Hyperfinite, CountingExamples) {
    const auto odo = FiniteRelationModel::odometer(4);
    const std::vector<int> full{4};
    EXPECT_EQ(count_disjoint_subcollections(odo, 0, 4, full, 16).count, 2u);
    const std::vector<int> two{2};
    EXPECT_EQ(count_disjoint_subcollections(odo, 0, 4, two, 4).count, 16u);
    const auto tail = FiniteRelationModel::tail(2, 4);
    EXPECT_THROW(count_disjoint_subcollections(tail, 0, 3, two, 3), ResourceError);
    EXPECT_THROW(count_disjoint_subcollections(odo, 0, 2, std::vector<int>{3}, 3), DomainError);
}

TEST(Hyperfinite, CountingMatchesForestOracleAndBound) {
    for (const auto& m : {FiniteRelationModel::odometer(4), FiniteRelationModel::tail(2, 3)}) {
        const int n = m.kind() == FiniteRelationModel::Kind::Odometer ? 4 : 2;
        Rng rng(9);
        for (int t = 0; t < 30; ++t) {
            std::vector<int> levels;
            for (int k = 0; k <= n; ++k)
                if (rng.coin()) levels.push_back(k);
            const int l_min = 1 + static_cast<int>(rng.below(4));
            const PointId y = static_cast<PointId>(rng.below(m.size()));
            const auto c = count_disjoint_subcollections(m, y, n, levels, l_min);
            std::vector<PointSet> family;
            for (int k : levels)
                for (PointId z : m.class_members(n, y)) {
                    auto cls = as_set(m.class_members(k, z));
                    if (static_cast<int>(cls.size()) >= l_min) family.push_back(cls);
                }
            EXPECT_EQ(c.count, forest_count(family));
            if (l_min >= 3) {
                ASSERT_TRUE(c.log2_bound.has_value());
                EXPECT_TRUE(c.within_bound);
                EXPECT_LE(std::log2(static_cast<double>(c.count)), *c.log2_bound);
            } else {
                EXPECT_FALSE(c.log2_bound.has_value());
            }
        }
    }
}

}  // namespace
