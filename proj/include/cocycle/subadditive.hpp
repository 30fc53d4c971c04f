#pragma once

// Subadditive functionals on bounded subset functions of a finite model, a
// randomized property checker, and the limit harness comparing chain averages
// with candidate subrelations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cocycle/actions.hpp"
#include "cocycle/boundary.hpp"
#include "cocycle/entropy.hpp"
#include "cocycle/errors.hpp"
#include "cocycle/hyperfinite.hpp"
#include "cocycle/random.hpp"

namespace cocycle {

struct FunctionalValue {
    double value = 0.0;
    double stderr_value = 0.0;
};

// value(A)(y) depends on the base point y and the finite set A(y).
struct SubadditiveFunctional {
    std::string name;
    std::function<FunctionalValue(const FiniteRelationModel&, PointId, std::span<const PointId>)> evaluator;
    double bound_constant = 1.0;

    FunctionalValue operator()(const FiniteRelationModel& m, PointId y, std::span<const PointId> set) const {
        return evaluator(m, y, set);
    }

    static SubadditiveFunctional cardinality() {
        return {"cardinality",
                [](const FiniteRelationModel&, PointId, std::span<const PointId> s) {
                    return FunctionalValue{static_cast<double>(s.size()), 0.0};
                },
                1.0};
    }

    // |A|^2 with declared constant 1: bounded only on singletons.
    static SubadditiveFunctional squared_cardinality() {
        return {"squared-cardinality",
                [](const FiniteRelationModel&, PointId, std::span<const PointId> s) {
                    const double k = static_cast<double>(s.size());
                    return FunctionalValue{k * k, 0.0};
                },
                1.0};
    }

    // h^P(A)(y) = H( V_{z in A(y)} alpha(z, y)^-1 P ) on the tail model.
    static SubadditiveFunctional entropy_hP(const FiniteRelationModel& model, const PartitionLabeler& labeler,
                                            const ProbabilityVector& p, EvalMode mode = EvalMode::exact()) {
        if (model.kind() != FiniteRelationModel::Kind::Tail) throw StructuralError("h^P needs the tail model");
        if (labeler.rank() != model.rank()) throw StructuralError("labeler rank does not match the model");
        const double c = marginal_entropy(labeler, p).value;
        return {"hP",
                [labeler, p, mode, id = model.id()](const FiniteRelationModel& m, PointId y, std::span<const PointId> s) {
                    require_same_model(id, m.id());
                    const auto base = m.boundary_point(y);
                    std::vector<ReducedWord> keys;
                    keys.reserve(s.size());
                    for (PointId z : s) keys.push_back(fundamental_cocycle(m.boundary_point(z), base));
                    const auto est = refined_entropy(keys, labeler, p, mode);
                    return FunctionalValue{est.value, est.stderr_value.value_or(0.0)};
                },
                c};
    }
};

enum class Violation { None, Boundedness, Invariance, Subadditivity };

inline std::string violation_name(Violation v) {
    switch (v) {
        case Violation::None: return "none";
        case Violation::Boundedness: return "boundedness";
        case Violation::Invariance: return "invariance";
        case Violation::Subadditivity: return "subadditivity";
    }
    return "?";
}

struct SubadditiveCheckReport {
    bool passed = true;
    Violation first = Violation::None;
    std::string detail;
    int trials = 0;
    int subadditive_equalities = 0;
};

// Uniform random subset of `ground` with at least one element.
inline std::vector<PointId> random_nonempty_subset(std::span<const PointId> ground, Rng& rng) {
    std::vector<PointId> out;
    while (out.empty())
        for (PointId z : ground)
            if (rng.coin(0.5)) out.push_back(z);
    return out;
}

// Per trial: boundedness on a random set, invariance on a random chain
// class, and subadditivity on a random decomposition of that set into up to
// four pieces with random base points.
inline SubadditiveCheckReport check_subadditive(const SubadditiveFunctional& f, const FiniteRelationModel& model,
                                                int trials, std::uint64_t seed, double tol = 1e-9) {
    SubadditiveCheckReport rep;
    Rng rng(seed);
    const auto n_points = static_cast<std::uint64_t>(model.size());
    auto fail = [&](Violation v, std::string d) {
        if (rep.passed) {
            rep.passed = false;
            rep.first = v;
            rep.detail = std::move(d);
        }
    };
    for (int t = 0; t < trials && rep.passed; ++t) {
        ++rep.trials;
        const auto y = static_cast<PointId>(rng.below(n_points));
        // Sets are drawn inside a chain class of size at most (2r-1)^3 to keep
        // exact evaluation cheap.
        const int small = static_cast<int>(rng.between(0, std::min(3, model.max_level())));
        auto ground = model.class_members(small, y);
        const auto a = random_nonempty_subset(ground, rng);
        const auto fa = f(model, y, a);
        if (fa.value > f.bound_constant * static_cast<double>(a.size()) + tol)
            fail(Violation::Boundedness, "value " + std::to_string(fa.value) + " exceeds C*|A| = " +
                                             std::to_string(f.bound_constant * static_cast<double>(a.size())));

        const PointId z = ground[rng.below(ground.size())];
        const double vy = f(model, y, ground).value;
        const double vz = f(model, z, ground).value;
        if (std::abs(vy - vz) > tol * std::max(1.0, std::abs(vy)))
            fail(Violation::Invariance, "value differs between related points " + std::to_string(y) + " and " + std::to_string(z));

        const int pieces = static_cast<int>(rng.between(1, std::min<std::int64_t>(4, static_cast<std::int64_t>(a.size()))));
        std::vector<std::vector<PointId>> parts(static_cast<std::size_t>(pieces));
        for (std::size_t i = 0; i < a.size(); ++i) {
            // First `pieces` elements seed distinct pieces so none is empty.
            const std::size_t k = i < parts.size() ? i : rng.below(parts.size());
            parts[k].push_back(a[i]);
        }
        double rhs = 0.0;
        for (const auto& part : parts) {
            const auto base = static_cast<PointId>(rng.below(n_points));
            rhs += f(model, base, part).value;
        }
        if (fa.value > rhs + tol * std::max(1.0, rhs))
            fail(Violation::Subadditivity, "value " + std::to_string(fa.value) + " exceeds piece sum " + std::to_string(rhs));
        else if (std::abs(fa.value - rhs) <= tol * std::max(1.0, rhs))
            ++rep.subadditive_equalities;
    }
    return rep;
}

// Candidate subrelation T, given as an equivalence relation on the model.
struct Candidate {
    std::string name;
    SubsetFunction relation;
};

inline Candidate chain_candidate(const FiniteRelationModel& model, int level) {
    return {"chain-" + std::to_string(level), SubsetFunction::chain(model, level)};
}

// y ~ z iff y and z agree outside the 1-based coordinate block [first, last].
inline Candidate coordinate_block_candidate(const FiniteRelationModel& model, int first, int last) {
    if (first < 1 || last < first || last > model.length()) throw DomainError("coordinate block outside [1, L]");
    std::map<std::vector<int>, std::vector<PointId>> groups;
    for (PointId y = 0; y < model.size(); ++y) {
        std::vector<int> key;
        const auto& c = model.coords(y);
        for (int i = 1; i <= model.length(); ++i)
            if (i < first || i > last) key.push_back(c[static_cast<std::size_t>(i - 1)]);
        groups[key].push_back(y);
    }
    std::vector<std::vector<PointId>> sets(model.size());
    for (const auto& [_, members] : groups)
        for (PointId y : members) sets[y] = members;
    return {"block-" + std::to_string(first) + "-" + std::to_string(last), SubsetFunction(model, std::move(sets))};
}

struct LevelRow {
    int n = 0;
    double s = 0.0;        // weighted average of F(Z_n)(y) / |Z_n(y)|
    double stderr_value = 0.0;
    double gap = 0.0;      // s - infimum
    bool within_noise = true;  // s <= s_prev + 3 stderr
};

struct CandidateRow {
    std::string name;
    double value = 0.0;  // weighted average of F(T)(y) / |T(y)|
};

struct HarnessReport {
    std::vector<LevelRow> levels;
    std::vector<CandidateRow> candidates;
    double infimum = 0.0;            // over candidates and chain levels
    double supplied_infimum = 0.0;   // over candidates only (inf if none)
    bool lower_bound_holds = true;   // s_n >= infimum for all n
    bool nonincreasing_within_noise = true;
    bool ring_bound_holds = true;
    double worst_ring_slack = 0.0;   // min over checks of rhs - lhs
};

namespace detail {

inline std::vector<FunctionalValue> evaluate_pointwise(const SubadditiveFunctional& f, const FiniteRelationModel& model,
                                                       const SubsetFunction& t) {
    require_same_model(t.model_id(), model.id());
    std::vector<FunctionalValue> out(model.size());
    for (PointId y = 0; y < model.size(); ++y) out[y] = f(model, y, t(y));
    return out;
}

inline std::pair<double, double> normalized_average(const FiniteRelationModel& model, const SubsetFunction& t,
                                                    std::span<const FunctionalValue> values) {
    CompensatedSum s, v;
    const double w = 1.0 / static_cast<double>(model.size());
    for (PointId y = 0; y < model.size(); ++y) {
        const double k = static_cast<double>(t(y).size());
        s.add(w * values[y].value / k);
        v.add(w * w * (values[y].stderr_value / k) * (values[y].stderr_value / k));
    }
    return {s.value(), std::sqrt(v.value())};
}

}  // namespace detail

// s_n over the given chain levels, candidate averages, and the exact
// interior/boundary inequality
//   F(Z_n)(y) <= sum_{z in ring} F(T)(z)/|T(z)| + C |Z_n(y) \ ring|,
// ring = { z in Z_n(y) : T(z) ⊆ Z_n(y) }, for every candidate, level and y.
inline HarnessReport subadditive_limit_harness(const SubadditiveFunctional& f, const FiniteRelationModel& model,
                                               std::span<const int> chain_levels, std::span<const Candidate> candidates,
                                               double tol = 1e-9) {
    HarnessReport rep;
    std::vector<std::vector<FunctionalValue>> chain_values;
    for (int n : chain_levels) {
        model.check_level(n);
        const auto t = SubsetFunction::chain(model, n);
        chain_values.push_back(detail::evaluate_pointwise(f, model, t));
        const auto [s, se] = detail::normalized_average(model, t, chain_values.back());
        rep.levels.push_back({n, s, se, 0.0, true});
    }
    std::vector<std::vector<FunctionalValue>> cand_values;
    rep.supplied_infimum = std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) {
        if (!is_equivalence_relation(c.relation)) throw StructuralError("candidate " + c.name + " is not an equivalence relation");
        cand_values.push_back(detail::evaluate_pointwise(f, model, c.relation));
        const double v = detail::normalized_average(model, c.relation, cand_values.back()).first;
        rep.candidates.push_back({c.name, v});
        rep.supplied_infimum = std::min(rep.supplied_infimum, v);
    }
    rep.infimum = rep.supplied_infimum;
    for (const auto& row : rep.levels) rep.infimum = std::min(rep.infimum, row.s);

    for (std::size_t i = 0; i < rep.levels.size(); ++i) {
        auto& row = rep.levels[i];
        row.gap = row.s - rep.infimum;
        if (row.s < rep.infimum - tol) rep.lower_bound_holds = false;
        if (i > 0) {
            const auto& prev = rep.levels[i - 1];
            row.within_noise = row.s <= prev.s + 3.0 * row.stderr_value + tol;
            if (!row.within_noise) rep.nonincreasing_within_noise = false;
        }
    }

    rep.worst_ring_slack = std::numeric_limits<double>::infinity();
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        const auto& t = candidates[ci].relation;
        for (std::size_t li = 0; li < rep.levels.size(); ++li) {
            const int n = rep.levels[li].n;
            for (PointId y = 0; y < model.size(); ++y) {
                double rhs = 0.0;
                std::size_t outside = 0;
                for (PointId z : model.class_members(n, y)) {
                    auto tz = t(z);
                    const bool interior =
                        std::all_of(tz.begin(), tz.end(), [&](PointId w) { return model.related(n, y, w); });
                    if (interior)
                        rhs += cand_values[ci][z].value / static_cast<double>(tz.size());
                    else
                        ++outside;
                }
                rhs += f.bound_constant * static_cast<double>(outside);
                const double slack = rhs - chain_values[li][y].value;
                rep.worst_ring_slack = std::min(rep.worst_ring_slack, slack);
                if (slack < -tol * std::max(1.0, rhs)) rep.ring_bound_holds = false;
            }
        }
    }
    if (candidates.empty()) rep.worst_ring_slack = 0.0;
    return rep;
}

}  // namespace cocycle
