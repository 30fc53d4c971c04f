#pragma once

// Class averages along hyperfinite exhaustions, on the finite models and on
// the extended relation over X x boundary.

#include <algorithm>
#include <cstdint>
#include <functional>
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

struct ExtendedClassElement {
    LazyBernoulliPoint point;
    BoundaryPrefix boundary;

    friend bool operator==(const ExtendedClassElement&, const ExtendedClassElement&) = default;
};

// An observable on X x boundary reading the symbols x(w), w in `coordinates`,
// and the first `boundary_depth` letters of the boundary point.
struct ExtendedObservable {
    std::vector<ReducedWord> coordinates;
    int boundary_depth = 0;
    std::function<double(std::span<const int>, const BoundaryPrefix&)> eval;

    double operator()(const ExtendedClassElement& e) const {
        if (e.boundary.depth() < boundary_depth)
            throw PrecisionError("observable reads " + std::to_string(boundary_depth) + " boundary letters, point has " +
                                 std::to_string(e.boundary.depth()));
        std::vector<int> symbols;
        symbols.reserve(coordinates.size());
        for (const auto& w : coordinates) symbols.push_back(e.point.symbol_at(w));
        return eval(symbols, e.boundary);
    }

    // Boundary depth needed to average at level n.
    int required_depth(int n) const { return std::max(n + 1, boundary_depth); }

    static ExtendedObservable constant(double c) {
        return {{}, 0, [c](std::span<const int>, const BoundaryPrefix&) { return c; }};
    }

    // 1{x(e) = symbol}.
    static ExtendedObservable symbol_indicator(int rank, int symbol) {
        return {{ReducedWord::identity(rank)}, 0,
                [symbol](std::span<const int> s, const BoundaryPrefix&) { return s[0] == symbol ? 1.0 : 0.0; }};
    }

    // 1{xi_position = g}; constant on R_n-classes for n < position.
    static ExtendedObservable boundary_letter_indicator(int position, Generator g) {
        return {{}, position, [position, g](std::span<const int>, const BoundaryPrefix& xi) {
                    return xi.at(position) == g ? 1.0 : 0.0;
                }};
    }
};

// R_n^X(x, xi) = {(alpha(z, xi) x, z) : z in R_n(xi)}, in tail_class order.
inline std::vector<ExtendedClassElement> extended_class(const ExtendedClassElement& e, int n) {
    if (n < 0 || n >= e.boundary.depth()) throw PrecisionError("extended class needs boundary depth > n");
    std::vector<ExtendedClassElement> out;
    for (auto& z : tail_class(e.boundary, n)) {
        auto shifted = translate(fundamental_cocycle(z, e.boundary, n), e.point);
        out.push_back({std::move(shifted), std::move(z)});
    }
    return out;
}

inline double class_average(const ExtendedObservable& f, const ExtendedClassElement& e, int n) {
    if (e.boundary.depth() < f.required_depth(n)) throw PrecisionError("boundary point too shallow for this observable and level");
    CompensatedSum s;
    const auto cls = extended_class(e, n);
    for (const auto& w : cls) s.add(f(w));
    return s.value() / static_cast<double>(cls.size());
}

// Observables on a finite model take exact rational values.
using ModelObservable = std::function<Rational(const FiniteRelationModel&, PointId)>;

// 1{first k coordinates of y equal those of `anchor`}; integral |cylinder| / |Y|.
inline ModelObservable cylinder_indicator(const FiniteRelationModel& model, PointId anchor, int k) {
    model.check_point(anchor);
    model.check_level(k);
    std::vector<int> prefix(model.coords(anchor).begin(), model.coords(anchor).begin() + k);
    return [prefix](const FiniteRelationModel& m, PointId y) {
        const auto& c = m.coords(y);
        return std::equal(prefix.begin(), prefix.end(), c.begin()) ? Rational(1) : Rational(0);
    };
}

inline Rational class_average(const FiniteRelationModel& model, const ModelObservable& f, PointId y, int n) {
    auto cls = model.class_members(n, y);
    Rational s(0);
    for (PointId z : cls) s += f(model, z);
    return s / static_cast<std::int64_t>(cls.size());
}

inline Rational model_integral(const FiniteRelationModel& model, const ModelObservable& f) {
    Rational s(0);
    for (PointId y = 0; y < model.size(); ++y) s += f(model, y) * model.weight(y);
    return s;
}

struct SpreadRow {
    int n = 0;
    double min_average = 0.0;
    double max_average = 0.0;
    double spread = 0.0;  // max pairwise deviation = max - min
};

struct ErgodicityReport {
    std::vector<SpreadRow> rows;
    int num_starts = 0;
    std::uint64_t seed = 0;
    // Set when the final spread is nonzero and at least half the first one.
    bool non_decaying = false;
};

struct DiagnosticConfig {
    int rank = 2;
    int num_starts = 10;
    int n_min = 1;
    int n_max = 8;
    std::uint64_t seed = 1;
};

// Class averages from independent (x, xi) starts; spread per level.
inline ErgodicityReport ergodicity_diagnostic(const ExtendedObservable& f, const ProbabilityVector& p,
                                              const DiagnosticConfig& cfg) {
    check_rank(cfg.rank);
    if (cfg.num_starts < 1) throw DomainError("ergodicity_diagnostic needs at least one start");
    if (cfg.n_min < 0 || cfg.n_max < cfg.n_min) throw DomainError("need 0 <= n_min <= n_max");
    const int depth = f.required_depth(cfg.n_max);
    std::vector<ExtendedClassElement> starts;
    for (int s = 0; s < cfg.num_starts; ++s) {
        const auto us = static_cast<std::uint64_t>(s);
        starts.push_back({LazyBernoulliPoint(split_seed(cfg.seed, 0xe1, us), cfg.rank, p),
                          sample_prefix(depth, cfg.rank, split_seed(cfg.seed, 0xe2, us))});
    }
    ErgodicityReport rep;
    rep.num_starts = cfg.num_starts;
    rep.seed = cfg.seed;
    for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
        SpreadRow row;
        row.n = n;
        bool first = true;
        for (const auto& e : starts) {
            const double a = class_average(f, e, n);
            row.min_average = first ? a : std::min(row.min_average, a);
            row.max_average = first ? a : std::max(row.max_average, a);
            first = false;
        }
        row.spread = row.max_average - row.min_average;
        rep.rows.push_back(row);
    }
    const double s0 = rep.rows.front().spread;
    const double s1 = rep.rows.back().spread;
    rep.non_decaying = s1 > 1e-12 && s1 >= 0.5 * s0;
    return rep;
}

}  // namespace cocycle
