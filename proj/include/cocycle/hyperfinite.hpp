#pragma once

// Finite models of hyperfinite exhaustions.
//
// A model is a finite ground set of strings of length L together with the
// chain of relations Z_0 ⊆ Z_1 ⊆ ... ⊆ Z_L, where y Z_n z iff y and z agree on
// every coordinate > n. Two models are provided: the tail model on admissible
// boundary prefixes of F_r (classes of size (2r-1)^n for n < L) and the dyadic
// odometer on {0,1}^L (classes of size 2^n). Both carry the uniform weight,
// which for the tail model is the exact nu-cylinder weight.
//
// Points are numbered in lexicographic order of their strings (coordinate 1
// most significant), and every enumeration below follows that order.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "cocycle/boundary.hpp"
#include "cocycle/errors.hpp"
#include "cocycle/free_group.hpp"
#include "cocycle/random.hpp"

namespace cocycle {

using PointId = std::uint32_t;
using Rational = boost::rational<std::int64_t>;

class FiniteRelationModel {
public:
    enum class Kind { Tail, Odometer };

    static FiniteRelationModel tail(int rank, int length) {
        check_rank(rank);
        if (length < 1) throw DomainError("tail model needs L >= 1");
        if (sphere_size(length, rank) > (1u << 22)) throw ResourceError("tail model ground set exceeds 2^22 points");
        FiniteRelationModel m(Kind::Tail, rank, length);
        for (const auto& xi : enumerate_prefixes(length, rank, length)) {
            std::vector<int> c;
            for (Generator g : xi.letters()) c.push_back(g.code());
            m.coords_.push_back(std::move(c));
        }
        m.build_chain();
        return m;
    }

    static FiniteRelationModel odometer(int length) {
        if (length < 1 || length > 22) throw DomainError("odometer model needs 1 <= L <= 22");
        FiniteRelationModel m(Kind::Odometer, 0, length);
        const std::uint32_t n = 1u << length;
        for (std::uint32_t v = 0; v < n; ++v) {
            std::vector<int> c(static_cast<std::size_t>(length));
            for (int i = 0; i < length; ++i) c[static_cast<std::size_t>(i)] = static_cast<int>((v >> (length - 1 - i)) & 1u);
            m.coords_.push_back(std::move(c));
        }
        m.build_chain();
        return m;
    }

    Kind kind() const { return kind_; }
    int rank() const { return rank_; }
    int length() const { return length_; }
    int max_level() const { return length_; }
    std::size_t size() const { return coords_.size(); }
    std::uint64_t id() const { return id_; }

    const std::vector<int>& coords(PointId y) const { return coords_.at(y); }

    // The tail-model point as a boundary prefix of depth L.
    BoundaryPrefix boundary_point(PointId y) const {
        if (kind_ != Kind::Tail) throw StructuralError("odometer points are not boundary points");
        std::vector<Generator> letters;
        for (int c : coords_.at(y)) letters.push_back(Generator::from_code(static_cast<std::uint8_t>(c)));
        return BoundaryPrefix(rank_, std::move(letters));
    }

    std::optional<PointId> find(std::span<const int> c) const {
        auto it = std::lower_bound(coords_.begin(), coords_.end(), c,
                                   [](const std::vector<int>& a, std::span<const int> b) {
                                       return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
                                   });
        if (it == coords_.end() || !std::equal(it->begin(), it->end(), c.begin(), c.end())) return std::nullopt;
        return static_cast<PointId>(it - coords_.begin());
    }

    void check_level(int n) const {
        if (n < 0 || n > length_) throw DomainError("chain level " + std::to_string(n) + " outside [0, L]");
    }

    void check_point(PointId y) const {
        if (y >= coords_.size()) throw StructuralError("point id outside the ground set");
    }

    std::uint32_t class_id(int n, PointId y) const {
        check_level(n);
        return class_of_[static_cast<std::size_t>(n)][y];
    }

    // Z_n(y), sorted.
    std::span<const PointId> class_members(int n, PointId y) const {
        return members_[static_cast<std::size_t>(n)][class_id(n, y)];
    }

    std::size_t class_size(int n, PointId y) const { return class_members(n, y).size(); }

    std::size_t num_classes(int n) const {
        check_level(n);
        return members_[static_cast<std::size_t>(n)].size();
    }

    // Members of the c-th class of level n.
    std::span<const PointId> class_by_index(int n, std::uint32_t c) const {
        check_level(n);
        return members_[static_cast<std::size_t>(n)].at(c);
    }

    bool related(int n, PointId y, PointId z) const { return class_id(n, y) == class_id(n, z); }

    Rational weight(PointId) const { return Rational(1, static_cast<std::int64_t>(coords_.size())); }

    // Smallest level at which y and z are related.
    int meet_level(PointId y, PointId z) const {
        const auto& a = coords_.at(y);
        const auto& b = coords_.at(z);
        int k = length_;
        while (k > 0 && a[static_cast<std::size_t>(k - 1)] == b[static_cast<std::size_t>(k - 1)]) --k;
        return k;
    }

    std::string point_string(PointId y) const {
        if (kind_ == Kind::Tail) return boundary_point(y).to_string();
        std::string s;
        for (int c : coords_.at(y)) s.push_back(static_cast<char>('0' + c));
        return s;
    }

private:
    FiniteRelationModel(Kind kind, int rank, int length) : kind_(kind), rank_(rank), length_(length), id_(next_id()) {}

    static std::uint64_t next_id() {
        static std::atomic<std::uint64_t> counter{1};
        return counter.fetch_add(1);
    }

    void build_chain() {
        class_of_.assign(static_cast<std::size_t>(length_ + 1), std::vector<std::uint32_t>(coords_.size()));
        members_.assign(static_cast<std::size_t>(length_ + 1), {});
        for (int n = 0; n <= length_; ++n) {
            std::map<std::vector<int>, std::uint32_t> by_suffix;
            auto& cls = class_of_[static_cast<std::size_t>(n)];
            auto& mem = members_[static_cast<std::size_t>(n)];
            for (PointId y = 0; y < coords_.size(); ++y) {
                std::vector<int> suffix(coords_[y].begin() + n, coords_[y].end());
                auto [it, inserted] = by_suffix.emplace(std::move(suffix), static_cast<std::uint32_t>(mem.size()));
                if (inserted) mem.emplace_back();
                cls[y] = it->second;
                mem[it->second].push_back(y);
            }
        }
    }

    Kind kind_;
    int rank_;
    int length_;
    std::uint64_t id_;
    std::vector<std::vector<int>> coords_;
    std::vector<std::vector<std::uint32_t>> class_of_;
    std::vector<std::vector<std::vector<PointId>>> members_;
};

inline void require_same_model(std::uint64_t a, std::uint64_t b) {
    if (a != b) throw StructuralError("subset functions belong to different models");
}

// A map y -> finite subset of the class of y, stored pointwise.
class SubsetFunction {
public:
    SubsetFunction(const FiniteRelationModel& model, std::vector<std::vector<PointId>> sets)
        : model_id_(model.id()), sets_(std::move(sets)) {
        if (sets_.size() != model.size()) throw StructuralError("subset function must have one set per point");
        for (auto& s : sets_) {
            std::sort(s.begin(), s.end());
            s.erase(std::unique(s.begin(), s.end()), s.end());
            for (PointId z : s) model.check_point(z);
        }
        // Every model here is a single Z_L-class, so T(y) ⊆ R(y) holds once the
        // points are valid.
    }

    static SubsetFunction identity(const FiniteRelationModel& model) {
        std::vector<std::vector<PointId>> sets(model.size());
        for (PointId y = 0; y < model.size(); ++y) sets[y] = {y};
        return SubsetFunction(model, std::move(sets));
    }

    // The chain relation Z_n as a subset function.
    static SubsetFunction chain(const FiniteRelationModel& model, int n) {
        std::vector<std::vector<PointId>> sets(model.size());
        for (PointId y = 0; y < model.size(); ++y) {
            auto c = model.class_members(n, y);
            sets[y].assign(c.begin(), c.end());
        }
        return SubsetFunction(model, std::move(sets));
    }

    std::uint64_t model_id() const { return model_id_; }
    std::size_t size() const { return sets_.size(); }
    std::span<const PointId> operator()(PointId y) const { return sets_.at(y); }
    const std::vector<std::vector<PointId>>& sets() const { return sets_; }

    friend bool operator==(const SubsetFunction&, const SubsetFunction&) = default;

private:
    std::uint64_t model_id_;
    std::vector<std::vector<PointId>> sets_;
};

// (S o T)(y) = union over z in T(y) of S(z).
inline SubsetFunction compose(const FiniteRelationModel& model, const SubsetFunction& s, const SubsetFunction& t) {
    require_same_model(s.model_id(), t.model_id());
    require_same_model(s.model_id(), model.id());
    std::vector<std::vector<PointId>> out(t.size());
    for (PointId y = 0; y < t.size(); ++y)
        for (PointId z : t(y)) {
            auto sz = s(z);
            out[y].insert(out[y].end(), sz.begin(), sz.end());
        }
    return SubsetFunction(model, std::move(out));
}

// T^-1(y) = { z : y in T(z) }.
inline SubsetFunction invert_sf(const FiniteRelationModel& model, const SubsetFunction& t) {
    require_same_model(t.model_id(), model.id());
    std::vector<std::vector<PointId>> out(t.size());
    for (PointId z = 0; z < t.size(); ++z)
        for (PointId y : t(z)) out[y].push_back(z);
    return SubsetFunction(model, std::move(out));
}

// (S \ T)(y) = S(y) \ T(y).
inline SubsetFunction difference(const FiniteRelationModel& model, const SubsetFunction& s, const SubsetFunction& t) {
    require_same_model(s.model_id(), t.model_id());
    std::vector<std::vector<PointId>> out(s.size());
    for (PointId y = 0; y < s.size(); ++y)
        std::set_difference(s(y).begin(), s(y).end(), t(y).begin(), t(y).end(), std::back_inserter(out[y]));
    return SubsetFunction(model, std::move(out));
}

// ||T|| = max over y of max(|T(y)|, |T^-1(y)|).
inline std::size_t norm(const FiniteRelationModel& model, const SubsetFunction& t) {
    const auto inv = invert_sf(model, t);
    std::size_t out = 0;
    for (PointId y = 0; y < t.size(); ++y) out = std::max({out, t(y).size(), inv(y).size()});
    return out;
}

inline bool is_equivalence_relation(const SubsetFunction& t) {
    for (PointId y = 0; y < t.size(); ++y) {
        auto ty = t(y);
        if (!std::binary_search(ty.begin(), ty.end(), y)) return false;
        for (PointId z : ty) {
            auto tz = t(z);
            if (!std::equal(ty.begin(), ty.end(), tz.begin(), tz.end())) return false;
        }
    }
    return true;
}

// A bijection of the ground set whose graph lies in Z_order.
class InnerAutomorphism {
public:
    InnerAutomorphism(const FiniteRelationModel& model, std::vector<PointId> perm, int order)
        : model_id_(model.id()), perm_(std::move(perm)), order_(order) {
        model.check_level(order);
        if (perm_.size() != model.size()) throw StructuralError("automorphism must be defined on every point");
        std::vector<bool> hit(perm_.size(), false);
        for (PointId y = 0; y < perm_.size(); ++y) {
            model.check_point(perm_[y]);
            if (hit[perm_[y]]) throw StructuralError("automorphism is not injective");
            hit[perm_[y]] = true;
            if (!model.related(order, y, perm_[y]))
                throw StructuralError("automorphism moves a point outside its Z_" + std::to_string(order) + "-class");
        }
    }

    static InnerAutomorphism identity(const FiniteRelationModel& model) {
        std::vector<PointId> perm(model.size());
        std::iota(perm.begin(), perm.end(), 0);
        return InnerAutomorphism(model, std::move(perm), 0);
    }

    PointId operator()(PointId y) const { return perm_.at(y); }
    int order() const { return order_; }
    std::uint64_t model_id() const { return model_id_; }
    const std::vector<PointId>& permutation() const { return perm_; }

    InnerAutomorphism inverse(const FiniteRelationModel& model) const {
        std::vector<PointId> inv(perm_.size());
        for (PointId y = 0; y < perm_.size(); ++y) inv[perm_[y]] = y;
        return InnerAutomorphism(model, std::move(inv), order_);
    }

    SubsetFunction as_subset_function(const FiniteRelationModel& model) const {
        std::vector<std::vector<PointId>> sets(perm_.size());
        for (PointId y = 0; y < perm_.size(); ++y) sets[y] = {perm_[y]};
        return SubsetFunction(model, std::move(sets));
    }

private:
    std::uint64_t model_id_;
    std::vector<PointId> perm_;
    int order_;
};

// Cyclic shift within every Z_n-class, in the canonical order of the class.
inline InnerAutomorphism cyclic_automorphism(const FiniteRelationModel& model, int n) {
    model.check_level(n);
    std::vector<PointId> perm(model.size());
    for (std::uint32_t c = 0; c < model.num_classes(n); ++c) {
        auto members = model.class_by_index(n, c);
        for (std::size_t i = 0; i < members.size(); ++i) perm[members[i]] = members[(i + 1) % members.size()];
    }
    return InnerAutomorphism(model, std::move(perm), n);
}

// Orbit of y under the cyclic group generated by phi.
inline std::vector<PointId> orbit(const InnerAutomorphism& phi, PointId y) {
    std::vector<PointId> out{y};
    for (PointId z = phi(y); z != y; z = phi(z)) out.push_back(z);
    std::sort(out.begin(), out.end());
    return out;
}

// D o S = { phi(s) : phi in D, s in S }, sorted.
inline std::vector<PointId> apply_all(std::span<const InnerAutomorphism> d, std::span<const PointId> s) {
    std::vector<PointId> out;
    out.reserve(d.size() * s.size());
    for (const auto& phi : d)
        for (PointId z : s) out.push_back(phi(z));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Exact weighted average over y of |Z_n(y) △ D o Z_n(y)| / |Z_n(y)|.
inline Rational folner_defect_exact(const FiniteRelationModel& model, std::span<const InnerAutomorphism> d, int n) {
    model.check_level(n);
    if (d.empty()) throw DomainError("folner_defect needs a non-empty set of automorphisms");
    for (const auto& phi : d) require_same_model(phi.model_id(), model.id());
    // The integrand is constant on Z_n-classes; sum class by class.
    Rational total(0);
    for (std::uint32_t c = 0; c < model.num_classes(n); ++c) {
        auto cls = model.class_by_index(n, c);
        const auto image = apply_all(d, cls);
        std::vector<PointId> sym;
        std::set_symmetric_difference(cls.begin(), cls.end(), image.begin(), image.end(), std::back_inserter(sym));
        // |C| points each contribute |sym| / |C| with weight 1/|Y|.
        total += Rational(static_cast<std::int64_t>(sym.size()), static_cast<std::int64_t>(model.size()));
    }
    return total;
}

inline double folner_defect(const FiniteRelationModel& model, std::span<const InnerAutomorphism> d, int n) {
    return boost::rational_cast<double>(folner_defect_exact(model, d, n));
}

struct InteriorFraction {
    std::vector<Rational> per_point;
    Rational average;
};

// For each y, the fraction of z in Z_n(y) whose T-class stays inside Z_n(y).
inline InteriorFraction interior_fraction(const FiniteRelationModel& model, const SubsetFunction& t, int n) {
    require_same_model(t.model_id(), model.id());
    model.check_level(n);
    if (!is_equivalence_relation(t)) throw StructuralError("interior_fraction needs an equivalence relation");
    InteriorFraction out;
    out.per_point.resize(model.size());
    for (PointId y = 0; y < model.size(); ++y) {
        auto cls = model.class_members(n, y);
        std::int64_t inside = 0;
        for (PointId z : cls) {
            auto tz = t(z);
            if (std::all_of(tz.begin(), tz.end(), [&](PointId w) { return model.related(n, y, w); })) ++inside;
        }
        out.per_point[y] = Rational(inside, static_cast<std::int64_t>(cls.size()));
        out.average += out.per_point[y] * model.weight(y);
    }
    return out;
}

// A class Z_level(center) of the chain.
struct ChainClass {
    PointId center = 0;
    int level = 0;
    friend bool operator==(const ChainClass&, const ChainClass&) = default;
};

namespace detail {

// The selection loop of the disjointification algorithm over an abstract
// laminar family. `contains(i, j)` is C_i ⊇ C_j, `intersects(i, j)` is
// C_i ∩ C_j ≠ ∅; `order` lists labels in checking order.
template <typename Contains, typename Intersects>
std::vector<std::size_t> disjointify_labels(std::size_t count, std::span<const std::size_t> order, Contains contains,
                                            Intersects intersects) {
    // Laminarity: intersecting members must be nested.
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = i + 1; j < count; ++j)
            if (intersects(i, j) && !contains(i, j) && !contains(j, i))
                throw StructuralError("classes are neither disjoint nor nested; input is not drawn from one chain");
    std::vector<bool> open(count, true);
    std::vector<std::size_t> selected;
    for (std::size_t c : order) {
        if (!open[c]) continue;
        // Case (A): C contains every member it meets.
        bool case_a = true;
        for (std::size_t j = 0; j < count && case_a; ++j)
            if (j != c && intersects(c, j) && !contains(c, j)) case_a = false;
        open[c] = false;
        if (!case_a) continue;  // case (B): strictly inside another member
        selected.push_back(c);
        for (std::size_t j = 0; j < count; ++j)
            if (open[j] && contains(c, j)) open[j] = false;
    }
    return selected;
}

}  // namespace detail

// Disjoint subcollection of chain classes whose union covers every center:
// the maximal classes of the (laminar) input. Classes are checked largest
// level first, ties by lexicographic center; duplicates of a selected class
// are dropped.
inline std::vector<ChainClass> disjointify(const FiniteRelationModel& model, std::span<const ChainClass> classes) {
    for (const auto& c : classes) {
        if (c.level < 0 || c.level > model.max_level()) throw StructuralError("class level is not a level of the chain");
        model.check_point(c.center);
    }
    std::vector<std::size_t> order(classes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (classes[a].level != classes[b].level) return classes[a].level > classes[b].level;
        return classes[a].center < classes[b].center;
    });
    auto contains = [&](std::size_t i, std::size_t j) {
        return classes[i].level >= classes[j].level && model.related(classes[i].level, classes[i].center, classes[j].center);
    };
    auto intersects = [&](std::size_t i, std::size_t j) {
        const int hi = std::max(classes[i].level, classes[j].level);
        return model.related(hi, classes[i].center, classes[j].center);
    };
    std::vector<ChainClass> out;
    for (auto i : detail::disjointify_labels(classes.size(), order, contains, intersects)) out.push_back(classes[i]);
    return out;
}

// The same algorithm on explicit sorted point sets; throws StructuralError if
// two sets overlap without being nested. Returns indices into `sets`.
inline std::vector<std::size_t> disjointify_sets(std::span<const std::vector<PointId>> sets) {
    std::vector<std::size_t> order(sets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (sets[a].size() != sets[b].size()) return sets[a].size() > sets[b].size();
        return sets[a] < sets[b];
    });
    auto contains = [&](std::size_t i, std::size_t j) {
        return std::includes(sets[i].begin(), sets[i].end(), sets[j].begin(), sets[j].end());
    };
    auto intersects = [&](std::size_t i, std::size_t j) {
        auto a = sets[i].begin();
        auto b = sets[j].begin();
        while (a != sets[i].end() && b != sets[j].end()) {
            if (*a == *b) return true;
            if (*a < *b) ++a; else ++b;
        }
        return false;
    };
    return detail::disjointify_labels(sets.size(), order, contains, intersects);
}

inline std::vector<PointId> union_of(const FiniteRelationModel& model, std::span<const ChainClass> classes) {
    std::vector<PointId> out;
    for (const auto& c : classes) {
        auto m = model.class_members(c.level, c.center);
        out.insert(out.end(), m.begin(), m.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Input of the covering construction, evaluated at one base point y.
// Row i = 0..M-1 corresponds to the i+1-th row of the array; larger rows are
// processed first.
struct CoveringInstance {
    std::vector<std::vector<int>> levels;                  // n(i, j): T_{i,j} = Z_{n(i,j)}
    std::vector<std::vector<std::vector<PointId>>> centers;  // B_{i,j}(y)
    std::vector<InnerAutomorphism> d;
    double delta = 0.1;
};

struct HypothesisReport {
    bool holds = true;
    std::vector<PointId> failing_points;
    // First violation found, as (row, column); -1 when none.
    int first_row = -1;
    int first_column = -1;
};

// Checks |U_{k<i} D o (T_{k,*}^-1 T_{i,j})(y)| <= (1 + delta) |T_{i,j}(y)| for
// every row i >= 2, every j and every point y of the model. For chain
// relations T_{k,*}^-1 T_{i,j} = Z_max(level) and the union over k is the
// class of the largest level involved.
inline HypothesisReport check_covering_hypothesis(const FiniteRelationModel& model, const CoveringInstance& inst) {
    HypothesisReport rep;
    const std::size_t rows = inst.levels.size();
    std::vector<int> prefix_max(rows, -1);
    int running = -1;
    for (std::size_t i = 0; i < rows; ++i) {
        prefix_max[i] = running;  // max level over rows k < i
        for (int l : inst.levels[i]) running = std::max(running, l);
    }
    std::vector<bool> failing(model.size(), false);
    for (std::size_t i = 1; i < rows; ++i) {
        for (std::size_t j = 0; j < inst.levels[i].size(); ++j) {
            const int level = inst.levels[i][j];
            const int mu = std::max(prefix_max[i], level);
            for (std::uint32_t c = 0; c < model.num_classes(mu); ++c) {
                auto big = model.class_by_index(mu, c);
                const auto image = apply_all(inst.d, big);
                const double lhs = static_cast<double>(image.size());
                for (PointId y : big) {
                    const double rhs = (1.0 + inst.delta) * static_cast<double>(model.class_size(level, y));
                    if (lhs > rhs) {
                        failing[y] = true;
                        if (rep.holds) {
                            rep.holds = false;
                            rep.first_row = static_cast<int>(i);
                            rep.first_column = static_cast<int>(j);
                        }
                    }
                }
            }
        }
    }
    for (PointId y = 0; y < model.size(); ++y)
        if (failing[y]) rep.failing_points.push_back(y);
    return rep;
}

struct CoveringResult {
    std::vector<ChainClass> selected;
    std::vector<std::size_t> selected_per_row;
    std::uint64_t mass = 0;      // sum of |C| over selected classes
    std::uint64_t min_image = 0; // min_i |D o U_j B_{i,j}(y)|
    double rhs = 0.0;            // (1 - delta) * min_image
    double covered_fraction = 0.0;
    bool disjoint = true;
    HypothesisReport hypothesis;
    bool rows_sufficient = false;  // M >= 1 + (1 - delta)|D| / delta^2
    bool bound_holds = false;
    // True when hypothesis and row count guarantee the bound, so a failure
    // is an invariant violation.
    bool bound_asserted = false;
};

// Builds the disjoint subcollection row by row from the top: the last row via
// disjointify, every lower row on centers whose class misses everything
// already chosen.
inline CoveringResult covering(const FiniteRelationModel& model, const CoveringInstance& inst, PointId y) {
    model.check_point(y);
    if (inst.levels.size() != inst.centers.size()) throw StructuralError("levels and centers must have the same rows");
    if (inst.levels.empty()) throw DomainError("covering needs at least one row");
    if (inst.d.empty()) throw DomainError("covering needs a non-empty automorphism set D");
    if (!(inst.delta > 0.0 && inst.delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
    for (const auto& phi : inst.d) require_same_model(phi.model_id(), model.id());
    for (std::size_t i = 0; i < inst.levels.size(); ++i) {
        if (inst.levels[i].size() != inst.centers[i].size()) throw StructuralError("row " + std::to_string(i) + " has mismatched levels and centers");
        for (int l : inst.levels[i]) model.check_level(l);
        for (const auto& b : inst.centers[i])
            for (PointId w : b) {
                model.check_point(w);
                if (!model.related(model.max_level(), y, w)) throw StructuralError("center outside the top class of y");
            }
    }

    CoveringResult out;
    out.hypothesis = check_covering_hypothesis(model, inst);
    const std::size_t rows = inst.levels.size();
    out.selected_per_row.assign(rows, 0);
    std::vector<bool> covered(model.size(), false);
    for (std::size_t i = rows; i-- > 0;) {
        std::vector<ChainClass> candidates;
        for (std::size_t j = 0; j < inst.levels[i].size(); ++j) {
            const int level = inst.levels[i][j];
            for (PointId w : inst.centers[i][j]) {
                // Pruned centers: drop w when T_{i,j}(w) meets a chosen class.
                auto cls = model.class_members(level, w);
                if (std::any_of(cls.begin(), cls.end(), [&](PointId z) { return covered[z]; })) continue;
                candidates.push_back({w, level});
            }
        }
        for (const auto& c : disjointify(model, candidates)) {
            for (PointId z : model.class_members(c.level, c.center)) {
                if (covered[z]) out.disjoint = false;
                covered[z] = true;
            }
            out.mass += model.class_size(c.level, c.center);
            out.selected.push_back(c);
            ++out.selected_per_row[i];
        }
    }

    std::uint64_t min_image = UINT64_MAX;
    for (std::size_t i = 0; i < rows; ++i) {
        std::vector<PointId> all;
        for (const auto& b : inst.centers[i]) all.insert(all.end(), b.begin(), b.end());
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        min_image = std::min<std::uint64_t>(min_image, apply_all(inst.d, all).size());
    }
    out.min_image = min_image;
    out.rhs = (1.0 - inst.delta) * static_cast<double>(min_image);
    out.covered_fraction = min_image == 0 ? 1.0 : static_cast<double>(out.mass) / static_cast<double>(min_image);
    const double needed_rows = 1.0 + (1.0 - inst.delta) * static_cast<double>(inst.d.size()) / (inst.delta * inst.delta);
    out.rows_sufficient = static_cast<double>(rows) >= needed_rows;
    out.bound_holds = static_cast<double>(out.mass) >= out.rhs;
    out.bound_asserted = out.hypothesis.holds && out.rows_sufficient;
    return out;
}

struct InstanceShape {
    int rows = 181;
    int max_columns = 3;
    int order = 1;              // order of the non-trivial automorphism in D
    double delta = 0.1;
    double center_density = 0.05;
    double level_step = 0.01;   // chance that a column raises the level
    bool adversarial = false;   // decreasing levels, so the hypothesis fails
};

// Random covering instance based at y with D = {id, cyclic automorphism of
// the given order}. Row levels never drop below the maximum of earlier rows
// and never below the order, so D o Z_mu = Z_mu and the hypothesis holds; the
// adversarial variant lowers the level as the row index grows.
inline CoveringInstance generate_covering_instance(const FiniteRelationModel& model, PointId y,
                                                   const InstanceShape& shape, std::uint64_t seed) {
    model.check_point(y);
    model.check_level(shape.order);
    if (shape.rows < 1 || shape.max_columns < 1) throw DomainError("instance needs at least one row and column");
    Rng rng(seed);
    CoveringInstance inst;
    inst.delta = shape.delta;
    inst.d.push_back(InnerAutomorphism::identity(model));
    inst.d.push_back(cyclic_automorphism(model, shape.order));
    auto top = model.class_members(model.max_level(), y);
    int floor = shape.order;
    for (int i = 0; i < shape.rows; ++i) {
        const int columns = static_cast<int>(rng.between(1, shape.max_columns));
        std::vector<int> levels;
        std::vector<std::vector<PointId>> centers;
        if (shape.adversarial) {
            const int span = model.max_level() - shape.order + 1;
            const int level = model.max_level() - static_cast<int>((static_cast<long>(i) * span) / shape.rows);
            levels.assign(static_cast<std::size_t>(columns), level);
        } else {
            for (int j = 0; j < columns; ++j) {
                int level = floor;
                if (level < model.max_level() && rng.coin(shape.level_step)) ++level;
                levels.push_back(level);
            }
            floor = *std::max_element(levels.begin(), levels.end());
        }
        for (int j = 0; j < columns; ++j) {
            std::vector<PointId> b;
            for (PointId w : top)
                if (rng.coin(shape.center_density)) b.push_back(w);
            if (b.empty()) b.push_back(top[rng.below(top.size())]);
            centers.push_back(std::move(b));
        }
        inst.levels.push_back(std::move(levels));
        inst.centers.push_back(std::move(centers));
    }
    return inst;
}

// E(l) = (1/l) log l + (1 - 1/l) log (1 - 1/l)^-1, natural log, for real l > 1.
inline double stirling_entropy(double l) {
    if (!(l > 1.0)) throw DomainError("E(l) needs l > 1");
    const double q = 1.0 / l;
    return q * std::log(l) - (1.0 - q) * std::log1p(-q);
}

inline double stirling_bound_E(int l) {
    if (l < 2) throw DomainError("E(l) needs l >= 2");
    return stirling_entropy(static_cast<double>(l));
}

// Smallest l >= 4 with E(l/2) < eta/5.
inline int choose_ell(double eta) {
    if (!(eta > 0.0)) throw DomainError("eta must be positive");
    for (int l = 4; l < (1 << 30); ++l)
        if (stirling_entropy(l / 2.0) < eta / 5.0) return l;
    throw ResourceError("no l found below 2^30");
}

struct SubcollectionCount {
    std::uint64_t count = 0;
    std::size_t class_size = 0;
    std::size_t candidate_classes = 0;
    // log2 of 2^(5 E(l/2) |class|); absent when l_min < 3.
    std::optional<double> log2_bound;
    bool within_bound = true;
};

// Number of collections of pairwise disjoint classes Z_k(c), c in Z_n(y),
// k in levels, with |Z_k(c)| >= l_min (the empty collection included).
inline SubcollectionCount count_disjoint_subcollections(const FiniteRelationModel& model, PointId y, int n,
                                                        std::span<const int> levels, int l_min,
                                                        std::size_t size_cap = 20) {
    model.check_point(y);
    model.check_level(n);
    auto top = model.class_members(n, y);
    if (top.size() > size_cap) throw ResourceError("class of size " + std::to_string(top.size()) + " exceeds enumeration cap");
    std::vector<std::uint32_t> masks;
    for (int k : levels) {
        model.check_level(k);
        if (k > n) throw DomainError("levels must not exceed n");
        for (std::size_t i = 0; i < top.size(); ++i) {
            auto cls = model.class_members(k, top[i]);
            if (static_cast<int>(cls.size()) < l_min) continue;
            std::uint32_t mask = 0;
            for (PointId z : cls) mask |= 1u << (std::lower_bound(top.begin(), top.end(), z) - top.begin());
            masks.push_back(mask);
        }
    }
    std::sort(masks.begin(), masks.end());
    masks.erase(std::unique(masks.begin(), masks.end()), masks.end());

    SubcollectionCount out;
    out.class_size = top.size();
    out.candidate_classes = masks.size();
    auto rec = [&](auto&& self, std::size_t idx, std::uint32_t used) -> std::uint64_t {
        if (idx == masks.size()) return 1;
        std::uint64_t c = self(self, idx + 1, used);
        if ((masks[idx] & used) == 0) c += self(self, idx + 1, used | masks[idx]);
        return c;
    };
    out.count = rec(rec, 0, 0);
    if (l_min >= 3) {
        out.log2_bound = 5.0 * stirling_entropy(l_min / 2.0) * static_cast<double>(top.size());
        out.within_bound = std::log2(static_cast<double>(out.count)) <= *out.log2_bound;
    }
    return out;
}

}  // namespace cocycle
