#pragma once

// Bernoulli shift F_r -> (A^F_r, p^F_r) at simulation fidelity.
//
// A point is never stored: its configuration is a keyed pseudorandom
// function of the canonical word encoding, so symbol_at is O(|word|) and a
// point is reproducible from (seed, translation). The shift acts by
// (g x)(h) = x(g^-1 h).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cocycle/errors.hpp"
#include "cocycle/free_group.hpp"
#include "cocycle/random.hpp"

namespace cocycle {

class ProbabilityVector {
public:
    explicit ProbabilityVector(std::vector<double> weights) : weights_(std::move(weights)) {
        if (weights_.empty()) throw DomainError("probability vector must be non-empty");
        double total = 0.0;
        for (double w : weights_) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("probability weights must be finite and >= 0");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12) throw DomainError("probability weights must sum to 1");
        cdf_.resize(weights_.size());
        std::partial_sum(weights_.begin(), weights_.end(), cdf_.begin());
    }

    static ProbabilityVector uniform(int size) {
        return ProbabilityVector(std::vector<double>(static_cast<std::size_t>(size), 1.0 / size));
    }

    int size() const { return static_cast<int>(weights_.size()); }
    double operator[](int a) const { return weights_[static_cast<std::size_t>(a)]; }
    const std::vector<double>& weights() const { return weights_; }

    // Inverse CDF. Symbols of zero weight are never returned.
    int symbol_for(double u) const {
        for (std::size_t a = 0; a + 1 < cdf_.size(); ++a)
            if (u < cdf_[a] && weights_[a] > 0.0) return static_cast<int>(a);
        std::size_t last = cdf_.size() - 1;
        while (last > 0 && weights_[last] == 0.0) --last;
        return static_cast<int>(last);
    }

    friend bool operator==(const ProbabilityVector& a, const ProbabilityVector& b) { return a.weights_ == b.weights_; }

private:
    std::vector<double> weights_;
    std::vector<double> cdf_;
};

// Keyed pseudorandom word in [0, 2^64) for (seed, word). Letters are packed
// eight to a 64-bit chunk in canonical byte order.
inline std::uint64_t keyed_word_hash(std::uint64_t seed, const ReducedWord& w) {
    std::uint64_t h = mix64(seed ^ 0x5be0cd19137e2179ULL);
    h = mix64(h ^ (static_cast<std::uint64_t>(w.length()) * 0x9e3779b97f4a7c15ULL));
    std::uint64_t chunk = 0;
    int filled = 0;
    for (Generator g : w.letters()) {
        chunk |= static_cast<std::uint64_t>(g.code()) << (8 * filled);
        if (++filled == 8) {
            h = mix64(h ^ chunk);
            chunk = 0;
            filled = 0;
        }
    }
    if (filled > 0) h = mix64(h ^ chunk);
    return mix64(h ^ static_cast<std::uint64_t>(w.rank()));
}

class LazyBernoulliPoint {
public:
    LazyBernoulliPoint(std::uint64_t seed, ReducedWord translation, ProbabilityVector alphabet)
        : seed_(seed), translation_(std::move(translation)), alphabet_(std::move(alphabet)) {}

    LazyBernoulliPoint(std::uint64_t seed, int rank, ProbabilityVector alphabet)
        : LazyBernoulliPoint(seed, ReducedWord::identity(rank), std::move(alphabet)) {}

    std::uint64_t seed() const { return seed_; }
    const ReducedWord& translation() const { return translation_; }
    const ProbabilityVector& alphabet() const { return alphabet_; }
    int rank() const { return translation_.rank(); }

    // x(h) = omega_seed(t h).
    int symbol_at(const ReducedWord& h) const {
        const ReducedWord key = translation_.is_identity() ? h : multiply(translation_, h);
        return alphabet_.symbol_for(to_unit_interval(keyed_word_hash(seed_, key)));
    }

    friend bool operator==(const LazyBernoulliPoint&, const LazyBernoulliPoint&) = default;

private:
    std::uint64_t seed_;
    ReducedWord translation_;
    ProbabilityVector alphabet_;
};

inline int symbol_at(const LazyBernoulliPoint& x, const ReducedWord& h) { return x.symbol_at(h); }

// g x, with translation t -> t g^-1.
inline LazyBernoulliPoint translate(const ReducedWord& g, const LazyBernoulliPoint& x) {
    return LazyBernoulliPoint(x.seed(), multiply(x.translation(), invert(g)), x.alphabet());
}

// A finite partition of X given by a block code on a finite window:
// label(x) = code(x(w_0), ..., x(w_{m-1})). The symbol partition is the
// window {e} with the identity code.
class PartitionLabeler {
public:
    enum class Kind { SymbolAtIdentity, BlockCode };

    // code is indexed by the mixed-radix value sum_i s_i q^i of the window
    // symbols, q = alphabet_size.
    PartitionLabeler(Kind kind, std::vector<ReducedWord> window, int alphabet_size, std::vector<int> code)
        : kind_(kind), window_(std::move(window)), alphabet_size_(alphabet_size), code_(std::move(code)) {
        if (window_.empty()) throw DomainError("labeler window must be non-empty");
        if (alphabet_size_ < 1) throw DomainError("alphabet size must be >= 1");
        for (const auto& w : window_) require_same_rank(w, window_.front());
        std::size_t expected = 1;
        for (std::size_t i = 0; i < window_.size(); ++i) {
            expected *= static_cast<std::size_t>(alphabet_size_);
            if (expected > (std::size_t{1} << 24)) throw ResourceError("block code table exceeds 2^24 entries");
        }
        if (code_.size() != expected) throw DomainError("code table must have alphabet_size^|window| entries");
        int max_label = 0;
        for (int c : code_) {
            if (c < 0) throw DomainError("labels must be non-negative");
            max_label = std::max(max_label, c);
        }
        num_labels_ = max_label + 1;
    }

    static PartitionLabeler symbol_at_identity(int rank, int alphabet_size) {
        std::vector<int> code(static_cast<std::size_t>(alphabet_size));
        std::iota(code.begin(), code.end(), 0);
        return PartitionLabeler(Kind::SymbolAtIdentity, {ReducedWord::identity(rank)}, alphabet_size, std::move(code));
    }

    // One-atom partition.
    static PartitionLabeler trivial(int rank, int alphabet_size) {
        return PartitionLabeler(Kind::BlockCode, {ReducedWord::identity(rank)}, alphabet_size,
                                std::vector<int>(static_cast<std::size_t>(alphabet_size), 0));
    }

    // Sum of the window symbols modulo the alphabet size.
    static PartitionLabeler sum_mod(std::vector<ReducedWord> window, int alphabet_size) {
        std::size_t entries = 1;
        for (std::size_t i = 0; i < window.size(); ++i) entries *= static_cast<std::size_t>(alphabet_size);
        std::vector<int> code(entries);
        for (std::size_t idx = 0; idx < entries; ++idx) {
            std::size_t v = idx;
            int s = 0;
            for (std::size_t i = 0; i < window.size(); ++i) {
                s += static_cast<int>(v % static_cast<std::size_t>(alphabet_size));
                v /= static_cast<std::size_t>(alphabet_size);
            }
            code[idx] = s % alphabet_size;
        }
        return PartitionLabeler(Kind::BlockCode, std::move(window), alphabet_size, std::move(code));
    }

    Kind kind() const { return kind_; }
    const std::vector<ReducedWord>& window() const { return window_; }
    int alphabet_size() const { return alphabet_size_; }
    int num_labels() const { return num_labels_; }
    const std::vector<int>& code() const { return code_; }
    int rank() const { return window_.front().rank(); }

    std::size_t radius() const {
        std::size_t r = 0;
        for (const auto& w : window_) r = std::max(r, w.length());
        return r;
    }

    int label_from_symbols(std::span<const int> symbols) const {
        std::size_t idx = 0;
        for (std::size_t i = symbols.size(); i-- > 0;) idx = idx * static_cast<std::size_t>(alphabet_size_) + static_cast<std::size_t>(symbols[i]);
        return code_[idx];
    }

    int label(const LazyBernoulliPoint& x) const {
        std::vector<int> symbols;
        symbols.reserve(window_.size());
        for (const auto& w : window_) symbols.push_back(x.symbol_at(w));
        return label_from_symbols(symbols);
    }

    // Label of g x, read directly at the coordinates g^-1 w.
    int label_at(const LazyBernoulliPoint& x, const ReducedWord& g) const {
        const ReducedWord g_inv = invert(g);
        std::vector<int> symbols;
        symbols.reserve(window_.size());
        for (const auto& w : window_) symbols.push_back(x.symbol_at(multiply(g_inv, w)));
        return label_from_symbols(symbols);
    }

    // True when every atom of `this` lies inside an atom of `coarser`, checked
    // on the code tables over the union of both windows.
    bool refines(const PartitionLabeler& coarser) const;

private:
    Kind kind_;
    std::vector<ReducedWord> window_;
    int alphabet_size_;
    std::vector<int> code_;
    int num_labels_ = 1;
};

inline bool PartitionLabeler::refines(const PartitionLabeler& coarser) const {
    if (alphabet_size_ != coarser.alphabet_size_) throw StructuralError("labelers over different alphabets");
    std::vector<ReducedWord> coords = window_;
    for (const auto& w : coarser.window_)
        if (std::find(coords.begin(), coords.end(), w) == coords.end()) coords.push_back(w);
    auto position = [&](const ReducedWord& w) {
        return static_cast<std::size_t>(std::find(coords.begin(), coords.end(), w) - coords.begin());
    };
    std::map<int, int> fine_to_coarse;
    std::vector<int> assignment(coords.size(), 0);
    std::vector<int> a(window_.size()), b(coarser.window_.size());
    while (true) {
        for (std::size_t i = 0; i < window_.size(); ++i) a[i] = assignment[position(window_[i])];
        for (std::size_t i = 0; i < coarser.window_.size(); ++i) b[i] = assignment[position(coarser.window_[i])];
        const int fine = label_from_symbols(a);
        const int coarse = coarser.label_from_symbols(b);
        auto [it, inserted] = fine_to_coarse.emplace(fine, coarse);
        if (!inserted && it->second != coarse) return false;
        std::size_t i = 0;
        while (i < assignment.size() && ++assignment[i] == alphabet_size_) assignment[i++] = 0;
        if (i == assignment.size()) break;
    }
    return true;
}

// How atom measures are evaluated.
struct EvalMode {
    enum class Kind { Exact, MonteCarlo };
    Kind kind = Kind::Exact;
    std::uint64_t samples = 0;  // M, Monte Carlo only
    std::uint64_t seed = 0;
    int exact_cap = 24;  // max coordinates enumerated jointly in exact mode

    static EvalMode exact(int cap = 24) { return {Kind::Exact, 0, 0, cap}; }
    static EvalMode monte_carlo(std::uint64_t samples, std::uint64_t seed) {
        if (samples < 1) throw DomainError("Monte Carlo mode needs at least one sample");
        return {Kind::MonteCarlo, samples, seed, 24};
    }
    bool is_exact() const { return kind == Kind::Exact; }
    std::string name() const { return is_exact() ? "exact" : "monte-carlo"; }
};

// Independent pieces of a family of shifted windows. Keys whose coordinate
// sets g^-1 W overlap (transitively) are grouped; under the product measure
// the groups are independent, so joint quantities factor over components.
struct CoordinateComponent {
    std::vector<ReducedWord> coordinates;
    // For each key in the component: its index in the caller's key list and
    // the positions of its window coordinates within `coordinates`.
    std::vector<std::pair<std::size_t, std::vector<std::size_t>>> keys;
};

inline std::vector<CoordinateComponent> coordinate_components(std::span<const ReducedWord> keys,
                                                              const PartitionLabeler& labeler) {
    std::unordered_map<ReducedWord, std::size_t> coord_id;
    std::vector<ReducedWord> coords;
    std::vector<std::vector<std::size_t>> key_coords(keys.size());
    for (std::size_t k = 0; k < keys.size(); ++k) {
        const ReducedWord inv = invert(keys[k]);
        for (const auto& w : labeler.window()) {
            ReducedWord c = multiply(inv, w);
            auto [it, inserted] = coord_id.emplace(c, coords.size());
            if (inserted) coords.push_back(std::move(c));
            key_coords[k].push_back(it->second);
        }
    }
    // Union-find over coordinates.
    std::vector<std::size_t> parent(coords.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const auto& kc : key_coords)
        for (std::size_t i = 1; i < kc.size(); ++i) {
            const auto a = find(kc[0]);
            const auto b = find(kc[i]);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    std::unordered_map<std::size_t, std::size_t> root_to_component;
    std::vector<CoordinateComponent> components;
    std::vector<std::size_t> local(coords.size());
    for (std::size_t c = 0; c < coords.size(); ++c) {
        const auto root = find(c);
        auto [it, inserted] = root_to_component.emplace(root, components.size());
        if (inserted) components.emplace_back();
        auto& comp = components[it->second];
        local[c] = comp.coordinates.size();
        comp.coordinates.push_back(coords[c]);
    }
    for (std::size_t k = 0; k < keys.size(); ++k) {
        auto& comp = components[root_to_component.at(find(key_coords[k][0]))];
        std::vector<std::size_t> pos;
        pos.reserve(key_coords[k].size());
        for (auto c : key_coords[k]) pos.push_back(local[c]);
        comp.keys.emplace_back(k, std::move(pos));
    }
    return components;
}

// Visits every assignment of the component's coordinates with its
// probability, skipping branches of zero weight. `visit(assignment, weight)`.
template <typename Visit>
void for_each_assignment(const CoordinateComponent& comp, const ProbabilityVector& p, int cap, Visit&& visit) {
    if (static_cast<int>(comp.coordinates.size()) > cap)
        throw ResourceError("exact evaluation would enumerate " + std::to_string(comp.coordinates.size()) +
                            " coordinates jointly (cap " + std::to_string(cap) + "); use monte-carlo mode");
    std::vector<int> assignment(comp.coordinates.size(), 0);
    auto rec = [&](auto&& self, std::size_t pos, double weight) -> void {
        if (pos == assignment.size()) {
            visit(std::as_const(assignment), weight);
            return;
        }
        for (int a = 0; a < p.size(); ++a) {
            if (p[a] == 0.0) continue;
            assignment[pos] = a;
            self(self, pos + 1, weight * p[a]);
        }
    };
    rec(rec, 0, 1.0);
}

// log lambda of an atom, or a flagged bound when Monte Carlo saw no hits.
struct AtomMeasure {
    double log_measure = 0.0;
    std::optional<double> stderr_log;  // none in exact mode
    bool unresolved = false;           // zero hits: log_measure is log(3/M), a 95% upper bound
    std::uint64_t hits = 0;
    std::uint64_t samples = 0;
};

// Joint atom {x : label(g x) = labels[g] for every key g}.
inline AtomMeasure atom_log_measure(std::span<const std::pair<ReducedWord, int>> labels,
                                    const PartitionLabeler& labeler, const ProbabilityVector& p,
                                    const EvalMode& mode) {
    if (p.size() != labeler.alphabet_size()) throw StructuralError("labeler alphabet does not match probability vector");
    std::vector<ReducedWord> keys;
    keys.reserve(labels.size());
    for (const auto& [g, _] : labels) keys.push_back(g);

    if (mode.is_exact()) {
        // Fast path: symbol partition, each coordinate read once.
        AtomMeasure out;
        double sum = 0.0, comp = 0.0;
        for (const auto& component : coordinate_components(keys, labeler)) {
            double mass = 0.0;
            if (labeler.kind() == PartitionLabeler::Kind::SymbolAtIdentity) {
                const int a = labels[component.keys.front().first].second;
                bool consistent = a < p.size();
                for (const auto& [k, _] : component.keys) consistent = consistent && labels[k].second == a;
                mass = consistent ? p[a] : 0.0;
            } else {
                std::vector<int> symbols;
                for_each_assignment(component, p, mode.exact_cap, [&](const std::vector<int>& assignment, double weight) {
                    for (const auto& [k, positions] : component.keys) {
                        symbols.clear();
                        for (auto pos : positions) symbols.push_back(assignment[pos]);
                        if (labeler.label_from_symbols(symbols) != labels[k].second) return;
                    }
                    mass += weight;
                });
            }
            if (mass <= 0.0) throw DomainError("observed labels form an atom of measure zero");
            // Neumaier-compensated sum of logs.
            const double term = std::log(mass);
            const double t = sum + term;
            comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
            sum = t;
        }
        out.log_measure = sum + comp;
        return out;
    }

    AtomMeasure out;
    out.samples = mode.samples;
    for (std::uint64_t m = 0; m < mode.samples; ++m) {
        const LazyBernoulliPoint y(split_seed(mode.seed, 0xa70d, m), labeler.rank(), p);
        bool match = true;
        for (const auto& [g, label] : labels) {
            if (labeler.label_at(y, g) != label) {
                match = false;
                break;
            }
        }
        if (match) ++out.hits;
    }
    const double M = static_cast<double>(mode.samples);
    if (out.hits == 0) {
        out.unresolved = true;
        out.log_measure = std::log(3.0 / M);
        return out;
    }
    const double freq = static_cast<double>(out.hits) / M;
    out.log_measure = std::log(freq);
    // Delta method: sd(log p_hat) ~ sqrt((1 - p) / (M p)).
    out.stderr_log = std::sqrt((1.0 - freq) / static_cast<double>(out.hits));
    return out;
}

// Labels of x at the keys: the map g -> label(g x).
inline std::vector<std::pair<ReducedWord, int>> observe_labels(const LazyBernoulliPoint& x,
                                                               std::span<const ReducedWord> keys,
                                                               const PartitionLabeler& labeler) {
    std::vector<std::pair<ReducedWord, int>> out;
    out.reserve(keys.size());
    for (const auto& g : keys) out.emplace_back(g, labeler.label_at(x, g));
    return out;
}

}  // namespace cocycle
