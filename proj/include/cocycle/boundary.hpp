#pragma once

// The boundary of F_r at finite precision.
//
// A boundary point is a no-backtracking sequence xi_1 xi_2 ... over the 2r
// generators; here it is always a finite prefix of declared depth. Every
// operation states the depth it consumes and throws PrecisionError instead
// of silently truncating.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "cocycle/errors.hpp"
#include "cocycle/free_group.hpp"
#include "cocycle/random.hpp"

namespace cocycle {

// Largest tail class that is ever enumerated.
inline constexpr std::uint64_t kMaxClassSize = std::uint64_t{1} << 21;

class BoundaryPrefix {
public:
    BoundaryPrefix(int rank, std::vector<Generator> letters) : rank_(rank), letters_(std::move(letters)) {
        check_rank(rank);
        if (letters_.empty()) throw DomainError("boundary prefix must have depth >= 1");
        for (std::size_t i = 0; i < letters_.size(); ++i) {
            if (letters_[i].index() > rank_) throw DomainError("boundary letter exceeds rank");
            if (i + 1 < letters_.size() && letters_[i + 1] == letters_[i].inverse())
                throw DomainError("boundary prefix is not admissible at position " + std::to_string(i + 2));
        }
    }

    static BoundaryPrefix parse(int rank, std::string_view text) {
        const ReducedWord w = ReducedWord::parse(rank, text);
        if (w.length() != text.size()) throw DomainError("boundary prefix text is not admissible");
        return BoundaryPrefix(rank, {w.letters().begin(), w.letters().end()});
    }

    int rank() const { return rank_; }
    int depth() const { return static_cast<int>(letters_.size()); }
    const std::vector<Generator>& letters() const { return letters_; }

    // 1-based coordinate access, matching the usual xi_i notation.
    Generator at(int i) const { return letters_[static_cast<std::size_t>(i - 1)]; }

    std::string to_string() const {
        std::string s;
        for (Generator g : letters_) s.push_back(generator_char(g));
        return s;
    }

    friend bool operator==(const BoundaryPrefix&, const BoundaryPrefix&) = default;
    friend auto operator<=>(const BoundaryPrefix& a, const BoundaryPrefix& b) {
        if (auto c = a.rank_ <=> b.rank_; c != 0) return c;
        return a.letters_ <=> b.letters_;
    }

private:
    int rank_;
    std::vector<Generator> letters_;
};

// nu-mass of a depth-n cylinder, (2r-1)^(-n+1) (2r)^(-1).
struct CylinderMeasure {
    double log_measure;
    int depth;
    int rank;

    double value() const { return std::exp(log_measure); }

    boost::rational<std::int64_t> exact() const {
        return boost::rational<std::int64_t>(1, static_cast<std::int64_t>(sphere_size(depth, rank)));
    }
};

inline CylinderMeasure cylinder_measure(int n, int rank) {
    check_rank(rank);
    if (n < 1) throw DomainError("cylinder depth must be >= 1");
    const double log_mass = -(n - 1) * std::log(2.0 * rank - 1.0) - std::log(2.0 * rank);
    return {log_mass, n, rank};
}

// All admissible prefixes of the given depth, lexicographic.
inline std::vector<BoundaryPrefix> enumerate_prefixes(int depth, int rank, int cap = kDefaultEnumerationCap) {
    if (depth < 1) throw DomainError("prefix depth must be >= 1");
    std::vector<BoundaryPrefix> out;
    for (const auto& w : enumerate_sphere(depth, rank, cap))
        out.emplace_back(rank, std::vector<Generator>(w.letters().begin(), w.letters().end()));
    return out;
}

// Draws from nu: first letter uniform over 2r, then uniform over the 2r-1
// admissible continuations.
inline BoundaryPrefix sample_prefix(int depth, int rank, std::uint64_t seed) {
    check_rank(rank);
    if (depth < 1) throw DomainError("prefix depth must be >= 1");
    Rng rng(seed);
    std::vector<Generator> letters;
    letters.reserve(static_cast<std::size_t>(depth));
    letters.push_back(Generator::from_code(static_cast<std::uint8_t>(rng.below(static_cast<std::uint64_t>(2 * rank)))));
    while (static_cast<int>(letters.size()) < depth) {
        // Skip the code of the inverse of the previous letter.
        const auto forbidden = letters.back().inverse().code();
        auto c = static_cast<std::uint8_t>(rng.below(static_cast<std::uint64_t>(2 * rank - 1)));
        if (c >= forbidden) ++c;
        letters.push_back(Generator::from_code(c));
    }
    return BoundaryPrefix(rank, std::move(letters));
}

struct ActionResult {
    BoundaryPrefix point;
    int cancelled;  // k: letters of g absorbed by xi
};

// g xi = (t_1, ..., t_{n-k}, xi_{k+1}, ...), truncated to depth(xi).
// Requires depth(xi) >= |g| + 1.
inline ActionResult act(const ReducedWord& g, const BoundaryPrefix& xi) {
    if (g.rank() != xi.rank()) throw StructuralError("rank mismatch between word and boundary point");
    const int n = static_cast<int>(g.length());
    const int depth = xi.depth();
    if (depth < n + 1)
        throw PrecisionError("act needs depth >= |g|+1 (|g| = " + std::to_string(n) + ", depth = " + std::to_string(depth) + ")");
    int k = 0;
    while (k < n && xi.at(k + 1).inverse() == g[static_cast<std::size_t>(n - 1 - k)]) ++k;
    std::vector<Generator> out;
    out.reserve(static_cast<std::size_t>(depth));
    for (int i = 0; i < n - k && static_cast<int>(out.size()) < depth; ++i) out.push_back(g[static_cast<std::size_t>(i)]);
    for (int i = k + 1; i <= depth && static_cast<int>(out.size()) < depth; ++i) out.push_back(xi.at(i));
    return {BoundaryPrefix(xi.rank(), std::move(out)), k};
}

// log of d(nu o g)/d nu at xi, i.e. (2k - |g|) log(2r - 1).
inline double radon_nikodym_log(const ReducedWord& g, const BoundaryPrefix& xi) {
    const int k = act(g, xi).cancelled;
    const int n = static_cast<int>(g.length());
    return (2 * k - n) * std::log(2.0 * xi.rank() - 1.0);
}

// Integer exponent 2k - |g| of the derivative in base 2r-1.
inline int radon_nikodym_exponent(const ReducedWord& g, const BoundaryPrefix& xi) {
    return 2 * act(g, xi).cancelled - static_cast<int>(g.length());
}

// Throws ResourceError when (2r-1)^n exceeds kMaxClassSize.
inline void require_enumerable_class(int rank, int n) {
    std::uint64_t size = 1;
    for (int i = 0; i < n; ++i) {
        size *= static_cast<std::uint64_t>(2 * rank - 1);
        if (size > kMaxClassSize) throw ResourceError("tail class of level " + std::to_string(n) + " exceeds 2^21 elements");
    }
}

// R_n-class of xi: all admissible eta of the same depth with eta_i = xi_i for
// i > n. Letters are chosen backwards (eta_n first) in generator order, so the
// result has (2r-1)^n elements in a fixed order.
inline std::vector<BoundaryPrefix> tail_class(const BoundaryPrefix& xi, int n) {
    if (n < 0 || n >= xi.depth()) throw DomainError("tail_class needs 0 <= n < depth");
    const int rank = xi.rank();
    require_enumerable_class(rank, n);
    const auto gens = generators(rank);
    std::vector<BoundaryPrefix> out;
    std::vector<Generator> letters = xi.letters();
    // Recursion over position p (1-based) from n down to 1.
    auto choose = [&](auto&& self, int p) -> void {
        if (p == 0) {
            out.emplace_back(rank, letters);
            return;
        }
        const Generator next = letters[static_cast<std::size_t>(p)];  // eta_{p+1}
        for (Generator g : gens) {
            if (g == next.inverse()) continue;
            letters[static_cast<std::size_t>(p - 1)] = g;
            self(self, p - 1);
        }
    };
    choose(choose, n);
    return out;
}

inline bool tail_agrees(const BoundaryPrefix& eta, const BoundaryPrefix& xi, int k) {
    const int depth = std::min(eta.depth(), xi.depth());
    for (int i = k + 1; i <= depth; ++i)
        if (eta.at(i) != xi.at(i)) return false;
    return true;
}

// alpha(eta, xi) = eta_1 ... eta_k xi_k^-1 ... xi_1^-1, reduced. Satisfies
// alpha(eta, xi) xi = eta; the value does not depend on which admissible k is
// used. k may equal the depth (the top level of a finite tail model), in which
// case the identity alpha xi = eta can no longer be checked at that depth.
inline ReducedWord fundamental_cocycle(const BoundaryPrefix& eta, const BoundaryPrefix& xi, int k) {
    if (eta.rank() != xi.rank()) throw StructuralError("rank mismatch between boundary points");
    if (k < 0 || k > std::min(eta.depth(), xi.depth())) throw DomainError("fundamental_cocycle needs 0 <= k <= depth");
    if (!tail_agrees(eta, xi, k)) throw DomainError("points do not agree beyond coordinate k");
    std::vector<Generator> letters;
    letters.reserve(static_cast<std::size_t>(2 * k));
    for (int i = 1; i <= k; ++i) letters.push_back(eta.at(i));
    for (int i = k; i >= 1; --i) letters.push_back(xi.at(i).inverse());
    return ReducedWord(eta.rank(), letters);
}

// Cocycle for two points of equal depth, taken at the last coordinate where
// they differ.
inline ReducedWord fundamental_cocycle(const BoundaryPrefix& eta, const BoundaryPrefix& xi) {
    if (eta.depth() != xi.depth()) throw DomainError("points must have equal depth");
    int k = xi.depth();
    while (k > 0 && eta.at(k) == xi.at(k)) --k;
    return fundamental_cocycle(eta, xi, k);
}

// |g| - 2 * (common prefix of g and xi). Zero on the horosphere through e
// based at xi, negative strictly inside the horoball.
inline long busemann(const BoundaryPrefix& xi, const ReducedWord& g) {
    if (g.rank() != xi.rank()) throw StructuralError("rank mismatch between word and boundary point");
    const auto n = static_cast<int>(g.length());
    if (xi.depth() < n) throw PrecisionError("busemann needs depth >= |g|");
    int common = 0;
    while (common < n && g[static_cast<std::size_t>(common)] == xi.at(common + 1)) ++common;
    return static_cast<long>(n) - 2L * common;
}

// {alpha(xi, eta) : eta in R_k(xi)}: the radius-2k horospherical ball based at
// xi. Injective in eta, so it has (2r-1)^k elements.
inline std::vector<ReducedWord> horospherical_ball(const BoundaryPrefix& xi, int k) {
    std::vector<ReducedWord> out;
    for (const auto& eta : tail_class(xi, k)) out.push_back(fundamental_cocycle(xi, eta, k));
    return out;
}

// Counts of horospherical-ball elements by Busemann value: on the horosphere
// (value 0) or strictly inside the horoball (negative).
struct HoroballCount {
    std::size_t size = 0;
    std::size_t on_horosphere = 0;
    std::size_t inside = 0;
    std::size_t outside = 0;
};

inline HoroballCount horoball_count(const BoundaryPrefix& xi, int k) {
    HoroballCount c;
    for (const auto& g : horospherical_ball(xi, k)) {
        ++c.size;
        const long b = busemann(xi, g);
        if (b == 0) ++c.on_horosphere;
        else if (b < 0) ++c.inside;
        else ++c.outside;
    }
    return c;
}

}  // namespace cocycle
