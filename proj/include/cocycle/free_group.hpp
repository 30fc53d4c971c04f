#pragma once

// Exact arithmetic in the free group F_r = <a_1, ..., a_r> on freely reduced
// words.
//
// Letters are packed into one byte: code = 2*(index-1) + (inverse ? 1 : 0).
// This byte order is also the fixed lexicographic generator order used for
// every enumeration (a_1 < a_1^-1 < a_2 < a_2^-1 < ...), and the byte string
// of a word is its canonical encoding (the key of pseudorandom symbol
// functions). Words print as "abC" with capitals for inverses.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cocycle/errors.hpp"

namespace cocycle {

inline constexpr int kMaxRank = 64;

// Default cap on enumeration radius; ball(12) for r = 2 has ~8e5 elements.
inline constexpr int kDefaultEnumerationCap = 12;

class Generator {
public:
    constexpr Generator() = default;

    // index in [1, r], sign = +1 or -1.
    constexpr Generator(int index, int sign)
        : code_(static_cast<std::uint8_t>(2 * (index - 1) + (sign < 0 ? 1 : 0))) {
        if (index < 1 || index > kMaxRank || (sign != 1 && sign != -1))
            throw DomainError("generator index out of range or sign not +-1");
    }

    static constexpr Generator from_code(std::uint8_t code) {
        Generator g;
        g.code_ = code;
        return g;
    }

    constexpr int index() const { return code_ / 2 + 1; }
    constexpr int sign() const { return (code_ & 1) ? -1 : 1; }
    constexpr std::uint8_t code() const { return code_; }
    constexpr Generator inverse() const { return from_code(code_ ^ 1); }

    friend constexpr bool operator==(Generator, Generator) = default;
    friend constexpr auto operator<=>(Generator, Generator) = default;

private:
    std::uint8_t code_ = 0;
};

// All 2r generators in lexicographic order.
inline std::vector<Generator> generators(int rank) {
    std::vector<Generator> out;
    out.reserve(static_cast<std::size_t>(2 * rank));
    for (int c = 0; c < 2 * rank; ++c) out.push_back(Generator::from_code(static_cast<std::uint8_t>(c)));
    return out;
}

inline void check_rank(int rank) {
    if (rank < 2 || rank > kMaxRank) throw DomainError("rank must lie in [2, 64]");
}

inline char generator_char(Generator g) {
    const char base = static_cast<char>('a' + g.index() - 1);
    return g.sign() > 0 ? base : static_cast<char>(base - 'a' + 'A');
}

class ReducedWord {
public:
    explicit ReducedWord(int rank) : rank_(rank) { check_rank(rank); }

    // Freely reduces the given letters.
    ReducedWord(int rank, std::span<const Generator> letters) : ReducedWord(rank) {
        for (Generator g : letters) push(g);
    }

    ReducedWord(int rank, std::initializer_list<Generator> letters)
        : ReducedWord(rank, std::span<const Generator>(letters.begin(), letters.size())) {}

    static ReducedWord identity(int rank) { return ReducedWord(rank); }

    static ReducedWord generator(int rank, Generator g) {
        ReducedWord w(rank);
        w.push(g);
        return w;
    }

    // Parses "abA" style text ("e" or "" is the identity); the result is reduced.
    static ReducedWord parse(int rank, std::string_view text) {
        ReducedWord w(rank);
        if (text == "e") return w;
        for (char c : text) {
            int index = 0;
            int sign = 1;
            if (c >= 'a' && c <= 'z') {
                index = c - 'a' + 1;
            } else if (c >= 'A' && c <= 'Z') {
                index = c - 'A' + 1;
                sign = -1;
            } else {
                throw DomainError(std::string("bad letter '") + c + "' in word");
            }
            if (index > rank) throw DomainError("letter exceeds rank in word");
            w.push(Generator(index, sign));
        }
        return w;
    }

    int rank() const { return rank_; }
    std::size_t length() const { return letters_.size(); }
    bool is_identity() const { return letters_.empty(); }
    std::span<const Generator> letters() const { return letters_; }
    Generator operator[](std::size_t i) const { return letters_[i]; }

    // Canonical byte encoding: one letter code per byte.
    std::vector<std::uint8_t> encode() const {
        std::vector<std::uint8_t> bytes;
        bytes.reserve(letters_.size());
        for (Generator g : letters_) bytes.push_back(g.code());
        return bytes;
    }

    std::string to_string() const {
        if (letters_.empty()) return "e";
        std::string s;
        s.reserve(letters_.size());
        for (Generator g : letters_) s.push_back(generator_char(g));
        return s;
    }

    friend bool operator==(const ReducedWord&, const ReducedWord&) = default;

    // Shortlex order.
    friend std::strong_ordering operator<=>(const ReducedWord& a, const ReducedWord& b) {
        if (auto c = a.rank_ <=> b.rank_; c != 0) return c;
        if (auto c = a.letters_.size() <=> b.letters_.size(); c != 0) return c;
        return a.letters_ <=> b.letters_;
    }

    friend std::ostream& operator<<(std::ostream& os, const ReducedWord& w) {
        return os << w.to_string();
    }

private:
    friend ReducedWord multiply(const ReducedWord&, const ReducedWord&);
    friend ReducedWord invert(const ReducedWord&);

    void push(Generator g) {
        if (g.index() > rank_) throw DomainError("generator index exceeds rank");
        if (!letters_.empty() && letters_.back() == g.inverse()) {
            letters_.pop_back();
        } else {
            letters_.push_back(g);
        }
    }

    int rank_;
    std::vector<Generator> letters_;
};

inline void require_same_rank(const ReducedWord& u, const ReducedWord& v) {
    if (u.rank() != v.rank()) throw StructuralError("rank mismatch between words");
}

inline ReducedWord multiply(const ReducedWord& u, const ReducedWord& v) {
    require_same_rank(u, v);
    // Cancel the longest suffix of u against the prefix of v.
    std::size_t k = 0;
    const std::size_t nu = u.length();
    const std::size_t nv = v.length();
    while (k < nu && k < nv && u.letters_[nu - 1 - k] == v.letters_[k].inverse()) ++k;
    ReducedWord out(u.rank());
    out.letters_.reserve(nu + nv - 2 * k);
    out.letters_.insert(out.letters_.end(), u.letters_.begin(), u.letters_.end() - static_cast<std::ptrdiff_t>(k));
    out.letters_.insert(out.letters_.end(), v.letters_.begin() + static_cast<std::ptrdiff_t>(k), v.letters_.end());
    return out;
}

inline ReducedWord invert(const ReducedWord& u) {
    ReducedWord out(u.rank());
    out.letters_.reserve(u.length());
    for (auto it = u.letters_.rbegin(); it != u.letters_.rend(); ++it) out.letters_.push_back(it->inverse());
    return out;
}

inline ReducedWord operator*(const ReducedWord& u, const ReducedWord& v) { return multiply(u, v); }

inline std::size_t distance(const ReducedWord& u, const ReducedWord& v) {
    require_same_rank(u, v);
    return multiply(invert(u), v).length();
}

// |S_n(e)| = 2r(2r-1)^(n-1) for n >= 1.
inline std::uint64_t sphere_size(int n, int rank) {
    if (n == 0) return 1;
    std::uint64_t s = static_cast<std::uint64_t>(2 * rank);
    for (int i = 1; i < n; ++i) s *= static_cast<std::uint64_t>(2 * rank - 1);
    return s;
}

inline std::uint64_t ball_size(int n, int rank) {
    std::uint64_t s = 0;
    for (int k = 0; k <= n; ++k) s += sphere_size(k, rank);
    return s;
}

// All reduced words of length exactly n, in lexicographic letter order.
inline std::vector<ReducedWord> enumerate_sphere(int n, int rank, int cap = kDefaultEnumerationCap) {
    check_rank(rank);
    if (n < 0) throw DomainError("sphere radius must be non-negative");
    if (n > cap) throw ResourceError("sphere radius " + std::to_string(n) + " exceeds enumeration cap " + std::to_string(cap));
    std::vector<ReducedWord> out;
    out.reserve(sphere_size(n, rank));
    std::vector<Generator> letters;
    const auto gens = generators(rank);
    std::function<void()> extend = [&]() {
        if (static_cast<int>(letters.size()) == n) {
            out.emplace_back(rank, letters);
            return;
        }
        for (Generator g : gens) {
            if (!letters.empty() && g == letters.back().inverse()) continue;
            letters.push_back(g);
            extend();
            letters.pop_back();
        }
    };
    extend();
    return out;
}

inline std::vector<ReducedWord> enumerate_ball(int n, int rank, int cap = kDefaultEnumerationCap) {
    check_rank(rank);
    if (n < 0) throw DomainError("ball radius must be non-negative");
    if (n > cap) throw ResourceError("ball radius " + std::to_string(n) + " exceeds enumeration cap " + std::to_string(cap));
    std::vector<ReducedWord> out;
    out.reserve(ball_size(n, rank));
    for (int k = 0; k <= n; ++k) {
        auto sphere = enumerate_sphere(k, rank, cap);
        out.insert(out.end(), std::make_move_iterator(sphere.begin()), std::make_move_iterator(sphere.end()));
    }
    return out;
}

}  // namespace cocycle

template <>
struct std::hash<cocycle::ReducedWord> {
    std::size_t operator()(const cocycle::ReducedWord& w) const noexcept {
        std::uint64_t h = 0x84222325cbf29ce4ULL ^ static_cast<std::uint64_t>(w.rank());
        for (auto g : w.letters()) h = (h ^ g.code()) * 0x100000001b3ULL;
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};
