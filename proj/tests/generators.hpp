#pragma once

// Hand-rolled random generators and independent oracles shared by the tests.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "cocycle/cocycle.hpp"

namespace testgen {

using namespace cocycle;

// Unreduced random letter string of the given length.
inline std::vector<Generator> random_letters(Rng& rng, int rank, int length) {
    std::vector<Generator> out;
    for (int i = 0; i < length; ++i)
        out.push_back(Generator::from_code(static_cast<std::uint8_t>(rng.below(static_cast<std::uint64_t>(2 * rank)))));
    return out;
}

// Uniform-ish reduced word of length at most max_len.
inline ReducedWord random_word(Rng& rng, int rank, int max_len) {
    const int len = static_cast<int>(rng.between(0, max_len));
    std::vector<Generator> letters;
    while (static_cast<int>(letters.size()) < len) {
        auto g = Generator::from_code(static_cast<std::uint8_t>(rng.below(static_cast<std::uint64_t>(2 * rank))));
        if (!letters.empty() && g == letters.back().inverse()) continue;
        letters.push_back(g);
    }
    return ReducedWord(rank, letters);
}

// Oracle: scan a letter string with an explicit stack on "abA" text.
inline std::string naive_reduce(const std::string& text) {
    std::string stack;
    for (char c : text) {
        if (c == 'e') continue;
        const char inv = static_cast<char>(c >= 'a' ? c - 'a' + 'A' : c - 'A' + 'a');
        if (!stack.empty() && stack.back() == inv)
            stack.pop_back();
        else
            stack.push_back(c);
    }
    return stack.empty() ? "e" : stack;
}

// Oracle: all strings over the 2r letters of length <= n that never contain
// x followed by its inverse, generated by brute-force filtering of all strings.
inline std::vector<std::string> brute_reduced_strings(int rank, int n) {
    std::vector<std::string> letters;
    for (int i = 0; i < rank; ++i) {
        letters.push_back(std::string(1, static_cast<char>('a' + i)));
        letters.push_back(std::string(1, static_cast<char>('A' + i)));
    }
    std::vector<std::string> level{""}, all{""};
    for (int k = 1; k <= n; ++k) {
        std::vector<std::string> next;
        for (const auto& s : level)
            for (const auto& l : letters) next.push_back(s + l);
        level = next;
        for (const auto& s : level)
            if (naive_reduce(s) == s) all.push_back(s);
    }
    return all;
}

inline BoundaryPrefix random_prefix(Rng& rng, int rank, int depth) { return sample_prefix(depth, rank, rng.next()); }

}  // namespace testgen
