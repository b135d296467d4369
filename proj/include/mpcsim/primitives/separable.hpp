#pragma once

#include <algorithm>
#include <concepts>
#include <limits>
#include <vector>

#include "mpcsim/core/types.hpp"

namespace mpcsim {

// A set function with f(A) = combine(f(B), f(A \ B)). Values travel as words:
// put() appends an encoding, get() consumes one.
template <class F>
concept SeparableFn = requires(const F& f, typename F::value_type a, std::vector<Word>& buf, const Word*& p) {
    { f.identity() } -> std::convertible_to<typename F::value_type>;
    { f.combine(a, a) } -> std::convertible_to<typename F::value_type>;
    { f.lift(Word{}) } -> std::convertible_to<typename F::value_type>;
    { f.max_width() } -> std::convertible_to<std::size_t>;
    f.put(buf, a);
    { f.get(p) } -> std::convertible_to<typename F::value_type>;
};

struct WordFn {
    using value_type = Word;
    [[nodiscard]] Word lift(Word x) const { return x; }
    [[nodiscard]] std::size_t max_width() const { return 1; }
    void put(std::vector<Word>& buf, Word a) const { buf.push_back(a); }
    Word get(const Word*& p) const { return *p++; }
};

struct MinFn : WordFn {
    [[nodiscard]] Word identity() const { return std::numeric_limits<Word>::max(); }
    [[nodiscard]] Word combine(Word a, Word b) const { return std::min(a, b); }
};

struct MaxFn : WordFn {
    [[nodiscard]] Word identity() const { return 0; }
    [[nodiscard]] Word combine(Word a, Word b) const { return std::max(a, b); }
};

struct SumFn : WordFn {
    [[nodiscard]] Word identity() const { return 0; }
    [[nodiscard]] Word combine(Word a, Word b) const { return a + b; }
};

struct OrFn : WordFn {
    [[nodiscard]] Word identity() const { return 0; }
    [[nodiscard]] Word combine(Word a, Word b) const { return a | b; }
};

// The k smallest distinct words of the set, ascending.
struct KSmallestFn {
    using value_type = std::vector<Word>;
    std::size_t k = 1;

    [[nodiscard]] value_type identity() const { return {}; }
    [[nodiscard]] value_type lift(Word x) const { return {x}; }
    [[nodiscard]] value_type combine(const value_type& a, const value_type& b) const {
        value_type out;
        out.reserve(std::min(k, a.size() + b.size()));
        std::size_t i = 0, j = 0;
        while (out.size() < k && (i < a.size() || j < b.size())) {
            Word x;
            if (j == b.size() || (i < a.size() && a[i] <= b[j]))
                x = a[i++];
            else
                x = b[j++];
            if (out.empty() || out.back() != x) out.push_back(x);
        }
        return out;
    }
    [[nodiscard]] std::size_t max_width() const { return k + 1; }
    void put(std::vector<Word>& buf, const value_type& a) const {
        buf.push_back(a.size());
        buf.insert(buf.end(), a.begin(), a.end());
    }
    value_type get(const Word*& p) const {
        const std::size_t c = static_cast<std::size_t>(*p++);
        value_type out(p, p + c);
        p += c;
        return out;
    }
};

// Sequential fold; the oracle for distributed aggregation.
template <SeparableFn F, class It>
typename F::value_type fold(const F& f, It first, It last) {
    auto acc = f.identity();
    for (; first != last; ++first) acc = f.combine(acc, f.lift(*first));
    return acc;
}

}  // namespace mpcsim
