#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "mpcsim/graph/graph.hpp"

namespace mpcsim {

struct Rational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    [[nodiscard]] double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }
    [[nodiscard]] std::uint64_t ceil() const { return den == 0 ? 0 : (num + den - 1) / den; }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<unsigned __int128>(a.num) * b.den < static_cast<unsigned __int128>(b.num) * a.den;
    }
};

struct SparsityReport {
    std::size_t degeneracy = 0;
    Rational density_bound;  // max over peeling suffixes S of |E(S)| / (|S| - 1)
};

// Min-degree peeling with bucket queues.
inline SparsityReport degeneracy(const Graph& g) {
    const std::size_t n = g.n();
    SparsityReport rep;
    if (n == 0) return rep;
    std::vector<std::size_t> deg(n);
    std::size_t maxd = 0;
    for (Vertex v = 0; v < n; ++v) maxd = std::max(maxd, deg[v] = g.degree(v));
    std::vector<std::vector<Vertex>> bucket(maxd + 1);
    for (Vertex v = 0; v < n; ++v) bucket[deg[v]].push_back(v);
    std::vector<char> gone(n, 0);
    std::size_t remaining_edges = g.m();
    std::size_t remaining = n;
    std::size_t cur = 0;
    auto consider = [&] {
        if (remaining >= 2) {
            Rational r{remaining_edges, remaining - 1};
            if (rep.density_bound < r) rep.density_bound = r;
        }
    };
    consider();
    while (remaining > 0) {
        cur = cur > 0 ? cur - 1 : 0;
        Vertex v = kNoVertex;
        while (v == kNoVertex) {
            auto& b = bucket[cur];
            while (!b.empty() && (gone[b.back()] || deg[b.back()] != cur)) b.pop_back();
            if (b.empty()) {
                ++cur;
                continue;
            }
            v = b.back();
            b.pop_back();
        }
        rep.degeneracy = std::max(rep.degeneracy, cur);
        gone[v] = 1;
        --remaining;
        remaining_edges -= deg[v];
        for (Vertex u : g.neighbors(v)) {
            if (gone[u]) continue;
            --deg[u];
            bucket[deg[u]].push_back(u);
        }
        consider();
    }
    return rep;
}

}  // namespace mpcsim
