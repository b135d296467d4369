#pragma once

#include <span>
#include <string>
#include <vector>

#include "mpcsim/graph/graph.hpp"

namespace mpcsim {

struct Verdict {
    bool valid = true;
    std::string violation;  // first violation found, empty when valid

    static Verdict fail(std::string why) { return {false, std::move(why)}; }
};

// Independence over the edge list, then maximality vertex by vertex.
inline Verdict check_mis(const Graph& g, std::span<const Vertex> I) {
    std::vector<char> in(g.n(), 0);
    for (Vertex v : I) {
        if (v >= g.n()) return Verdict::fail("vertex " + std::to_string(v) + " is not in the graph");
        in[v] = 1;
    }
    std::vector<char> dominated(g.n(), 0);
    for (const Edge& e : g.edges()) {
        if (in[e.u] && in[e.v])
            return Verdict::fail("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") inside the set");
        dominated[e.u] |= in[e.v];
        dominated[e.v] |= in[e.u];
    }
    for (Vertex v = 0; v < g.n(); ++v)
        if (!in[v] && !dominated[v]) return Verdict::fail("vertex " + std::to_string(v) + " could be added");
    return {};
}

// Disjointness over the matched pairs, then every edge touches a matched vertex.
inline Verdict check_mm(const Graph& g, std::span<const Edge> M) {
    std::vector<char> used(g.n(), 0);
    for (const Edge& e : M) {
        const std::string pair = "(" + std::to_string(e.u) + "," + std::to_string(e.v) + ")";
        if (e.u >= g.n() || e.v >= g.n() || !g.has_edge(e.u, e.v)) return Verdict::fail("pair " + pair + " is not an edge");
        for (Vertex x : {e.u, e.v})
            if (used[x]) return Verdict::fail("vertex " + std::to_string(x) + " matched twice");
        used[e.u] = used[e.v] = 1;
    }
    for (const Edge& e : g.edges())
        if (!used[e.u] && !used[e.v])
            return Verdict::fail("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") could be added");
    return {};
}

// Every edge has an endpoint in C.
inline Verdict check_cover(const Graph& g, std::span<const Vertex> C) {
    std::vector<char> in(g.n(), 0);
    for (Vertex v : C) {
        if (v >= g.n()) return Verdict::fail("vertex " + std::to_string(v) + " is not in the graph");
        in[v] = 1;
    }
    for (const Edge& e : g.edges())
        if (!in[e.u] && !in[e.v]) return Verdict::fail("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") uncovered");
    return {};
}

}  // namespace mpcsim
