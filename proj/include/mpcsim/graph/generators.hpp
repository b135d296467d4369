#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "mpcsim/core/random.hpp"
#include "mpcsim/graph/graph.hpp"

namespace mpcsim {

enum class Family : std::uint8_t { tree, grid, forest_union, gnm };

inline std::string_view family_name(Family f) {
    switch (f) {
        case Family::tree: return "tree";
        case Family::grid: return "grid";
        case Family::forest_union: return "forest_union";
        case Family::gnm: return "gnm";
    }
    return "?";
}

inline Family parse_family(std::string_view s) {
    if (s == "tree") return Family::tree;
    if (s == "grid") return Family::grid;
    if (s == "forest_union") return Family::forest_union;
    if (s == "gnm") return Family::gnm;
    throw ArgumentError("unknown graph family '" + std::string(s) + "'");
}

struct GenParams {
    std::size_t n = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t alpha = 1;
    std::size_t m = 0;
};

namespace detail {

// Uniform labeled tree from a uniform Pruefer sequence (linear-time decode).
inline void pruefer_tree(std::size_t n, Stream& rng, std::vector<Edge>& out) {
    if (n < 2) return;
    if (n == 2) {
        out.emplace_back(0, 1);
        return;
    }
    std::vector<Vertex> code(n - 2);
    for (auto& c : code) c = static_cast<Vertex>(rng.below(n));
    std::vector<std::size_t> degree(n, 1);
    for (Vertex c : code) ++degree[c];
    std::size_t ptr = 0;
    while (degree[ptr] != 1) ++ptr;
    std::size_t leaf = ptr;
    for (Vertex c : code) {
        out.emplace_back(static_cast<Vertex>(leaf), c);
        if (--degree[c] == 1 && c < ptr) {
            leaf = c;
        } else {
            ++ptr;
            while (degree[ptr] != 1) ++ptr;
            leaf = ptr;
        }
    }
    out.emplace_back(static_cast<Vertex>(leaf), static_cast<Vertex>(n - 1));
}

}  // namespace detail

inline Graph generate(Family family, const GenParams& p, std::uint64_t seed) {
    Stream rng(mix(seed, static_cast<std::uint64_t>(family) + 0x51ed));
    std::vector<Edge> edges;
    switch (family) {
        case Family::tree: {
            detail::pruefer_tree(p.n, rng, edges);
            return Graph(p.n, std::move(edges));
        }
        case Family::grid: {
            if (p.rows == 0 || p.cols == 0) throw ArgumentError("grid needs rows and cols >= 1");
            const std::size_t n = p.rows * p.cols;
            for (std::size_t r = 0; r < p.rows; ++r)
                for (std::size_t c = 0; c < p.cols; ++c) {
                    const auto v = static_cast<Vertex>(r * p.cols + c);
                    if (c + 1 < p.cols) edges.emplace_back(v, v + 1);
                    if (r + 1 < p.rows) edges.emplace_back(v, static_cast<Vertex>(v + p.cols));
                }
            return Graph(n, std::move(edges));
        }
        case Family::forest_union: {
            if (p.alpha == 0) throw ArgumentError("forest_union needs alpha >= 1");
            for (std::size_t i = 0; i < p.alpha; ++i) detail::pruefer_tree(p.n, rng, edges);
            std::sort(edges.begin(), edges.end());
            edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
            return Graph(p.n, std::move(edges));
        }
        case Family::gnm: {
            const std::uint64_t pairs = p.n < 2 ? 0 : std::uint64_t{p.n} * (p.n - 1) / 2;
            if (p.m > pairs) throw ArgumentError("gnm: m exceeds the number of vertex pairs");
            std::unordered_set<std::uint64_t> seen;
            seen.reserve(p.m * 2);
            while (edges.size() < p.m) {
                auto a = static_cast<Vertex>(rng.below(p.n));
                auto b = static_cast<Vertex>(rng.below(p.n));
                if (a == b) continue;
                Edge e(a, b);
                if (seen.insert((std::uint64_t{e.u} << 32) | e.v).second) edges.push_back(e);
            }
            return Graph(p.n, std::move(edges));
        }
    }
    throw ArgumentError("unknown family");
}

}  // namespace mpcsim
