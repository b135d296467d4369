#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mpcsim/core/types.hpp"

namespace mpcsim {

// Immutable simple undirected graph on vertices 0..n-1.
class Graph {
  public:
    Graph() = default;

    // Throws ArgumentError on self-loops, duplicates or out-of-range endpoints.
    Graph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
        std::sort(edges_.begin(), edges_.end());
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            const Edge& e = edges_[i];
            if (e.u == e.v) throw ArgumentError("self-loop at vertex " + std::to_string(e.u));
            if (e.v >= n_) throw ArgumentError("edge endpoint " + std::to_string(e.v) + " out of range");
            if (i > 0 && edges_[i - 1] == e)
                throw ArgumentError("duplicate edge " + std::to_string(e.u) + " " + std::to_string(e.v));
        }
        build_adjacency();
    }

    [[nodiscard]] std::size_t n() const { return n_; }
    [[nodiscard]] std::size_t m() const { return edges_.size(); }
    [[nodiscard]] std::span<const Edge> edges() const { return edges_; }
    [[nodiscard]] const Edge& edge(std::size_t i) const { return edges_[i]; }

    [[nodiscard]] std::span<const Vertex> neighbors(Vertex v) const {
        return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
    }
    [[nodiscard]] std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }

    [[nodiscard]] std::size_t max_degree() const {
        std::size_t d = 0;
        for (Vertex v = 0; v < n_; ++v) d = std::max(d, degree(v));
        return d;
    }

    // Canonical index of edge {a,b}, or m() when absent.
    [[nodiscard]] std::size_t edge_index(Vertex a, Vertex b) const {
        const Edge key(a, b);
        auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
        if (it == edges_.end() || *it != key) return edges_.size();
        return static_cast<std::size_t>(it - edges_.begin());
    }

    [[nodiscard]] bool has_edge(Vertex a, Vertex b) const { return a != b && edge_index(a, b) < m(); }

    // Subgraph induced by the vertices with keep[v] true; IDs are preserved.
    [[nodiscard]] Graph induced(const std::vector<char>& keep) const {
        std::vector<Edge> out;
        for (const Edge& e : edges_)
            if (keep[e.u] && keep[e.v]) out.push_back(e);
        return Graph(n_, std::move(out), Trusted{});
    }

    friend bool operator==(const Graph& a, const Graph& b) { return a.n_ == b.n_ && a.edges_ == b.edges_; }

  private:
    struct Trusted {};
    Graph(std::size_t n, std::vector<Edge> sorted_edges, Trusted) : n_(n), edges_(std::move(sorted_edges)) {
        build_adjacency();
    }

    void build_adjacency() {
        offsets_.assign(n_ + 1, 0);
        for (const Edge& e : edges_) {
            ++offsets_[e.u + 1];
            ++offsets_[e.v + 1];
        }
        for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
        adj_.resize(2 * edges_.size());
        std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
        // Sorted edge order yields sorted neighbor lists for both endpoints.
        for (const Edge& e : edges_) adj_[fill[e.u]++] = e.v;
        for (const Edge& e : edges_) adj_[fill[e.v]++] = e.u;
        for (Vertex v = 0; v < n_; ++v) std::sort(adj_.begin() + offsets_[v], adj_.begin() + offsets_[v + 1]);
    }

    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::size_t> offsets_{0};
    std::vector<Vertex> adj_;
};

}  // namespace mpcsim
