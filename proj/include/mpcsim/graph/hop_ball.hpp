#pragma once

#include <algorithm>
#include <deque>
#include <vector>

#include "mpcsim/graph/graph.hpp"

namespace mpcsim {

// Induced subgraph on every vertex within distance `radius` of `center`.
struct HopBall {
    Vertex center = 0;
    std::size_t radius = 0;
    std::vector<Vertex> vertices;  // sorted global IDs
    std::vector<Edge> edges;       // sorted canonical pairs

    // Word tariff: one per vertex, two per edge.
    [[nodiscard]] std::size_t size() const { return vertices.size() + 2 * edges.size(); }

    [[nodiscard]] bool contains(Vertex v) const { return std::binary_search(vertices.begin(), vertices.end(), v); }

    friend bool operator==(const HopBall&, const HopBall&) = default;
};

inline HopBall t_hop(const Graph& g, Vertex v, std::size_t t) {
    HopBall ball;
    ball.center = v;
    ball.radius = t;
    std::vector<std::size_t> dist(g.n(), static_cast<std::size_t>(-1));
    std::deque<Vertex> q{v};
    dist[v] = 0;
    while (!q.empty()) {
        Vertex x = q.front();
        q.pop_front();
        ball.vertices.push_back(x);
        if (dist[x] == t) continue;
        for (Vertex y : g.neighbors(x))
            if (dist[y] == static_cast<std::size_t>(-1)) {
                dist[y] = dist[x] + 1;
                q.push_back(y);
            }
    }
    std::sort(ball.vertices.begin(), ball.vertices.end());
    for (Vertex x : ball.vertices)
        for (Vertex y : g.neighbors(x))
            if (x < y && dist[y] != static_cast<std::size_t>(-1)) ball.edges.emplace_back(x, y);
    std::sort(ball.edges.begin(), ball.edges.end());
    return ball;
}

}  // namespace mpcsim
