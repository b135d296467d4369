#pragma once

#include <algorithm>
#include <vector>

#include "mpcsim/graph/hop_ball.hpp"
#include "mpcsim/local/state.hpp"

namespace mpcsim {

// States on a ball, aligned with ball.vertices and ball.edges.
struct BallStates {
    std::vector<Word> vertex;
    std::vector<Word> edge;

    static BallStates initial(const HopBall& b) {
        BallStates s;
        for (Vertex v : b.vertices) s.vertex.push_back(v);
        for (const Edge& e : b.edges) s.edge.push_back(estate::make(e.u, e.v, 0));
        return s;
    }
    static BallStates from(const HopBall& b, const Graph& g, const StateVector& sv) {
        BallStates s;
        for (Vertex v : b.vertices) s.vertex.push_back(sv.vertex[v]);
        for (const Edge& e : b.edges) s.edge.push_back(sv.edge[g.edge_index(e.u, e.v)]);
        return s;
    }
    friend bool operator==(const BallStates&, const BallStates&) = default;
};

// Local simulation restricted to a ball. Vertices near the rim see only part
// of their edges, so after i rounds only those within radius - i are exact.
class BallSim {
  public:
    explicit BallSim(const HopBall& b) : b_(&b) {
        const std::size_t k = b.vertices.size();
        off_.assign(k + 1, 0);
        std::vector<std::pair<std::size_t, std::pair<Vertex, std::size_t>>> arcs;
        for (std::size_t j = 0; j < b.edges.size(); ++j) {
            const Edge& e = b.edges[j];
            arcs.push_back({index(e.u), {e.v, j}});
            arcs.push_back({index(e.v), {e.u, j}});
        }
        std::sort(arcs.begin(), arcs.end());
        inc_.resize(arcs.size());
        for (std::size_t a = 0; a < arcs.size(); ++a) {
            ++off_[arcs[a].first + 1];
            inc_[a] = arcs[a].second.second;
        }
        for (std::size_t i = 0; i < k; ++i) off_[i + 1] += off_[i];
        lo_.resize(b.edges.size());
        hi_.resize(b.edges.size());
        for (std::size_t j = 0; j < b.edges.size(); ++j) {
            lo_[j] = index(b.edges[j].u);
            hi_[j] = index(b.edges[j].v);
        }
    }

    [[nodiscard]] const HopBall& ball() const { return *b_; }

    [[nodiscard]] std::size_t index(Vertex v) const {
        auto it = std::lower_bound(b_->vertices.begin(), b_->vertices.end(), v);
        return static_cast<std::size_t>(it - b_->vertices.begin());
    }
    [[nodiscard]] std::size_t edge_index(Vertex a, Vertex b) const {
        auto it = std::lower_bound(b_->edges.begin(), b_->edges.end(), Edge(a, b));
        if (it == b_->edges.end() || *it != Edge(a, b)) return b_->edges.size();
        return static_cast<std::size_t>(it - b_->edges.begin());
    }

    // Advances `s` by `rounds`, computing rounds first+1 .. first+rounds.
    template <LocalRule R>
    void run(const R& rule, const RandomTape& tape, BallStates& s, std::uint64_t first, std::uint64_t rounds) const {
        std::vector<Word> nv(s.vertex.size()), ne(s.edge.size()), incident;
        for (std::uint64_t r = first + 1; r <= first + rounds; ++r) {
            for (std::size_t i = 0; i < s.vertex.size(); ++i) {
                incident.clear();
                for (std::size_t a = off_[i]; a < off_[i + 1]; ++a) incident.push_back(s.edge[inc_[a]]);
                const Vertex v = b_->vertices[i];
                nv[i] = detail::narrow_vertex(rule.vertex(s.vertex[i], incident, TapeView(tape, v), r), v);
            }
            for (std::size_t j = 0; j < s.edge.size(); ++j)
                ne[j] = detail::narrow_edge(rule.edge(s.vertex[lo_[j]], s.vertex[hi_[j]], s.edge[j], r), s.edge[j]);
            s.vertex.swap(nv);
            s.edge.swap(ne);
        }
    }

  private:
    const HopBall* b_;
    std::vector<std::size_t> off_, inc_, lo_, hi_;
};

struct ReplayResult {
    Word center = 0;
    std::vector<std::pair<Edge, Word>> edges;  // incident edges of the center, sorted
};

// State of the center after i rounds from the round-`beta` states on its ball,
// without communication.
template <LocalRule R>
ReplayResult local_replay(const HopBall& ball, BallStates base, const RandomTape& tape, const R& rule, std::size_t i,
                          std::uint64_t beta = 0) {
    if (i > ball.radius)
        throw ArgumentError("replaying " + std::to_string(i) + " rounds needs a ball of radius at least " +
                            std::to_string(i) + ", got " + std::to_string(ball.radius));
    if (base.vertex.size() != ball.vertices.size() || base.edge.size() != ball.edges.size())
        throw ArgumentError("base states do not match the ball");
    BallSim sim(ball);
    sim.run(rule, tape, base, beta, i);
    ReplayResult out;
    out.center = base.vertex[sim.index(ball.center)];
    for (std::size_t j = 0; j < ball.edges.size(); ++j)
        if (ball.edges[j].u == ball.center || ball.edges[j].v == ball.center) out.edges.emplace_back(ball.edges[j], base.edge[j]);
    return out;
}

}  // namespace mpcsim
