#pragma once

#include <algorithm>
#include <vector>

#include "mpcsim/local/state.hpp"
#include "mpcsim/symbreak/rules.hpp"

namespace mpcsim {

enum class VertexStatus : std::uint8_t { active, dead, in_mis, removed, matched };

struct Result {
    Mode kind = Mode::mis;
    std::vector<Vertex> mis;
    std::vector<Edge> matching;
    std::vector<Vertex> vertex_cover;  // mm only
};

// Both endpoints of every matched edge. The matching must be maximal.
inline std::vector<Vertex> vertex_cover_from_mm(const Graph& g, std::span<const Edge> matching) {
    std::vector<char> in(g.n(), 0);
    for (const Edge& e : matching) {
        if (e.v >= g.n() || !g.has_edge(e.u, e.v)) throw ArgumentError("matched pair is not an edge of the graph");
        in[e.u] = in[e.v] = 1;
    }
    for (const Edge& e : g.edges())
        if (!in[e.u] && !in[e.v])
            throw ArgumentError("matching is not maximal: edge " + std::to_string(e.u) + "-" + std::to_string(e.v) +
                                " is uncovered");
    std::vector<Vertex> out;
    for (Vertex v = 0; v < g.n(); ++v)
        if (in[v]) out.push_back(v);
    return out;
}

// Driver-side record of what has been decided so far.
struct SolveState {
    std::vector<VertexStatus> status;
    std::vector<char> matched_edge;  // by canonical edge index

    explicit SolveState(const Graph& g) : status(g.n(), VertexStatus::active), matched_edge(g.m(), 0) {}

    [[nodiscard]] bool live(Vertex v) const { return status[v] == VertexStatus::active || status[v] == VertexStatus::dead; }

    // 1 for vertices still in the remaining graph.
    [[nodiscard]] std::vector<Word> live_flags() const {
        std::vector<Word> f(status.size());
        for (Vertex v = 0; v < status.size(); ++v) f[v] = live(v);
        return f;
    }
    [[nodiscard]] std::vector<char> active_mask() const {
        std::vector<char> f(status.size());
        for (Vertex v = 0; v < status.size(); ++v) f[v] = status[v] == VertexStatus::active;
        return f;
    }
    [[nodiscard]] std::size_t live_count() const {
        return static_cast<std::size_t>(std::count_if(status.begin(), status.end(), [](VertexStatus s) {
            return s == VertexStatus::active || s == VertexStatus::dead;
        }));
    }

    // Rule states for the current statuses. Dead vertices read as active.
    [[nodiscard]] StateVector states(const Graph& g) const {
        StateVector sv = StateVector::initial(g);
        for (Vertex v = 0; v < g.n(); ++v) sv.vertex[v] = vstate::make(v, code(status[v]), 0);
        for (std::size_t i = 0; i < g.m(); ++i)
            if (matched_edge[i]) sv.edge[i] = estate::with_flags(sv.edge[i], kMatchedEdge);
        return sv;
    }

    // Takes the statuses out of rule states; dead vertices keep their mark
    // unless the rule settled them.
    void absorb(const Graph& g, const StateVector& sv) {
        for (Vertex v = 0; v < g.n(); ++v) {
            switch (status_of(sv.vertex[v])) {
                case status_code::in_mis: status[v] = VertexStatus::in_mis; break;
                case status_code::removed: status[v] = VertexStatus::removed; break;
                case status_code::matched: status[v] = VertexStatus::matched; break;
                default: break;
            }
        }
        for (std::size_t i = 0; i < g.m(); ++i)
            if (estate::flags(sv.edge[i]) & kMatchedEdge) {
                matched_edge[i] = 1;
                status[g.edge(i).u] = status[g.edge(i).v] = VertexStatus::matched;
            }
    }

    [[nodiscard]] Result result(const Graph& g, Mode mode) const {
        Result r;
        r.kind = mode;
        if (mode == Mode::mis) {
            for (Vertex v = 0; v < g.n(); ++v)
                if (status[v] == VertexStatus::in_mis) r.mis.push_back(v);
        } else {
            for (std::size_t i = 0; i < g.m(); ++i)
                if (matched_edge[i]) r.matching.push_back(g.edge(i));
        }
        return r;
    }

  private:
    static std::uint8_t code(VertexStatus s) {
        switch (s) {
            case VertexStatus::in_mis: return status_code::in_mis;
            case VertexStatus::removed: return status_code::removed;
            case VertexStatus::matched: return status_code::matched;
            default: return status_code::active;
        }
    }
};

}  // namespace mpcsim
