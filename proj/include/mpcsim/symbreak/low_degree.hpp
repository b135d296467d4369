#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mpcsim/local/direct.hpp"
#include "mpcsim/primitives/collect_hops.hpp"
#include "mpcsim/symbreak/reduction.hpp"

namespace mpcsim {

struct LowDegreeOptions {
    std::uint64_t seed = 11;
    std::size_t restart_chunks = 3;  // extra randomized chunks when the edge target is missed
    std::uint64_t check_every = 20;  // rounds between quiet checks; 0 runs every chunk in full
};

struct LowDegreeTrace {
    std::size_t delta = 0;
    bool above_gate = false;  // delta > n^(eps/16); only reachable at desk fidelity
    std::size_t iterations_per_chunk = 0;
    std::size_t chunks = 0;
    std::size_t edges_start = 0;
    std::size_t edges_left = 0;
    double edge_target = 0;
    bool target_met = false;
    std::size_t gather_radius = 0;
    std::size_t largest_component = 0;
    std::uint64_t rounds = 0;
};

namespace detail {

// Greedy finish of one component, in ID order for MIS and edge order for MM.
inline void finish_component(const HopBall& b, Mode mode, SolveState& st, const Graph& g) {
    if (mode == Mode::mis) {
        // Ball IDs are sorted, so the greedy order is the vertex order.
        auto at = [&](Vertex x) { return static_cast<std::size_t>(std::lower_bound(b.vertices.begin(), b.vertices.end(), x) - b.vertices.begin()); };
        std::vector<std::vector<Vertex>> adj(b.vertices.size());
        for (const Edge& e : b.edges) {
            adj[at(e.u)].push_back(e.v);
            adj[at(e.v)].push_back(e.u);
        }
        for (std::size_t i = 0; i < b.vertices.size(); ++i) {
            const Vertex v = b.vertices[i];
            if (!st.live(v)) continue;
            st.status[v] = VertexStatus::in_mis;
            for (Vertex u : adj[i])
                if (st.live(u)) st.status[u] = VertexStatus::removed;
        }
        return;
    }
    std::vector<Edge> es(b.edges.begin(), b.edges.end());
    std::sort(es.begin(), es.end());
    for (const Edge& e : es)
        if (st.live(e.u) && st.live(e.v)) {
            st.status[e.u] = st.status[e.v] = VertexStatus::matched;
            st.matched_edge[g.edge_index(e.u, e.v)] = 1;
        }
    for (Vertex v : b.vertices)
        if (st.live(v)) st.status[v] = VertexStatus::removed;
}

}  // namespace detail

// Finishes the remaining graph once its maximum degree is small: chunks of
// Luby or Israeli-Itai iterations shatter it, then every component is
// gathered around its smallest vertex and solved there.
inline LowDegreeTrace solve_low_degree(Cluster& c, const DegreeReductionParams& p, SolveState& st, LowDegreeOptions opt = {}) {
    const Graph& g = c.graph();
    const std::size_t n = g.n(), S = c.config().machine_space;
    const std::uint64_t r0 = c.report().rounds_elapsed;
    LowDegreeTrace tr;
    const double lg = std::log2(static_cast<double>(std::max<std::size_t>(n, 2)));
    {
        EdgeLayout E(c);
        prune_settled(E, st);
        auto deg = E.compute_degrees();
        tr.delta = max_degree(E, deg);
        tr.edges_start = tr.edges_left = E.stored_edges();
        E.release_scratch();
    }
    const double eps = std::log(static_cast<double>(S)) / std::log(std::max(2.0, static_cast<double>(n)));
    if (static_cast<double>(tr.delta) > std::pow(static_cast<double>(n), eps / 16)) {
        if (p.fidelity == Fidelity::faithful)
            throw ArgumentError("low-degree finish needs max degree <= n^(eps/16), got " + std::to_string(tr.delta));
        tr.above_gate = true;
    }

    const double d = std::max(2.0, static_cast<double>(tr.delta));
    const double scale = 9 * std::log2(d) + 2 * std::log2(std::max(lg, 2.0));
    tr.iterations_per_chunk = static_cast<std::size_t>(std::ceil(scale));
    tr.edge_target = static_cast<double>(tr.edges_start) / std::exp2(scale);
    const std::size_t lgc = std::max<std::size_t>(1, ceil_log2(n));
    const std::size_t c_tape = std::max<std::size_t>(16, (32 * tr.iterations_per_chunk + lgc * lgc - 1) / (lgc * lgc));
    const std::uint64_t rounds = tr.iterations_per_chunk * LubyRule::cycle;

    while (tr.edges_left > 0 && tr.chunks < 1 + opt.restart_chunks &&
           (tr.chunks == 0 || static_cast<double>(tr.edges_left) > tr.edge_target)) {
        RandomTape tape(mix(opt.seed, tr.chunks), n, c_tape);
        StateVector base = st.states(g);
        base.round = 0;
        StateVector out = p.mode == Mode::mis ? simulate_direct(c, LubyRule{}, rounds, tape, std::move(base), opt.check_every)
                                              : simulate_direct(c, IsraeliItaiRule{}, rounds, tape, std::move(base), opt.check_every);
        st.absorb(g, out);
        EdgeLayout E(c);
        prune_settled(E, st);
        tr.edges_left = E.stored_edges();
        E.release_scratch();
        ++tr.chunks;
    }
    tr.target_met = static_cast<double>(tr.edges_left) <= tr.edge_target;

    // Gather every remaining component; the smallest vertex solves it.
    std::vector<Vertex> live;
    for (Vertex v = 0; v < n; ++v)
        if (st.live(v)) live.push_back(v);
    if (!live.empty()) {
        EdgeLayout E(c);
        auto deg = E.compute_degrees();
        auto include = st.live_flags();
        std::vector<char> inc(include.begin(), include.end());
        VertexLayout V(E, deg, inc);
        const double cap = std::pow(d, 4) * lg;
        const std::size_t budget = std::min<std::size_t>(S / 4, static_cast<std::size_t>(std::min(cap, 1e18)));
        for (std::size_t t = 1;; t *= 2) {
            HopCollection hc = collect_hops(V, live, t, std::max<std::size_t>(budget, 4));
            release_hops(c);
            if (std::all_of(hc.complete.begin(), hc.complete.end(), [](char x) { return x != 0; })) {
                tr.gather_radius = t;
                for (std::size_t i = 0; i < hc.centers.size(); ++i) {
                    const HopBall& b = hc.balls[i];
                    if (*std::min_element(b.vertices.begin(), b.vertices.end()) != hc.centers[i]) continue;
                    tr.largest_component = std::max(tr.largest_component, b.vertices.size());
                    detail::finish_component(b, p.mode, st, g);
                }
                break;
            }
        }
        E.release_scratch();
    }
    tr.rounds = c.report().rounds_elapsed - r0;
    return tr;
}

}  // namespace mpcsim
