#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mpcsim/local/blind.hpp"
#include "mpcsim/symbreak/status.hpp"

namespace mpcsim {

enum class SpaceMode : std::uint8_t { warmup, optimized };

// Drops every stored edge with a settled endpoint, so the stored edges are
// the remaining graph again.
inline void prune_settled(EdgeLayout& E, const SolveState& st) {
    std::vector<Word> gone(st.status.size());
    for (Vertex v = 0; v < gone.size(); ++v) gone[v] = !st.live(v);
    E.prune(gone);
}

inline std::size_t max_degree(EdgeLayout& E, std::span<const Word> deg) { return static_cast<std::size_t>(E.allreduce(deg, MaxFn{})); }

// Marks live vertices of degree below ceil(sqrt(delta)) whose neighbors are
// all below it too. Returns the number of dead vertices.
inline std::size_t mark_dead(EdgeLayout& E, std::size_t delta, SolveState& st) {
    const std::size_t h = ceil_sqrt(delta);
    auto deg = E.compute_degrees();
    auto top = E.aggregate(deg, MaxFn{});
    std::size_t dead = 0;
    for (Vertex v = 0; v < deg.size(); ++v) {
        if (st.status[v] == VertexStatus::active && deg[v] < h && top[v] < h) st.status[v] = VertexStatus::dead;
        dead += st.status[v] == VertexStatus::dead;
    }
    return dead;
}

inline void revive_dead(SolveState& st) {
    for (auto& s : st.status)
        if (s == VertexStatus::dead) s = VertexStatus::active;
}

struct StepTrace {
    std::size_t high = 0;
    std::size_t exposed = 0;
    std::size_t leaves = 0;
    std::size_t good = 0;
    std::size_t settled = 0;
};

// One degree-reduction call on the aggregate path: every step is a separable
// aggregate over the edge layout, with the same marks, tie-breaks and tape
// chunk as the twelve-round rule. The stored edges must be the remaining
// graph; only `active` vertices take part.
inline StepTrace degree_reduction_step(Cluster& c, std::size_t delta, const DegreeReductionParams& p, SolveState& st,
                                       const RandomTape& tape, std::uint64_t call) {
    const Graph& g = c.graph();
    const std::size_t n = g.n();
    const std::size_t h = ceil_sqrt(delta), take = leaf_pick(delta);
    const double beta = p.beta(delta);
    EdgeLayout E(c, take + 1);
    E.compute_degrees();
    StepTrace tr;
    std::vector<Word> act(n);
    for (Vertex v = 0; v < n; ++v) act[v] = st.status[v] == VertexStatus::active;
    auto both = [&](Word a, Word b) { return (a & 1) && (b & 1); };

    // Vertex words: bit 0 active, bit 1 high, bit 2 exposed, bit 3 leaf,
    // bit 4 good, bits 8..31 a vertex ID, bits 32.. a random value.
    auto deg = E.aggregate(act, SumFn{}, [&](Word xn, Vertex, Word xs, Vertex) -> Word { return both(xn, xs); });
    std::vector<Word> w(n);
    for (Vertex v = 0; v < n; ++v) {
        w[v] = act[v] | (act[v] && deg[v] >= h ? 2u : 0u);
        tr.high += (w[v] & 2) != 0;
    }
    auto low = E.aggregate(w, KSmallestFn{take}, [&](Word xn, Vertex u, Word xs, Vertex) -> std::vector<Word> {
        if (both(xn, xs) && (xs & 2) && !(xn & 2)) return {u};
        return {};
    });
    for (Vertex v = 0; v < n; ++v)
        if ((w[v] & 2) && low[v].size() == take) {
            w[v] |= 4 | Word{low[v].back()} << 8;
            ++tr.exposed;
        }
    auto kept = [&](Word xn, Vertex self, Word xs) {
        return both(xn, xs) && (xn & 4) && !(xs & 2) && self <= ((xn >> 8) & vstate::id_mask);
    };
    auto ex = E.aggregate(w, SumFn{}, [&](Word xn, Vertex, Word xs, Vertex self) -> Word { return kept(xn, self, xs); });
    for (Vertex v = 0; v < n; ++v)
        if ((w[v] & 1) && !(w[v] & 2) && ex[v] > 0) {
            w[v] |= 8;
            ++tr.leaves;
        }
    auto lv = E.aggregate(w, SumFn{}, [&](Word xn, Vertex, Word xs, Vertex) -> Word { return both(xn, xs) && (xn & 8); });
    std::vector<Word> r(n, 0);
    for (Vertex v = 0; v < n; ++v)
        if ((w[v] & 8) && static_cast<double>(ex[v]) < beta && static_cast<double>(lv[v]) < beta * beta) {
            w[v] |= 16;
            r[v] = tape.chunk(v, call);
            ++tr.good;
        }

    std::vector<Vertex> settled;
    if (p.mode == Mode::mis) {
        std::vector<Word> x(n);
        for (Vertex v = 0; v < n; ++v) x[v] = (w[v] & 0xff) | (w[v] & 16 ? rank_key(static_cast<std::uint32_t>(r[v]), v) << 8 : 0);
        auto best = E.aggregate(x, MinFn{}, [&](Word xn, Vertex, Word xs, Vertex) -> Word {
            return both(xn, xs) && (xn & 16) ? xn >> 8 : ~Word{0};
        });
        std::vector<Word> join(n, 0);
        for (Vertex v = 0; v < n; ++v)
            if ((w[v] & 16) && rank_key(static_cast<std::uint32_t>(r[v]), v) < best[v]) join[v] = 1 | act[v];
        // Removal: live neighbors of a joiner along active edges.
        std::vector<Word> jx(n);
        for (Vertex v = 0; v < n; ++v) jx[v] = act[v] | (join[v] ? 2u : 0u);
        auto hit = E.aggregate(jx, OrFn{}, [&](Word xn, Vertex, Word xs, Vertex) -> Word { return both(xn, xs) && (xn & 2) ? 1 : 0; });
        for (Vertex v = 0; v < n; ++v) {
            if (join[v]) {
                st.status[v] = VertexStatus::in_mis;
                settled.push_back(v);
            } else if (act[v] && hit[v]) {
                st.status[v] = VertexStatus::removed;
                settled.push_back(v);
            }
        }
    } else {
        // Proposal target of every good leaf: the smallest mixed key over its
        // kept edges.
        auto target = E.aggregate(w, MinFn{}, [&](Word xn, Vertex u, Word xs, Vertex self) -> Word {
            if (!(xs & 16) || !kept(xn, self, xs)) return ~Word{0};
            return pick_key(tape.chunk(self, call), u);
        });
        std::vector<Word> x(n);
        for (Vertex v = 0; v < n; ++v) x[v] = (w[v] & 0xff) | ((w[v] & 16) ? (target[v] & vstate::id_mask) << 8 : 0);
        auto acc = E.aggregate(x, MinFn{}, [&](Word xn, Vertex u, Word xs, Vertex self) -> Word {
            return both(xn, xs) && (xs & 4) && (xn & 16) && ((xn >> 8) & vstate::id_mask) == self ? u : ~Word{0};
        });
        for (Vertex v = 0; v < n; ++v)
            if ((w[v] & 4) && acc[v] != ~Word{0}) {
                const Vertex u = static_cast<Vertex>(acc[v]);
                st.status[v] = st.status[u] = VertexStatus::matched;
                st.matched_edge[g.edge_index(u, v)] = 1;
                settled.push_back(u);
                settled.push_back(v);
            }
        // Leaves learn the verdict through their target; one more aggregate
        // keeps the round count honest.
        std::vector<Word> y(n, 0);
        for (Vertex v = 0; v < n; ++v)
            if (acc[v] != ~Word{0} && (w[v] & 4)) y[v] = 1 | acc[v] << 1;
        (void)E.aggregate(y, OrFn{}, [&](Word xn, Vertex, Word, Vertex self) -> Word { return (xn & 1) && (xn >> 1) == self; });
    }
    tr.settled = settled.size();
    prune_settled(E, st);
    E.release_scratch();
    return tr;
}

// Per-center ball budget for the space-efficient schedule:
// clamp(floor(c * m / h), s0, S / 4).
struct CapacitySchedule {
    double c = 4;
    std::size_t s0 = 32;
    std::vector<std::size_t> trace;

    std::size_t next(std::size_t m, std::size_t high, std::size_t S) {
        const std::size_t hi = std::max<std::size_t>(S / 4, s0);
        const double raw = high == 0 ? static_cast<double>(hi) : c * static_cast<double>(m) / static_cast<double>(high);
        const std::size_t s = std::clamp<std::size_t>(static_cast<std::size_t>(raw), s0, hi);
        trace.push_back(s);
        return s;
    }

    // Radius growth: one step at a time up to 3, then t -> 2t - 2.
    static std::size_t grow(std::size_t t) { return t < 3 ? 3 : (t <= 3 ? t + 1 : 2 * t - 2); }
};

struct PhaseTrace {
    std::size_t delta = 0;
    std::size_t calls = 0;
    bool success = false;
    std::string engine;  // "aggregate", "direct", "balls" or a mix
    std::vector<std::size_t> high;  // high-degree count before each call and at the end
    std::vector<std::size_t> radius;  // ball radius per call, 0 when uncompressed
    std::vector<std::size_t> capacity;
    std::uint64_t rounds = 0;
};

struct ReduceOptions {
    SpaceMode space = SpaceMode::warmup;
    std::uint64_t seed = 1;
    double stall_factor = 0.95;  // h_new > f * h_old counts as a stalled call
    std::size_t stall_limit = 2;
    double cap_coeff = 4;  // call cap c * log_delta n + c0
    std::size_t cap_const = 8;
    CapacitySchedule capacity{};
};

inline std::size_t reduce_call_cap(std::size_t delta, std::size_t n, const ReduceOptions& o) {
    const double ld = std::log(static_cast<double>(std::max<std::size_t>(n, 2))) / std::log(static_cast<double>(std::max<std::size_t>(delta, 2)));
    return static_cast<std::size_t>(std::ceil(o.cap_coeff * ld)) + o.cap_const;
}

namespace detail {

inline void note_engine(PhaseTrace& tr, const char* e) {
    if (tr.engine.empty())
        tr.engine = e;
    else if (tr.engine.find(e) == std::string::npos)
        tr.engine += std::string("+") + e;
}

// Vertex-layout degree limit of the cluster.
inline std::size_t layout_limit(const Cluster& c) { return vertex_layout_degree_limit(c.config().machine_space); }

}  // namespace detail

// Repeats the degree-reduction call at a fixed delta until no vertex of
// degree >= ceil(sqrt(delta)) remains (success), or the high-degree count
// stalls, or the call cap is hit. Stored edges must be the remaining graph.
inline PhaseTrace reduce_to_sqrt(Cluster& c, std::size_t delta, const DegreeReductionParams& p, SolveState& st,
                                 ReduceOptions opt = {}) {
    if (delta < 2) throw ArgumentError("reduce_to_sqrt needs delta >= 2");
    const Graph& g = c.graph();
    const std::size_t n = g.n(), S = c.config().machine_space;
    const std::size_t h = ceil_sqrt(delta);
    const std::uint64_t r0 = c.report().rounds_elapsed;
    PhaseTrace tr;
    tr.delta = delta;
    RandomTape tape(opt.seed, n, 64);
    const std::size_t cap = std::min(reduce_call_cap(delta, n, opt), tape.chunks());
    const DegreeReductionRule rule(p.mode, delta, p);

    std::optional<EdgeLayout> E;
    E.emplace(c);
    auto high_count = [&](std::size_t& maxdeg) {
        auto deg = E->compute_degrees();
        std::size_t hc = 0;
        for (Vertex v = 0; v < n; ++v) hc += st.live(v) && deg[v] >= h;
        maxdeg = max_degree(*E, deg);
        return hc;
    };

    // Warm-up keeps one layout and one set of balls for the whole phase.
    std::unique_ptr<VertexLayout> V;
    std::unique_ptr<BallSession> session;
    std::size_t warm_radius = 0;
    std::size_t cur_radius = 0, failed_capacity = 0;
    std::size_t stalls = 0;

    std::size_t maxdeg = 0;
    std::size_t hc = high_count(maxdeg);
    tr.high.push_back(hc);
    while (hc > 0 && tr.calls < cap && stalls < opt.stall_limit) {
        const std::uint64_t call = tr.calls;
        if (maxdeg > detail::layout_limit(c)) {
            E.reset();
            session.reset();
            V.reset();
            degree_reduction_step(c, delta, p, st, tape, call);
            E.emplace(c);
            detail::note_engine(tr, "aggregate");
            tr.radius.push_back(0);
        } else if (opt.space == SpaceMode::warmup) {
            StateVector sv = st.states(g);
            sv.round = call * DegreeReductionRule::cycle;
            if (!V) {
                auto deg = E->compute_degrees();
                auto live = st.active_mask();
                V = std::make_unique<VertexLayout>(*E, deg, live);
                warm_radius = blind_radius(std::max<std::size_t>(maxdeg, 2), S);
                if (warm_radius >= 2) {
                    BallPlan plan;
                    for (Vertex v = 0; v < n; ++v)
                        if (V->included(v)) plan.centers.push_back(v);
                    plan.radius = warm_radius;
                    plan.replay = warm_radius;
                    session = std::make_unique<BallSession>(*V, plan, sv);
                }
            }
            if (session) {
                session->advance(rule, tape, DegreeReductionRule::cycle);
                session->extract(sv);
                detail::note_engine(tr, "balls");
                tr.radius.push_back(warm_radius);
            } else {
                DirectEngine(*V).run(rule, tape, sv, DegreeReductionRule::cycle);
                detail::note_engine(tr, "direct");
                tr.radius.push_back(0);
            }
            st.absorb(g, sv);
            prune_settled(*E, st);
        } else {
            // Space-efficient: dead vertices leave the layout, balls only
            // around high-degree centers, budget from the capacity schedule.
            mark_dead(*E, delta, st);
            auto deg = E->compute_degrees();
            std::vector<Word> hx(n);
            std::vector<Vertex> centers;
            for (Vertex v = 0; v < n; ++v) {
                const bool hi = st.status[v] == VertexStatus::active && deg[v] >= h;
                hx[v] = hi ? Word{v} : ~Word{0};
                if (hi) centers.push_back(v);
            }
            auto owner_of = E->aggregate(hx, MinFn{});
            const std::size_t s = opt.capacity.next(E->stored_edges(), centers.size(), S);
            tr.capacity.push_back(s);
            auto include = st.active_mask();
            StateVector sv = st.states(g);
            sv.round = call * DegreeReductionRule::cycle;
            {
                VertexLayout Vo(*E, deg, include);
                BallPlan plan;
                plan.centers = centers;
                plan.owner.assign(n, kNoOwner);
                for (Vertex v = 0; v < n; ++v)
                    if (Vo.included(v)) plan.owner[v] = hx[v] != ~Word{0} ? v : static_cast<Vertex>(owner_of[v]);
                plan.budget = s;
                bool done = false;
                for (std::size_t t : {CapacitySchedule::grow(cur_radius), cur_radius}) {
                    if (t < 3 || (t != cur_radius && s <= failed_capacity)) continue;
                    plan.radius = t;
                    plan.replay = t - 1;
                    try {
                        BallSession bs(Vo, plan, sv);
                        bs.advance(rule, tape, DegreeReductionRule::cycle);
                        bs.extract(sv);
                        cur_radius = t;
                        tr.radius.push_back(t);
                        detail::note_engine(tr, "balls");
                        done = true;
                        break;
                    } catch (const BallOverflow&) {
                        if (t != cur_radius) failed_capacity = s;
                    }
                }
                if (!done) {
                    DirectEngine(Vo).run(rule, tape, sv, DegreeReductionRule::cycle);
                    detail::note_engine(tr, "direct");
                    tr.radius.push_back(0);
                }
            }
            st.absorb(g, sv);
            if (p.mode == Mode::mis) {
                // Dead neighbors of new joiners leave with them.
                std::vector<Word> x(n);
                for (Vertex v = 0; v < n; ++v) x[v] = st.status[v] == VertexStatus::in_mis;
                auto hit = E->aggregate(x, OrFn{});
                for (Vertex v = 0; v < n; ++v)
                    if (st.status[v] == VertexStatus::dead && hit[v]) st.status[v] = VertexStatus::removed;
            }
            prune_settled(*E, st);
        }
        ++tr.calls;
        const std::size_t before = hc;
        hc = high_count(maxdeg);
        tr.high.push_back(hc);
        stalls = static_cast<double>(hc) > opt.stall_factor * static_cast<double>(before) ? stalls + 1 : 0;
    }
    session.reset();
    V.reset();
    revive_dead(st);
    E->release_scratch();
    tr.success = hc == 0;
    tr.rounds = c.report().rounds_elapsed - r0;
    return tr;
}

// Brings the maximum degree under the vertex-layout limit with uncompressed
// aggregate-path calls at delta = limit^2, at most ceil(c / eps) of them.
struct CoarseTrace {
    std::size_t calls = 0;
    std::size_t max_degree_before = 0;
    std::size_t max_degree_after = 0;
    std::uint64_t rounds = 0;
};

inline CoarseTrace coarse_degree_reduction(Cluster& c, const DegreeReductionParams& p, SolveState& st,
                                           std::uint64_t seed = 7, double cap_coeff = 4) {
    const std::uint64_t r0 = c.report().rounds_elapsed;
    CoarseTrace tr;
    const std::size_t limit = std::max<std::size_t>(2, detail::layout_limit(c));
    const std::size_t dc = limit * limit;
    const double eps = std::log(static_cast<double>(c.config().machine_space)) / std::log(static_cast<double>(std::max<std::size_t>(c.graph().n(), 2)));
    const std::size_t cap = static_cast<std::size_t>(std::ceil(cap_coeff / std::max(eps, 1e-9)));
    RandomTape tape(seed, c.graph().n(), 64);
    auto measure = [&] {
        EdgeLayout E(c);
        auto deg = E.compute_degrees();
        const std::size_t d = max_degree(E, deg);
        E.release_scratch();
        return d;
    };
    tr.max_degree_before = tr.max_degree_after = measure();
    while (tr.max_degree_after > limit && tr.calls < std::min(cap, tape.chunks())) {
        degree_reduction_step(c, dc, p, st, tape, tr.calls);
        ++tr.calls;
        tr.max_degree_after = measure();
    }
    tr.rounds = c.report().rounds_elapsed - r0;
    return tr;
}

}  // namespace mpcsim
