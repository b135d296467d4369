#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "mpcsim/graph/generators.hpp"
#include "mpcsim/symbreak/pipeline.hpp"

using namespace mpcsim;

namespace {

Cluster cluster_for(const Graph& g, double c_s = 16.0) { return init_cluster(make_config(g.n(), g.m(), 0.5, c_s, true), g); }

Graph star(std::size_t leaves) {
    std::vector<Edge> es;
    for (Vertex v = 1; v <= leaves; ++v) es.emplace_back(0, v);
    return Graph(leaves + 1, es);
}

Graph path(std::size_t n) {
    std::vector<Edge> es;
    for (Vertex v = 0; v + 1 < n; ++v) es.emplace_back(v, v + 1);
    return Graph(n, es);
}

Graph clique(std::size_t n) {
    std::vector<Edge> es;
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = u + 1; v < n; ++v) es.emplace_back(u, v);
    return Graph(n, es);
}

Graph forest(std::size_t n, std::size_t alpha, std::uint64_t seed) {
    GenParams p;
    p.n = n;
    p.alpha = alpha;
    return generate(Family::forest_union, p, seed);
}

// Keeps an edge only while both ends stay below the cap.
Graph capped(const Graph& g, std::size_t cap) {
    std::vector<std::size_t> d(g.n(), 0);
    std::vector<Edge> es;
    for (const Edge& e : g.edges())
        if (d[e.u] < cap && d[e.v] < cap) {
            ++d[e.u];
            ++d[e.v];
            es.push_back(e);
        }
    return Graph(g.n(), es);
}

// Independent checks straight from the definitions.
bool valid_mis(const Graph& g, const std::vector<Vertex>& I) {
    std::vector<char> in(g.n(), 0);
    for (Vertex v : I) in[v] = 1;
    for (const Edge& e : g.edges())
        if (in[e.u] && in[e.v]) return false;
    for (Vertex v = 0; v < g.n(); ++v) {
        if (in[v]) continue;
        bool dominated = false;
        for (Vertex u : g.neighbors(v)) dominated |= in[u] != 0;
        if (!dominated) return false;
    }
    return true;
}

bool valid_mm(const Graph& g, const std::vector<Edge>& M) {
    std::vector<char> used(g.n(), 0);
    for (const Edge& e : M) {
        if (!g.has_edge(e.u, e.v) || used[e.u] || used[e.v]) return false;
        used[e.u] = used[e.v] = 1;
    }
    for (const Edge& e : g.edges())
        if (!used[e.u] && !used[e.v]) return false;
    return true;
}

template <class R>
StateVector run_rule(const Graph& g, const R& rule, std::uint64_t r, std::uint64_t seed) {
    Cluster c = cluster_for(g, 64);
    return simulate_direct(c, rule, r, RandomTape(seed, g.n(), 4096));
}

std::vector<Vertex> with_status(const StateVector& sv, std::uint8_t code) {
    std::vector<Vertex> out;
    for (Vertex v = 0; v < sv.vertex.size(); ++v)
        if (status_of(sv.vertex[v]) == code) out.push_back(v);
    return out;
}

std::vector<Edge> matched_edges(const Graph& g, const StateVector& sv) {
    std::vector<Edge> out;
    for (std::size_t i = 0; i < g.m(); ++i)
        if (estate::flags(sv.edge[i]) & kMatchedEdge) out.push_back(g.edge(i));
    return out;
}

std::size_t measured_max_degree(Cluster& c) {
    EdgeLayout E(c);
    auto deg = E.compute_degrees();
    return *std::max_element(deg.begin(), deg.end());
}

}  // namespace

TEST(Luby, SingleVertexJoins) {
    Graph g(1, {});
    auto sv = run_rule(g, LubyRule{}, 5, 1);
    EXPECT_EQ(with_status(sv, status_code::in_mis), (std::vector<Vertex>{0}));
}

TEST(Luby, TriangleHasOneWinner) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto sv = run_rule(clique(3), LubyRule{}, 5, seed);
        EXPECT_EQ(with_status(sv, status_code::in_mis).size(), 1u);
        EXPECT_EQ(with_status(sv, status_code::removed).size(), 2u);
    }
}

TEST(Luby, PathOfThreeOverSeeds) {
    const Graph g = path(3);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto sv = run_rule(g, LubyRule{}, 5 * 8, seed);
        EXPECT_TRUE(valid_mis(g, with_status(sv, status_code::in_mis))) << seed;
    }
}

TEST(IsraeliItai, SingleEdgeOftenMatchedInOneCycle) {
    const Graph g = path(2);
    int hits = 0;
    const int trials = 400;
    for (int s = 1; s <= trials; ++s) hits += matched_edges(g, run_rule(g, IsraeliItaiRule{}, 5, s)).size() == 1;
    EXPECT_GE(hits * 4, trials);
}

TEST(IsraeliItai, EmptyGraph) {
    Graph g(5, {});
    EXPECT_TRUE(matched_edges(g, run_rule(g, IsraeliItaiRule{}, 10, 3)).empty());
}

TEST(IsraeliItai, PathOfFourFixpoint) {
    const Graph g = path(4);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto sv = run_rule(g, IsraeliItaiRule{}, 5 * 40, seed);
        auto M = matched_edges(g, sv);
        EXPECT_TRUE(valid_mm(g, M)) << seed;
        SolveState st(g);
        st.absorb(g, sv);
        for (Vertex v = 0; v < g.n(); ++v) {
            if (st.status[v] != VertexStatus::matched) continue;
            bool covered = false;
            for (const Edge& e : M) covered |= e.u == v || e.v == v;
            EXPECT_TRUE(covered);
        }
    }
}

TEST(IsraeliItai, HalvesEdgesPerIteration) {
    const Graph g = forest(2048, 2, 5);
    Cluster c = cluster_for(g, 64);
    SolveState st(g);
    StateVector sv = simulate_direct(c, IsraeliItaiRule{}, 5, RandomTape(9, g.n()));
    st.absorb(g, sv);
    std::size_t left = 0;
    for (const Edge& e : g.edges()) left += st.live(e.u) && st.live(e.v);
    EXPECT_LT(left, g.m() * 9 / 10);
}

TEST(QuietStop, SameOutcomeInFewerRounds) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const Graph g = forest(2000, 2, seed);
        const std::uint64_t r = 60 * 5;
        auto early = [&](auto rule) {
            Cluster c = cluster_for(g, 64);
            return simulate_direct(c, rule, r, RandomTape(seed, g.n(), 4096), std::nullopt, 20);
        };
        const auto lf = early(LubyRule{});
        const auto lfull = run_rule(g, LubyRule{}, r, seed);
        EXPECT_EQ(lf.vertex, lfull.vertex) << seed;
        EXPECT_LT(lf.round, r);
        const auto mf = early(IsraeliItaiRule{});
        const auto mfull = run_rule(g, IsraeliItaiRule{}, r, seed);
        EXPECT_EQ(mf.vertex, mfull.vertex) << seed;
        EXPECT_EQ(matched_edges(g, mf), matched_edges(g, mfull)) << seed;
        EXPECT_LT(mf.round, r);
    }
}

TEST(DegreeReduction, StarMatchingTrace) {
    // Delta 16: high from degree 4, exposed keeps two leaves, 1 and 2.
    const Graph g = star(16);
    Cluster c = cluster_for(g);
    SolveState st(g);
    auto tr = degree_reduction_step(c, 16, DegreeReductionParams::desk(Mode::mm), st, RandomTape(3, g.n(), 64), 0);
    EXPECT_EQ(tr.high, 1u);
    EXPECT_EQ(tr.exposed, 1u);
    EXPECT_EQ(tr.leaves, 2u);
    EXPECT_EQ(tr.good, 2u);
    EXPECT_EQ(st.status[0], VertexStatus::matched);
    EXPECT_EQ(st.status[1], VertexStatus::matched);
    EXPECT_EQ(st.result(g, Mode::mm).matching, (std::vector<Edge>{Edge(0, 1)}));
    for (Vertex v = 2; v <= 16; ++v) EXPECT_EQ(st.status[v], VertexStatus::active);
}

TEST(DegreeReduction, StarIndependentSetTrace) {
    const Graph g = star(16);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Cluster c = cluster_for(g);
        SolveState st(g);
        degree_reduction_step(c, 16, DegreeReductionParams::desk(Mode::mis), st, RandomTape(seed, g.n(), 64), 0);
        EXPECT_EQ(st.status[0], VertexStatus::removed);
        EXPECT_EQ(st.status[1], VertexStatus::in_mis);
        EXPECT_EQ(st.status[2], VertexStatus::in_mis);
        for (Vertex v = 3; v <= 16; ++v) EXPECT_EQ(st.status[v], VertexStatus::active);
    }
}

TEST(DegreeReduction, LowDegreesChangeNothing) {
    const Graph g = path(40);
    Cluster c = cluster_for(g);
    SolveState st(g);
    auto tr = degree_reduction_step(c, 16, DegreeReductionParams::desk(Mode::mis), st, RandomTape(1, g.n(), 64), 0);
    EXPECT_EQ(tr.high, 0u);
    EXPECT_EQ(tr.settled, 0u);
    EXPECT_EQ(st.live_count(), g.n());
}

// The aggregate path and the twelve-round rule are the same process.
TEST(DegreeReduction, AggregatePathMatchesRule) {
    int cases = 0;
    for (Mode mode : {Mode::mis, Mode::mm})
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            const Graph g = seed % 2 ? forest(600, 3, seed) : capped(generate(Family::gnm, {.n = 300, .m = 2400}, seed), 40);
            const auto p = DegreeReductionParams::desk(mode);
            SolveState a(g), b(g);
            const RandomTape tape(mix(seed, 77), g.n(), 64);
            Cluster ca = cluster_for(g, 64), cb = cluster_for(g, 64);
            std::size_t delta = measured_max_degree(ca);
            for (std::uint64_t call = 0; call < 3; ++call) {
                degree_reduction_step(ca, delta, p, a, tape, call);
                StateVector base = b.states(g);
                base.round = call * DegreeReductionRule::cycle;
                b.absorb(g, simulate_direct(cb, DegreeReductionRule(mode, delta, p), DegreeReductionRule::cycle, tape, base));
                {
                    EdgeLayout E(cb);
                    prune_settled(E, b);
                }
                ASSERT_EQ(a.status, b.status) << "seed " << seed << " call " << call;
                ASSERT_EQ(a.matched_edge, b.matched_edge);
                ++cases;
            }
        }
    EXPECT_EQ(cases, 24);
}

TEST(MarkDead, SmallDegreesAllDead) {
    const Graph g = path(10);
    Cluster c = cluster_for(g);
    SolveState st(g);
    EdgeLayout E(c);
    EXPECT_EQ(mark_dead(E, 16, st), 10u);
}

TEST(MarkDead, StarLeavesStayUntilHubLeaves) {
    const Graph g = star(20);
    Cluster c = cluster_for(g);
    SolveState st(g);
    EdgeLayout E(c);
    EXPECT_EQ(mark_dead(E, 16, st), 0u);
    st.status[0] = VertexStatus::removed;
    prune_settled(E, st);
    EXPECT_EQ(mark_dead(E, 16, st), 20u);
}

TEST(ReduceToSqrt, ForestUnionSucceeds) {
    const Graph g = forest(8192, 2, 3);
    for (SpaceMode sm : {SpaceMode::warmup, SpaceMode::optimized})
        for (Mode mode : {Mode::mis, Mode::mm}) {
            Cluster c = cluster_for(g, 32);
            SolveState st(g);
            const std::size_t delta = measured_max_degree(c);
            ReduceOptions o;
            o.space = sm;
            auto tr = reduce_to_sqrt(c, delta, DegreeReductionParams::desk(mode), st, o);
            EXPECT_TRUE(tr.success);
            EdgeLayout E(c);
            prune_settled(E, st);
            auto deg = E.compute_degrees();
            for (Vertex v = 0; v < g.n(); ++v)
                if (st.live(v)) {
                    EXPECT_LT(deg[v], ceil_sqrt(delta));
                }
        }
}

TEST(ReduceToSqrt, AlreadyLowTakesNoCalls) {
    const Graph g = path(50);
    Cluster c = cluster_for(g);
    SolveState st(g);
    auto tr = reduce_to_sqrt(c, 16, DegreeReductionParams::desk(Mode::mis), st);
    EXPECT_TRUE(tr.success);
    EXPECT_EQ(tr.calls, 0u);
}

TEST(ReduceToSqrt, CliqueCoreFails) {
    const Graph g = clique(64);
    Cluster c = cluster_for(g, 64);
    SolveState st(g);
    auto p = DegreeReductionParams::desk(Mode::mis);
    p.tau_override = 100;
    auto tr = reduce_to_sqrt(c, 63, p, st);
    EXPECT_FALSE(tr.success);
    EXPECT_EQ(tr.high.back(), 64u);
}

// Every vertex that started high is settled or has dropped below the
// threshold in what remains.
TEST(ReduceToSqrt, PostconditionOnHighVertices) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed)
        for (Mode mode : {Mode::mis, Mode::mm}) {
            const Graph g = forest(8192, 2, seed);
            Cluster c = cluster_for(g, 32);
            SolveState st(g);
            const std::size_t delta = measured_max_degree(c);
            const std::size_t h = ceil_sqrt(delta);
            ReduceOptions o;
            o.seed = seed;
            auto tr = reduce_to_sqrt(c, delta, DegreeReductionParams::desk(mode), st, o);
            ASSERT_TRUE(tr.success) << seed;
            for (Vertex v = 0; v < g.n(); ++v) {
                if (g.degree(v) < h) continue;
                std::size_t left = 0;
                bool near = false;
                for (Vertex u : g.neighbors(v)) {
                    left += st.live(u);
                    near |= st.status[u] == VertexStatus::in_mis;
                }
                if (mode == Mode::mm)
                    EXPECT_TRUE(st.status[v] == VertexStatus::matched || (st.live(v) && left < h)) << v;
                else
                    EXPECT_TRUE(st.status[v] == VertexStatus::in_mis || near || (st.live(v) && left < h)) << v;
            }
        }
}

TEST(Coarse, StarHubRemoved) {
    const Graph g = star(4095);
    Cluster c = cluster_for(g);
    SolveState st(g);
    auto tr = coarse_degree_reduction(c, DegreeReductionParams::desk(Mode::mis), st);
    EXPECT_NE(st.status[0], VertexStatus::active);
    EXPECT_LE(tr.max_degree_after, vertex_layout_degree_limit(c.config().machine_space));
    EXPECT_LE(tr.calls, 8u);
}

TEST(Coarse, SparseGraphUnchanged) {
    const Graph g = path(100);
    Cluster c = cluster_for(g);
    SolveState st(g);
    auto tr = coarse_degree_reduction(c, DegreeReductionParams::desk(Mode::mis), st);
    EXPECT_EQ(tr.calls, 0u);
    EXPECT_EQ(st.live_count(), g.n());
}

TEST(LowDegree, EmptyGraphAllJoin) {
    Graph g(7, {});
    Cluster c = cluster_for(g);
    SolveState st(g);
    solve_low_degree(c, DegreeReductionParams::desk(Mode::mis), st);
    EXPECT_EQ(st.result(g, Mode::mis).mis.size(), 7u);
}

TEST(LowDegree, SingleEdgeMatched) {
    const Graph g = path(2);
    Cluster c = cluster_for(g);
    SolveState st(g);
    solve_low_degree(c, DegreeReductionParams::desk(Mode::mm), st);
    EXPECT_EQ(st.result(g, Mode::mm).matching, (std::vector<Edge>{Edge(0, 1)}));
}

TEST(LowDegree, CappedForestUnion) {
    const Graph g = capped(forest(16384, 3, 2), 16);
    for (Mode mode : {Mode::mis, Mode::mm}) {
        Cluster c = cluster_for(g);
        SolveState st(g);
        auto tr = solve_low_degree(c, DegreeReductionParams::desk(mode), st);
        const Result r = st.result(g, mode);
        EXPECT_TRUE(mode == Mode::mis ? valid_mis(g, r.mis) : valid_mm(g, r.matching));
        EXPECT_TRUE(tr.above_gate);
        const double scale = std::log2(16.0) + std::log2(std::log2(16384.0));
        EXPECT_LE(static_cast<double>(tr.rounds), 64 * scale) << tr.rounds;
    }
}

TEST(LowDegree, FaithfulRefusesLargeDegree) {
    const Graph g = capped(forest(1024, 3, 2), 16);
    Cluster c = cluster_for(g);
    SolveState st(g);
    EXPECT_THROW(solve_low_degree(c, DegreeReductionParams::faithful(Mode::mis), st), ArgumentError);
}

TEST(Pipeline, EmptyGraph) {
    Graph g(0, {});
    Cluster c = init_cluster(make_config(1, 0, 0.5, 16, true), g);
    auto [r, rep] = run_pipeline(c, {});
    EXPECT_TRUE(r.mis.empty());
    EXPECT_TRUE(rep.phases.empty());
}

TEST(Pipeline, RandomTreeWarmup) {
    const Graph g = generate(Family::tree, {.n = 1u << 16}, 4);
    Cluster c = cluster_for(g);
    auto [r, rep] = run_pipeline(c, {});
    EXPECT_TRUE(valid_mis(g, r.mis));
    EXPECT_LE(rep.phases.size(), static_cast<std::size_t>(std::ceil(std::log2(16.0))) + 1);
}

TEST(Pipeline, ForcedPhasesValidInEveryMode) {
    for (Mode mode : {Mode::mis, Mode::mm})
        for (SpaceMode sm : {SpaceMode::warmup, SpaceMode::optimized}) {
            const Graph g = forest(4096, 4, 6);
            Cluster c = cluster_for(g, 32);
            PipelineOptions o{.mode = mode, .space = sm, .seed = 5, .tau_override = 4};
            auto [r, rep] = run_pipeline(c, o);
            EXPECT_FALSE(rep.phases.empty());
            EXPECT_TRUE(mode == Mode::mis ? valid_mis(g, r.mis) : valid_mm(g, r.matching));
            if (mode == Mode::mm) {
                EXPECT_EQ(r.vertex_cover.size(), 2 * r.matching.size());
            }
        }
}

TEST(Pipeline, OptimizedEqualsWarmup) {
    for (Mode mode : {Mode::mis, Mode::mm})
        for (std::uint64_t seed = 1; seed <= 2; ++seed) {
            const Graph g = forest(4096, 3, seed);
            Cluster cw = cluster_for(g, 32), co = cluster_for(g, 32);
            PipelineOptions o{.mode = mode, .seed = seed, .tau_override = 4};
            auto [rw, repw] = run_pipeline(cw, o);
            o.space = SpaceMode::optimized;
            auto [ro, repo] = run_pipeline(co, o);
            EXPECT_EQ(rw.mis, ro.mis);
            EXPECT_EQ(rw.matching, ro.matching);
            const double lg = std::log2(static_cast<double>(g.n()));
            EXPECT_LE(static_cast<double>(repo.meter.peak_total_space), 8 * static_cast<double>(g.m()) * lg * lg);
        }
}

TEST(Pipeline, DecayExponentPositive) {
    const Graph g = forest(8192, 4, 9);
    Cluster c = cluster_for(g, 32);
    auto [r, rep] = run_pipeline(c, {.tau_override = 4});
    ASSERT_FALSE(rep.delta_hat.empty());
    EXPECT_GT(*std::max_element(rep.delta_hat.begin(), rep.delta_hat.end()), 0.0);
}

TEST(VertexCover, Examples) {
    EXPECT_EQ(vertex_cover_from_mm(path(2), std::vector<Edge>{Edge(0, 1)}), (std::vector<Vertex>{0, 1}));
    EXPECT_TRUE(vertex_cover_from_mm(Graph(3, {}), std::vector<Edge>{}).empty());
    const Graph p4 = path(4);
    EXPECT_EQ(vertex_cover_from_mm(p4, std::vector<Edge>{Edge(0, 1), Edge(2, 3)}), (std::vector<Vertex>{0, 1, 2, 3}));
    EXPECT_THROW(vertex_cover_from_mm(p4, std::vector<Edge>{Edge(0, 1)}), ArgumentError);
    EXPECT_THROW(vertex_cover_from_mm(p4, std::vector<Edge>{Edge(0, 2)}), ArgumentError);
}
