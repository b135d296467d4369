#include <gtest/gtest.h>

#include <cmath>

#include "mpcsim/graph/generators.hpp"
#include "mpcsim/local/blind.hpp"

using namespace mpcsim;

namespace {

Cluster cluster_for(const Graph& g, double c_s = 16.0) { return init_cluster(make_config(g.n(), g.m(), 0.5, c_s, true), g); }

Graph cycle(std::size_t n) {
    std::vector<Edge> es;
    for (Vertex v = 0; v < n; ++v) es.emplace_back(v, static_cast<Vertex>((v + 1) % n));
    return Graph(n, es);
}

Graph path(std::size_t n) {
    std::vector<Edge> es;
    for (Vertex v = 0; v + 1 < n; ++v) es.emplace_back(v, v + 1);
    return Graph(n, es);
}

struct Identity {
    Wide vertex(Word s, std::span<const Word>, const TapeView&, std::uint64_t) const { return s; }
    Wide edge(Word, Word, Word e, std::uint64_t) const { return e; }
};

// Every bit depends on the whole neighborhood, the tape and the round, so
// any stale or missing input shows up.
struct Churn {
    Wide vertex(Word s, std::span<const Word> es, const TapeView& tape, std::uint64_t r) const {
        Word h = mix(s, r, tape.chunk(r % 4));
        for (Word e : es) h = mix(h, e);
        return vstate::make(vstate::id(s), static_cast<std::uint8_t>(h), static_cast<std::uint32_t>(h >> 8));
    }
    Wide edge(Word a, Word b, Word e, std::uint64_t r) const {
        return estate::with_flags(e, static_cast<std::uint16_t>(mix(a, b, e, r)));
    }
};

struct TooWide {
    Wide vertex(Word s, std::span<const Word>, const TapeView&, std::uint64_t) const { return Wide{s} << 64; }
    Wide edge(Word, Word, Word e, std::uint64_t) const { return e; }
};

struct Relabel {
    Wide vertex(Word s, std::span<const Word>, const TapeView&, std::uint64_t) const { return s + 1; }
    Wide edge(Word, Word, Word e, std::uint64_t) const { return e; }
};

static_assert(LocalRule<Identity> && LocalRule<Churn>);

// Sequential oracle written against the Graph directly.
template <class R>
StateVector oracle(const Graph& g, const R& rule, std::uint64_t r, const RandomTape& tape) {
    std::vector<Word> vs(g.n()), es(g.m());
    for (Vertex v = 0; v < g.n(); ++v) vs[v] = v;
    for (std::size_t i = 0; i < g.m(); ++i) es[i] = estate::make(g.edge(i).u, g.edge(i).v, 0);
    for (std::uint64_t k = 1; k <= r; ++k) {
        std::vector<Word> nv(g.n()), ne(g.m());
        for (Vertex v = 0; v < g.n(); ++v) {
            std::vector<Word> inc;
            for (Vertex u : g.neighbors(v)) inc.push_back(es[g.edge_index(u, v)]);
            nv[v] = static_cast<Word>(rule.vertex(vs[v], inc, TapeView(tape, v), k));
        }
        for (std::size_t i = 0; i < g.m(); ++i) ne[i] = static_cast<Word>(rule.edge(vs[g.edge(i).u], vs[g.edge(i).v], es[i], k));
        vs = nv;
        es = ne;
    }
    return StateVector{r, vs, es};
}

}  // namespace

TEST(State, EncodingRoundTrip) {
    const Word s = vstate::make(123456, 7, 0xdeadbeef);
    EXPECT_EQ(vstate::id(s), 123456u);
    EXPECT_EQ(vstate::tag(s), 7);
    EXPECT_EQ(vstate::payload(s), 0xdeadbeefu);
    const Word e = estate::make(5, 9, 0xabc);
    EXPECT_EQ(estate::lo(e), 5u);
    EXPECT_EQ(estate::hi(e), 9u);
    EXPECT_EQ(estate::flags(e), 0xabc);
    EXPECT_EQ(estate::other(e, 5), 9u);
}

TEST(State, InitialIsIds) {
    auto sv = StateVector::initial(path(4));
    EXPECT_EQ(sv.vertex, (std::vector<Word>{0, 1, 2, 3}));
    EXPECT_EQ(sv.edge[1], estate::make(1, 2, 0));
    EXPECT_EQ(sv.round, 0u);
}

TEST(Tape, LengthAndDeterminism) {
    RandomTape t(9, 1024);
    EXPECT_EQ(t.bits(), 16u * 10 * 10);
    EXPECT_LE(t.bits(), 16u * 100);
    RandomTape u(9, 1024);
    for (std::size_t k = 0; k < t.chunks(); ++k) EXPECT_EQ(t.chunk(17, k), u.chunk(17, k));
    EXPECT_NE(t.chunk(17, 0), t.chunk(18, 0));
    EXPECT_THROW((void)t.chunk(0, t.chunks()), ArgumentError);
}

TEST(SimulateDirect, ZeroRoundsIsInitial) {
    Graph g = path(5);
    Cluster c = cluster_for(g);
    EXPECT_EQ(simulate_direct(c, Churn{}, 0, RandomTape(1, 5)), StateVector::initial(g));
}

TEST(SimulateDirect, IdentityKeepsStates) {
    Graph g = generate(Family::gnm, {.n = 60, .m = 120}, 3);
    Cluster c = cluster_for(g);
    auto sv = simulate_direct(c, Identity{}, 7, RandomTape(1, 60));
    auto init = StateVector::initial(g);
    EXPECT_EQ(sv.vertex, init.vertex);
    EXPECT_EQ(sv.edge, init.edge);
    EXPECT_EQ(sv.round, 7u);
}

TEST(SimulateDirect, OneMpcRoundPerLocalRound) {
    Graph g = generate(Family::forest_union, {.n = 200, .alpha = 2}, 5);
    Cluster c = cluster_for(g);
    EdgeLayout E(c);
    auto deg = E.compute_degrees();
    VertexLayout V(E, deg);
    auto sv = StateVector::initial(g);
    const auto r0 = c.report().rounds_elapsed;
    DirectEngine(V).run(Churn{}, RandomTape(2, g.n()), sv, 9);
    EXPECT_EQ(c.report().rounds_elapsed - r0, 9u);
}

TEST(SimulateDirect, MatchesSequentialOracle) {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        Graph g = seed % 3 == 0   ? generate(Family::tree, {.n = 80}, seed)
                  : seed % 3 == 1 ? generate(Family::gnm, {.n = 70, .m = 150}, seed)
                                  : generate(Family::forest_union, {.n = 90, .alpha = 3}, seed);
        Cluster c = cluster_for(g, 64.0);
        RandomTape tape(seed * 7 + 1, g.n());
        const std::uint64_t r = 1 + seed % 6;
        EXPECT_EQ(simulate_direct(c, Churn{}, r, tape), oracle(g, Churn{}, r, tape)) << "seed " << seed;
    }
}

TEST(SimulateDirect, BaseStatesContinue) {
    Graph g = generate(Family::gnm, {.n = 50, .m = 90}, 8);
    Cluster c = cluster_for(g, 64.0);
    RandomTape tape(4, g.n());
    auto mid = simulate_direct(c, Churn{}, 3, tape);
    EXPECT_EQ(simulate_direct(c, Churn{}, 4, tape, mid), oracle(g, Churn{}, 7, tape));
}

TEST(SimulateDirect, RuleViolations) {
    Graph g = path(3);
    Cluster c = cluster_for(g);
    EXPECT_THROW((void)simulate_direct(c, TooWide{}, 1, RandomTape(1, 3)), RuleViolation);
    Cluster c2 = cluster_for(g);
    EXPECT_THROW((void)simulate_direct(c2, Relabel{}, 1, RandomTape(1, 3)), RuleViolation);
}

TEST(LocalReplay, ZeroRoundsIsBase) {
    Graph g = cycle(10);
    HopBall b = t_hop(g, 4, 2);
    auto base = BallStates::initial(b);
    auto res = local_replay(b, base, RandomTape(1, 10), Churn{}, 0);
    EXPECT_EQ(res.center, 4u);
    EXPECT_EQ(res.edges.size(), 2u);
}

TEST(LocalReplay, RejectsTooManyRounds) {
    Graph g = cycle(10);
    HopBall b = t_hop(g, 4, 2);
    EXPECT_THROW((void)local_replay(b, BallStates::initial(b), RandomTape(1, 10), Churn{}, 3), ArgumentError);
}

TEST(LocalReplay, WholeGraphBallMatchesOracle) {
    Graph g = generate(Family::tree, {.n = 30}, 2);
    RandomTape tape(5, g.n());
    HopBall b = t_hop(g, 0, 40);
    ASSERT_EQ(b.vertices.size(), g.n());
    for (std::size_t i = 0; i <= 8; ++i) {
        auto want = oracle(g, Churn{}, i, tape);
        auto got = local_replay(b, BallStates::initial(b), tape, Churn{}, i);
        EXPECT_EQ(got.center, want.vertex[0]) << i;
        for (auto& [e, s] : got.edges) EXPECT_EQ(s, want.edge[g.edge_index(e.u, e.v)]);
    }
}

TEST(LocalReplay, PureOnIdenticalInputs) {
    Graph g = cycle(12);
    RandomTape tape(3, g.n());
    HopBall a = t_hop(g, 5, 3), b = t_hop(g, 5, 3);
    auto x = local_replay(a, BallStates::initial(a), tape, Churn{}, 3);
    auto y = local_replay(b, BallStates::initial(b), tape, Churn{}, 3);
    EXPECT_EQ(x.center, y.center);
    EXPECT_EQ(x.edges, y.edges);
}

// Any ball, any base round, any i up to the radius.
TEST(LocalReplay, SoundnessSweep) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Stream rng(seed);
        Graph g = generate(Family::gnm, {.n = 40, .m = 60 + seed * 3}, seed);
        RandomTape tape(seed, g.n());
        const std::size_t radius = 1 + rng.below(4);
        const std::uint64_t beta = rng.below(4);
        const Vertex v = static_cast<Vertex>(rng.below(g.n()));
        HopBall b = t_hop(g, v, radius);
        const auto base = BallStates::from(b, g, oracle(g, Churn{}, beta, tape));
        for (std::size_t i = 0; i <= radius; ++i) {
            auto want = oracle(g, Churn{}, beta + i, tape);
            auto got = local_replay(b, base, tape, Churn{}, i, beta);
            EXPECT_EQ(got.center, want.vertex[v]) << "seed " << seed << " i " << i;
            if (i < radius) {
                for (auto& [e, s] : got.edges) EXPECT_EQ(s, want.edge[g.edge_index(e.u, e.v)]);
            }
        }
    }
}

TEST(BlindRadius, Formula) {
    EXPECT_EQ(blind_radius(1, 100), 64u);
    EXPECT_EQ(blind_radius(2, 64), 2u);
    EXPECT_EQ(blind_radius(2, 63), 1u);
    EXPECT_EQ(blind_radius(10, 1000), 1u);
    EXPECT_EQ(blind_radius(3, 729), 2u);
    EXPECT_EQ(blind_radius(1000, 16), 1u);
}

TEST(BlindCoordinate, ZeroRounds) {
    Graph g = cycle(16);
    Cluster c = cluster_for(g);
    EXPECT_EQ(blind_coordinate(c, Churn{}, 0, 2, RandomTape(1, 16)), StateVector::initial(g));
}

TEST(BlindCoordinate, ShortRunHasNoRefreshEpochs) {
    Graph g = cycle(64);
    Cluster c = cluster_for(g, 64.0);
    RandomTape tape(11, g.n());
    auto res = blind_run(c, Churn{}, 2, 2, tape);
    ASSERT_GT(res.t, 2u);
    EXPECT_FALSE(res.direct);
    EXPECT_EQ(res.stats.epochs, 1u);
    Cluster d = cluster_for(g, 64.0);
    EXPECT_EQ(res.states, simulate_direct(d, Churn{}, 2, tape));
}

TEST(BlindCoordinate, SmallRadiusDelegates) {
    Graph g = generate(Family::gnm, {.n = 64, .m = 200}, 1);
    Cluster c = cluster_for(g, 64.0);
    RandomTape tape(2, g.n());
    auto res = blind_run(c, Churn{}, 5, g.max_degree(), tape);
    EXPECT_TRUE(res.direct);
    EXPECT_EQ(res.states, oracle(g, Churn{}, 5, tape));
}

// Compression soundness over graphs, seeds, radii and round counts.
TEST(BlindCoordinate, MatchesDirectSweep) {
    for (std::uint64_t seed = 0; seed < 24; ++seed) {
        Stream rng(seed + 100);
        Graph g = seed % 4 == 0   ? cycle(40 + seed)
                  : seed % 4 == 1 ? path(30 + seed)
                  : seed % 4 == 2 ? generate(Family::tree, {.n = 60}, seed)
                                  : generate(Family::forest_union, {.n = 60, .alpha = 2}, seed);
        const std::size_t t = 2 + rng.below(3);
        const std::uint64_t r = rng.below(4 * t + 2);
        RandomTape tape(seed, g.n());
        Cluster c = cluster_for(g, 256.0);
        BlindOptions opt;
        opt.radius = t;
        auto res = blind_run(c, Churn{}, r, g.max_degree(), tape, opt);
        EXPECT_EQ(res.states, oracle(g, Churn{}, r, tape)) << "seed " << seed << " t " << t << " r " << r;
        if (r > 0) {
            const std::uint64_t epochs = (r + t - 1) / t;
            EXPECT_EQ(res.stats.epochs, std::max<std::uint64_t>(1, epochs));
        }
    }
}

TEST(BlindCoordinate, BaseAndPartialLayout) {
    Graph g = generate(Family::tree, {.n = 50}, 4);
    RandomTape tape(6, g.n());
    std::vector<char> keep(g.n(), 1);
    for (Vertex v = 0; v < g.n(); v += 5) keep[v] = 0;
    Cluster c = cluster_for(g, 256.0);
    auto base = simulate_direct(c, Churn{}, 2, tape);
    BlindOptions opt;
    opt.radius = 3;
    opt.base = base;
    opt.include = keep;
    auto got = blind_run(c, Churn{}, 7, 3, tape, opt).states;
    Cluster d = cluster_for(g, 256.0);
    EdgeLayout E(d);
    auto deg = E.compute_degrees();
    VertexLayout V(E, deg, keep);
    auto want = base;
    DirectEngine(V).run(Churn{}, tape, want, 7);
    EXPECT_EQ(got, want);
    EXPECT_EQ(got.round, 9u);
}

TEST(BlindCoordinate, FourEpochsOnForestUnion) {
    Graph g = generate(Family::forest_union, {.n = 4096, .alpha = 2}, 42);
    Cluster c = cluster_for(g, 256.0);
    RandomTape tape(42, g.n());
    const std::size_t t = 3;
    BlindOptions opt;
    opt.radius = t;
    auto res = blind_run(c, Churn{}, 4 * t, 4, tape, opt);
    Cluster d = cluster_for(g, 256.0);
    EXPECT_EQ(res.states, simulate_direct(d, Churn{}, 4 * t, tape));
    // Refresh costs two rounds per epoch plus one; gathering is logarithmic in t.
    EXPECT_EQ(res.stats.epochs, 4u);
    EXPECT_LE(res.stats.refresh_rounds, 2u * 4 + 1);
    EXPECT_LE(res.rounds, 2u * 4 + 2 * static_cast<std::uint64_t>(std::ceil(std::log2(t + 1))) + 2 * ceil_log2(c.machines()) + 8);
}

TEST(BlindCoordinate, OverflowWhenDegreeBoundIsWrong) {
    std::vector<Edge> es;
    for (Vertex v = 1; v < 60; ++v) es.emplace_back(0, v);
    for (Vertex v = 1; v + 1 < 60; ++v) es.emplace_back(v, v + 1);
    Graph g(60, es);
    Cluster c = cluster_for(g, 512.0);
    BlindOptions opt;
    opt.budget = 64;
    EXPECT_THROW((void)blind_run(c, Identity{}, 6, 1, RandomTape(1, 60), opt), BallOverflow);
}

// Warm-up space: peak total words stay within c * (m + n^(1 + 2eps/3)), c = 8.
TEST(BlindCoordinate, TotalSpaceBound) {
    for (std::size_t n : {1024u, 4096u}) {
        Graph g = cycle(n);
        Cluster c = cluster_for(g);
        RandomTape tape(1, n);
        auto res = blind_run(c, Churn{}, 12, 2, tape);
        ASSERT_GE(res.t, 2u);
        const double bound = 8.0 * (static_cast<double>(g.m()) + std::pow(static_cast<double>(n), 1.0 + 1.0 / 3.0));
        EXPECT_LE(static_cast<double>(c.report().peak_total_space), bound) << "n " << n;
        Cluster d = cluster_for(g);
        EXPECT_EQ(res.states, simulate_direct(d, Churn{}, 12, tape));
    }
}

// Rounds: 2 per epoch, plus gathering in about log(t+1), plus setup.
TEST(BlindCoordinate, RoundBudget) {
    Graph g = cycle(4096);
    for (std::uint64_t r : {3u, 10u, 30u}) {
        Cluster c = cluster_for(g);
        auto res = blind_run(c, Churn{}, r, 2, RandomTape(r, g.n()));
        const std::uint64_t epochs = (r + res.t - 1) / res.t;
        EXPECT_EQ(res.stats.refresh_rounds, 2 * epochs + 1);
        EXPECT_LE(res.stats.collect_rounds, ceil_log2(res.t + 1) + 2 * ceil_log2(c.machines()) + 4);
        EXPECT_LE(res.rounds, 2 * epochs + ceil_log2(res.t + 1) + 4 * ceil_log2(c.machines()) + 8);
    }
}
