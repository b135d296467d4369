#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "mpcsim/graph/generators.hpp"
#include "mpcsim/primitives/edge_layout.hpp"

using namespace mpcsim;

namespace {

Cluster cluster_for(const Graph& g, double c_s = 16.0) {
    return init_cluster(make_config(g.n(), g.m(), 0.5, c_s, true), g);
}

// A cluster with many small machines so the reduce trees get several levels.
Cluster deep_cluster(const Graph& g, std::size_t S) {
    ClusterConfig cfg;
    cfg.n = g.n();
    cfg.machine_space = S;
    cfg.machine_count = std::max<std::size_t>(1, 64 * (2 * g.m() + g.n()) / S + 1);
    cfg.total_space_budget = cfg.machine_count * S;
    return init_cluster(cfg, g);
}

std::vector<Word> ids(std::size_t n) {
    std::vector<Word> x(n);
    std::iota(x.begin(), x.end(), Word{0});
    return x;
}

template <class F>
std::vector<typename F::value_type> fold_oracle(const Graph& g, std::span<const Word> x, const F& f) {
    std::vector<typename F::value_type> out;
    for (Vertex v = 0; v < g.n(); ++v) {
        std::vector<Word> nb;
        for (Vertex u : g.neighbors(v)) nb.push_back(x[u]);
        out.push_back(fold(f, nb.begin(), nb.end()));
    }
    return out;
}

}  // namespace

TEST(BalancedPartition, SinglePartition) {
    std::vector<double> w{1, 2, 3, 4};
    LoadBalanceParams lb{.p = 1, .sigma = 0.5, .n = 100};
    auto part = balanced_partition(w, lb);
    auto load = partition_loads(w, part, 1);
    EXPECT_EQ(load[0], 10.0);
}

TEST(BalancedPartition, SingleHeavyItem) {
    LoadBalanceParams lb{.p = 8, .sigma = 0.5, .n = 100, .seed = 3};
    std::vector<double> w{9.0};
    auto load = partition_loads(w, balanced_partition(w, lb), 8);
    EXPECT_EQ(std::count_if(load.begin(), load.end(), [](double x) { return x > 0; }), 1);
    EXPECT_EQ(*std::max_element(load.begin(), load.end()), 9.0);
}

TEST(BalancedPartition, RejectsOutOfRange) {
    LoadBalanceParams lb{.p = 4, .sigma = 0.5, .n = 16};
    std::vector<double> hi{5.0}, lo{0.5};
    EXPECT_THROW(balanced_partition(hi, lb), ArgumentError);
    EXPECT_THROW(balanced_partition(lo, lb), ArgumentError);
    lb.p = 0;
    std::vector<double> ok{1.0};
    EXPECT_THROW(balanced_partition(ok, lb), ArgumentError);
}

TEST(BalancedPartition, UnitWeightsOverSeeds) {
    std::vector<double> w(1024, 1.0);
    double worst = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        LoadBalanceParams lb{.p = 16, .sigma = 0.5, .n = 1024, .seed = seed};
        auto load = partition_loads(w, balanced_partition(w, lb), 16);
        worst = std::max(worst, *std::max_element(load.begin(), load.end()));
        ASSERT_LE(worst, lb.load_bound(1024.0));
    }
    EXPECT_GE(worst, 64.0);
}

TEST(PackPartition, DeterministicBound) {
    Stream rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> w(200 + rng.below(300));
        for (auto& x : w) x = 1.0 + static_cast<double>(rng.below(40));
        const std::size_t p = 1 + rng.below(30);
        auto part = pack_partition(w, p, trial);
        std::vector<double> load(p, 0.0);
        for (std::size_t i = 0; i < w.size(); ++i) load[part[i]] += w[i];
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        const double mx = *std::max_element(w.begin(), w.end());
        EXPECT_LE(*std::max_element(load.begin(), load.end()), total / static_cast<double>(p) + mx);
    }
}

TEST(Separable, RandomSplitsAgree) {
    Stream rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Word> a(rng.below(40));
        for (auto& x : a) x = rng.below(100);
        const std::size_t cut = a.empty() ? 0 : rng.below(a.size() + 1);
        auto check = [&](const auto& f) {
            auto whole = fold(f, a.begin(), a.end());
            auto split = f.combine(fold(f, a.begin(), a.begin() + cut), fold(f, a.begin() + cut, a.end()));
            EXPECT_EQ(whole, split);
            auto swapped = f.combine(fold(f, a.begin() + cut, a.end()), fold(f, a.begin(), a.begin() + cut));
            EXPECT_EQ(whole, swapped);
        };
        check(MinFn{});
        check(MaxFn{});
        check(SumFn{});
        check(OrFn{});
        check(KSmallestFn{.k = 1 + rng.below(6)});
    }
}

TEST(Separable, KSmallestEncoding) {
    KSmallestFn f{.k = 3};
    auto v = fold(f, std::begin({9ull, 2ull, 7ull, 2ull, 5ull}), std::end({9ull, 2ull, 7ull, 2ull, 5ull}));
    EXPECT_EQ(v, (std::vector<Word>{2, 5, 7}));
    std::vector<Word> buf;
    f.put(buf, v);
    const Word* p = buf.data();
    EXPECT_EQ(f.get(p), v);
    EXPECT_EQ(p, buf.data() + buf.size());
}

TEST(Aggregate, TriangleMin) {
    Graph g(3, {{0, 1}, {1, 2}, {0, 2}});
    Cluster c = cluster_for(g);
    auto x = ids(3);
    auto r = aggregate_neighbors(c, x, MinFn{});
    EXPECT_EQ(r[2], 0u);
    EXPECT_EQ(r[0], 1u);
}

TEST(Aggregate, StarMaxAtCenter) {
    Graph g = Graph(7, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {0, 6}});
    Cluster c = cluster_for(g);
    auto x = ids(7);
    EXPECT_EQ(aggregate_neighbors(c, x, MaxFn{})[0], 6u);
}

TEST(Aggregate, IsolatedGetsIdentity) {
    Graph g(4, {{0, 1}});
    Cluster c = cluster_for(g);
    auto x = ids(4);
    auto r = aggregate_neighbors(c, x, MinFn{});
    EXPECT_EQ(r[3], MinFn{}.identity());
    EXPECT_EQ(r[1], 0u);
}

TEST(ComputeDegrees, Examples) {
    Graph p3(3, {{0, 1}, {1, 2}});
    Cluster c = cluster_for(p3);
    EXPECT_EQ(compute_degrees(c), (std::vector<Word>{1, 2, 1}));
    Cluster e = cluster_for(Graph(5, {}));
    EXPECT_EQ(compute_degrees(e), std::vector<Word>(5, 0));
}

TEST(ComputeDegrees, ForestUnionMatchesAdjacency) {
    Graph g = generate(Family::forest_union, {.n = 200, .alpha = 2}, 9);
    Cluster c = deep_cluster(g, 48);
    EdgeLayout lay(c);
    ASSERT_GE(lay.levels(), 2u);
    auto d = lay.compute_degrees();
    for (Vertex v = 0; v < g.n(); ++v) EXPECT_EQ(d[v], g.degree(v));
    EXPECT_EQ(c.report().rounds_elapsed, lay.levels());
}

TEST(Aggregate, MatchesSequentialFoldExhaustively) {
    // Every vertex of every graph up to 200 vertices, several layouts.
    Stream rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + rng.below(199);
        const auto fam = static_cast<Family>(rng.below(4));
        GenParams gp{.n = n, .rows = 1 + n / 8, .cols = 8, .alpha = 1 + rng.below(3), .m = std::min<std::size_t>(2 * n, n * (n - 1) / 2)};
        Graph g = generate(fam, gp, trial);
        const std::size_t S = 40 + rng.below(100);
        Cluster c = deep_cluster(g, S);
        EdgeLayout lay(c, 4);
        std::vector<Word> x(g.n());
        for (auto& w : x) w = rng.below(1000);
        const auto before = c.report().rounds_elapsed;
        lay.compute_degrees();
        EXPECT_EQ(lay.aggregate(x, MinFn{}), fold_oracle(g, x, MinFn{}));
        EXPECT_EQ(lay.aggregate(x, SumFn{}), fold_oracle(g, x, SumFn{}));
        EXPECT_EQ(lay.aggregate(x, OrFn{}), fold_oracle(g, x, OrFn{}));
        EXPECT_EQ(lay.aggregate(x, KSmallestFn{.k = 3}), fold_oracle(g, x, KSmallestFn{.k = 3}));
        // Degrees plus four aggregates, 2L rounds each.
        EXPECT_EQ(c.report().rounds_elapsed - before, 9 * lay.levels());
    }
}

TEST(Aggregate, EdgeAwareLift) {
    Graph g = generate(Family::gnm, {.n = 120, .m = 300}, 4);
    Cluster c = deep_cluster(g, 40);
    EdgeLayout lay(c);
    auto x = ids(g.n());
    // Count neighbors with a larger ID.
    auto r = lay.aggregate(x, SumFn{}, [](Word xu, Vertex, Word xv, Vertex) -> Word { return xu > xv ? 1 : 0; });
    for (Vertex v = 0; v < g.n(); ++v) {
        Word want = 0;
        for (Vertex u : g.neighbors(v)) want += u > v;
        EXPECT_EQ(r[v], want);
    }
}

TEST(Aggregate, RoundsWithinBudget) {
    for (std::size_t logn : {8u, 12u, 14u}) {
        Graph g = generate(Family::forest_union, {.n = std::size_t{1} << logn, .alpha = 2}, logn);
        Cluster c = cluster_for(g);
        EdgeLayout lay(c);
        lay.compute_degrees();
        const auto before = c.report().rounds_elapsed;
        lay.aggregate(ids(g.n()), MinFn{});
        // ceil(c/eps) with c = 3 at eps = 1/2.
        EXPECT_LE(c.report().rounds_elapsed - before, 6u);
    }
}

TEST(EdgeLayout, AllreduceAndPrune) {
    Graph g = generate(Family::gnm, {.n = 150, .m = 400}, 2);
    Cluster c = deep_cluster(g, 32);
    EdgeLayout lay(c);
    auto d = lay.compute_degrees();
    EXPECT_EQ(lay.allreduce(d, MaxFn{}), g.max_degree());
    EXPECT_EQ(lay.allreduce(d, SumFn{}), 2 * g.m());
    std::vector<Word> gone(g.n(), 0);
    for (Vertex v = 0; v < g.n(); v += 3) gone[v] = 1;
    std::size_t want = 0;
    for (const Edge& e : g.edges()) want += gone[e.u] || gone[e.v];
    EXPECT_EQ(lay.prune(gone), want);
    auto d2 = lay.compute_degrees();
    std::vector<char> keep(g.n());
    for (Vertex v = 0; v < g.n(); ++v) keep[v] = !gone[v];
    Graph h = g.induced(keep);
    for (Vertex v = 0; v < g.n(); ++v) EXPECT_EQ(d2[v], h.degree(v));
}

#include "mpcsim/primitives/collect_hops.hpp"

namespace {
Graph path(std::size_t n) {
    std::vector<Edge> es;
    for (Vertex i = 0; i + 1 < n; ++i) es.emplace_back(i, i + 1);
    return Graph(n, es);
}
std::vector<Vertex> all_vertices(std::size_t n) {
    std::vector<Vertex> v(n);
    std::iota(v.begin(), v.end(), Vertex{0});
    return v;
}
}  // namespace

TEST(CollectHops, PathRadiusTwo) {
    Graph g = path(9);
    Cluster c = cluster_for(g);
    auto res = collect_hops(c, all_vertices(9), 2, 64);
    for (Vertex v = 0; v < 9; ++v) EXPECT_EQ(res.ball(v), t_hop(g, v, 2)) << v;
    EXPECT_EQ(res.growth_rounds, 2u);
}

TEST(CollectHops, RadiusOneIsOneRound) {
    Graph g = generate(Family::gnm, {.n = 50, .m = 80}, 3);
    Cluster c = cluster_for(g, 64.0);
    auto res = collect_hops(c, all_vertices(50), 1, 1000);
    EXPECT_EQ(res.growth_rounds, 1u);
    for (Vertex v = 0; v < 50; ++v) EXPECT_EQ(res.ball(v), t_hop(g, v, 1));
}

TEST(CollectHops, RadiusZero) {
    Graph g = path(4);
    Cluster c = cluster_for(g);
    auto res = collect_hops(c, all_vertices(4), 0, 10);
    EXPECT_EQ(res.growth_rounds, 0u);
    EXPECT_EQ(res.ball(2), t_hop(g, 2, 0));
}

TEST(CollectHops, StarOverflowNamesHub) {
    std::vector<Edge> es;
    for (Vertex i = 1; i <= 40; ++i) es.emplace_back(0, i);
    Graph g(41, es);
    Cluster c = cluster_for(g, 128.0);
    const Vertex hub[] = {0};
    try {
        collect_hops(c, hub, 1, 40);
        FAIL();
    } catch (const BallOverflow& f) {
        EXPECT_EQ(f.center(), 0u);
        EXPECT_EQ(f.budget(), 40u);
    }
}

TEST(CollectHops, CompletenessFlag) {
    // Two components: a path of 3 and a path of 6.
    Graph g(9, {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}});
    Cluster c = cluster_for(g);
    auto res = collect_hops(c, all_vertices(9), 2, 100);
    EXPECT_TRUE(res.complete[0]);
    EXPECT_TRUE(res.complete[1]);
    EXPECT_FALSE(res.complete[3]);
    EXPECT_FALSE(res.complete[5]);
}

TEST(CollectHops, MatchesOracleSweep) {
    Stream rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 20 + rng.below(150);
        const auto fam = static_cast<Family>(rng.below(4));
        GenParams gp{.n = n, .rows = 2 + n / 12, .cols = 6, .alpha = 1 + rng.below(2), .m = n + rng.below(n)};
        Graph g = generate(fam, gp, trial);
        const std::size_t t = 1 + rng.below(4);
        // Machines large enough for a whole ball squared.
        ClusterConfig cfg = make_config(g.n(), g.m(), 0.5, 16.0, true);
        cfg.machine_space = std::max<std::size_t>(cfg.machine_space, 4 * std::pow(3 * g.n() + 2 * g.m(), 2));
        cfg.total_space_budget = cfg.machine_count * cfg.machine_space;
        Cluster c = init_cluster(cfg, g);
        std::vector<Vertex> centers;
        for (Vertex v = 0; v < g.n(); ++v)
            if (rng.below(3) == 0) centers.push_back(v);
        const std::size_t budget = g.n() + 2 * g.m();
        auto res = collect_hops(c, centers, t, budget);
        for (Vertex v : centers) ASSERT_EQ(res.ball(v), t_hop(g, v, t)) << "trial " << trial << " v " << v;
        // ceil(log2(t+1)) growth rounds.
        EXPECT_EQ(res.growth_rounds, ceil_log2(t + 1));
    }
}
