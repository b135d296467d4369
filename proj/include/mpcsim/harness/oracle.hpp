#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mpcsim/graph/generators.hpp"
#include "mpcsim/graph/hop_ball.hpp"
#include "mpcsim/local/blind.hpp"
#include "mpcsim/primitives/collect_hops.hpp"
#include "mpcsim/symbreak/rules.hpp"

namespace mpcsim {

// Standard instance of a family at about n vertices: square-ish grids, two
// forests for forest_union unless alpha is given, and 2n edges for gnm.
inline Graph make_instance(Family f, std::size_t n, std::uint64_t seed, std::size_t alpha = 2) {
    GenParams p;
    p.n = n;
    p.alpha = alpha;
    if (f == Family::grid) {
        p.rows = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
        p.cols = std::max<std::size_t>(1, n / p.rows);
    }
    if (f == Family::gnm) p.m = std::min<std::size_t>(2 * n, n < 2 ? 0 : n * (n - 1) / 2);
    return generate(f, p, seed);
}

struct OracleTally {
    std::size_t cases = 0;
    std::size_t equal = 0;
    std::vector<std::string> mismatches;
    std::size_t zero_rounds = 0;     // r = 0
    std::size_t below_radius = 0;    // 0 < r < t
    std::size_t four_radii = 0;      // r = 4t

    [[nodiscard]] bool all_equal() const { return cases == equal; }
};

namespace detail {

inline std::size_t max_deg(const Graph& g) {
    std::size_t d = 0;
    for (Vertex v = 0; v < g.n(); ++v) d = std::max(d, g.degree(v));
    return d;
}

}  // namespace detail

// Compressed simulation against direct simulation, state for state. Cases
// cycle through four families, three rules and r in {0, t-1, t, 4t, random}.
// The radius is at least 2 so that the ball engine is the one under test.
inline OracleTally compression_oracle(std::size_t n, std::size_t trials, std::uint64_t seed, double c_s = 1024) {
    OracleTally tally;
    const Family fams[] = {Family::tree, Family::grid, Family::forest_union, Family::gnm};
    for (std::size_t i = 0; i < trials; ++i) {
        const std::uint64_t s = mix(seed, i);
        const Graph g = make_instance(fams[i % 4], n, s);
        const std::size_t delta = std::max<std::size_t>(detail::max_deg(g), 2);
        const auto cfg = make_config(g.n(), g.m(), 0.5, c_s, true);
        const std::size_t t = std::max<std::size_t>(blind_radius(delta, cfg.machine_space), 2 + i % 2);
        std::uint64_t r = 0;
        switch ((i / 4) % 5) {
            case 0: r = 0; break;
            case 1: r = t > 1 ? t - 1 : 1; break;
            case 2: r = t; break;
            case 3: r = 4 * t; break;
            default: r = 1 + s % (3 * t); break;
        }
        const RandomTape tape(s, g.n(), 256);
        auto compare = [&](const auto& rule, const char* name) {
            Cluster a = init_cluster(cfg, g), b = init_cluster(cfg, g);
            const StateVector x = simulate_direct(a, rule, r, tape);
            BlindOptions opt;
            opt.radius = t;
            const StateVector y = blind_run(b, rule, r, delta, tape, opt).states;
            ++tally.cases;
            tally.zero_rounds += r == 0;
            tally.below_radius += r > 0 && r < t;
            tally.four_radii += r == 4 * t;
            if (x == y)
                ++tally.equal;
            else
                tally.mismatches.push_back(std::string(name) + " on " + std::string(family_name(fams[i % 4])) + " seed " +
                                           std::to_string(s) + " r " + std::to_string(r));
        };
        switch (i % 3) {
            case 0: compare(LubyRule{}, "luby"); break;
            case 1: compare(IsraeliItaiRule{}, "israeli-itai"); break;
            default: compare(DegreeReductionRule(Mode::mis, delta, DegreeReductionParams::desk(Mode::mis)), "degree-reduction"); break;
        }
    }
    return tally;
}

// collect_hops against the sequential ball on every vertex, t in 1..4.
inline OracleTally hop_oracle(std::size_t n, std::size_t trials, std::uint64_t seed, double c_s = 1024) {
    OracleTally tally;
    const Family fams[] = {Family::tree, Family::grid, Family::forest_union, Family::gnm};
    for (std::size_t i = 0; i < trials; ++i) {
        const std::uint64_t s = mix(seed, i, 0x40b);
        const Graph g = make_instance(fams[i % 4], n, s);
        const std::size_t t = 1 + i % 4;
        Cluster c = init_cluster(make_config(g.n(), g.m(), 0.5, c_s, true), g);
        std::vector<Vertex> all(g.n());
        for (Vertex v = 0; v < g.n(); ++v) all[v] = v;
        ++tally.cases;
        try {
            const HopCollection hc = collect_hops(c, all, t, c.config().machine_space / 4);
            bool same = true;
            for (Vertex v = 0; v < g.n() && same; ++v) same = hc.ball(v) == t_hop(g, v, t);
            if (same)
                ++tally.equal;
            else
                tally.mismatches.push_back(std::string(family_name(fams[i % 4])) + " seed " + std::to_string(s) + " t " + std::to_string(t));
        } catch (const BallOverflow& e) {
            tally.mismatches.push_back(std::string("overflow: ") + e.what());
        }
    }
    return tally;
}

}  // namespace mpcsim
