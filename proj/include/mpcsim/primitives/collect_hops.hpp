#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "mpcsim/graph/hop_ball.hpp"
#include "mpcsim/primitives/vertex_layout.hpp"

namespace mpcsim {

namespace slots {
inline constexpr SlotId hop_sets = 20;
}

// Per-vertex edge sets held by a host machine. Each set costs one word for its
// owner plus two per edge.
struct GatheredSets final : Segment {
    std::vector<std::pair<Vertex, std::vector<Edge>>> sets;  // sorted by vertex

    [[nodiscard]] std::size_t words() const override {
        std::size_t w = 0;
        for (const auto& [v, es] : sets) w += 1 + 2 * es.size();
        return w;
    }

    std::vector<Edge>* find(Vertex v) {
        auto it = std::lower_bound(sets.begin(), sets.end(), v, [](const auto& p, Vertex x) { return p.first < x; });
        return it != sets.end() && it->first == v ? &it->second : nullptr;
    }
};

struct HopCollection {
    std::vector<Vertex> centers;
    std::vector<HopBall> balls;   // aligned with centers
    std::vector<char> complete;   // ball is the center's whole component
    std::vector<MachineId> host;  // host machine of every participant
    std::uint64_t setup_rounds = 0;
    std::uint64_t growth_rounds = 0;

    [[nodiscard]] const HopBall& ball(Vertex center) const {
        auto it = std::lower_bound(centers.begin(), centers.end(), center);
        if (it == centers.end() || *it != center) throw ArgumentError("no ball for vertex " + std::to_string(center));
        return balls[static_cast<std::size_t>(it - centers.begin())];
    }
};

namespace detail {

// BFS distances from `src` over an edge set, up to `limit`.
inline std::unordered_map<Vertex, std::size_t> distances(Vertex src, std::span<const Edge> es, std::size_t limit) {
    std::unordered_map<Vertex, std::vector<Vertex>> adj;
    for (const Edge& e : es) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    std::unordered_map<Vertex, std::size_t> dist{{src, 0}};
    std::deque<Vertex> q{src};
    while (!q.empty()) {
        const Vertex x = q.front();
        q.pop_front();
        const std::size_t d = dist[x];
        if (d == limit) continue;
        for (Vertex y : adj[x])
            if (dist.emplace(y, d + 1).second) q.push_back(y);
    }
    return dist;
}

inline std::size_t set_words(std::span<const Edge> es, Vertex self) {
    std::vector<Vertex> vs{self};
    for (const Edge& e : es) {
        vs.push_back(e.u);
        vs.push_back(e.v);
    }
    std::sort(vs.begin(), vs.end());
    return static_cast<std::size_t>(std::unique(vs.begin(), vs.end()) - vs.begin()) + 2 * es.size();
}

inline void merge_into(std::vector<Edge>& dst, std::span<const Edge> src) {
    const std::size_t mid = dst.size();
    dst.insert(dst.end(), src.begin(), src.end());
    std::inplace_merge(dst.begin(), dst.begin() + static_cast<std::ptrdiff_t>(mid), dst.end());
    dst.erase(std::unique(dst.begin(), dst.end()), dst.end());
}

}  // namespace detail

// Gathers the t-hop of every center by exponential growth. O_r(v) denotes the
// edges with an endpoint closer than r to v; O_1 is the adjacency, and
// O_2a(v) is the union of O_a(u) over u in B_a(v). Since u in B_a(v) iff v in
// B_a(u), each host pushes its set to the hosts of its own ball. A last step
// pushes only to centers within t+1-a, reaching O_{t+1}, whose restriction to
// B_t is the ball. Any center whose gathered set passes `budget` faults.
//
// `expected` is a per-vertex size estimate used only to place the sets.
inline HopCollection collect_hops(VertexLayout& V, std::span<const Vertex> centers_in, std::size_t t, std::size_t budget,
                                  std::size_t expected = 0, std::uint64_t seed = 0x40b5) {
    Cluster& c = V.cluster();
    const std::size_t n = V.n();
    const std::size_t S = c.config().machine_space;
    HopCollection out;
    out.centers.assign(centers_in.begin(), centers_in.end());
    std::sort(out.centers.begin(), out.centers.end());
    out.centers.erase(std::unique(out.centers.begin(), out.centers.end()), out.centers.end());
    std::vector<char> is_center(n, 0);
    for (Vertex v : out.centers) {
        if (v >= n || !V.included(v)) throw ArgumentError("center " + std::to_string(v) + " is not in the layout");
        is_center[v] = 1;
    }
    out.setup_rounds = V.setup_rounds();
    if (t == 0) {
        for (Vertex v : out.centers) {
            HopBall b;
            b.center = v;
            b.radius = 0;
            b.vertices = {v};
            out.balls.push_back(std::move(b));
            out.complete.push_back(V.degree(v) == 0);
        }
        return out;
    }

    // Placement of the gathered sets. A vertex pushes |B|*|O| words per step,
    // so its weight is the larger of its first-step traffic and the caller's
    // estimate, capped at S/2.
    const std::size_t hint = expected ? expected : budget;
    std::vector<double> w(n, 1.0);
    double total = 0;
    for (Vertex v = 0; v < n; ++v) {
        if (!V.included(v)) continue;
        const std::size_t d = V.degree(v);
        const std::size_t first = (d + 1) * (2 * d + 3);
        w[v] = static_cast<double>(std::clamp<std::size_t>(std::max(hint, first), 1, S / 2));
        total += w[v];
    }
    const std::size_t p = std::max<std::size_t>(c.machines(), static_cast<std::size_t>(4 * total / static_cast<double>(S)) + 1);
    c.provision(p);
    out.host = pack_partition(w, p, seed);
    const auto& host = out.host;

    auto sets_at = [&](MachineStore& s) -> GatheredSets& { return s.get<GatheredSets>(slots::hop_sets); };
    auto parse = [](std::span<const Word> msg, auto&& onset) {
        // [u, nt, targets..., ne, edges as word pairs...]
        std::size_t j = 0;
        std::vector<Vertex> tg;
        std::vector<Edge> es;
        while (j < msg.size()) {
            const Vertex u = static_cast<Vertex>(msg[j++]);
            const std::size_t nt = static_cast<std::size_t>(msg[j++]);
            tg.assign(msg.begin() + static_cast<std::ptrdiff_t>(j), msg.begin() + static_cast<std::ptrdiff_t>(j + nt));
            j += nt;
            const std::size_t ne = static_cast<std::size_t>(msg[j++]);
            es.clear();
            for (std::size_t i = 0; i < ne; ++i, j += 2)
                es.emplace_back(static_cast<Vertex>(msg[j]), static_cast<Vertex>(msg[j + 1]));
            onset(u, tg, es);
        }
    };
    auto pack = [](std::vector<Word>& buf, Vertex u, std::span<const Vertex> tg, std::span<const Edge> es) {
        buf.push_back(u);
        buf.push_back(tg.size());
        buf.insert(buf.end(), tg.begin(), tg.end());
        buf.push_back(es.size());
        for (const Edge& e : es) {
            buf.push_back(e.u);
            buf.push_back(e.v);
        }
    };
    auto check = [&](MachineId m) {
        // Smallest overflowing center on this machine, if any.
        std::optional<std::pair<Vertex, std::size_t>> bad;
        for (auto& [v, es] : sets_at(c.store(m)).sets) {
            if (!is_center[v]) continue;
            const std::size_t words = detail::set_words(es, v);
            if (words > budget && (!bad || v < bad->first)) bad = {v, words};
        }
        return bad;
    };

    // Setup: move O_1 from resp to host.
    const std::uint64_t r0 = c.report().rounds_elapsed;
    c.run_round([&](MachineId m, MachineStore&, const Inbox&, Outbox& o) {
        if (m >= V.machines()) return;
        std::unordered_map<MachineId, std::vector<Word>> buf;
        for (Vertex v : V.hosted(m)) {
            std::vector<Edge> es;
            for (Vertex u : V.neighbors(v)) es.emplace_back(v, u);
            std::sort(es.begin(), es.end());
            const Vertex tg[1] = {v};
            pack(buf[host[v]], v, tg, es);
        }
        std::vector<MachineId> dests;
        for (auto& [d, b] : buf) dests.push_back(d);
        std::sort(dests.begin(), dests.end());
        for (MachineId d : dests) o.send(d, buf[d]);
    });
    c.local([&](MachineId, MachineStore& s, const Inbox& in) {
        auto& gs = sets_at(s);
        gs.sets.clear();
        for (auto msg : in)
            parse(msg.words, [&](Vertex u, std::span<const Vertex>, std::span<const Edge> es) {
                gs.sets.emplace_back(u, std::vector<Edge>(es.begin(), es.end()));
            });
        std::sort(gs.sets.begin(), gs.sets.end());
    });
    out.setup_rounds += c.report().rounds_elapsed - r0;
    const std::uint64_t g0 = c.report().rounds_elapsed;

    auto fail_if_overflow = [&] {
        std::optional<std::pair<Vertex, std::size_t>> worst;
        for (MachineId m = 0; m < c.machines(); ++m)
            if (auto b = check(m); b && (!worst || b->first < worst->first)) worst = b;
        if (worst) {
            for (MachineId m = 0; m < c.machines(); ++m) c.store(m).erase(slots::hop_sets);
            throw BallOverflow(worst->first, budget, worst->second);
        }
    };
    fail_if_overflow();

    // One push round: every hosted u sends O_a(u) to the hosts of the targets
    // chosen by `targets(u, set)`, and receivers merge into fresh sets.
    auto push = [&](auto&& targets, bool keep_own) {
        c.run_round([&](MachineId, MachineStore& s, const Inbox&, Outbox& o) {
            auto* gs = s.find<GatheredSets>(slots::hop_sets);
            if (gs == nullptr) return;
            std::unordered_map<MachineId, std::vector<Word>> buf;
            std::unordered_map<MachineId, std::vector<Vertex>> tg;
            for (auto& [u, es] : gs->sets) {
                tg.clear();
                for (Vertex v : targets(u, es))
                    if (v != u) tg[host[v]].push_back(v);
                for (auto& [d, list] : tg) {
                    std::sort(list.begin(), list.end());
                    pack(buf[d], u, list, es);
                }
            }
            std::vector<MachineId> dests;
            for (auto& [d, b] : buf) dests.push_back(d);
            std::sort(dests.begin(), dests.end());
            for (MachineId d : dests) o.send(d, buf[d]);
        });
        c.local([&](MachineId, MachineStore& s, const Inbox& in) {
            auto* gs = s.find<GatheredSets>(slots::hop_sets);
            if (gs == nullptr && in.empty()) return;
            auto& sets = sets_at(s).sets;
            if (!keep_own)
                std::erase_if(sets, [&](const auto& p) { return !is_center[p.first]; });
            std::unordered_map<Vertex, std::vector<std::vector<Edge>>> incoming;
            for (auto msg : in)
                parse(msg.words, [&](Vertex, std::span<const Vertex> tgs, std::span<const Edge> es) {
                    for (Vertex v : tgs) incoming[v].emplace_back(es.begin(), es.end());
                });
            for (auto& [v, es] : sets) {
                auto it = incoming.find(v);
                if (it == incoming.end()) continue;
                for (auto& part : it->second) detail::merge_into(es, part);
            }
        });
    };

    std::size_t a = 1;
    while (2 * a < t + 1) {
        push([](Vertex u, std::span<const Edge> es) {
                 std::vector<Vertex> vs;
                 for (const Edge& e : es) {
                     vs.push_back(e.u);
                     vs.push_back(e.v);
                 }
                 (void)u;
                 std::sort(vs.begin(), vs.end());
                 vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
                 return vs;
             },
             true);
        a *= 2;
        fail_if_overflow();
    }
    if (a < t + 1) {
        const std::size_t r = t + 1 - a;
        push([&](Vertex u, std::span<const Edge> es) {
                 std::vector<Vertex> vs;
                 for (auto& [v, d] : detail::distances(u, es, r))
                     if (is_center[v]) vs.push_back(v);
                 std::sort(vs.begin(), vs.end());
                 return vs;
             },
             false);
    } else {
        for (MachineId m = 0; m < c.machines(); ++m)
            if (auto* gs = c.store(m).find<GatheredSets>(slots::hop_sets))
                std::erase_if(gs->sets, [&](const auto& pr) { return !is_center[pr.first]; });
    }
    out.growth_rounds = c.report().rounds_elapsed - g0;

    // Restrict O_{t+1} to B_t at each host.
    std::optional<std::pair<Vertex, std::size_t>> worst;
    out.balls.resize(out.centers.size());
    out.complete.resize(out.centers.size());
    for (MachineId m = 0; m < c.machines(); ++m) {
        auto* gs = c.store(m).find<GatheredSets>(slots::hop_sets);
        if (gs == nullptr) continue;
        for (auto& [v, es] : gs->sets) {
            const auto dist = detail::distances(v, es, t + 1);
            HopBall b;
            b.center = v;
            b.radius = t;
            bool whole = true;
            for (auto& [x, d] : dist) {
                if (d <= t)
                    b.vertices.push_back(x);
                else
                    whole = false;
            }
            std::sort(b.vertices.begin(), b.vertices.end());
            for (const Edge& e : es)
                if (b.contains(e.u) && b.contains(e.v)) b.edges.push_back(e);
            if (b.size() > budget && (!worst || v < worst->first)) worst = {v, b.size()};
            const std::size_t i = static_cast<std::size_t>(std::lower_bound(out.centers.begin(), out.centers.end(), v) - out.centers.begin());
            es = b.edges;
            out.complete[i] = whole;
            out.balls[i] = std::move(b);
        }
    }
    if (worst) {
        for (MachineId m = 0; m < c.machines(); ++m) c.store(m).erase(slots::hop_sets);
        throw BallOverflow(worst->first, budget, worst->second);
    }
    c.observe();
    return out;
}

// Releases the balls left at the hosts.
inline void release_hops(Cluster& c) {
    for (MachineId m = 0; m < c.machines(); ++m) c.store(m).erase(slots::hop_sets);
}

inline HopCollection collect_hops(Cluster& c, std::span<const Vertex> centers, std::size_t t, std::size_t budget) {
    EdgeLayout E(c);
    auto deg = E.compute_degrees();
    VertexLayout V(E, deg);
    auto res = collect_hops(V, centers, t, budget);
    release_hops(c);
    return res;
}

}  // namespace mpcsim
