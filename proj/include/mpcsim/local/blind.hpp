#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mpcsim/local/direct.hpp"
#include "mpcsim/local/replay.hpp"
#include "mpcsim/primitives/collect_hops.hpp"

namespace mpcsim {

namespace slots {
inline constexpr SlotId ball_states = 31;
inline constexpr SlotId subscribers = 32;
inline constexpr SlotId published_states = 33;
}  // namespace slots

inline constexpr Vertex kNoOwner = std::numeric_limits<Vertex>::max();

// State copies of every ball on a host.
struct BallCopies final : Segment {
    std::vector<BallStates> balls;
    [[nodiscard]] std::size_t words() const override {
        std::size_t w = 0;
        for (const auto& b : balls) w += b.vertex.size() + b.edge.size();
        return w;
    }
};

// Hosts subscribed to each published vertex.
struct Subscriptions final : Segment {
    std::vector<std::pair<Vertex, std::vector<MachineId>>> subs;
    [[nodiscard]] std::size_t words() const override {
        std::size_t w = 0;
        for (const auto& [x, h] : subs) w += 1 + h.size();
        return w;
    }
};

// Which balls to gather and who answers for each vertex. A vertex owned by
// center c is read off c's ball after each epoch, so it must sit within
// radius - replay of c.
struct BallPlan {
    std::vector<Vertex> centers;
    std::vector<Vertex> owner;  // per vertex; kNoOwner for vertices outside the layout
    std::size_t radius = 1;
    std::size_t replay = 1;    // LOCAL rounds per epoch
    std::size_t budget = 0;    // ball budget in words; 0 means S/4
    std::size_t expected = 0;  // placement hint for collect_hops
};

struct BallRunStats {
    std::uint64_t rounds = 0;
    std::uint64_t collect_rounds = 0;
    std::uint64_t refresh_rounds = 0;
    std::uint64_t epochs = 0;
    std::size_t largest_ball = 0;
};

// Balls gathered once and replayed in epochs. Between epochs the owners send
// fresh states to the publisher of each vertex, which forwards them to every
// host that subscribed to it. States rest at the publishers between calls.
class BallSession {
  public:
    BallSession(VertexLayout& V, const BallPlan& plan, const StateVector& sv)
        : V_(V), c_(V.cluster()), plan_(plan), round_(sv.round) {
        if (plan.replay == 0 || plan.replay > plan.radius) throw ArgumentError("replay length must lie in [1, radius]");
        const std::size_t n = V.n();
        const std::uint64_t r0 = c_.report().rounds_elapsed;
        const std::size_t S = c_.config().machine_space;
        const std::size_t budget = plan.budget ? plan.budget : S / 4;

        coll_ = collect_hops(V, plan.centers, plan.radius, budget, plan.expected);
        st_.collect_rounds = c_.report().rounds_elapsed - r0;
        const std::size_t nb = coll_.balls.size();
        sims_.reserve(nb);
        for (const auto& b : coll_.balls) {
            sims_.emplace_back(b);
            st_.largest_ball = std::max(st_.largest_ball, b.size());
        }

        // Owned vertices of every ball.
        owned_.assign(nb, {});
        for (Vertex x = 0; x < n; ++x) {
            if (!V.included(x)) continue;
            const Vertex oc = plan.owner.empty() ? x : plan.owner[x];
            auto it = std::lower_bound(coll_.centers.begin(), coll_.centers.end(), oc);
            if (oc == kNoOwner || it == coll_.centers.end() || *it != oc)
                throw ArgumentError("vertex " + std::to_string(x) + " has no owning center");
            owned_[static_cast<std::size_t>(it - coll_.centers.begin())].push_back(x);
        }
        for (std::size_t b = 0; b < nb; ++b) {
            if (owned_[b].empty()) continue;
            const auto dist = detail::distances(coll_.centers[b], coll_.balls[b].edges, plan.radius);
            for (Vertex x : owned_[b]) {
                auto d = dist.find(x);
                if (d == dist.end() || d->second + plan.replay > plan.radius)
                    throw ArgumentError("vertex " + std::to_string(x) + " is too far from its owner " +
                                        std::to_string(coll_.centers[b]));
            }
        }

        const std::size_t H = c_.machines();
        on_host_.assign(H, {});
        for (std::size_t b = 0; b < nb; ++b) on_host_[coll_.host[coll_.centers[b]]].push_back(b);
        members_.assign(H, {});
        for (MachineId m = 0; m < H; ++m)
            for (std::size_t b : on_host_[m])
                for (std::size_t i = 0; i < coll_.balls[b].vertices.size(); ++i)
                    members_[m][coll_.balls[b].vertices[i]].emplace_back(b, i);

        // Publisher of every vertex, weighted by its state words and the
        // number of hosts that subscribe to it.
        std::vector<double> w(n, 1.0);
        for (MachineId m = 0; m < H; ++m)
            for (auto& [x, _] : members_[m]) w[x] += 1;
        double total = 0;
        for (Vertex x = 0; x < n; ++x) {
            if (V.included(x))
                for (Vertex y : V.neighbors(x)) w[x] += y > x ? 1 : 0;
            w[x] = std::min(w[x], static_cast<double>(S) / 2);
            total += w[x];
        }
        c_.provision(std::max<std::size_t>(c_.machines(), static_cast<std::size_t>(4 * total / static_cast<double>(S)) + 1));
        const std::size_t M = c_.machines();
        pub_ = pack_partition(w, M, 0x9b1);
        on_host_.resize(M);
        members_.resize(M);

        detail::load_states(V, sv);
        c_.local([&](MachineId m, MachineStore& s, const Inbox&) {
            if (on_host_[m].empty()) return;
            auto& bc = s.get<BallCopies>(slots::ball_states);
            bc.balls.clear();
            for (std::size_t b : on_host_[m]) {
                BallStates z;
                z.vertex.assign(coll_.balls[b].vertices.size(), 0);
                z.edge.assign(coll_.balls[b].edges.size(), 0);
                bc.balls.push_back(std::move(z));
            }
        });
        const std::uint64_t f0 = c_.report().rounds_elapsed;
        publish();
        st_.refresh_rounds += c_.report().rounds_elapsed - f0;
        st_.rounds = c_.report().rounds_elapsed - r0;
    }

    BallSession(const BallSession&) = delete;
    BallSession& operator=(const BallSession&) = delete;

    ~BallSession() {
        for (MachineId m = 0; m < c_.machines(); ++m) {
            c_.store(m).erase(slots::ball_states);
            c_.store(m).erase(slots::subscribers);
            c_.store(m).erase(slots::published_states);
            c_.store(m).erase(slots::hosted_states);
        }
        release_hops(c_);
    }

    [[nodiscard]] const BallRunStats& stats() const { return st_; }
    [[nodiscard]] const HopCollection& balls() const { return coll_; }
    [[nodiscard]] std::uint64_t round() const { return round_; }

    // Runs `rounds` more LOCAL rounds: two MPC rounds per epoch.
    template <LocalRule R>
    void advance(const R& rule, const RandomTape& tape, std::uint64_t rounds) {
        const std::uint64_t r0 = c_.report().rounds_elapsed;
        std::uint64_t done = 0;
        while (done < rounds) {
            push();
            const std::uint64_t len = std::min<std::uint64_t>(plan_.replay, rounds - done);
            c_.local([&](MachineId m, MachineStore&, const Inbox&) {
                for (std::size_t b : on_host_[m]) sims_[b].run(rule, tape, copy_of(m, b), round_ + done, len);
            });
            done += len;
            ++st_.epochs;
            writeback();
        }
        round_ += rounds;
        st_.refresh_rounds += c_.report().rounds_elapsed - r0;
        st_.rounds += c_.report().rounds_elapsed - r0;
    }

    // Reads the published states into `sv`.
    void extract(StateVector& sv) const {
        const Graph& g = c_.graph();
        for (MachineId m = 0; m < c_.machines(); ++m) {
            const auto* ps = c_.store(m).find<HostedStates>(slots::published_states);
            if (ps == nullptr) continue;
            for (std::size_t i = 0; i < ps->vs.size(); ++i) {
                sv.vertex[ps->vs[i]] = ps->vstate[i];
                for (std::size_t k = ps->eoff[i]; k < ps->eoff[i + 1]; ++k)
                    sv.edge[g.edge_index(ps->vs[i], ps->upper[k])] = ps->estate[k];
            }
        }
        sv.round = round_;
    }

  private:
    BallStates& copy_of(MachineId m, std::size_t b) {
        auto& bc = c_.store(m).get<BallCopies>(slots::ball_states);
        const auto& hb = on_host_[m];
        return bc.balls[static_cast<std::size_t>(std::lower_bound(hb.begin(), hb.end(), b) - hb.begin())];
    }

    // Record: [s(x), k, k lower-edge states].
    static void put_record(Batcher& bt, MachineId to, Word s, std::span<const Word> es, std::optional<Word> kind = {}) {
        std::vector<Word> rec;
        if (kind) rec.push_back(*kind);
        rec.push_back(s);
        rec.push_back(es.size());
        rec.insert(rec.end(), es.begin(), es.end());
        bt.put(to, rec);
    }
    template <class F>
    static void each_record(std::span<const Word> w, F&& f) {
        for (std::size_t j = 0; j < w.size();) {
            const std::size_t k = static_cast<std::size_t>(w[j + 1]);
            f(w[j], w.subspan(j + 2, k));
            j += 2 + k;
        }
    }

    // One round: hosts subscribe to their members at the publishers, and
    // resp hands every state to its publisher.
    void publish() {
        c_.run_round([&](MachineId m, MachineStore& s, const Inbox&, Outbox& out) {
            Batcher bt;
            if (!members_[m].empty()) {
                std::vector<Vertex> xs;
                for (auto& [x, _] : members_[m]) xs.push_back(x);
                std::sort(xs.begin(), xs.end());
                for (Vertex x : xs) bt.put(pub_[x], {Word{0}, Word{x}});
            }
            if (auto* hs = s.find<HostedStates>(slots::hosted_states))
                for (std::size_t i = 0; i < hs->vs.size(); ++i) {
                    std::span<const Word> es(hs->estate.data() + hs->eoff[i], hs->eoff[i + 1] - hs->eoff[i]);
                    put_record(bt, pub_[hs->vs[i]], hs->vstate[i], es, Word{1});
                }
            s.erase(slots::hosted_states);
            bt.flush(out);
        });
        c_.local([&](MachineId, MachineStore& s, const Inbox& in) {
            if (in.empty()) return;
            std::vector<std::pair<Vertex, MachineId>> subs;
            std::vector<std::pair<Vertex, std::vector<Word>>> recs;
            for (auto msg : in)
                for (std::size_t j = 0; j < msg.words.size();) {
                    if (msg.words[j] == 0) {
                        subs.emplace_back(static_cast<Vertex>(msg.words[j + 1]), msg.from);
                        j += 2;
                    } else {
                        const std::size_t k = static_cast<std::size_t>(msg.words[j + 2]);
                        recs.emplace_back(vstate::id(msg.words[j + 1]),
                                          std::vector<Word>(msg.words.begin() + static_cast<std::ptrdiff_t>(j + 1),
                                                            msg.words.begin() + static_cast<std::ptrdiff_t>(j + 3 + k)));
                        j += 3 + k;
                    }
                }
            std::sort(subs.begin(), subs.end());
            auto& sub = s.get<Subscriptions>(slots::subscribers).subs;
            sub.clear();
            for (auto [x, h] : subs) {
                if (sub.empty() || sub.back().first != x) sub.emplace_back(x, std::vector<MachineId>{});
                sub.back().second.push_back(h);
            }
            std::sort(recs.begin(), recs.end());
            auto& ps = s.get<HostedStates>(slots::published_states);
            for (auto& [x, r] : recs) {
                ps.vs.push_back(x);
                ps.vstate.push_back(r[0]);
                for (std::size_t k = 2; k < r.size(); ++k) {
                    ps.upper.push_back(estate::hi(r[k]));
                    ps.estate.push_back(r[k]);
                }
                ps.eoff.push_back(ps.upper.size());
            }
        });
    }

    void push() {
        c_.run_round([&](MachineId, MachineStore& s, const Inbox&, Outbox& out) {
            auto* sub = s.find<Subscriptions>(slots::subscribers);
            auto* ps = s.find<HostedStates>(slots::published_states);
            if (sub == nullptr || ps == nullptr) return;
            Batcher bt;
            for (auto& [x, hosts] : sub->subs) {
                const std::size_t i = *ps->index(x);
                std::span<const Word> es(ps->estate.data() + ps->eoff[i], ps->eoff[i + 1] - ps->eoff[i]);
                for (MachineId h : hosts) put_record(bt, h, ps->vstate[i], es);
            }
            bt.flush(out);
        });
        c_.local([&](MachineId m, MachineStore&, const Inbox& in) {
            for (auto msg : in)
                each_record(msg.words, [&](Word s, std::span<const Word> es) {
                    auto it = members_[m].find(vstate::id(s));
                    if (it == members_[m].end()) return;
                    for (auto [b, i] : it->second) {
                        auto& z = copy_of(m, b);
                        z.vertex[i] = s;
                        for (Word e : es)
                            if (std::size_t j = sims_[b].edge_index(estate::lo(e), estate::hi(e)); j < z.edge.size()) z.edge[j] = e;
                    }
                });
        });
    }

    // Owners report fresh states to the publishers.
    void writeback() {
        c_.run_round([&](MachineId m, MachineStore&, const Inbox&, Outbox& out) {
            if (on_host_[m].empty()) return;
            Batcher bt;
            std::vector<Word> es;
            for (std::size_t b : on_host_[m]) {
                const auto& z = copy_of(m, b);
                for (Vertex x : owned_[b]) {
                    es.clear();
                    for (Vertex y : V_.neighbors(x))
                        if (y > x) es.push_back(z.edge[sims_[b].edge_index(x, y)]);
                    put_record(bt, pub_[x], z.vertex[sims_[b].index(x)], es);
                }
            }
            bt.flush(out);
        });
        c_.local([&](MachineId, MachineStore& s, const Inbox& in) {
            auto* hs = s.find<HostedStates>(slots::published_states);
            if (hs == nullptr) return;
            for (auto msg : in)
                each_record(msg.words, [&](Word sx, std::span<const Word> es) {
                    const std::size_t i = *hs->index(vstate::id(sx));
                    hs->vstate[i] = sx;
                    for (Word e : es) hs->estate[hs->edge_at(i, estate::hi(e))] = e;
                });
        });
    }

    VertexLayout& V_;
    Cluster& c_;
    BallPlan plan_;
    std::uint64_t round_;
    HopCollection coll_;
    std::vector<BallSim> sims_;
    std::vector<std::vector<Vertex>> owned_;
    std::vector<std::vector<std::size_t>> on_host_;
    std::vector<std::unordered_map<Vertex, std::vector<std::pair<std::size_t, std::size_t>>>> members_;
    std::vector<MachineId> pub_;
    BallRunStats st_;
};

template <LocalRule R>
BallRunStats run_balls(VertexLayout& V, const BallPlan& plan, const R& rule, const RandomTape& tape, StateVector& sv,
                       std::uint64_t rounds) {
    if (rounds == 0) return {};
    BallSession session(V, plan, sv);
    session.advance(rule, tape, rounds);
    session.extract(sv);
    return session.stats();
}

// Largest t with delta^(3t) <= S, at least 1. Bounded-degree inputs with
// delta <= 1 get 64.
inline std::size_t blind_radius(std::size_t delta, std::size_t S) {
    if (delta <= 1) return 64;
    std::size_t t = 0;
    long double p = 1;
    const long double d3 = static_cast<long double>(delta) * delta * delta;
    while (p * d3 <= static_cast<long double>(S)) {
        p *= d3;
        ++t;
    }
    return std::max<std::size_t>(1, t);
}

struct BlindOptions {
    std::optional<std::size_t> radius;  // overrides blind_radius
    std::optional<StateVector> base;
    std::vector<char> include;  // empty: every vertex
    std::size_t budget = 0;
};

struct BlindResult {
    StateVector states;
    std::size_t t = 0;
    bool direct = false;  // t <= 1 ran the direct engine
    BallRunStats stats;
    std::uint64_t rounds = 0;
};

template <LocalRule R>
BlindResult blind_run(Cluster& c, const R& rule, std::uint64_t r, std::size_t delta, const RandomTape& tape,
                      BlindOptions opt = {}) {
    BlindResult res;
    res.states = opt.base ? std::move(*opt.base) : StateVector::initial(c.graph());
    res.t = opt.radius ? *opt.radius : blind_radius(delta, c.config().machine_space);
    if (r == 0) return res;
    const std::uint64_t r0 = c.report().rounds_elapsed;
    EdgeLayout E(c);
    const auto deg = E.compute_degrees();
    VertexLayout V(E, deg, opt.include);
    if (res.t <= 1) {
        res.direct = true;
        DirectEngine(V).run(rule, tape, res.states, r);
    } else {
        BallPlan plan;
        for (Vertex v = 0; v < V.n(); ++v)
            if (V.included(v)) plan.centers.push_back(v);
        plan.radius = static_cast<std::size_t>(std::min<std::uint64_t>(res.t, r));
        plan.replay = plan.radius;
        plan.budget = opt.budget;
        res.stats = run_balls(V, plan, rule, tape, res.states, r);
    }
    E.release_scratch();
    res.rounds = c.report().rounds_elapsed - r0;
    return res;
}

template <LocalRule R>
StateVector blind_coordinate(Cluster& c, const R& rule, std::uint64_t r, std::size_t delta, const RandomTape& tape) {
    return blind_run(c, rule, r, delta, tape).states;
}

}  // namespace mpcsim
