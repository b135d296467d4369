#pragma once

#include <algorithm>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mpcsim/local/state.hpp"
#include "mpcsim/primitives/vertex_layout.hpp"

namespace mpcsim {

namespace slots {
inline constexpr SlotId hosted_states = 30;
}

// States kept at resp(v): one word per hosted vertex and one per edge whose
// lower endpoint it hosts. IDs live inside the states.
struct HostedStates final : Segment {
    std::vector<Vertex> vs;            // hosted vertices, sorted
    std::vector<Word> vstate;          // aligned with vs
    std::vector<std::size_t> eoff{0};  // lower edges of vs[i] at [eoff[i], eoff[i+1])
    std::vector<Vertex> upper;         // other endpoint of each lower edge
    std::vector<Word> estate;

    [[nodiscard]] std::size_t words() const override { return vstate.size() + estate.size(); }

    [[nodiscard]] std::optional<std::size_t> index(Vertex v) const {
        auto it = std::lower_bound(vs.begin(), vs.end(), v);
        if (it == vs.end() || *it != v) return std::nullopt;
        return static_cast<std::size_t>(it - vs.begin());
    }
    // Position of the lower edge (x, y) of hosted index i.
    [[nodiscard]] std::size_t edge_at(std::size_t i, Vertex y) const {
        auto b = upper.begin() + static_cast<std::ptrdiff_t>(eoff[i]);
        auto e = upper.begin() + static_cast<std::ptrdiff_t>(eoff[i + 1]);
        return static_cast<std::size_t>(std::lower_bound(b, e, y) - upper.begin());
    }
};

namespace detail {

// Places the driver-held states at the resp machines of V. No communication:
// states the driver holds are treated as resident at resp.
inline void load_states(VertexLayout& V, const StateVector& sv) {
    Cluster& c = V.cluster();
    const Graph& g = c.graph();
    for (MachineId m = 0; m < V.machines(); ++m) {
        auto& hs = c.store(m).get<HostedStates>(slots::hosted_states);
        hs.vs.assign(V.hosted(m).begin(), V.hosted(m).end());
        hs.vstate.clear();
        hs.eoff.assign(1, 0);
        hs.upper.clear();
        hs.estate.clear();
        for (Vertex v : hs.vs) {
            hs.vstate.push_back(sv.vertex[v]);
            for (Vertex y : V.neighbors(v))
                if (y > v) {
                    hs.upper.push_back(y);
                    hs.estate.push_back(sv.edge[g.edge_index(v, y)]);
                }
            hs.eoff.push_back(hs.upper.size());
        }
    }
    c.observe();
}

inline void store_states(VertexLayout& V, StateVector& sv) {
    Cluster& c = V.cluster();
    const Graph& g = c.graph();
    for (MachineId m = 0; m < V.machines(); ++m) {
        auto* hs = c.store(m).find<HostedStates>(slots::hosted_states);
        if (hs == nullptr) continue;
        for (std::size_t i = 0; i < hs->vs.size(); ++i) {
            sv.vertex[hs->vs[i]] = hs->vstate[i];
            for (std::size_t k = hs->eoff[i]; k < hs->eoff[i + 1]; ++k) sv.edge[g.edge_index(hs->vs[i], hs->upper[k])] = hs->estate[k];
        }
        c.store(m).erase(slots::hosted_states);
    }
}

}  // namespace detail

// A rule that can report, from one machine's hosted states, whether anything
// may still change. Checked only after rounds r with r = quiet_phase mod cycle.
template <class R>
concept QuietRule = LocalRule<R> && requires(std::span<const Word> ws) {
    { R::busy(ws, ws) } -> std::convertible_to<bool>;
    { R::quiet_phase } -> std::convertible_to<std::uint64_t>;
};

namespace detail {

// OR of one flag per machine, reduced up a tree of fan-in S/4 and broadcast
// back down.
inline bool any_machine(Cluster& c, std::span<const char> flags) {
    const std::size_t M = c.machines();
    const std::size_t k = std::max<std::size_t>(2, c.config().machine_space / 4);
    std::vector<char> acc(flags.begin(), flags.end());
    acc.resize(M, 0);
    std::size_t span = 1;
    while (span < M) {
        const std::size_t up = span * k;
        c.run_round([&](MachineId m, MachineStore&, const Inbox&, Outbox& out) {
            if (m % span == 0 && m % up != 0) {
                const Word w = acc[m];
                out.send(static_cast<MachineId>(m / up * up), std::span<const Word>(&w, 1));
            }
        });
        c.local([&](MachineId m, MachineStore&, const Inbox& in) {
            for (auto msg : in) acc[m] |= static_cast<char>(msg.words[0] != 0);
        });
        span = up;
    }
    while (span > 1) {
        const std::size_t down = span / k;
        c.run_round([&](MachineId m, MachineStore&, const Inbox&, Outbox& out) {
            if (m % span != 0) return;
            const Word w = acc[m];
            for (std::size_t ch = m + down; ch < std::min(M, m + span); ch += down)
                out.send(static_cast<MachineId>(ch), std::span<const Word>(&w, 1));
        });
        c.local([&](MachineId m, MachineStore&, const Inbox& in) {
            for (auto msg : in) acc[m] = static_cast<char>(msg.words[0] != 0);
        });
        span = down;
    }
    return acc[0] != 0;
}

}  // namespace detail

// Round-by-round simulation over a vertex layout. Each LOCAL round is one
// exchange: s(y) travels to resp(x) for every edge x < y, and the state of
// edge (x, y) travels from resp(x) to resp(y). Routing never changes between
// rounds, so every machine works from a plan fixed at the start of a run.
class DirectEngine {
  public:
    explicit DirectEngine(VertexLayout& V) : V_(V) {}

    // Runs `rounds` rounds, or fewer when the rule can tell it has gone quiet:
    // with check_every > 0, every check_every rounds (offset by the rule's
    // quiet phase) the machines OR their busy flags up a tree and stop if
    // none is set. Returns the rounds simulated.
    template <LocalRule R>
    std::uint64_t run(const R& rule, const RandomTape& tape, StateVector& sv, std::uint64_t rounds, std::uint64_t check_every = 0) {
        if (rounds == 0) return 0;
        Cluster& c = V_.cluster();
        detail::load_states(V_, sv);
        plan();
        const std::uint64_t base = sv.round;
        bool pending = false;
        std::uint64_t done = 0;
        for (std::uint64_t i = 1; i <= rounds; ++i) {
            c.run_round([&](MachineId m, MachineStore& s, const Inbox& in, Outbox& out) {
                auto* hs = s.find<HostedStates>(slots::hosted_states);
                if (hs == nullptr) return;
                if (pending) apply(m, *hs, in, rule, tape, base + i - 1);
                send(m, *hs, out);
            });
            pending = true;
            done = i;
            if constexpr (QuietRule<R>) {
                if (check_every == 0 || i == rounds || i < R::quiet_phase || (i - R::quiet_phase) % check_every != 0) continue;
                std::vector<char> busy(c.machines(), 0);
                c.local([&](MachineId m, MachineStore& s, const Inbox& in) {
                    auto* hs = s.find<HostedStates>(slots::hosted_states);
                    if (hs == nullptr) return;
                    apply(m, *hs, in, rule, tape, base + i);
                    busy[m] = R::busy(hs->vstate, hs->estate) ? 1 : 0;
                });
                pending = false;
                if (!detail::any_machine(c, busy)) break;
            }
        }
        if (pending)
            c.local([&](MachineId m, MachineStore& s, const Inbox& in) {
                if (auto* hs = s.find<HostedStates>(slots::hosted_states)) apply(m, *hs, in, rule, tape, base + done);
            });
        detail::store_states(V_, sv);
        plans_.clear();
        sv.round += done;
        return done;
    }

  private:
    static constexpr std::uint32_t kRemote = 1u << 31;

    struct Plan {
        struct Out {
            MachineId to;
            std::vector<std::uint32_t> v, e;  // hosted vertex and lower-edge positions
        };
        struct In {
            MachineId from;
            std::uint32_t vbase, ebase;
        };
        std::vector<Out> out;  // by destination
        std::vector<In> in;    // by sender
        std::size_t rv = 0, re = 0;
        std::vector<std::uint32_t> inc_off, inc;  // incident edge sources per hosted vertex
        std::vector<std::uint32_t> up;            // upper-endpoint state source per lower edge
    };

    void plan() {
        Cluster& c = V_.cluster();
        const std::size_t M = c.machines();
        plans_.assign(M, {});
        std::vector<std::unordered_map<MachineId, std::size_t>> slot_of(M);
        std::vector<MachineId> dests;
        for (MachineId m = 0; m < M; ++m) {
            const auto* hs = c.store(m).find<HostedStates>(slots::hosted_states);
            if (hs == nullptr) continue;
            auto& outs = plans_[m].out;
            auto at = [&](MachineId d) -> Plan::Out& {
                auto [it, fresh] = slot_of[m].try_emplace(d, outs.size());
                if (fresh) outs.push_back({d, {}, {}});
                return outs[it->second];
            };
            for (std::size_t i = 0; i < hs->vs.size(); ++i) {
                const Vertex y = hs->vs[i];
                dests.clear();
                for (Vertex x : V_.neighbors(y)) {
                    if (x >= y) break;
                    if (V_.resp(x) != m) dests.push_back(V_.resp(x));
                }
                std::sort(dests.begin(), dests.end());
                dests.erase(std::unique(dests.begin(), dests.end()), dests.end());
                for (MachineId d : dests) at(d).v.push_back(static_cast<std::uint32_t>(i));
                for (std::size_t k = hs->eoff[i]; k < hs->eoff[i + 1]; ++k)
                    if (MachineId d = V_.resp(hs->upper[k]); d != m) at(d).e.push_back(static_cast<std::uint32_t>(k));
            }
            std::sort(outs.begin(), outs.end(), [](const auto& a, const auto& b) { return a.to < b.to; });
        }
        // Receiving side: slots in sender order, then lookups for the rule.
        std::vector<std::unordered_map<Vertex, std::uint32_t>> rv(M);
        std::vector<std::unordered_map<Word, std::uint32_t>> re(M);
        for (MachineId s = 0; s < M; ++s) {
            const auto* hs = c.store(s).find<HostedStates>(slots::hosted_states);
            for (const auto& o : plans_[s].out) {
                Plan& p = plans_[o.to];
                p.in.push_back({s, static_cast<std::uint32_t>(p.rv), static_cast<std::uint32_t>(p.re)});
                for (std::uint32_t i : o.v) rv[o.to].emplace(hs->vs[i], static_cast<std::uint32_t>(p.rv++));
                for (std::uint32_t k : o.e) re[o.to].emplace(hs->estate[k] & estate::ids_mask, static_cast<std::uint32_t>(p.re++));
            }
        }
        for (MachineId m = 0; m < M; ++m) {
            const auto* hs = c.store(m).find<HostedStates>(slots::hosted_states);
            if (hs == nullptr) continue;
            Plan& p = plans_[m];
            p.inc_off.assign(1, 0);
            for (std::size_t i = 0; i < hs->vs.size(); ++i) {
                const Vertex v = hs->vs[i];
                for (Vertex y : V_.neighbors(v)) {
                    if (y > v) {
                        p.inc.push_back(static_cast<std::uint32_t>(hs->edge_at(i, y)));
                    } else if (V_.resp(y) == m) {
                        p.inc.push_back(static_cast<std::uint32_t>(hs->edge_at(*hs->index(y), v)));
                    } else {
                        p.inc.push_back(kRemote | re[m].at(estate::make(y, v, 0)));
                    }
                }
                p.inc_off.push_back(static_cast<std::uint32_t>(p.inc.size()));
            }
            p.up.resize(hs->upper.size());
            for (std::size_t k = 0; k < hs->upper.size(); ++k) {
                const Vertex u = hs->upper[k];
                p.up[k] = V_.resp(u) == m ? static_cast<std::uint32_t>(*hs->index(u)) : kRemote | rv[m].at(u);
            }
        }
    }

    void send(MachineId m, const HostedStates& hs, Outbox& out) const {
        std::vector<Word> msg;
        for (const auto& o : plans_[m].out) {
            msg.assign(1, o.v.size());
            for (std::uint32_t i : o.v) msg.push_back(hs.vstate[i]);
            for (std::uint32_t k : o.e) msg.push_back(hs.estate[k]);
            out.send(o.to, msg);
        }
    }

    template <LocalRule R>
    void apply(MachineId m, HostedStates& hs, const Inbox& in, const R& rule, const RandomTape& tape, std::uint64_t r) const {
        const Plan& p = plans_[m];
        std::vector<Word> rv(p.rv), re(p.re);
        for (auto msg : in) {
            auto it = std::lower_bound(p.in.begin(), p.in.end(), msg.from, [](const auto& x, MachineId f) { return x.from < f; });
            if (it == p.in.end() || it->from != msg.from) throw Error("direct engine got a message from an unplanned sender");
            const std::size_t nv = static_cast<std::size_t>(msg.words[0]);
            std::copy(msg.words.begin() + 1, msg.words.begin() + 1 + static_cast<std::ptrdiff_t>(nv), rv.begin() + it->vbase);
            std::copy(msg.words.begin() + 1 + static_cast<std::ptrdiff_t>(nv), msg.words.end(), re.begin() + it->ebase);
        }
        std::vector<Word> nv(hs.vstate.size()), ne(hs.estate.size()), incident;
        for (std::size_t i = 0; i < hs.vs.size(); ++i) {
            const Vertex v = hs.vs[i];
            incident.clear();
            for (std::uint32_t j = p.inc_off[i]; j < p.inc_off[i + 1]; ++j) {
                const std::uint32_t src = p.inc[j];
                incident.push_back(src & kRemote ? re[src & ~kRemote] : hs.estate[src]);
            }
            nv[i] = detail::narrow_vertex(rule.vertex(hs.vstate[i], incident, TapeView(tape, v), r), v);
            for (std::size_t k = hs.eoff[i]; k < hs.eoff[i + 1]; ++k) {
                const std::uint32_t src = p.up[k];
                const Word upper = src & kRemote ? rv[src & ~kRemote] : hs.vstate[src];
                ne[k] = detail::narrow_edge(rule.edge(hs.vstate[i], upper, hs.estate[k], r), hs.estate[k]);
            }
        }
        hs.vstate.swap(nv);
        hs.estate.swap(ne);
    }

    VertexLayout& V_;
    std::vector<Plan> plans_;
};

// Reference semantics: r synchronous rounds, one MPC round each. A nonzero
// check_every lets a quiet rule stop early.
template <LocalRule R>
StateVector simulate_direct(Cluster& c, const R& rule, std::uint64_t r, const RandomTape& tape,
                            std::optional<StateVector> base = std::nullopt, std::uint64_t check_every = 0) {
    StateVector sv = base ? std::move(*base) : StateVector::initial(c.graph());
    if (r == 0) return sv;
    EdgeLayout E(c);
    const auto deg = E.compute_degrees();
    VertexLayout V(E, deg);
    DirectEngine(V).run(rule, tape, sv, r, check_every);
    E.release_scratch();
    return sv;
}

}  // namespace mpcsim
