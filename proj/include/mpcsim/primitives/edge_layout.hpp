#pragma once

#include <algorithm>
#include <span>
#include <tuple>
#include <vector>

#include "mpcsim/primitives/partition.hpp"
#include "mpcsim/primitives/separable.hpp"
#include "mpcsim/runtime/cluster.hpp"

namespace mpcsim {

namespace slots {
inline constexpr SlotId home_column = 2;
inline constexpr SlotId tree = 3;
inline constexpr SlotId leaf_values = 4;
inline constexpr SlotId results = 5;
}  // namespace slots

// Aggregation over the input placement. Each vertex owns a reduce tree whose
// leaves are the machines holding its edges: the level-l node of leaf machine
// mu sits in bundle floor(mu / k^l) and is hashed onto a machine, the top
// level is home(v). compute_degrees() records the tree; every later
// aggregate walks it down (values) and back up (partials).
class EdgeLayout {
  public:
    explicit EdgeLayout(Cluster& c, std::size_t max_width = 1, std::uint64_t seed = 0x7e1a5eedULL)
        : c_(c), seed_(seed), n_(c.graph().n()), M_(c.machines()) {
        const std::size_t S = c.config().machine_space;
        k_ = std::max<std::size_t>(2, S / (4 * (2 + max_width)));
        L_ = 0;
        for (std::size_t span = 1; span < M_; span *= k_) ++L_;
        std::vector<double> unit(n_, 1.0);
        home_ = pack_partition(unit, M_, seed);
        homed_.assign(M_, {});
        for (Vertex v = 0; v < n_; ++v) homed_[home_[v]].push_back(v);
        for (MachineId m = 0; m < M_; ++m) c.store(m).get<WordSegment>(slots::home_column).data.assign(homed_[m].size(), 0);
        kg_ = std::max<std::size_t>(2, S / 8);
        c.observe();
    }

    [[nodiscard]] Cluster& cluster() { return c_; }
    [[nodiscard]] MachineId home(Vertex v) const { return home_[v]; }
    [[nodiscard]] std::span<const Vertex> homed(MachineId m) const { return homed_[m]; }
    [[nodiscard]] std::size_t fan_in() const { return k_; }
    [[nodiscard]] std::size_t levels() const { return L_; }
    [[nodiscard]] bool has_tree() const { return tree_built_; }

    // Exact degrees over the currently stored edges; rebuilds the reduce trees.
    std::vector<Word> compute_degrees() {
        const SumFn f;
        auto d = reduce_up(
            f, [&](MachineId mu, MachineStore& s) {
                std::vector<std::pair<Vertex, Word>> out;
                if (auto* e = s.find<EdgeSegment>(slots::input_edges))
                    for (const Edge& ed : e->edges) {
                        out.emplace_back(ed.u, 1);
                        out.emplace_back(ed.v, 1);
                    }
                (void)mu;
                return collapse(f, std::move(out));
            },
            true);
        tree_built_ = true;
        return d;
    }

    // result[v] = f over lift(x[u], u, x[v], v) for u in N(v); identity when isolated.
    template <SeparableFn F, class Lift>
    std::vector<typename F::value_type> aggregate(std::span<const Word> x, const F& f, Lift&& lift) {
        using V = typename F::value_type;
        if (!tree_built_) compute_degrees();
        broadcast(x);
        return reduce_up(
            f, [&](MachineId, MachineStore& s) {
                std::vector<std::pair<Vertex, V>> out;
                auto* e = s.find<EdgeSegment>(slots::input_edges);
                if (e == nullptr) return out;
                const auto& lv = s.get<WordSegment>(slots::leaf_values).data;
                for (const Edge& ed : e->edges) {
                    const Word xu = leaf_lookup(lv, ed.u), xv = leaf_lookup(lv, ed.v);
                    out.emplace_back(ed.v, lift(xu, ed.u, xv, ed.v));
                    out.emplace_back(ed.u, lift(xv, ed.v, xu, ed.u));
                }
                return collapse(f, std::move(out));
            },
            false);
    }

    template <SeparableFn F>
    std::vector<typename F::value_type> aggregate(std::span<const Word> x, const F& f) {
        return aggregate(x, f, [&f](Word xn, Vertex, Word, Vertex) { return f.lift(xn); });
    }

    // Delivers x[v] from home(v) to every machine holding an edge of v.
    void broadcast(std::span<const Word> x) {
        if (!tree_built_) compute_degrees();
        if (L_ == 0) {
            c_.local([&](MachineId m, MachineStore& s, const Inbox&) { fill_leaf(m, s, x); });
            return;
        }
        for (std::size_t i = 1; i <= L_; ++i) {
            const std::size_t lvl = L_ - i + 1;  // level of the sending nodes
            c_.run_round([&](MachineId m, MachineStore& s, const Inbox& in, Outbox& out) {
                if (m >= M_) return;
                Batcher b;
                const auto& tree = s.get<WordSegment>(slots::tree).data;
                auto down = [&](Vertex v, Word bundle, Word val) {
                    for (auto [c0, c1] = children(tree, lvl, v, bundle); c0 < c1; ++c0) {
                        const Word child = tree[c0] & 0xffffffffULL;
                        b.put(dest(v, lvl - 1, child), {header(v, child), val});
                    }
                };
                if (lvl == L_) {
                    for (Vertex v : homed_[m]) down(v, 0, x[v]);
                } else {
                    for (auto msg : in)
                        for (std::size_t j = 0; j + 2 <= msg.words.size(); j += 2)
                            down(header_v(msg.words[j]), header_b(msg.words[j]), msg.words[j + 1]);
                }
                b.flush(out);
            });
        }
        c_.local([&](MachineId, MachineStore& s, const Inbox& in) {
            auto& lv = s.get<WordSegment>(slots::leaf_values).data;
            lv.clear();
            std::vector<std::pair<Word, Word>> kv;
            for (auto msg : in)
                for (std::size_t j = 0; j + 2 <= msg.words.size(); j += 2)
                    kv.emplace_back(header_v(msg.words[j]), msg.words[j + 1]);
            std::sort(kv.begin(), kv.end());
            for (auto [v, val] : kv) {
                lv.push_back(v);
                lv.push_back(val);
            }
        });
    }

    // Combine of f.lift(x[v]) over all vertices, reduced up a machine tree and
    // broadcast back so every machine holds it.
    template <SeparableFn F>
    typename F::value_type allreduce(std::span<const Word> x, const F& f) {
        using V = typename F::value_type;
        std::vector<V> acc(M_, f.identity());
        for (MachineId m = 0; m < M_; ++m)
            for (Vertex v : homed_[m]) acc[m] = f.combine(acc[m], f.lift(x[v]));
        const std::size_t H = depth(M_ - 1);
        for (std::size_t d = H; d >= 1; --d) {
            c_.run_round([&](MachineId m, MachineStore&, const Inbox& in, Outbox& out) {
                if (m >= M_) return;
                absorb_scalar(f, in, acc[m]);
                if (m > 0 && depth(m) == d) {
                    std::vector<Word> buf;
                    f.put(buf, acc[m]);
                    out.send(static_cast<MachineId>((m - 1) / kg_), buf);
                }
            });
        }
        c_.local([&](MachineId m, MachineStore&, const Inbox& in) {
            if (m < M_) absorb_scalar(f, in, acc[m]);
        });
        V total = acc[0];
        std::vector<Word> buf;
        f.put(buf, total);
        for (std::size_t d = 0; d < H; ++d) {
            c_.run_round([&](MachineId m, MachineStore&, const Inbox& in, Outbox& out) {
                if (m >= M_) return;
                if ((m == 0 && d == 0) || !in.empty()) {
                    for (std::size_t ch = m * kg_ + 1; ch <= m * kg_ + kg_ && ch < M_; ++ch)
                        out.send(static_cast<MachineId>(ch), buf);
                }
            });
        }
        if (H > 0) c_.local([](MachineId, MachineStore&, const Inbox&) {});
        return total;
    }

    // Drops every stored edge with a flagged endpoint; returns how many went.
    std::size_t prune(std::span<const Word> gone) {
        broadcast(gone);
        std::size_t dropped = 0;
        c_.local([&](MachineId, MachineStore& s, const Inbox&) {
            auto* e = s.find<EdgeSegment>(slots::input_edges);
            if (e == nullptr) return;
            const auto& lv = s.get<WordSegment>(slots::leaf_values).data;
            const std::size_t before = e->edges.size();
            std::erase_if(e->edges, [&](const Edge& ed) { return leaf_lookup(lv, ed.u) || leaf_lookup(lv, ed.v); });
            dropped += before - e->edges.size();
            s.erase(slots::leaf_values);
        });
        return dropped;
    }

    [[nodiscard]] std::size_t stored_edges() const {
        std::size_t t = 0;
        for (MachineId m = 0; m < M_; ++m)
            if (auto* e = c_.store(m).find<EdgeSegment>(slots::input_edges)) t += e->edges.size();
        return t;
    }

    // Current edge set, gathered by the driver (no rounds).
    [[nodiscard]] std::vector<Edge> gather_edges() const {
        std::vector<Edge> out;
        for (MachineId m = 0; m < M_; ++m)
            if (auto* e = c_.store(m).find<EdgeSegment>(slots::input_edges))
                out.insert(out.end(), e->edges.begin(), e->edges.end());
        std::sort(out.begin(), out.end());
        return out;
    }

    void release_scratch() {
        for (MachineId m = 0; m < M_; ++m) {
            c_.store(m).erase(slots::leaf_values);
            c_.store(m).erase(slots::results);
        }
    }

  private:
    [[nodiscard]] MachineId node(Vertex v, std::size_t lvl, Word bundle) const {
        if (lvl == L_) return home_[v];
        return static_cast<MachineId>(reduce_range(mix(seed_, v, lvl, bundle), M_));
    }
    [[nodiscard]] MachineId dest(Vertex v, std::size_t lvl, Word bundle) const {
        return lvl == 0 ? static_cast<MachineId>(bundle) : node(v, lvl, bundle);
    }

    [[nodiscard]] std::size_t depth(std::size_t m) const {
        std::size_t d = 0;
        while (m > 0) {
            m = (m - 1) / kg_;
            ++d;
        }
        return d;
    }

    // Tree records pack (level:8 | v:24 | child:32) into one word, so sorted
    // order is (level, v, child) and a bundle's children form one range.
    static Word rec_word(std::size_t lvl, Vertex v, Word child) { return Word{lvl} << 56 | Word{v} << 32 | child; }
    static Word header(Vertex v, Word bundle) { return Word{v} << 40 | bundle; }
    static Vertex header_v(Word h) { return static_cast<Vertex>(h >> 40); }
    static Word header_b(Word h) { return h & ((Word{1} << 40) - 1); }

    [[nodiscard]] std::pair<std::size_t, std::size_t> children(const std::vector<Word>& tree, std::size_t lvl, Vertex v,
                                                               Word b) const {
        auto a = std::lower_bound(tree.begin(), tree.end(), rec_word(lvl, v, b * k_));
        auto z = std::lower_bound(a, tree.end(), rec_word(lvl, v, b * k_ + k_));
        return {static_cast<std::size_t>(a - tree.begin()), static_cast<std::size_t>(z - tree.begin())};
    }

    static Word leaf_lookup(const std::vector<Word>& lv, Vertex v) {
        std::size_t lo = 0, hi = lv.size() / 2;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (lv[2 * mid] < v)
                lo = mid + 1;
            else
                hi = mid;
        }
        if (lo < lv.size() / 2 && lv[2 * lo] == v) return lv[2 * lo + 1];
        return 0;
    }

    void fill_leaf(MachineId, MachineStore& s, std::span<const Word> x) {
        auto& lv = s.get<WordSegment>(slots::leaf_values).data;
        lv.clear();
        auto* e = s.find<EdgeSegment>(slots::input_edges);
        if (e == nullptr) return;
        std::vector<Vertex> ends;
        for (const Edge& ed : e->edges) {
            ends.push_back(ed.u);
            ends.push_back(ed.v);
        }
        std::sort(ends.begin(), ends.end());
        ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
        for (Vertex v : ends) {
            lv.push_back(v);
            lv.push_back(x[v]);
        }
    }

    template <SeparableFn F>
    static std::vector<std::pair<Vertex, typename F::value_type>> collapse(
        const F& f, std::vector<std::pair<Vertex, typename F::value_type>> items) {
        std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::pair<Vertex, typename F::value_type>> out;
        for (auto& [v, val] : items) {
            if (!out.empty() && out.back().first == v)
                out.back().second = f.combine(out.back().second, val);
            else
                out.emplace_back(v, std::move(val));
        }
        return out;
    }

    template <SeparableFn F>
    static void absorb_scalar(const F& f, const Inbox& in, typename F::value_type& acc) {
        for (auto msg : in) {
            const Word* p = msg.words.data();
            acc = f.combine(acc, f.get(p));
        }
    }

    // Leaf partials go up L levels; the top level lands at home(v).
    template <SeparableFn F, class Leaf>
    std::vector<typename F::value_type> reduce_up(const F& f, Leaf&& leaf, bool record) {
        using V = typename F::value_type;
        std::vector<V> result(n_, f.identity());
        // Records held at each machine between rounds: (level, v, child bundle).
        std::vector<std::vector<Word>> rec(M_);

        auto absorb = [&](MachineId m, const Inbox& in, std::size_t lvl) {
            // Parse [v, child, value] records and group by (v, parent bundle).
            std::vector<std::tuple<Vertex, Word, Word, V>> items;
            for (auto msg : in) {
                const Word* p = msg.words.data();
                const Word* end = p + msg.words.size();
                while (p < end) {
                    const Vertex v = header_v(*p);
                    const Word child = header_b(*p++);
                    items.emplace_back(v, child / k_, child, f.get(p));
                }
            }
            std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
                return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
            });
            std::vector<std::tuple<Vertex, Word, V>> grouped;
            for (auto& [v, b, child, val] : items) {
                if (record) rec[m].push_back(rec_word(lvl, v, child));
                if (!grouped.empty() && std::get<0>(grouped.back()) == v && std::get<1>(grouped.back()) == b)
                    std::get<2>(grouped.back()) = f.combine(std::get<2>(grouped.back()), val);
                else
                    grouped.emplace_back(v, b, std::move(val));
            }
            return grouped;
        };

        if (L_ == 0) {
            c_.local([&](MachineId m, MachineStore& s, const Inbox&) {
                for (auto& [v, val] : leaf(m, s)) {
                    result[v] = f.combine(result[v], val);
                    if (record) rec[m].push_back(rec_word(0, v, m));
                }
            });
        } else {
            for (std::size_t lvl = 1; lvl <= L_; ++lvl) {
                c_.run_round([&](MachineId m, MachineStore& s, const Inbox& in, Outbox& out) {
                    if (m >= M_) return;
                    Batcher b;
                    std::vector<Word> buf;
                    auto send = [&](Vertex v, Word bundle, const V& val) {
                        buf.assign({header(v, bundle)});
                        f.put(buf, val);
                        b.put(node(v, lvl, bundle / k_), buf);
                    };
                    if (lvl == 1) {
                        for (auto& [v, val] : leaf(m, s)) send(v, m, val);
                    } else {
                        for (auto& [v, bundle, val] : absorb(m, in, lvl - 1)) send(v, bundle, val);
                    }
                    b.flush(out);
                });
            }
            c_.local([&](MachineId m, MachineStore&, const Inbox& in) {
                if (m >= M_) return;
                for (auto& [v, bundle, val] : absorb(m, in, L_)) result[v] = f.combine(result[v], val);
            });
        }

        if (record) {
            for (MachineId m = 0; m < M_; ++m) {
                std::sort(rec[m].begin(), rec[m].end());
                c_.store(m).get<WordSegment>(slots::tree).data = std::move(rec[m]);
            }
        }
        // The results column lives at the homes.
        for (MachineId m = 0; m < M_; ++m) {
            auto& col = c_.store(m).get<WordSegment>(slots::results).data;
            col.clear();
            for (Vertex v : homed_[m]) f.put(col, result[v]);
        }
        for (MachineId m = 0; m < M_; ++m) c_.store(m).erase(slots::leaf_values);
        c_.observe();
        return result;
    }

    Cluster& c_;
    std::uint64_t seed_;
    std::size_t n_;
    std::size_t M_;
    std::size_t k_ = 2;
    std::size_t kg_ = 2;
    std::size_t L_ = 0;
    bool tree_built_ = false;
    std::vector<MachineId> home_;
    std::vector<std::vector<Vertex>> homed_;
};

inline std::vector<Word> compute_degrees(Cluster& c) {
    EdgeLayout lay(c);
    return lay.compute_degrees();
}

template <SeparableFn F>
std::vector<typename F::value_type> aggregate_neighbors(Cluster& c, std::span<const Word> values, const F& f) {
    EdgeLayout lay(c, f.max_width());
    return lay.aggregate(values, f);
}

}  // namespace mpcsim
