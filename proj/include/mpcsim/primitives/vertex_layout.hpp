#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "mpcsim/primitives/edge_layout.hpp"

namespace mpcsim {

namespace slots {
inline constexpr SlotId adjacency = 10;
}

// Largest degree the vertex-centric layout accepts at machine space S.
inline std::size_t vertex_layout_degree_limit(std::size_t S) { return S >= 4 ? (S / 2 - 2) / 6 : 0; }

// Vertex-centric placement: resp(v) stores every edge of v. Weights follow the
// degree, and a vertex whose weight passes S/2 is refused.
class VertexLayout {
  public:
    // `include` empty means every vertex; otherwise only edges inside the
    // included set are routed.
    VertexLayout(EdgeLayout& E, std::span<const Word> degrees, std::span<const char> include = {},
                 std::uint64_t seed = 0x5e1f)
        : c_(E.cluster()), n_(c_.graph().n()) {
        const std::size_t rounds0 = c_.report().rounds_elapsed;
        included_.assign(n_, 1);
        bool partial = false;
        if (!include.empty()) {
            for (Vertex v = 0; v < n_; ++v) {
                included_[v] = include[v] ? 1 : 0;
                partial |= !include[v];
            }
        }
        const std::size_t S = c_.config().machine_space;
        std::vector<double> w(n_, 0.0);
        double total = 0, mx = 0;
        for (Vertex v = 0; v < n_; ++v) {
            w[v] = included_[v] ? 6.0 * static_cast<double>(degrees[v]) + 2.0 : 1.0;
            total += w[v];
            mx = std::max(mx, w[v]);
        }
        if (mx > static_cast<double>(S) / 2)
            throw CapacityError("a vertex of degree " + std::to_string(static_cast<std::size_t>((mx - 2) / 6)) +
                                " does not fit the vertex-centric layout at S = " + std::to_string(S));
        const std::size_t p = std::max<std::size_t>(c_.machines(), static_cast<std::size_t>(4 * total / static_cast<double>(S)) + 1);
        c_.provision(p);
        resp_ = pack_partition(w, p, seed);
        hosted_.assign(p, {});
        for (Vertex v = 0; v < n_; ++v)
            if (included_[v]) hosted_[resp_[v]].push_back(v);

        std::vector<Word> flag(n_);
        for (Vertex v = 0; v < n_; ++v) flag[v] = included_[v];
        if (partial) E.broadcast(flag);
        c_.run_round([&](MachineId m, MachineStore& s, const Inbox&, Outbox& out) {
            auto* e = s.find<EdgeSegment>(slots::input_edges);
            if (e == nullptr) return;
            const auto* lv = s.find<WordSegment>(slots::leaf_values);
            Batcher b;
            for (const Edge& ed : e->edges) {
                if (partial && !(lookup(lv->data, ed.u) && lookup(lv->data, ed.v))) continue;
                b.put(resp_[ed.u], {Word{ed.u}, Word{ed.v}});
                if (resp_[ed.v] != resp_[ed.u]) b.put(resp_[ed.v], {Word{ed.u}, Word{ed.v}});
            }
            (void)m;
            b.flush(out);
        });
        c_.local([&](MachineId, MachineStore& s, const Inbox& in) {
            s.erase(slots::leaf_values);
            auto& adj = s.get<EdgeSegment>(slots::adjacency).edges;
            adj.clear();
            for (auto msg : in)
                for (std::size_t j = 0; j + 2 <= msg.words.size(); j += 2)
                    adj.emplace_back(static_cast<Vertex>(msg.words[j]), static_cast<Vertex>(msg.words[j + 1]));
            std::sort(adj.begin(), adj.end());
        });
        // Driver-side index over what the resp machines now store.
        offs_.assign(n_ + 1, 0);
        std::vector<std::pair<Vertex, Vertex>> arcs;
        for (MachineId m = 0; m < p; ++m)
            if (auto* a = c_.store(m).find<EdgeSegment>(slots::adjacency))
                for (const Edge& ed : a->edges) {
                    if (resp_[ed.u] == m) arcs.emplace_back(ed.u, ed.v);
                    if (resp_[ed.v] == m) arcs.emplace_back(ed.v, ed.u);
                }
        std::sort(arcs.begin(), arcs.end());
        nbr_.resize(arcs.size());
        for (std::size_t i = 0; i < arcs.size(); ++i) {
            ++offs_[arcs[i].first + 1];
            nbr_[i] = arcs[i].second;
        }
        for (Vertex v = 0; v < n_; ++v) offs_[v + 1] += offs_[v];
        max_degree_ = 0;
        for (Vertex v = 0; v < n_; ++v) max_degree_ = std::max(max_degree_, degree(v));
        setup_rounds_ = c_.report().rounds_elapsed - rounds0;
    }

    VertexLayout(const VertexLayout&) = delete;
    VertexLayout& operator=(const VertexLayout&) = delete;

    ~VertexLayout() {
        for (MachineId m = 0; m < c_.machines(); ++m) c_.store(m).erase(slots::adjacency);
    }

    [[nodiscard]] Cluster& cluster() const { return c_; }
    [[nodiscard]] std::size_t n() const { return n_; }
    [[nodiscard]] MachineId resp(Vertex v) const { return resp_[v]; }
    [[nodiscard]] bool included(Vertex v) const { return included_[v] != 0; }
    [[nodiscard]] std::size_t machines() const { return hosted_.size(); }
    [[nodiscard]] std::span<const Vertex> hosted(MachineId m) const { return hosted_[m]; }
    [[nodiscard]] std::span<const Vertex> neighbors(Vertex v) const { return {nbr_.data() + offs_[v], nbr_.data() + offs_[v + 1]}; }
    [[nodiscard]] std::size_t degree(Vertex v) const { return offs_[v + 1] - offs_[v]; }
    [[nodiscard]] std::size_t max_degree() const { return max_degree_; }
    [[nodiscard]] std::size_t edge_count() const { return nbr_.size() / 2; }
    [[nodiscard]] std::uint64_t setup_rounds() const { return setup_rounds_; }

  private:
    static bool lookup(const std::vector<Word>& lv, Vertex v) {
        std::size_t lo = 0, hi = lv.size() / 2;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (lv[2 * mid] < v)
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo < lv.size() / 2 && lv[2 * lo] == v && lv[2 * lo + 1] != 0;
    }

    Cluster& c_;
    std::size_t n_;
    std::vector<char> included_;
    std::vector<MachineId> resp_;
    std::vector<std::vector<Vertex>> hosted_;
    std::vector<std::size_t> offs_;
    std::vector<Vertex> nbr_;
    std::size_t max_degree_ = 0;
    std::uint64_t setup_rounds_ = 0;
};

}  // namespace mpcsim
