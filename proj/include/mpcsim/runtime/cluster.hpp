#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <vector>

#include "mpcsim/core/random.hpp"
#include "mpcsim/graph/graph.hpp"
#include "mpcsim/runtime/config.hpp"
#include "mpcsim/runtime/machine_store.hpp"

namespace mpcsim {

struct RoundMeter {
    std::uint64_t rounds_elapsed = 0;
    std::size_t peak_machine_space = 0;
    std::size_t peak_machine_traffic = 0;
    std::size_t total_space_now = 0;
    std::size_t peak_total_space = 0;

    friend bool operator==(const RoundMeter&, const RoundMeter&) = default;
};

namespace slots {
inline constexpr SlotId input_edges = 1;
}

// Simulated deployment. Machine steps see only their own store and the inbox
// delivered at the previous barrier; caps are checked at every barrier.
class Cluster {
  public:
    Cluster(ClusterConfig cfg, std::shared_ptr<const Graph> g)
        : cfg_(cfg), graph_(std::move(g)), stores_(cfg.machine_count), inboxes_(cfg.machine_count),
          outboxes_(cfg.machine_count) {}

    [[nodiscard]] const ClusterConfig& config() const { return cfg_; }
    [[nodiscard]] const Graph& graph() const { return *graph_; }
    [[nodiscard]] std::shared_ptr<const Graph> graph_ptr() const { return graph_; }
    [[nodiscard]] std::size_t machines() const { return stores_.size(); }
    [[nodiscard]] std::size_t cap() const { return cfg_.cap(); }

    MachineStore& store(MachineId m) { return stores_[m]; }
    [[nodiscard]] const MachineStore& store(MachineId m) const { return stores_[m]; }
    [[nodiscard]] const Inbox& inbox(MachineId m) const { return inboxes_[m]; }

    // Grows the machine pool; idle machines hold no words.
    void provision(std::size_t machine_count) {
        if (machine_count <= stores_.size()) return;
        stores_.resize(machine_count);
        inboxes_.resize(machine_count);
        outboxes_.resize(machine_count);
        cfg_.machine_count = machine_count;
        cfg_.total_space_budget = std::max(cfg_.total_space_budget, machine_count * cfg_.machine_space / 2);
    }

    // Steps run in machine-index order unless a schedule seed permutes them;
    // results must not depend on the order.
    void set_schedule_seed(std::uint64_t seed) { schedule_seed_ = seed; }

    template <class Step>
    void run_round(Step&& step) {
        const std::size_t M = machines();
        for (MachineId m : order(M)) {
            outboxes_[m].clear();
            step(m, stores_[m], static_cast<const Inbox&>(inboxes_[m]), outboxes_[m]);
        }
        barrier();
    }

    // Local computation between barriers; consumes the pending inboxes.
    template <class Step>
    void local(Step&& step) {
        const std::size_t M = machines();
        for (MachineId m : order(M)) step(m, stores_[m], static_cast<const Inbox&>(inboxes_[m]));
        for (auto& in : inboxes_) in.clear();
        observe();
    }

    // Re-measures stored words after host-side placement or extraction.
    void observe() {
        std::size_t total = 0;
        const std::size_t c = cap();
        for (MachineId m = 0; m < machines(); ++m) {
            const std::size_t w = stores_[m].words() + inboxes_[m].words();
            if (w > c)
                throw SimulationFault(m, Cap::space, c, w, stores_[m].breakdown() + ", inbox=" + std::to_string(inboxes_[m].words()));
            meter_.peak_machine_space = std::max(meter_.peak_machine_space, w);
            total += w;
        }
        meter_.total_space_now = total;
        meter_.peak_total_space = std::max(meter_.peak_total_space, total);
    }

    [[nodiscard]] RoundMeter report() const { return meter_; }

  private:
    std::vector<MachineId> order(std::size_t M) const {
        std::vector<MachineId> ord(M);
        std::iota(ord.begin(), ord.end(), MachineId{0});
        if (schedule_seed_ != 0) {
            Stream rng(schedule_seed_ + meter_.rounds_elapsed);
            for (std::size_t i = M; i > 1; --i) std::swap(ord[i - 1], ord[rng.below(i)]);
        }
        return ord;
    }

    void barrier() {
        const std::size_t M = machines();
        const std::size_t c = cap();
        std::vector<std::size_t> recv(M, 0);
        std::vector<std::size_t> count(M, 0);
        std::size_t peak_traffic = 0;
        for (MachineId m = 0; m < M; ++m) {
            const Outbox& out = outboxes_[m];
            const std::size_t sent = out.words();
            if (sent > c) throw SimulationFault(m, Cap::send, c, sent);
            peak_traffic = std::max(peak_traffic, sent);
            for (std::size_t i = 0; i < out.to_.size(); ++i) {
                const MachineId to = out.to_[i];
                if (to >= M) throw ArgumentError("message addressed to unknown machine " + std::to_string(to));
                recv[to] += out.offs_[i + 1] - out.offs_[i];
                ++count[to];
            }
        }
        for (MachineId m = 0; m < M; ++m) {
            if (recv[m] > c) throw SimulationFault(m, Cap::receive, c, recv[m]);
            peak_traffic = std::max(peak_traffic, recv[m]);
        }
        for (MachineId m = 0; m < M; ++m) {
            Inbox& in = inboxes_[m];
            in.clear();
            in.data_.reserve(recv[m]);
            in.offs_.reserve(count[m] + 1);
            in.from_.reserve(count[m]);
        }
        for (MachineId m = 0; m < M; ++m) {
            const Outbox& out = outboxes_[m];
            for (std::size_t i = 0; i < out.to_.size(); ++i) {
                Inbox& in = inboxes_[out.to_[i]];
                in.data_.insert(in.data_.end(), out.data_.begin() + out.offs_[i], out.data_.begin() + out.offs_[i + 1]);
                in.offs_.push_back(static_cast<std::uint32_t>(in.data_.size()));
                in.from_.push_back(m);
            }
        }
        for (auto& out : outboxes_) out.clear();
        ++meter_.rounds_elapsed;
        meter_.peak_machine_traffic = std::max(meter_.peak_machine_traffic, peak_traffic);
        observe();
    }

    ClusterConfig cfg_;
    std::shared_ptr<const Graph> graph_;
    std::vector<MachineStore> stores_;
    std::vector<Inbox> inboxes_;
    std::vector<Outbox> outboxes_;
    RoundMeter meter_;
    std::uint64_t schedule_seed_ = 0;
};

// Round-robin placement of the canonical edge list.
inline Cluster init_cluster(const ClusterConfig& cfg, std::shared_ptr<const Graph> g) {
    const std::size_t m = g->m();
    if (2 * m > cfg.machine_count * cfg.machine_space)
        throw CapacityError("input of " + std::to_string(m) + " edges exceeds M*S/2 = " +
                            std::to_string(cfg.machine_count * cfg.machine_space / 2));
    validate(cfg, m);
    Cluster c(cfg, g);
    const auto edges = g->edges();
    for (std::size_t i = 0; i < m; ++i) {
        c.store(static_cast<MachineId>(i % cfg.machine_count)).get<EdgeSegment>(slots::input_edges).edges.push_back(edges[i]);
    }
    c.observe();
    return c;
}

inline Cluster init_cluster(const ClusterConfig& cfg, const Graph& g) {
    return init_cluster(cfg, std::make_shared<const Graph>(g));
}

inline RoundMeter report(const Cluster& c) { return c.report(); }

}  // namespace mpcsim
