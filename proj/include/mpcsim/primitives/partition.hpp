#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "mpcsim/core/random.hpp"
#include "mpcsim/core/types.hpp"

namespace mpcsim {

struct LoadBalanceParams {
    std::size_t p = 1;       // partition count
    double sigma = 0.5;      // weights are bounded by n^sigma
    std::size_t n = 2;       // size parameter the weight bound refers to
    std::uint64_t seed = 0;  // published hash seed
    double c_lb = 4.0;

    [[nodiscard]] double weight_cap() const { return std::pow(static_cast<double>(n), sigma); }

    // c_lb * (sum/p + n^sigma) * log2 p, with log2 1 read as 1.
    [[nodiscard]] double load_bound(double total) const {
        const double lg = p > 1 ? std::log2(static_cast<double>(p)) : 1.0;
        return c_lb * (total / static_cast<double>(p) + weight_cap()) * lg;
    }
};

namespace detail {
inline std::vector<std::size_t> rank_order(std::span<const double> w) {
    std::vector<std::size_t> idx(w.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
    return idx;
}
}  // namespace detail

// Sort by weight, cut the ranking into p classes of ceil(|A|/p) items, and
// spread each class over the partitions from a seeded offset.
inline std::vector<std::size_t> balanced_partition(std::span<const double> weights, const LoadBalanceParams& lb) {
    if (lb.p < 1) throw ArgumentError("partition count must be at least 1");
    const double cap = lb.weight_cap();
    for (double w : weights)
        if (!(w >= 1.0 && w <= cap)) throw ArgumentError("weight " + std::to_string(w) + " outside [1, n^sigma]");
    std::vector<std::size_t> out(weights.size(), 0);
    if (lb.p == 1 || weights.empty()) return out;
    const auto order = detail::rank_order(weights);
    const std::size_t cls = (weights.size() + lb.p - 1) / lb.p;
    for (std::size_t r = 0; r < order.size(); ++r) {
        const std::size_t j = r / cls;
        const std::uint64_t off = reduce_range(mix(lb.seed, j), lb.p);
        out[order[r]] = (off + r % cls) % lb.p;
    }
    return out;
}

inline std::vector<double> partition_loads(std::span<const double> weights, std::span<const std::size_t> part,
                                           std::size_t p) {
    std::vector<double> load(p, 0.0);
    for (std::size_t i = 0; i < weights.size(); ++i) load[part[i]] += weights[i];
    return load;
}

// Deterministic variant used for internal layouts: one rank-ordered deal over
// the partitions, so every load is at most sum/p + max weight.
inline std::vector<MachineId> pack_partition(std::span<const double> weights, std::size_t p, std::uint64_t seed = 0) {
    std::vector<MachineId> out(weights.size(), 0);
    if (p <= 1) return out;
    const auto order = detail::rank_order(weights);
    const std::uint64_t off = reduce_range(mix(seed, 0x9ac3), p);
    for (std::size_t r = 0; r < order.size(); ++r) out[order[r]] = static_cast<MachineId>((off + r) % p);
    return out;
}

}  // namespace mpcsim
