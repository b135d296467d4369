#pragma once

#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>

#include "mpcsim/core/types.hpp"

namespace mpcsim {

struct ClusterConfig {
    std::size_t n = 0;
    double epsilon = 0.5;
    double space_coefficient = 16.0;
    std::size_t machine_space = 0;  // S, in words
    std::size_t machine_count = 0;  // M
    std::size_t total_space_budget = 0;
    unsigned word_size = 64;
    bool strict = true;
    double slack = 1.0;  // cap multiplier; 1 in strict mode

    // Effective per-machine cap for stored, sent and received words.
    [[nodiscard]] std::size_t cap() const {
        return static_cast<std::size_t>(std::floor(static_cast<double>(machine_space) * slack));
    }
};

inline std::size_t ceil_log2(std::size_t x) {
    std::size_t r = 0;
    while ((std::size_t{1} << r) < x) ++r;
    return r;
}

inline double polylog_slack(std::size_t n) { return static_cast<double>(std::max<std::size_t>(1, ceil_log2(n))); }

// MPCSIM_STRICT in {0,1}; unset means strict.
inline bool strict_from_env() {
    const char* s = std::getenv("MPCSIM_STRICT");
    if (s == nullptr || *s == '\0') return true;
    const std::string v(s);
    if (v == "1") return true;
    if (v == "0") return false;
    throw ArgumentError("MPCSIM_STRICT must be 0 or 1, got '" + v + "'");
}

inline std::size_t machine_space_for(std::size_t n, double epsilon, double c_s) {
    const double s = std::ceil(c_s * std::pow(static_cast<double>(std::max<std::size_t>(n, 1)), epsilon));
    return static_cast<std::size_t>(s);
}

inline void validate(const ClusterConfig& cfg, std::size_t m) {
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw ArgumentError("epsilon must lie in (0,1)");
    if (!(cfg.space_coefficient > 0.0)) throw ArgumentError("space coefficient must be positive");
    if (cfg.machine_space < 2) throw ArgumentError("machine space must be at least 2 words");
    if (cfg.machine_count < 1) throw ArgumentError("machine count must be at least 1");
    if (cfg.slack < 1.0) throw ArgumentError("slack must be at least 1");
    if (cfg.total_space_budget < m) throw CapacityError("total space budget below edge count");
    if (cfg.machine_count * cfg.machine_space < cfg.total_space_budget)
        throw CapacityError("machine count times machine space below total budget");
}

// S = ceil(c_s * n^eps); budget = 4(2m+n); M sized so the input fills about 1/16 of each machine.
inline ClusterConfig make_config(std::size_t n, std::size_t m, double epsilon, double c_s,
                                 std::optional<bool> strict = std::nullopt) {
    ClusterConfig cfg;
    cfg.n = n;
    cfg.epsilon = epsilon;
    cfg.space_coefficient = c_s;
    cfg.machine_space = std::max<std::size_t>(2, machine_space_for(n, epsilon, c_s));
    cfg.total_space_budget = std::max<std::size_t>(4 * (2 * m + n), cfg.machine_space);
    cfg.machine_count = std::max<std::size_t>(1, (4 * cfg.total_space_budget + cfg.machine_space - 1) / cfg.machine_space);
    cfg.strict = strict.value_or(strict_from_env());
    cfg.slack = cfg.strict ? 1.0 : polylog_slack(n);
    validate(cfg, m);
    return cfg;
}

}  // namespace mpcsim
