#pragma once

#include <cmath>
#include <vector>

#include "mpcsim/graph/sparsity.hpp"
#include "mpcsim/symbreak/low_degree.hpp"
#include "mpcsim/symbreak/reduction.hpp"

namespace mpcsim {

struct PipelineOptions {
    Mode mode = Mode::mis;
    SpaceMode space = SpaceMode::warmup;
    Fidelity fidelity = Fidelity::desk;
    std::uint64_t seed = 1;
    std::optional<double> tau_override;
    std::size_t max_phases = 64;
};

struct PipelineReport {
    std::size_t alpha_hat = 0;  // degeneracy of the input
    double tau = 0;
    CoarseTrace coarse;
    std::vector<PhaseTrace> phases;
    LowDegreeTrace low;
    std::vector<double> delta_hat;  // per reduction call
    RoundMeter meter;
};

inline DegreeReductionParams params_for(const PipelineOptions& o) {
    auto p = o.fidelity == Fidelity::faithful ? DegreeReductionParams::faithful(o.mode) : DegreeReductionParams::desk(o.mode);
    p.tau_override = o.tau_override;
    return p;
}

// Measured decay exponent of one call: h_after = h_before / delta^d. A call
// that clears every high vertex counts as h_after = 1.
inline double decay_exponent(std::size_t before, std::size_t after, std::size_t delta) {
    if (before == 0 || delta < 2) return 0;
    return std::log(static_cast<double>(before) / static_cast<double>(std::max<std::size_t>(after, 1))) /
           std::log(static_cast<double>(delta));
}

inline std::pair<Result, PipelineReport> run_pipeline(Cluster& c, const PipelineOptions& o) {
    const Graph& g = c.graph();
    const auto p = params_for(o);
    PipelineReport rep;
    rep.alpha_hat = degeneracy(g).degeneracy;
    rep.tau = p.tau(static_cast<double>(rep.alpha_hat), g.n());
    SolveState st(g);

    rep.coarse = coarse_degree_reduction(c, p, st, mix(o.seed, 0xc0a5e));
    std::size_t delta = rep.coarse.max_degree_after;
    while (static_cast<double>(delta) > rep.tau && delta >= 2 && rep.phases.size() < o.max_phases) {
        ReduceOptions ro;
        ro.space = o.space;
        ro.seed = mix(o.seed, rep.phases.size() + 1);
        PhaseTrace tr = reduce_to_sqrt(c, delta, p, st, ro);
        for (std::size_t i = 0; i + 1 < tr.high.size(); ++i) rep.delta_hat.push_back(decay_exponent(tr.high[i], tr.high[i + 1], delta));
        const bool ok = tr.success;
        rep.phases.push_back(std::move(tr));
        if (!ok) break;
        EdgeLayout E(c);
        auto deg = E.compute_degrees();
        delta = max_degree(E, deg);
        E.release_scratch();
    }

    LowDegreeOptions lo;
    lo.seed = mix(o.seed, 0x10);
    rep.low = solve_low_degree(c, p, st, lo);
    Result r = st.result(g, o.mode);
    if (o.mode == Mode::mm) r.vertex_cover = vertex_cover_from_mm(g, r.matching);
    rep.meter = c.report();
    return {std::move(r), std::move(rep)};
}

}  // namespace mpcsim
