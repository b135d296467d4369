#pragma once

#include <chrono>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mpcsim/graph/generators.hpp"
#include "mpcsim/harness/checkers.hpp"
#include "mpcsim/symbreak/pipeline.hpp"

namespace mpcsim {

inline constexpr int kReportSchemaVersion = 1;

inline std::string_view mode_name(Mode m) { return m == Mode::mis ? "mis" : "mm"; }
inline std::string_view space_name(SpaceMode s) { return s == SpaceMode::warmup ? "warmup" : "optimized"; }
inline std::string_view fidelity_name(Fidelity f) { return f == Fidelity::faithful ? "faithful" : "desk"; }

inline Mode parse_mode(std::string_view s) {
    if (s == "mis") return Mode::mis;
    if (s == "mm") return Mode::mm;
    throw ArgumentError("unknown algorithm '" + std::string(s) + "'");
}
inline SpaceMode parse_space(std::string_view s) {
    if (s == "warmup") return SpaceMode::warmup;
    if (s == "optimized") return SpaceMode::optimized;
    throw ArgumentError("unknown space mode '" + std::string(s) + "'");
}
inline Fidelity parse_fidelity(std::string_view s) {
    if (s == "desk") return Fidelity::desk;
    if (s == "faithful") return Fidelity::faithful;
    throw ArgumentError("unknown fidelity '" + std::string(s) + "'");
}

struct InputDescriptor {
    std::string family = "file";
    std::size_t n = 0;
    std::size_t m = 0;
    std::uint64_t seed = 0;
    std::size_t degeneracy = 0;
};

struct RunConfig {
    Mode mode = Mode::mis;
    SpaceMode space = SpaceMode::warmup;
    Fidelity fidelity = Fidelity::desk;
    double epsilon = 0.5;
    double space_coeff = 16;
    std::uint64_t seed = 1;
    bool strict = true;
    std::optional<double> tau_override;
};

struct RunReport {
    InputDescriptor input;
    RunConfig config;
    std::size_t machine_space = 0;
    std::size_t machines = 0;
    RoundMeter meter;
    PipelineReport trace;
    double wall_ms = 0;
};

// Runs the pipeline on its own cluster and times it.
inline std::pair<Result, RunReport> run_instance(const Graph& g, InputDescriptor in, const RunConfig& rc) {
    const auto t0 = std::chrono::steady_clock::now();
    in.n = g.n();
    in.m = g.m();
    in.degeneracy = degeneracy(g).degeneracy;
    Cluster c = init_cluster(make_config(std::max<std::size_t>(g.n(), 1), g.m(), rc.epsilon, rc.space_coeff, rc.strict), g);
    PipelineOptions po{.mode = rc.mode, .space = rc.space, .fidelity = rc.fidelity, .seed = rc.seed, .tau_override = rc.tau_override};
    auto [res, trace] = run_pipeline(c, po);
    RunReport rep;
    rep.input = std::move(in);
    rep.config = rc;
    rep.machine_space = c.config().machine_space;
    rep.machines = c.machines();
    rep.meter = c.report();
    rep.trace = std::move(trace);
    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(res), std::move(rep)};
}

struct Validity {
    std::size_t size = 0;
    Verdict verdict;
    std::optional<Verdict> cover;
    std::size_t cover_size = 0;
};

// Always recomputed from the graph and the result.
inline Validity judge(const Graph& g, const Result& r) {
    Validity v;
    if (r.kind == Mode::mis) {
        v.size = r.mis.size();
        v.verdict = check_mis(g, r.mis);
    } else {
        v.size = r.matching.size();
        v.verdict = check_mm(g, r.matching);
        const auto cover = vertex_cover_from_mm(g, r.matching);
        Verdict cv = check_cover(g, cover);
        if (cv.valid && cover.size() != 2 * r.matching.size()) cv = Verdict::fail("cover size differs from twice the matching");
        v.cover = cv;
        v.cover_size = cover.size();
    }
    return v;
}

// Everything but wall-clock time; two runs with equal flags and seeds give
// byte-identical dumps.
inline nlohmann::ordered_json report_payload(const Graph& g, const Result& r, const RunReport& rep) {
    using J = nlohmann::ordered_json;
    const Validity val = judge(g, r);
    J j;
    j["schema_version"] = kReportSchemaVersion;
    j["input"] = {{"family", rep.input.family}, {"n", rep.input.n}, {"m", rep.input.m}, {"seed", rep.input.seed},
                  {"degeneracy", rep.input.degeneracy}};
    j["config"] = {{"algo", mode_name(rep.config.mode)},
                   {"epsilon", rep.config.epsilon},
                   {"space_coeff", rep.config.space_coeff},
                   {"fidelity", fidelity_name(rep.config.fidelity)},
                   {"space_mode", space_name(rep.config.space)},
                   {"seed", rep.config.seed},
                   {"strict", rep.config.strict},
                   {"machine_space", rep.machine_space},
                   {"machines", rep.machines}};
    j["meters"] = {{"rounds", rep.meter.rounds_elapsed},
                   {"peak_machine_space", rep.meter.peak_machine_space},
                   {"peak_machine_traffic", rep.meter.peak_machine_traffic},
                   {"peak_total_space", rep.meter.peak_total_space}};
    J res{{"kind", mode_name(r.kind)}, {"size", val.size}};
    res[r.kind == Mode::mis ? "valid_mis" : "valid_mm"] = val.verdict.valid;
    if (!val.verdict.valid) res["violation"] = val.verdict.violation;
    if (val.cover) {
        res["vertex_cover_size"] = val.cover_size;
        res["valid_vertex_cover"] = val.cover->valid;
    }
    j["result"] = res;

    const auto& t = rep.trace;
    J phases = J::array();
    for (const auto& p : t.phases)
        phases.push_back({{"delta", p.delta},
                          {"calls", p.calls},
                          {"success", p.success},
                          {"engine", p.engine},
                          {"high", p.high},
                          {"radius", p.radius},
                          {"capacity", p.capacity},
                          {"rounds", p.rounds}});
    j["trace"] = {{"alpha_hat", t.alpha_hat},
                  {"tau", t.tau},
                  {"delta_hat", t.delta_hat},
                  {"coarse", {{"calls", t.coarse.calls},
                              {"max_degree_before", t.coarse.max_degree_before},
                              {"max_degree_after", t.coarse.max_degree_after},
                              {"rounds", t.coarse.rounds}}},
                  {"phases", phases},
                  {"low_degree", {{"delta", t.low.delta},
                                  {"above_gate", t.low.above_gate},
                                  {"iterations_per_chunk", t.low.iterations_per_chunk},
                                  {"chunks", t.low.chunks},
                                  {"edges_start", t.low.edges_start},
                                  {"edges_left", t.low.edges_left},
                                  {"target_met", t.low.target_met},
                                  {"gather_radius", t.low.gather_radius},
                                  {"largest_component", t.low.largest_component},
                                  {"rounds", t.low.rounds}}}};
    return j;
}

inline nlohmann::ordered_json report_json(const Graph& g, const Result& r, const RunReport& rep) {
    auto j = report_payload(g, r, rep);
    j["wall_clock"] = {{"ms", rep.wall_ms}};
    return j;
}

// Sweep rows: fixed header, appended one run at a time.
inline constexpr std::string_view kSweepHeader =
    "schema_version,family,n,m,seed,degeneracy,algo,space_mode,fidelity,epsilon,space_coeff,strict,rounds,"
    "peak_machine_space,peak_machine_traffic,peak_total_space,result_size,valid,phases,tau,status";

inline std::string sweep_row(const Graph& g, const Result& r, const RunReport& rep) {
    const Validity val = judge(g, r);
    std::ostringstream o;
    o << kReportSchemaVersion << ',' << rep.input.family << ',' << rep.input.n << ',' << rep.input.m << ',' << rep.input.seed << ','
      << rep.input.degeneracy << ',' << mode_name(rep.config.mode) << ',' << space_name(rep.config.space) << ','
      << fidelity_name(rep.config.fidelity) << ',' << rep.config.epsilon << ',' << rep.config.space_coeff << ','
      << (rep.config.strict ? 1 : 0) << ',' << rep.meter.rounds_elapsed << ',' << rep.meter.peak_machine_space << ','
      << rep.meter.peak_machine_traffic << ',' << rep.meter.peak_total_space << ',' << val.size << ','
      << (val.verdict.valid && (!val.cover || val.cover->valid) ? 1 : 0) << ',' << rep.trace.phases.size() << ','
      << rep.trace.tau << ",ok";
    return o.str();
}

// Appends rows, writing the header first when the file is new or empty.
class SweepWriter {
  public:
    explicit SweepWriter(const std::string& path) {
        bool empty = true;
        {
            std::ifstream in(path);
            std::string first;
            if (in && std::getline(in, first)) {
                empty = false;
                if (first != kSweepHeader) throw ArgumentError("'" + path + "' has a different header");
            }
        }
        out_.open(path, std::ios::app);
        if (!out_) throw ArgumentError("cannot open '" + path + "' for writing");
        if (empty) out_ << kSweepHeader << '\n';
    }
    void write(const std::string& row) { out_ << row << '\n' << std::flush; }

  private:
    std::ofstream out_;
};

}  // namespace mpcsim
