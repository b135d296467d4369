#include <CLI11.hpp>

#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "mpcsim/graph/edge_list.hpp"
#include "mpcsim/harness/oracle.hpp"
#include "mpcsim/harness/report.hpp"

using namespace mpcsim;

namespace {

Graph read_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot read '" + path + "'");
    return load_edge_list(in);
}

struct RunFlags {
    std::string algo = "mis";
    std::string input;
    double epsilon = 0.5;
    double space_coeff = 16;
    std::uint64_t seed = 1;
    std::string fidelity = "desk";
    std::string space_mode = "warmup";
    std::string metrics;
    std::string result;
    int strict = -1;  // -1: MPCSIM_STRICT, default strict
    std::optional<double> tau;
};

RunConfig config_of(const RunFlags& f) {
    RunConfig rc;
    rc.mode = parse_mode(f.algo);
    rc.space = parse_space(f.space_mode);
    rc.fidelity = parse_fidelity(f.fidelity);
    rc.epsilon = f.epsilon;
    rc.space_coeff = f.space_coeff;
    rc.seed = f.seed;
    rc.strict = f.strict < 0 ? strict_from_env() : f.strict == 1;
    rc.tau_override = f.tau;
    return rc;
}

void add_run_flags(CLI::App* app, RunFlags& f) {
    app->add_option("--algo", f.algo, "mis or mm")->check(CLI::IsMember({"mis", "mm"}));
    app->add_option("--epsilon", f.epsilon, "space exponent in (0,1)");
    app->add_option("--space-coeff", f.space_coeff, "space coefficient c_s");
    app->add_option("--seed", f.seed, "random seed");
    app->add_option("--fidelity", f.fidelity, "faithful or desk")->check(CLI::IsMember({"faithful", "desk"}));
    app->add_option("--space-mode", f.space_mode, "warmup or optimized")->check(CLI::IsMember({"warmup", "optimized"}));
    app->add_option("--strict", f.strict, "1 enforces caps exactly, 0 allows polylog slack")->check(CLI::IsMember({0, 1}));
    app->add_option("--tau", f.tau, "override the degree threshold");
}

void write_result(const std::string& path, const Result& r) {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write '" + path + "'");
    if (r.kind == Mode::mis)
        for (Vertex v : r.mis) out << v << '\n';
    else
        for (const Edge& e : r.matching) out << e.u << ' ' << e.v << '\n';
}

Result read_result(const std::string& path, Mode mode) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot read '" + path + "'");
    Result r;
    r.kind = mode;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto tok = detail::split_ws(t);
        std::vector<Vertex> ids;
        for (auto s : tok) {
            auto x = detail::parse_uint(s);
            if (!x || *x >= kNoVertex) throw ParseError(lineno, "malformed vertex ID");
            ids.push_back(static_cast<Vertex>(*x));
        }
        if (mode == Mode::mis) {
            if (ids.size() != 1) throw ParseError(lineno, "expected one vertex ID");
            r.mis.push_back(ids[0]);
        } else {
            if (ids.size() != 2 || ids[0] == ids[1]) throw ParseError(lineno, "expected a pair \"u v\"");
            r.matching.emplace_back(ids[0], ids[1]);
        }
    }
    return r;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string x; std::getline(ss, x, ',');)
        if (!x.empty()) out.push_back(x);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MPC simulator for maximal independent set and maximal matching"};
    app.require_subcommand(1);

    // gen
    std::string family = "tree", out_path;
    std::size_t gen_n = 1000, rows = 0, cols = 0, alpha = 2, gen_m = 0;
    std::uint64_t gen_seed = 1;
    auto* gen = app.add_subcommand("gen", "write a generated graph as an edge list");
    gen->add_option("--family", family, "tree, grid, forest_union or gnm")->required();
    gen->add_option("--n", gen_n, "vertex count");
    gen->add_option("--rows", rows, "grid rows");
    gen->add_option("--cols", cols, "grid columns");
    gen->add_option("--alpha", alpha, "forests in forest_union");
    gen->add_option("--m", gen_m, "edge count for gnm");
    gen->add_option("--seed", gen_seed, "random seed");
    gen->add_option("-o,--output", out_path, "output path (stdout when absent)");

    // run
    RunFlags rf;
    auto* run = app.add_subcommand("run", "run the pipeline and emit a report");
    add_run_flags(run, rf);
    run->add_option("--input", rf.input, "edge-list file")->required();
    run->add_option("--metrics", rf.metrics, "report path (stdout when absent)");
    run->add_option("--result", rf.result, "write the result set to this path");

    // verify
    std::string v_algo = "mis", v_input, v_result;
    auto* verify = app.add_subcommand("verify", "check a result file against a graph");
    verify->add_option("--algo", v_algo, "mis or mm")->check(CLI::IsMember({"mis", "mm"}));
    verify->add_option("--input", v_input, "edge-list file")->required();
    verify->add_option("--result", v_result, "vertex IDs (mis) or \"u v\" pairs (mm)")->required();

    // sweep
    RunFlags sf;
    std::string s_families = "tree", s_ns = "1024", s_algos = "mis", s_spaces = "warmup", s_out = "sweep.csv";
    std::size_t s_seeds = 1, s_alpha = 2;
    unsigned jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "grid of runs appended to a CSV file");
    add_run_flags(sweep, sf);
    sweep->add_option("--family", s_families, "comma-separated families");
    sweep->add_option("--n", s_ns, "comma-separated vertex counts");
    sweep->add_option("--seeds", s_seeds, "seeds per cell, starting at --seed");
    sweep->add_option("--alpha", s_alpha, "forests in forest_union");
    sweep->add_option("--algos", s_algos, "comma-separated algorithms");
    sweep->add_option("--space-modes", s_spaces, "comma-separated space modes");
    sweep->add_option("--out", s_out, "CSV path");
    sweep->add_option("--jobs", jobs, "concurrent runs")->check(CLI::Range(1u, 256u));

    // oracle
    std::size_t o_n = 512, o_trials = 20;
    std::uint64_t o_seed = 1;
    bool o_hops = false;
    auto* oracle = app.add_subcommand("oracle", "compressed-versus-direct equivalence battery");
    oracle->add_option("--n", o_n, "vertices per instance");
    oracle->add_option("--trials", o_trials, "number of cases");
    oracle->add_option("--seed", o_seed, "random seed");
    oracle->add_flag("--hops", o_hops, "also check collected balls against sequential ones");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            GenParams p;
            p.n = gen_n;
            p.rows = rows;
            p.cols = cols;
            p.alpha = alpha;
            p.m = gen_m;
            const Family f = parse_family(family);
            Graph g = f == Family::grid && rows == 0 ? make_instance(f, gen_n, gen_seed) : generate(f, p, gen_seed);
            if (out_path.empty()) {
                write_edge_list(std::cout, g);
            } else {
                std::ofstream out(out_path);
                if (!out) throw ArgumentError("cannot write '" + out_path + "'");
                write_edge_list(out, g);
            }
            return 0;
        }
        if (*run) {
            const Graph g = read_graph(rf.input);
            InputDescriptor in;
            in.seed = rf.seed;
            auto [res, rep] = run_instance(g, in, config_of(rf));
            const auto j = report_json(g, res, rep);
            if (rf.metrics.empty()) {
                std::cout << j.dump(2) << '\n';
            } else {
                std::ofstream out(rf.metrics);
                if (!out) throw ArgumentError("cannot write '" + rf.metrics + "'");
                out << j.dump(2) << '\n';
            }
            if (!rf.result.empty()) write_result(rf.result, res);
            return 0;
        }
        if (*verify) {
            const Graph g = read_graph(v_input);
            const Mode mode = parse_mode(v_algo);
            const Result r = read_result(v_result, mode);
            const Verdict v = mode == Mode::mis ? check_mis(g, r.mis) : check_mm(g, r.matching);
            std::cout << (v.valid ? "valid" : "invalid: " + v.violation) << '\n';
            return v.valid ? 0 : 1;
        }
        if (*sweep) {
            struct Cell {
                Family family;
                std::size_t n;
                std::uint64_t seed;
                Mode mode;
                SpaceMode space;
            };
            std::vector<Cell> cells;
            for (const auto& fam : split_list(s_families))
                for (const auto& ns : split_list(s_ns))
                    for (std::size_t k = 0; k < s_seeds; ++k)
                        for (const auto& a : split_list(s_algos))
                            for (const auto& sp : split_list(s_spaces))
                                cells.push_back({parse_family(fam), std::stoul(ns), sf.seed + k, parse_mode(a), parse_space(sp)});
            SweepWriter writer(s_out);
            auto one = [&](const Cell& cell) {
                const Graph g = make_instance(cell.family, cell.n, cell.seed, s_alpha);
                RunConfig rc = config_of(sf);
                rc.mode = cell.mode;
                rc.space = cell.space;
                rc.seed = cell.seed;
                InputDescriptor in;
                in.family = std::string(family_name(cell.family));
                in.seed = cell.seed;
                try {
                    auto [res, rep] = run_instance(g, in, rc);
                    return sweep_row(g, res, rep);
                } catch (const SimulationFault& e) {
                    std::cerr << "fault: " << e.what() << '\n';
                    return std::string();
                }
            };
            // Runs go out in batches; rows are written in cell order.
            std::size_t faults = 0;
            for (std::size_t i = 0; i < cells.size(); i += jobs) {
                std::vector<std::future<std::string>> batch;
                for (std::size_t k = i; k < std::min(cells.size(), i + jobs); ++k)
                    batch.push_back(std::async(std::launch::async, one, cells[k]));
                for (auto& f : batch) {
                    auto row = f.get();
                    if (row.empty())
                        ++faults;
                    else
                        writer.write(row);
                }
            }
            std::cout << cells.size() - faults << " rows appended to " << s_out << '\n';
            return faults == 0 ? 0 : 1;
        }
        if (*oracle) {
            const OracleTally t = compression_oracle(o_n, o_trials, o_seed);
            std::cout << "compression: " << t.equal << "/" << t.cases << " bit-equal\n";
            for (const auto& m : t.mismatches) std::cout << "  mismatch: " << m << '\n';
            bool ok = t.all_equal();
            if (o_hops) {
                const OracleTally h = hop_oracle(o_n, o_trials, o_seed);
                std::cout << "hops: " << h.equal << "/" << h.cases << " equal\n";
                for (const auto& m : h.mismatches) std::cout << "  mismatch: " << m << '\n';
                ok = ok && h.all_equal();
            }
            return ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
