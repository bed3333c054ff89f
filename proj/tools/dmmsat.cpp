// dmmsat: command-line front end for the memcomputing 3-SAT library.
//
//   dmmsat generate -N 50 -r 4.3 --seed 7 -o inst.cnf
//   dmmsat solve inst.cnf --seed 1 [--engine hw --frac-bits 20] [--trace t.csv]
//   dmmsat bench --sizes 10,30,50 --ratios 4.3,7 --csv runs.csv
//   dmmsat fit runs.csv
//   dmmsat estimate-luts 5000 --board VU9P
//
// Exit codes: 0 success, 1 solve ran out of budget, 2 usage or input error.
// Machine-readable output goes to stdout (or --out); summaries go to stderr.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dmm/dmm.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBudget = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path + "'");
    out << text;
}

json assignment_json(const std::vector<bool>& a) {
    auto arr = json::array();
    for (bool b : a) arr.push_back(b ? 1 : 0);
    return arr;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
    std::size_t num_vars = 10;
    double ratio = 4.3;
    double p0 = 0.08;
    std::uint64_t seed = 0;
    std::string out;
    std::string sidecar;
};

int run_generate(const GenerateArgs& a) {
    const dmm::GeneratorConfig cfg{a.num_vars, a.ratio, a.p0, a.seed};
    const auto planted = dmm::generate(cfg);
    write_output(a.out, dmm::serialize_dimacs(planted.instance));

    json side;
    side["command"] = "generate";
    side["N"] = cfg.num_vars;
    side["M"] = planted.instance.num_clauses();
    side["ratio"] = cfg.ratio;
    side["p0"] = cfg.p0;
    side["seed"] = cfg.seed;
    side["rng"] = "mt19937_64";
    side["digest"] = dmm::instance_digest(planted.instance);
    side["pattern_counts"] = planted.pattern_counts;
    side["planted"] = assignment_json(planted.planted);

    std::string sidecar = a.sidecar;
    if (sidecar.empty() && !a.out.empty() && a.out != "-") sidecar = a.out + ".json";
    if (!sidecar.empty()) write_output(sidecar, side.dump(2) + "\n");
    std::cerr << "generated N=" << cfg.num_vars << " M=" << planted.instance.num_clauses()
              << " seed=" << cfg.seed << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// solve

struct SolveArgs {
    std::string instance;
    std::string out;
    std::string trace;
    std::uint64_t trace_every = 1;
    std::string replay;

    std::uint64_t seed = 0;
    std::uint64_t max_steps = 10'000'000;
    std::uint64_t check_every = 1;
    std::string precision = "64";
    std::string engine = "float";
    std::string ties = "all";
    std::optional<double> dt, alpha, beta, gamma, delta, epsilon, zeta, xl_max;
    int int_bits = 11;
    int frac_bits = 20;
    int memory_int_bits = 0;
    std::uint64_t cycles_per_interval = 1;
    double clock_hz = dmm::kDefaultClockHz;
};

json params_json(const dmm::Params& p) {
    json j;
    j["alpha"] = p.alpha;
    j["beta"] = p.beta;
    j["gamma"] = p.gamma;
    j["delta"] = p.delta;
    j["epsilon"] = p.epsilon;
    j["zeta"] = p.zeta;
    j["dt"] = p.dt;
    j["xl_max"] = p.xl_max;
    j["tie_rule"] = p.ties == dmm::TieRule::all_minimal ? "all" : "first";
    return j;
}

/// Fills unset fields of `a` from a previously emitted resolved config.
/// Flags given on the command line (`given`) win.
void apply_replay(SolveArgs& a, const std::function<bool(const std::string&)>& given) {
    auto doc = json::parse(read_file(a.replay));
    const json& c = doc.contains("config") ? doc["config"] : doc;
    auto take = [&](const char* flag, const char* key, auto& field) {
        if (!given(flag) && c.contains(key)) c.at(key).get_to(field);
    };
    auto take_opt = [&](const char* flag, const char* key, std::optional<double>& field) {
        if (!given(flag) && c.contains("params") && c["params"].contains(key))
            field = c["params"].at(key).get<double>();
    };
    if (a.instance.empty() && c.contains("instance")) a.instance = c["instance"].get<std::string>();
    take("--seed", "seed", a.seed);
    take("--max-steps", "max_steps", a.max_steps);
    take("--check-every", "check_every", a.check_every);
    take("--precision", "precision", a.precision);
    take("--engine", "engine", a.engine);
    take("--clock-hz", "clock_hz", a.clock_hz);
    take_opt("--dt", "dt", a.dt);
    take_opt("--alpha", "alpha", a.alpha);
    take_opt("--beta", "beta", a.beta);
    take_opt("--gamma", "gamma", a.gamma);
    take_opt("--delta", "delta", a.delta);
    take_opt("--epsilon", "epsilon", a.epsilon);
    take_opt("--zeta", "zeta", a.zeta);
    take_opt("--xl-max", "xl_max", a.xl_max);
    if (!given("--tie-rule") && c.contains("params") && c["params"].contains("tie_rule"))
        a.ties = c["params"]["tie_rule"].get<std::string>();
    if (c.contains("hw")) {
        const auto& h = c["hw"];
        if (!given("--int-bits") && h.contains("int_bits")) a.int_bits = h["int_bits"];
        if (!given("--frac-bits") && h.contains("frac_bits")) a.frac_bits = h["frac_bits"];
        if (!given("--memory-int-bits") && h.contains("memory_int_bits"))
            a.memory_int_bits = h["memory_int_bits"];
        if (!given("--cycles-per-interval") && h.contains("cycles_per_interval"))
            a.cycles_per_interval = h["cycles_per_interval"];
    }
}

int run_solve(SolveArgs a) {
    if (a.instance.empty()) throw UsageError("solve needs an instance path");
    std::ifstream in(a.instance);
    if (!in) throw UsageError("cannot open '" + a.instance + "'");
    const dmm::Instance inst = dmm::parse_dimacs(in);

    auto cfg = dmm::SolveConfig::for_instance(inst, a.seed);
    auto& p = cfg.params;
    if (a.dt) p.dt = *a.dt;
    if (a.alpha) p.alpha = *a.alpha;
    if (a.beta) p.beta = *a.beta;
    if (a.gamma) p.gamma = *a.gamma;
    if (a.delta) p.delta = *a.delta;
    if (a.epsilon) p.epsilon = *a.epsilon;
    if (a.zeta) p.zeta = *a.zeta;
    if (a.xl_max) p.xl_max = *a.xl_max;
    p.ties = a.ties == "first" ? dmm::TieRule::first_minimal : dmm::TieRule::all_minimal;
    cfg.max_steps = a.max_steps;
    cfg.check_every = a.check_every;
    cfg.precision = a.precision == "32" || a.precision == "float32" ? dmm::Precision::float32
                                                                     : dmm::Precision::float64;
    const bool hw = a.engine == "hw";
    const dmm::HwConfig hwc{{a.int_bits, a.frac_bits}, a.memory_int_bits, a.cycles_per_interval};

    json config;
    config["command"] = "solve";
    config["instance"] = a.instance;
    config["digest"] = dmm::instance_digest(inst);
    config["N"] = inst.num_vars();
    config["M"] = inst.num_clauses();
    config["seed"] = cfg.seed;
    config["max_steps"] = cfg.max_steps;
    config["check_every"] = cfg.check_every;
    config["precision"] = cfg.precision == dmm::Precision::float32 ? "32" : "64";
    config["engine"] = hw ? "hw" : "float";
    config["clock_hz"] = a.clock_hz;
    config["params"] = params_json(p);
    if (hw) {
        const dmm::HwDatapath dp(inst, p, hwc);
        config["hw"] = {{"int_bits", a.int_bits},
                        {"frac_bits", a.frac_bits},
                        {"memory_int_bits", dp.memory.int_bits},
                        {"cycles_per_interval", a.cycles_per_interval}};
    }

    std::ofstream trace_out;
    dmm::TraceSink sink = [](const dmm::TraceRow&) {};
    std::uint64_t trace_every = 0;
    if (!a.trace.empty()) {
        trace_out.open(a.trace);
        if (!trace_out) throw UsageError("cannot write '" + a.trace + "'");
        trace_out << "t,unsatisfied,max_clause,max_xl\n";
        trace_every = a.trace_every;
        sink = [&](const dmm::TraceRow& r) {
            trace_out << r.t << ',' << r.unsatisfied << ',' << r.max_clause << ',' << r.max_xl << '\n';
        };
    }

    dmm::RunRecord rec;
    if (hw)
        rec = dmm::solve_hw(inst, cfg, hwc, trace_every, sink);
    else
        rec = trace_every ? dmm::solve_traced(inst, cfg, trace_every, sink) : dmm::solve(inst, cfg);

    // Never report SAT without an independent check.
    if (rec.outcome == dmm::Outcome::sat && !dmm::evaluate(inst, *rec.assignment))
        throw std::logic_error("solver reported an assignment that does not satisfy the formula");

    const std::uint64_t cpi = hw ? a.cycles_per_interval : 1;
    json result;
    result["outcome"] = dmm::to_string(rec.outcome);
    result["steps"] = rec.steps;
    result["wall_time"] = rec.wall_time;
    result["seed"] = rec.seed;
    result["digest"] = rec.digest;
    result["cycles"] = rec.cycles.value_or(rec.steps * (inst.num_clauses() + 1) * cpi);
    result["projected_hw_s"] = dmm::project_hw_time(rec.steps, inst.num_clauses(), a.clock_hz, cpi);
    if (hw) result["saturations"] = rec.saturations;
    result["assignment"] = rec.assignment ? assignment_json(*rec.assignment) : json(nullptr);

    json doc;
    doc["config"] = config;
    doc["result"] = result;
    write_output(a.out, doc.dump(2) + "\n");
    std::cerr << dmm::to_string(rec.outcome) << " after " << rec.steps << " steps ("
              << rec.wall_time << " s)\n";
    return rec.outcome == dmm::Outcome::sat ? kExitOk : kExitBudget;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
    dmm::SweepSpec spec;
    std::string engine = "float";
    std::string spec_file;
    std::string csv;
    std::string json_out;
    int int_bits = 11;
    int frac_bits = 20;
};

void load_spec(BenchArgs& a, const std::function<bool(const std::string&)>& given) {
    const auto j = json::parse(read_file(a.spec_file));
    auto& s = a.spec;
    auto take = [&](const char* flag, const char* key, auto& field) {
        if (!given(flag) && j.contains(key)) j.at(key).get_to(field);
    };
    take("--sizes", "sizes", s.sizes);
    take("--ratios", "ratios", s.ratios);
    take("--instances", "instances", s.instances);
    take("--p0", "p0", s.p0);
    take("--seed", "seed", s.base_seed);
    take("--max-steps", "max_steps", s.max_steps);
    take("--dt", "dt", s.dt);
    take("--threads", "threads", s.threads);
    take("--clock-hz", "clock_hz", s.clock_hz);
    take("--engine", "engine", a.engine);
    take("--int-bits", "int_bits", a.int_bits);
    take("--frac-bits", "frac_bits", a.frac_bits);
}

int run_bench(BenchArgs a, const std::function<bool(const std::string&)>& given) {
    if (!a.spec_file.empty()) load_spec(a, given);
    a.spec.engine = a.engine == "hw" ? dmm::Engine::hw : dmm::Engine::float64;
    a.spec.hw.value = {a.int_bits, a.frac_bits};
    const auto table = dmm::run_sweep(a.spec);

    const auto csv = dmm::export_csv(table);
    if (!a.csv.empty()) write_output(a.csv, csv);
    if (!a.json_out.empty()) write_output(a.json_out, dmm::export_json(table));
    if (a.csv.empty() && a.json_out.empty()) std::cout << csv;

    std::size_t solved = 0;
    for (const auto& r : table) solved += r.outcome == dmm::Outcome::sat;
    std::cerr << "solved " << solved << "/" << table.size() << " (engine " << dmm::to_string(a.spec.engine)
              << ", base seed " << a.spec.base_seed << ")\n";
    for (double ratio : a.spec.ratios) {
        const auto pts = dmm::median_points(table, ratio);
        std::cerr << "  M/N=" << ratio << " median steps:";
        for (const auto& [n, med] : pts) std::cerr << " N=" << n << ":" << med;
        std::cerr << '\n';
        if (pts.size() >= 3) {
            const auto steps_fit = dmm::fit_allometric(pts);
            const auto hw_fit = dmm::fit_allometric(dmm::median_points(table, ratio, dmm::Metric::projected_hw_s));
            std::cerr << "  exponent (steps) " << steps_fit.exponent << " +- " << steps_fit.exponent_stderr
                      << ", (projected hw time) " << hw_fit.exponent << " +- " << hw_fit.exponent_stderr
                      << '\n';
        }
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// fit

int run_fit(const std::string& path, const std::string& metric_name, const std::string& out) {
    const auto text = read_file(path);
    std::vector<dmm::SweepRecord> table;
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        table = dmm::parse_json(text);
    } else {
        std::istringstream in(text);
        table = dmm::parse_csv(in);
    }
    const auto metric = metric_name == "wall_s"           ? dmm::Metric::wall_s
                        : metric_name == "projected_hw_s" ? dmm::Metric::projected_hw_s
                                                          : dmm::Metric::steps;
    std::vector<double> ratios;
    for (const auto& r : table)
        if (std::find(ratios.begin(), ratios.end(), r.ratio) == ratios.end()) ratios.push_back(r.ratio);
    std::sort(ratios.begin(), ratios.end());

    json doc;
    doc["command"] = "fit";
    doc["input"] = path;
    doc["metric"] = metric_name;
    doc["fits"] = json::array();
    for (double ratio : ratios) {
        const auto f = dmm::fit_allometric(dmm::median_points(table, ratio, metric));
        json j;
        j["ratio"] = ratio;
        j["exponent"] = f.exponent;
        j["exponent_stderr"] = f.exponent_stderr;
        j["prefactor"] = f.prefactor;
        j["points"] = json::array();
        for (const auto& [n, med] : f.points) j["points"].push_back({{"N", n}, {"median", med}});
        doc["fits"].push_back(j);
        std::cerr << "M/N=" << ratio << ": " << metric_name << " ~ " << f.prefactor << " * N^"
                  << f.exponent << " (+- " << f.exponent_stderr << ")\n";
    }
    write_output(out, doc.dump(2) + "\n");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// estimate-luts

int run_estimate(std::uint64_t n, const std::string& board, const std::string& out) {
    const dmm::ResourceModel model;
    json doc;
    doc["command"] = "estimate-luts";
    doc["N"] = n;
    doc["luts"] = dmm::estimate_luts(n, model);
    doc["piece"] = double(n) < model.crossover() ? "small" : "large";
    doc["crossover_N"] = model.crossover();
    if (!board.empty()) {
        const double cap = model.board_capacity(board);
        doc["board"] = board;
        doc["capacity"] = cap;
        doc["fits"] = dmm::estimate_luts(n, model) <= cap;
        doc["max_N"] = dmm::max_vars_for_capacity(cap, model);
    }
    write_output(out, doc.dump(2) + "\n");
    std::cerr << "N=" << n << ": " << doc["luts"].get<double>() << " LUTs\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Digital memcomputing 3-SAT solver, instance generator and benchmark harness", "dmmsat"};
    app.require_subcommand(1);
    const auto engines = CLI::IsMember({"float", "hw"});

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Write a planted hard 3-SAT instance as DIMACS plus a JSON sidecar");
    g->add_option("-N,--num-vars", gen.num_vars, "Number of variables")->capture_default_str();
    g->add_option("-r,--ratio", gen.ratio, "Clause to variable ratio M/N")->capture_default_str();
    g->add_option("--p0", gen.p0, "Probability of a clause with no negations, in (0.077, 0.25)")
        ->capture_default_str();
    g->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
    g->add_option("-o,--out", gen.out, "DIMACS output path (stdout if omitted)");
    g->add_option("--sidecar", gen.sidecar, "Sidecar JSON path (default: <out>.json)");

    SolveArgs sol;
    auto* s = app.add_subcommand("solve", "Integrate the memcomputing dynamics on a DIMACS instance");
    s->add_option("instance", sol.instance, "DIMACS CNF file");
    s->add_option("--config", sol.replay, "Replay the resolved config of an earlier solve JSON");
    s->add_option("--seed", sol.seed, "Seed for the initial voltages")->capture_default_str();
    s->add_option("--max-steps", sol.max_steps, "Euler step budget")->capture_default_str();
    s->add_option("--check-every", sol.check_every, "Check the sign assignment every k steps")
        ->capture_default_str();
    s->add_option("--dt", sol.dt, "Time step (default 2^-5)");
    s->add_option("--alpha", sol.alpha);
    s->add_option("--beta", sol.beta);
    s->add_option("--gamma", sol.gamma);
    s->add_option("--delta", sol.delta);
    s->add_option("--epsilon", sol.epsilon);
    s->add_option("--zeta", sol.zeta, "Default: 0.1 if M/N >= 5.65 else 0.001");
    s->add_option("--xl-max", sol.xl_max, "Upper bound of xl (default 1e4 * M)");
    s->add_option("--tie-rule", sol.ties, "Rigidity on ties: all minimal literals or only the first")
        ->check(CLI::IsMember({"all", "first"}))
        ->capture_default_str();
    s->add_option("--precision", sol.precision, "Float engine precision")
        ->check(CLI::IsMember({"32", "64", "float32", "float64"}))
        ->capture_default_str();
    s->add_option("--engine", sol.engine, "float reference or hw fixed-point emulator")
        ->check(engines)
        ->capture_default_str();
    s->add_option("--int-bits", sol.int_bits, "hw: integer bits of the value format")->capture_default_str();
    s->add_option("--frac-bits", sol.frac_bits, "hw: fraction bits")->capture_default_str();
    s->add_option("--memory-int-bits", sol.memory_int_bits, "hw: integer bits for xl and sums (0 = auto)")
        ->capture_default_str();
    s->add_option("--cycles-per-interval", sol.cycles_per_interval, "hw: clock cycles per schedule interval")
        ->capture_default_str();
    s->add_option("--clock-hz", sol.clock_hz, "Clock for the hardware time projection")->capture_default_str();
    s->add_option("-o,--out", sol.out, "JSON output path (stdout if omitted)");
    s->add_option("--trace", sol.trace, "Write a diagnostic trace CSV");
    s->add_option("--trace-every", sol.trace_every, "Trace cadence in steps")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "Run a scaling sweep over planted instances");
    b->add_option("--spec", bench.spec_file, "JSON sweep spec (flags override its fields)");
    b->add_option("--sizes", bench.spec.sizes, "Ascending list of N")->delimiter(',')->capture_default_str();
    b->add_option("--ratios", bench.spec.ratios, "List of M/N")->delimiter(',')->capture_default_str();
    b->add_option("--instances", bench.spec.instances, "Instances per (N, ratio)")->capture_default_str();
    b->add_option("--p0", bench.spec.p0)->capture_default_str();
    b->add_option("--seed", bench.spec.base_seed, "Base seed")->capture_default_str();
    b->add_option("--max-steps", bench.spec.max_steps)->capture_default_str();
    b->add_option("--dt", bench.spec.dt)->capture_default_str();
    b->add_option("--engine", bench.engine)->check(engines)->capture_default_str();
    b->add_option("--int-bits", bench.int_bits)->capture_default_str();
    b->add_option("--frac-bits", bench.frac_bits)->capture_default_str();
    b->add_option("--clock-hz", bench.spec.clock_hz)->capture_default_str();
    b->add_option("--threads", bench.spec.threads, "Worker threads (0 = all cores)")->capture_default_str();
    b->add_option("--csv", bench.csv, "CSV output path");
    b->add_option("--json", bench.json_out, "JSON output path");

    std::string fit_path, fit_metric = "steps", fit_out;
    auto* f = app.add_subcommand("fit", "Allometric fit of median cost versus N from a bench table");
    f->add_option("results", fit_path, "CSV (or .json) written by bench")->required();
    f->add_option("--metric", fit_metric)
        ->check(CLI::IsMember({"steps", "wall_s", "projected_hw_s"}))
        ->capture_default_str();
    f->add_option("-o,--out", fit_out, "JSON output path (stdout if omitted)");

    std::uint64_t lut_n = 0;
    std::string board, lut_out;
    auto* e = app.add_subcommand("estimate-luts", "LUT estimate for an N-variable design");
    e->add_option("N", lut_n, "Number of variables")->required();
    e->add_option("--board", board, "Board to check: XC7A100T, VU9P, VU19P, GX10M");
    e->add_option("-o,--out", lut_out, "JSON output path (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*g) return run_generate(gen);
        if (*s) {
            if (!sol.replay.empty())
                apply_replay(sol, [&](const std::string& flag) { return s->count(flag) > 0; });
            return run_solve(sol);
        }
        if (*b) return run_bench(bench, [&](const std::string& flag) { return b->count(flag) > 0; });
        if (*f) return run_fit(fit_path, fit_metric, fit_out);
        if (*e) return run_estimate(lut_n, board, lut_out);
    } catch (const dmm::ParseError& err) {
        std::cerr << "parse error: " << err.what() << '\n';
        return kExitUsage;
    } catch (const UsageError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
