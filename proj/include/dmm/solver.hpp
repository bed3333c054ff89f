#pragma once

// Full solve: random initial voltages, Euler stepping, periodic sign readout
// checked against the Boolean evaluator.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dmm/cnf.hpp"
#include "dmm/dynamics.hpp"
#include "dmm/errors.hpp"
#include "dmm/rng.hpp"

namespace dmm {

enum class Precision { float32, float64 };
enum class Outcome { sat, budget_exhausted };

inline const char* to_string(Outcome o) { return o == Outcome::sat ? "SAT" : "budget_exhausted"; }
inline const char* to_string(Precision p) { return p == Precision::float32 ? "float32" : "float64"; }

struct SolveConfig {
    Params params;
    std::uint64_t max_steps = 10'000'000;
    std::uint64_t check_every = 1;
    std::uint64_t seed = 0;
    Precision precision = Precision::float64;

    /// Defaults for `inst`, with every parameter materialized.
    static SolveConfig for_instance(const Instance& inst, std::uint64_t seed = 0) {
        SolveConfig c;
        c.params = Params::for_instance(inst);
        c.seed = seed;
        return c;
    }

    void validate() const {
        params.validate();
        if (max_steps < 1) throw ConfigError("max_steps must be at least 1");
        if (check_every < 1) throw ConfigError("check_every must be at least 1");
    }
};

struct RunRecord {
    Outcome outcome = Outcome::budget_exhausted;
    std::optional<std::vector<bool>> assignment;
    std::uint64_t steps = 0;
    double wall_time = 0.0;
    std::uint64_t seed = 0;
    std::string digest;
    // Filled by the hardware emulator only.
    std::optional<std::uint64_t> cycles;
    std::uint64_t saturations = 0;
};

/// One diagnostic row of a traced solve.
struct TraceRow {
    std::uint64_t t;
    std::size_t unsatisfied;
    double max_clause;
    double max_xl;
};

using TraceSink = std::function<void(const TraceRow&)>;

/// State at t = 0 for the given voltages: xl = 1 and xs = C_m(v) clamped
/// into [eps, 1 - eps].
template <std::floating_point Real>
SolverState<Real> initial_state(const Instance& inst, std::vector<Real> v, const Params& p) {
    if (v.size() != inst.num_vars()) throw ContractViolation("voltage vector length mismatch");
    SolverState<Real> s;
    s.v = std::move(v);
    const Real eps = Real(p.epsilon);
    s.xs.resize(inst.num_clauses());
    s.xl.assign(inst.num_clauses(), Real(1));
    for (std::size_t m = 0; m < inst.num_clauses(); ++m)
        s.xs[m] = std::clamp(clause_value<Real>(inst, std::span<const Real>(s.v), m), eps,
                             Real(1) - eps);
    return s;
}

/// Random initial condition: v ~ U[-1, 1) drawn from config.seed.
template <std::floating_point Real>
SolverState<Real> initialize(const Instance& inst, const SolveConfig& config) {
    Rng rng(config.seed);
    std::vector<Real> v(inst.num_vars());
    for (auto& x : v) x = static_cast<Real>(uniform(rng, -1.0, 1.0));
    return initial_state(inst, std::move(v), config.params);
}

namespace detail {

template <std::floating_point Real>
TraceRow trace_row(const Instance& inst, const SolverState<Real>& s) {
    TraceRow row{s.t, count_unsatisfied(inst, extract_assignment(s)), 0.0, 0.0};
    for (std::size_t m = 0; m < inst.num_clauses(); ++m) {
        row.max_clause =
            std::max(row.max_clause, double(clause_value<Real>(inst, std::span<const Real>(s.v), m)));
        row.max_xl = std::max(row.max_xl, double(s.xl[m]));
    }
    return row;
}

/// Shared stepping loop. `step` advances the state by one Euler step; the
/// readout is checked at t = 0, every `check_every` steps, and at the budget.
template <typename State, typename Step, typename Readout, typename Trace>
RunRecord run_loop(const Instance& inst, const SolveConfig& config, State& state, Step&& step,
                   Readout&& readout, std::uint64_t trace_every, Trace&& trace) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.seed = config.seed;
    rec.digest = instance_digest(inst);

    for (std::uint64_t t = 0;; ++t) {
        const bool at_budget = t == config.max_steps;
        if (t % config.check_every == 0 || at_budget) {
            auto a = readout(state);
            if (evaluate(inst, a)) {
                if (trace_every && t > 0 && t % trace_every != 0) trace(state);
                rec.outcome = Outcome::sat;
                rec.assignment = std::move(a);
                rec.steps = t;
                break;
            }
        }
        if (at_budget) {
            if (trace_every && t > 0 && t % trace_every != 0) trace(state);
            rec.steps = t;
            break;
        }
        step(state);
        if (trace_every && (t + 1) % trace_every == 0) trace(state);
    }
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

template <std::floating_point Real>
RunRecord solve_impl(const Instance& inst, const SolveConfig& config, std::uint64_t trace_every,
                     const TraceSink& sink) {
    auto state = initialize<Real>(inst, config);
    Derivatives<Real> scratch;
    return run_loop(
        inst, config, state,
        [&](SolverState<Real>& s) {
            derivatives(inst, s, config.params, scratch);
            apply_euler(s, scratch, config.params);
        },
        [](const SolverState<Real>& s) { return extract_assignment(s); }, trace_every,
        [&](const SolverState<Real>& s) { sink(trace_row(inst, s)); });
}

} // namespace detail

inline RunRecord solve(const Instance& inst, const SolveConfig& config) {
    const TraceSink none = [](const TraceRow&) {};
    return config.precision == Precision::float32
               ? detail::solve_impl<float>(inst, config, 0, none)
               : detail::solve_impl<double>(inst, config, 0, none);
}

/// As solve, also emitting a TraceRow every `trace_every` steps and at the final step.
inline RunRecord solve_traced(const Instance& inst, const SolveConfig& config,
                              std::uint64_t trace_every, const TraceSink& sink) {
    if (trace_every < 1) throw ConfigError("trace_every must be at least 1");
    return config.precision == Precision::float32
               ? detail::solve_impl<float>(inst, config, trace_every, sink)
               : detail::solve_impl<double>(inst, config, trace_every, sink);
}

} // namespace dmm
