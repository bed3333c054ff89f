#pragma once

// Software model of the FPGA datapath: fixed-point arithmetic and the
// interval schedule of one Euler step.
//
// A macro step (t -> t + dt) is split into M + 1 intervals. Interval m < M
// reads the clause's three voltages from block RAM, evaluates C_m, G and R,
// adds the clause's contribution into per-variable accumulators and updates
// the clause-local memories xs_m, xl_m. Interval M writes the accumulated
// voltage updates back. Voltage writes are therefore never visible to clause
// evaluations of the same macro step.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dmm/cnf.hpp"
#include "dmm/dynamics.hpp"
#include "dmm/fixed_point.hpp"
#include "dmm/solver.hpp"

namespace dmm {

struct HwConfig {
    /// Format of voltages, xs and the per-clause C/G/R registers.
    FixedPointFormat value{11, 20};
    /// Integer bits of the memory/accumulator format (xl, weights, sums).
    /// Shares value.frac_bits. Zero means: size it to the instance.
    int memory_int_bits = 0;
    std::uint64_t cycles_per_interval = 1;

    /// 40 fraction bits; close enough to float64 for cross-checking.
    static HwConfig wide() { return HwConfig{{3, 40}, 0, 1}; }
};

/// Resolved formats and quantized constants for one instance.
struct HwDatapath {
    FixedPointFormat value;
    FixedPointFormat memory;
    std::int64_t alpha, beta, gamma, delta, eps, zeta, dt;
    std::int64_t one, xs_lo, xs_hi, xl_max;
    TieRule ties;

    HwDatapath(const Instance& inst, const Params& p, const HwConfig& cfg) : ties(p.ties) {
        p.validate();
        value = cfg.value;
        value.validate();
        if (!value.covers(-1.0, 1.0))
            throw ConfigError("value format cannot represent [-1, 1]");
        int mem_int = cfg.memory_int_bits;
        if (mem_int == 0) mem_int = static_cast<int>(std::ceil(std::log2(p.xl_max))) + 2;
        memory = {mem_int, value.frac_bits};
        memory.validate();
        if (!memory.covers(0.0, p.xl_max))
            throw ConfigError("memory format cannot represent xl up to " + std::to_string(p.xl_max) +
                              " for M = " + std::to_string(inst.num_clauses()));
        if (!memory.covers(0.0, std::max({p.alpha, p.beta, p.gamma, p.delta, p.zeta, p.dt})))
            throw ConfigError("memory format cannot represent the dynamics constants");
        alpha = quantize(p.alpha, memory).raw;
        beta = quantize(p.beta, memory).raw;
        gamma = quantize(p.gamma, memory).raw;
        delta = quantize(p.delta, memory).raw;
        eps = quantize(p.epsilon, memory).raw;
        zeta = quantize(p.zeta, memory).raw;
        dt = quantize(p.dt, memory).raw;
        one = memory.one();
        xs_lo = eps;
        xs_hi = one - eps;
        xl_max = quantize(p.xl_max, memory).raw;
    }

    int frac() const noexcept { return value.frac_bits; }
};

struct HwState {
    std::vector<std::int64_t> v;
    std::vector<std::int64_t> xs;
    std::vector<std::int64_t> xl;
    std::uint64_t t = 0;
    std::uint64_t cycles = 0;
    SaturationStats saturation;

    template <std::floating_point Real = double>
    SolverState<Real> to_float(int frac_bits) const {
        SolverState<Real> s;
        auto conv = [&](const std::vector<std::int64_t>& in, std::vector<Real>& out) {
            out.resize(in.size());
            for (std::size_t i = 0; i < in.size(); ++i)
                out[i] = static_cast<Real>(std::ldexp(double(in[i]), -frac_bits));
        };
        conv(v, s.v);
        conv(xs, s.xs);
        conv(xl, s.xl);
        s.t = t;
        return s;
    }
};

inline HwState quantize_state(const SolverState<double>& s, const HwDatapath& dp) {
    HwState h;
    h.t = s.t;
    auto conv = [&](const std::vector<double>& in, std::vector<std::int64_t>& out,
                    const FixedPointFormat& f) {
        out.resize(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = quantize(in[i], f, &h.saturation).raw;
    };
    conv(s.v, h.v, dp.value);
    conv(s.xs, h.xs, dp.value);
    conv(s.xl, h.xl, dp.memory);
    return h;
}

/// Hooks into the schedule. The default does nothing and compiles away.
struct NullScheduleObserver {
    void on_interval(std::uint64_t /*phase*/) {}
    void on_voltage_read(std::size_t /*clause*/, std::uint32_t /*var*/, std::int64_t /*raw*/) {}
    void on_voltage_write(std::uint32_t /*var*/, std::int64_t /*raw*/) {}
};

/// Register values produced by one clause interval.
struct ClauseInterval {
    std::int64_t c;
    std::array<std::int64_t, 3> g;
    std::array<std::int64_t, 3> r;
    std::array<std::int64_t, 3> contribution;
};

namespace detail {

constexpr wide_int halve(wide_int x) noexcept { return shift_round_even(x, 1); }

} // namespace detail

/// Evaluates clause m against the voltage snapshot `v` (interval m of the
/// macro step), reading xs_m / xl_m as they were at the start of the step.
template <typename Observer = NullScheduleObserver>
ClauseInterval evaluate_clause_interval(const Instance& inst, const HwDatapath& dp,
                                        const std::vector<std::int64_t>& v, std::int64_t xs,
                                        std::int64_t xl, std::size_t m, SaturationStats& sat,
                                        Observer& obs) {
    const auto& cl = inst.clause(m);
    const int F = dp.frac();
    std::array<std::int64_t, 3> term;
    std::array<std::int64_t, 3> vin;
    for (std::size_t s = 0; s < 3; ++s) {
        vin[s] = v[cl[s].var];
        obs.on_voltage_read(m, cl[s].var, vin[s]);
        term[s] = dp.one - sign_of(cl[s].polarity) * vin[s];
    }
    const std::int64_t tmin = std::min({term[0], term[1], term[2]});

    ClauseInterval out;
    out.c = saturate(detail::halve(tmin), dp.value, &sat);
    const std::int64_t grad_w = saturate(fx_mul(xl, xs, F), dp.memory, &sat);
    const std::int64_t rigid_w = saturate(
        fx_mul(dp.one + saturate(fx_mul(dp.zeta, xl, F), dp.memory, &sat), dp.one - xs, F),
        dp.memory, &sat);

    bool taken = false;
    for (std::size_t s = 0; s < 3; ++s) {
        const int q = sign_of(cl[s].polarity);
        out.g[s] = saturate(q * detail::halve(std::min(term[(s + 1) % 3], term[(s + 2) % 3])),
                            dp.value, &sat);
        const bool attains =
            term[s] == tmin && !(taken && dp.ties == TieRule::first_minimal);
        out.r[s] = attains ? saturate(detail::halve(q * dp.one - vin[s]), dp.value, &sat) : 0;
        taken = taken || attains;
        out.contribution[s] =
            saturate(fx_mul(grad_w, out.g[s], F) + fx_mul(rigid_w, out.r[s], F), dp.memory, &sat);
    }
    return out;
}

/// One macro step: M clause intervals followed by the voltage write-back interval.
template <typename Observer = NullScheduleObserver>
void scheduled_step(const Instance& inst, const HwDatapath& dp, HwState& st,
                    std::uint64_t cycles_per_interval, Observer& obs) {
    const std::size_t n = inst.num_vars(), m = inst.num_clauses();
    const int F = dp.frac();
    std::vector<std::int64_t> acc(n, 0);

    for (std::size_t c = 0; c < m; ++c) {
        obs.on_interval(c);
        const std::int64_t xs = st.xs[c], xl = st.xl[c];
        const auto iv = evaluate_clause_interval(inst, dp, st.v, xs, xl, c, st.saturation, obs);
        for (std::size_t s = 0; s < 3; ++s) {
            auto& a = acc[inst.clause(c)[s].var];
            a = saturate(wide_int(a) + iv.contribution[s], dp.memory, &st.saturation);
        }
        const std::int64_t dxs = saturate(
            fx_mul(saturate(fx_mul(dp.beta, xs + dp.eps, F), dp.memory, &st.saturation),
                   iv.c - dp.gamma, F),
            dp.memory, &st.saturation);
        const std::int64_t dxl =
            saturate(fx_mul(dp.alpha, iv.c - dp.delta, F), dp.memory, &st.saturation);
        st.xs[c] = static_cast<std::int64_t>(
            std::clamp<wide_int>(xs + fx_mul(dp.dt, dxs, F), dp.xs_lo, dp.xs_hi));
        st.xl[c] = static_cast<std::int64_t>(
            std::clamp<wide_int>(xl + fx_mul(dp.dt, dxl, F), dp.one, dp.xl_max));
    }

    obs.on_interval(m);
    for (std::size_t i = 0; i < n; ++i) {
        st.v[i] = static_cast<std::int64_t>(
            std::clamp<wide_int>(st.v[i] + fx_mul(dp.dt, acc[i], F), -dp.one, dp.one));
        obs.on_voltage_write(static_cast<std::uint32_t>(i), st.v[i]);
    }
    ++st.t;
    st.cycles += (m + 1) * cycles_per_interval;
}

inline void scheduled_step(const Instance& inst, const HwDatapath& dp, HwState& st,
                           std::uint64_t cycles_per_interval = 1) {
    NullScheduleObserver obs;
    scheduled_step(inst, dp, st, cycles_per_interval, obs);
}

inline std::vector<bool> extract_assignment(const HwState& st) {
    std::vector<bool> a(st.v.size());
    for (std::size_t i = 0; i < st.v.size(); ++i) a[i] = st.v[i] >= 0;
    return a;
}

/// Initial state of the emulator: the float64 initial condition, quantized.
inline HwState initialize_hw(const Instance& inst, const SolveConfig& config,
                             const HwDatapath& dp) {
    auto h = quantize_state(initialize<double>(inst, config), dp);
    for (auto& x : h.xs) x = std::clamp(x, dp.xs_lo, dp.xs_hi);
    return h;
}

inline RunRecord solve_hw(const Instance& inst, const SolveConfig& config, const HwConfig& hw,
                          std::uint64_t trace_every = 0, const TraceSink& sink = {}) {
    if (hw.cycles_per_interval < 1) throw ConfigError("cycles_per_interval must be at least 1");
    const HwDatapath dp(inst, config.params, hw);
    auto state = initialize_hw(inst, config, dp);
    auto rec = detail::run_loop(
        inst, config, state,
        [&](HwState& s) { scheduled_step(inst, dp, s, hw.cycles_per_interval); },
        [](const HwState& s) { return extract_assignment(s); }, trace_every,
        [&](const HwState& s) { sink(detail::trace_row(inst, s.to_float<double>(dp.frac()))); });
    rec.cycles = state.cycles;
    rec.saturations = state.saturation.events;
    return rec;
}

} // namespace dmm
