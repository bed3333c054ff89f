#pragma once

// Right-hand side of the digital memcomputing equations for 3-SAT and the
// forward-Euler step that advances them.
//
//   dv_n  = sum_{m ∋ n} [ xl_m xs_m G_nm + (1 + zeta xl_m)(1 - xs_m) R_nm ]
//   dxs_m = beta (xs_m + eps)(C_m - gamma)
//   dxl_m = alpha (C_m - delta)
//
//   C_m  = 1/2 min_i (1 - q_im v_i)
//   G_nm = 1/2 q_nm min_{j,k != n} (1 - q_jm v_j)
//   R_nm = 1/2 (q_nm - v_n)  if literal n attains C_m, else 0
//
// State is confined to v ∈ [-1, 1], xs ∈ [eps, 1 - eps], xl ∈ [1, xl_max].

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

#include "dmm/cnf.hpp"
#include "dmm/errors.hpp"

namespace dmm {

/// Which literals receive the rigidity term when several attain the clause minimum.
enum class TieRule { all_minimal, first_minimal };

struct Params {
    double alpha = 5.0;
    double beta = 20.0;
    double gamma = 0.25;
    double delta = 0.05;
    double epsilon = 1e-3;
    double zeta = 1e-3;
    double dt = 0x1.0p-5;
    double xl_max = 1e4;
    TieRule ties = TieRule::all_minimal;

    /// Default constants for an instance: xl_max = 1e4 * M, and zeta picked
    /// by clause density (0.1 for dense M/N >= 5.65, 0.001 otherwise).
    static Params for_instance(const Instance& inst) {
        Params p;
        const double m = static_cast<double>(inst.num_clauses());
        p.xl_max = 1e4 * std::max(m, 1.0);
        p.zeta = m / static_cast<double>(inst.num_vars()) >= 5.65 ? 0.1 : 0.001;
        return p;
    }

    void validate() const {
        for (double c : {alpha, beta, gamma, delta, epsilon, zeta, dt})
            if (!(c > 0.0) || !std::isfinite(c))
                throw ConfigError("dynamics constants and dt must be positive and finite");
        if (!(epsilon < 0.5)) throw ConfigError("epsilon must be below 0.5");
        if (!(xl_max >= 1.0)) throw ConfigError("xl_max must be at least 1");
    }
};

template <std::floating_point Real>
struct SolverState {
    std::vector<Real> v;
    std::vector<Real> xs;
    std::vector<Real> xl;
    std::size_t t = 0;

    friend bool operator==(const SolverState&, const SolverState&) = default;
};

template <std::floating_point Real>
struct Derivatives {
    std::vector<Real> dv;
    std::vector<Real> dxs;
    std::vector<Real> dxl;
    /// Per-clause, per-slot contribution to dv, laid out as 3*m + slot.
    std::vector<Real> contributions;
};

namespace detail {

inline std::size_t slot_of(const Instance& inst, std::size_t m, std::size_t n) {
    if (m >= inst.num_clauses()) throw ContractViolation("clause index out of range");
    const auto& c = inst.clause(m);
    for (std::size_t s = 0; s < 3; ++s)
        if (c[s].var == n) return s;
    throw ContractViolation("variable " + std::to_string(n) + " does not occur in clause " +
                            std::to_string(m));
}

/// 1 - q v for each slot of clause c.
template <std::floating_point Real>
std::array<Real, 3> literal_terms(const Clause& c, std::span<const Real> v) {
    std::array<Real, 3> t;
    for (std::size_t s = 0; s < 3; ++s)
        t[s] = Real(1) - Real(sign_of(c[s].polarity)) * v[c[s].var];
    return t;
}

template <std::floating_point Real>
Real min3(const std::array<Real, 3>& t) {
    return std::min(t[0], std::min(t[1], t[2]));
}

/// Everything a clause contributes, evaluated from one read of v.
template <std::floating_point Real>
struct ClauseTerms {
    Real c;
    std::array<Real, 3> g;
    std::array<Real, 3> r;
};

template <std::floating_point Real>
ClauseTerms<Real> clause_terms(const Clause& cl, std::span<const Real> v, TieRule ties) {
    const auto t = literal_terms<Real>(cl, v);
    ClauseTerms<Real> out;
    out.c = Real(0.5) * min3(t);
    bool taken = false;
    for (std::size_t s = 0; s < 3; ++s) {
        const Real q = Real(sign_of(cl[s].polarity));
        out.g[s] = Real(0.5) * q * std::min(t[(s + 1) % 3], t[(s + 2) % 3]);
        const bool attains = Real(0.5) * t[s] == out.c && !(taken && ties == TieRule::first_minimal);
        out.r[s] = attains ? Real(0.5) * (q - v[cl[s].var]) : Real(0);
        taken = taken || attains;
    }
    return out;
}

} // namespace detail

template <std::floating_point Real>
Real clause_value(const Instance& inst, std::span<const Real> v, std::size_t m) {
    return Real(0.5) * detail::min3(detail::literal_terms<Real>(inst.clause(m), v));
}

template <std::floating_point Real>
Real gradient_term(const Instance& inst, std::span<const Real> v, std::size_t m, std::size_t n) {
    const auto s = detail::slot_of(inst, m, n);
    return detail::clause_terms<Real>(inst.clause(m), v, TieRule::all_minimal).g[s];
}

template <std::floating_point Real>
Real rigidity_term(const Instance& inst, std::span<const Real> v, std::size_t m, std::size_t n,
                   TieRule ties = TieRule::all_minimal) {
    const auto s = detail::slot_of(inst, m, n);
    return detail::clause_terms<Real>(inst.clause(m), v, ties).r[s];
}

/// Fills `out` with the time derivatives at `state`. Per-variable sums run
/// over the occurrence index in ascending clause order, so the result is
/// bit-reproducible regardless of how the per-clause pass is scheduled.
template <std::floating_point Real>
void derivatives(const Instance& inst, const SolverState<Real>& state, const Params& p,
                 Derivatives<Real>& out) {
    const std::size_t n = inst.num_vars(), m = inst.num_clauses();
    out.dv.assign(n, Real(0));
    out.dxs.resize(m);
    out.dxl.resize(m);
    out.contributions.resize(3 * m);

    const Real alpha = Real(p.alpha), beta = Real(p.beta), gamma = Real(p.gamma),
               delta = Real(p.delta), eps = Real(p.epsilon), zeta = Real(p.zeta);
    const std::span<const Real> v(state.v);

    for (std::size_t c = 0; c < m; ++c) {
        const auto terms = detail::clause_terms<Real>(inst.clause(c), v, p.ties);
        const Real xs = state.xs[c], xl = state.xl[c];
        const Real grad_w = xl * xs;
        const Real rigid_w = (Real(1) + zeta * xl) * (Real(1) - xs);
        for (std::size_t s = 0; s < 3; ++s)
            out.contributions[3 * c + s] = grad_w * terms.g[s] + rigid_w * terms.r[s];
        out.dxs[c] = beta * (xs + eps) * (terms.c - gamma);
        out.dxl[c] = alpha * (terms.c - delta);
    }
    for (std::size_t var = 0; var < n; ++var) {
        Real sum = 0;
        for (const auto& occ : inst.occurrences(var)) sum += out.contributions[3 * occ.clause + occ.slot];
        out.dv[var] = sum;
    }
}

template <std::floating_point Real>
Derivatives<Real> derivatives(const Instance& inst, const SolverState<Real>& state,
                              const Params& p) {
    Derivatives<Real> d;
    derivatives(inst, state, p, d);
    return d;
}

/// Applies state + dt * d in place, then clamps every component to its box.
template <std::floating_point Real>
void apply_euler(SolverState<Real>& s, const Derivatives<Real>& d, const Params& p) {
    const Real dt = Real(p.dt), eps = Real(p.epsilon), xl_max = Real(p.xl_max);
    for (std::size_t i = 0; i < s.v.size(); ++i)
        s.v[i] = std::clamp(s.v[i] + dt * d.dv[i], Real(-1), Real(1));
    for (std::size_t c = 0; c < s.xs.size(); ++c) {
        s.xs[c] = std::clamp(s.xs[c] + dt * d.dxs[c], eps, Real(1) - eps);
        s.xl[c] = std::clamp(s.xl[c] + dt * d.dxl[c], Real(1), xl_max);
    }
    ++s.t;
}

template <std::floating_point Real>
SolverState<Real> euler_step(const Instance& inst, SolverState<Real> state, const Params& p) {
    apply_euler(state, derivatives(inst, state, p), p);
    return state;
}

/// Sign readout: v >= 0 is true (zero included).
template <std::floating_point Real>
std::vector<bool> extract_assignment(std::span<const Real> v) {
    std::vector<bool> a(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) a[i] = !(v[i] < Real(0));
    return a;
}

template <std::floating_point Real>
std::vector<bool> extract_assignment(const SolverState<Real>& s) {
    return extract_assignment(std::span<const Real>(s.v));
}

/// Checks the box constraints; used by tests and debug assertions.
template <std::floating_point Real>
bool within_bounds(const SolverState<Real>& s, const Params& p) {
    const Real eps = Real(p.epsilon);
    for (Real x : s.v)
        if (!(x >= Real(-1) && x <= Real(1))) return false;
    for (Real x : s.xs)
        if (!(x >= eps && x <= Real(1) - eps)) return false;
    for (Real x : s.xl)
        if (!(x >= Real(1) && x <= Real(p.xl_max))) return false;
    return true;
}

} // namespace dmm
