#pragma once

// Planted hard 3-SAT instances (Barthel et al. construction).
//
// Clauses are drawn against the all-true assignment with 0, 1 or 2 negated
// literals (never 3), then a random gauge flip hides the planted solution.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dmm/cnf.hpp"
#include "dmm/errors.hpp"
#include "dmm/rng.hpp"

namespace dmm {

struct GeneratorConfig {
    std::size_t num_vars = 10;
    double ratio = 4.3;  // M / N
    double p0 = 0.08;
    std::uint64_t seed = 0;

    double p1() const noexcept { return (1.0 - 4.0 * p0) / 6.0; }
    double p2() const noexcept { return (1.0 + 2.0 * p0) / 6.0; }

    /// Probabilities of drawing 0, 1 and 2 negated literals.
    std::array<double, 3> pattern_probabilities() const noexcept {
        return {p0, 3.0 * p1(), 3.0 * p2()};
    }

    std::size_t num_clauses() const noexcept {
        return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(num_vars)));
    }

    void validate() const {
        if (!(p0 > 0.077 && p0 < 0.25))
            throw ConfigError("p0 must lie in (0.077, 0.25), got " + std::to_string(p0));
        if (num_vars < 3) throw ConfigError("need at least 3 variables for 3-SAT clauses");
        if (!(ratio > 0.0) || !std::isfinite(ratio))
            throw ConfigError("clause/variable ratio must be positive");
        if (num_clauses() < 1) throw ConfigError("ratio * N rounds to zero clauses");
        const auto p = pattern_probabilities();
        if (!(p1() > 0 && p1() < 1 && p2() > 0 && p2() < 1) ||
            std::abs(p[0] + p[1] + p[2] - 1.0) > 1e-12)
            throw ConfigError("negation pattern probabilities are inconsistent");
    }
};

struct PlantedInstance {
    Instance instance;
    std::vector<bool> planted;
    std::uint64_t seed = 0;
    /// Number of clauses drawn with 0, 1 and 2 negations, before the gauge flip.
    std::array<std::size_t, 3> pattern_counts{};
};

inline PlantedInstance generate(const GeneratorConfig& config) {
    config.validate();
    const std::size_t n = config.num_vars;
    const std::size_t m = config.num_clauses();
    const auto probs = config.pattern_probabilities();

    Rng rng(config.seed);
    std::vector<Clause> clauses;
    clauses.reserve(m);
    std::array<std::size_t, 3> counts{};

    for (std::size_t c = 0; c < m; ++c) {
        std::array<std::uint32_t, 3> vars{};
        for (std::size_t s = 0; s < 3; ++s) {
            bool dup;
            do {
                vars[s] = static_cast<std::uint32_t>(uniform_below(rng, n));
                dup = false;
                for (std::size_t t = 0; t < s; ++t) dup = dup || vars[t] == vars[s];
            } while (dup);
        }

        std::array<Polarity, 3> pol{Polarity::positive, Polarity::positive, Polarity::positive};
        const double u = uniform01(rng);
        std::size_t negations = u < probs[0] ? 0 : (u < probs[0] + probs[1] ? 1 : 2);
        if (negations == 1) {
            pol[uniform_below(rng, 3)] = Polarity::negative;
        } else if (negations == 2) {
            pol = {Polarity::negative, Polarity::negative, Polarity::negative};
            pol[uniform_below(rng, 3)] = Polarity::positive;
        }
        ++counts[negations];
        clauses.emplace_back(Literal{vars[0], pol[0]}, Literal{vars[1], pol[1]},
                             Literal{vars[2], pol[2]});
    }

    std::vector<bool> planted(n, true);
    std::vector<bool> flip(n);
    for (std::size_t i = 0; i < n; ++i) flip[i] = coin_flip(rng);
    for (auto& cl : clauses)
        for (auto& lit : cl.literals)
            if (flip[lit.var]) lit.polarity = flipped(lit.polarity);
    for (std::size_t i = 0; i < n; ++i) planted[i] = !flip[i];

    return {Instance(n, std::move(clauses)), std::move(planted), config.seed, counts};
}

/// `count` instances from seeds seed, seed+1, ...; nothing is filtered out.
inline std::vector<PlantedInstance> batch(const GeneratorConfig& config, std::size_t count) {
    if (count < 1) throw ConfigError("batch count must be at least 1");
    std::vector<PlantedInstance> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto c = config;
        c.seed = config.seed + i;
        out.push_back(generate(c));
    }
    return out;
}

} // namespace dmm
