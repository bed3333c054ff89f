#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dmm/generator.hpp"
#include "dmm/hwemu.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"

using namespace dmm;

namespace {

/// Max-norm distance between the emulator and the float64 reference after
/// `steps` steps from the same (quantized) start.
double divergence(const Instance& inst, const SolveConfig& cfg, const HwConfig& hw,
                  std::size_t steps, std::uint64_t* saturations = nullptr) {
    const HwDatapath dp(inst, cfg.params, hw);
    auto h = initialize_hw(inst, cfg, dp);
    auto ref = h.to_float<double>(dp.frac());
    double worst = 0;
    for (std::size_t k = 0; k < steps; ++k) {
        scheduled_step(inst, dp, h);
        ref = euler_step(inst, ref, cfg.params);
        const auto got = h.to_float<double>(dp.frac());
        for (std::size_t i = 0; i < ref.v.size(); ++i) worst = std::max(worst, std::abs(got.v[i] - ref.v[i]));
        for (std::size_t m = 0; m < ref.xs.size(); ++m) {
            worst = std::max(worst, std::abs(got.xs[m] - ref.xs[m]));
            worst = std::max(worst, std::abs(got.xl[m] - ref.xl[m]));
        }
    }
    if (saturations) *saturations = h.saturation.events;
    return worst;
}

} // namespace

TEST(HwDatapath, DefaultFormats) {
    const auto p = generate({90, 7.0, 0.08, 1});
    const HwDatapath dp(p.instance, Params::for_instance(p.instance), HwConfig{});
    EXPECT_EQ(dp.value.total_bits(), 32);
    EXPECT_EQ(dp.value.frac_bits, 20);
    EXPECT_EQ(dp.memory.frac_bits, 20);
    EXPECT_TRUE(dp.memory.covers(0, 1e4 * 630));
    EXPECT_EQ(dp.dt, std::int64_t(1) << 15);  // 2^-5 is exact
}

TEST(HwDatapath, RejectsFormatsThatCannotHoldTheState) {
    const auto p = generate({10, 4.3, 0.08, 1});
    const auto params = Params::for_instance(p.instance);
    EXPECT_THROW(HwDatapath(p.instance, params, HwConfig{{0, 20}, 0, 1}), ConfigError);
    EXPECT_THROW(HwDatapath(p.instance, params, HwConfig{{11, 20}, 10, 1}), ConfigError);
    EXPECT_THROW(HwDatapath(p.instance, params, HwConfig{{11, 60}, 0, 1}), ConfigError);
}

TEST(ScheduledStep, WideFormatTracksFloat64) {
    const auto p = generate({10, 4.3, 0.08, 3});
    const auto cfg = SolveConfig::for_instance(p.instance, 11);
    std::uint64_t sat = 1;
    EXPECT_LE(divergence(p.instance, cfg, HwConfig::wide(), 100, &sat), 1e-9);
    EXPECT_EQ(sat, 0u);
}

TEST(ScheduledStep, DivergenceShrinksWithFractionBits) {
    const auto p = generate({10, 4.3, 0.08, 4});
    const auto cfg = SolveConfig::for_instance(p.instance, 2);
    const double d16 = divergence(p.instance, cfg, HwConfig{{3, 16}, 0, 1}, 1);
    const double d24 = divergence(p.instance, cfg, HwConfig{{3, 24}, 0, 1}, 1);
    const double d32 = divergence(p.instance, cfg, HwConfig{{3, 32}, 0, 1}, 1);
    EXPECT_GT(d16, d24);
    EXPECT_GT(d24, d32);
    EXPECT_LT(d32, 1e-7);
}

TEST(ScheduledStep, IntervalCountIsMPlusOne) {
    const auto p = generate({10, 4.3, 0.08, 5});
    const auto cfg = SolveConfig::for_instance(p.instance, 1);
    const HwDatapath dp(p.instance, cfg.params, HwConfig{});
    auto st = initialize_hw(p.instance, cfg, dp);
    dmm::testing::RecordingObserver obs;
    obs.snapshot = st.v;
    obs.write_phase_expected = p.instance.num_clauses();
    scheduled_step(p.instance, dp, st, 1, obs);
    EXPECT_EQ(obs.intervals, 44u);
    EXPECT_EQ(st.cycles, 44u);
    EXPECT_EQ(obs.stale_violations, 0u);
    EXPECT_EQ(obs.early_writes, 0u);
}

TEST(ScheduledStep, StaleReadProperty) {
    const auto r = dmm::testing::check_stale_reads(7, 1000);
    EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(ScheduledStep, ClauseOrderDoesNotMatter) {
    Rng rng(17);
    for (int rep = 0; rep < 200; ++rep) {
        const auto inst = dmm::testing::random_instance(rng);
        const auto params = Params::for_instance(inst);
        const HwDatapath dp(inst, params, HwConfig{});
        auto st = quantize_state(dmm::testing::random_state(rng, inst, params), dp);

        std::vector<std::size_t> perm(inst.num_clauses());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<Clause> shuffled;
        HwState st2 = st;
        for (std::size_t k = 0; k < perm.size(); ++k) {
            shuffled.push_back(inst.clause(perm[k]));
            st2.xs[k] = st.xs[perm[k]];
            st2.xl[k] = st.xl[perm[k]];
        }
        const Instance permuted(inst.num_vars(), std::move(shuffled));
        const HwDatapath dp2(permuted, params, HwConfig{});
        scheduled_step(inst, dp, st);
        scheduled_step(permuted, dp2, st2);
        ASSERT_EQ(st.saturation.events, 0u);
        ASSERT_EQ(st.v, st2.v) << "rep " << rep;
        for (std::size_t k = 0; k < perm.size(); ++k) {
            ASSERT_EQ(st2.xs[k], st.xs[perm[k]]);
            ASSERT_EQ(st2.xl[k], st.xl[perm[k]]);
        }
    }
}

TEST(ScheduledStep, ClampsHoldInFixedPoint) {
    Rng rng(23);
    for (int rep = 0; rep < 300; ++rep) {
        const auto inst = dmm::testing::random_instance(rng);
        auto params = Params::for_instance(inst);
        params.dt = 0.5;
        const HwDatapath dp(inst, params, HwConfig{});
        auto st = quantize_state(dmm::testing::random_state(rng, inst, params), dp);
        for (auto& x : st.xs) x = std::clamp(x, dp.xs_lo, dp.xs_hi);
        for (int k = 0; k < 3; ++k) scheduled_step(inst, dp, st);
        for (auto v : st.v) ASSERT_TRUE(v >= -dp.one && v <= dp.one);
        for (auto x : st.xs) ASSERT_TRUE(x >= dp.xs_lo && x <= dp.xs_hi);
        for (auto x : st.xl) ASSERT_TRUE(x >= dp.one && x <= dp.xl_max);
    }
}

TEST(SolveHw, CycleCountModel) {
    const auto inst = dmm::testing::padded_contradiction();
    auto ucfg = SolveConfig::for_instance(inst, 1);
    ucfg.max_steps = 1000;
    const auto rec = solve_hw(inst, ucfg, HwConfig{});
    EXPECT_EQ(rec.outcome, Outcome::budget_exhausted);
    EXPECT_EQ(rec.steps, 1000u);
    EXPECT_EQ(*rec.cycles, 1000u * 9u);

    HwConfig slow;
    slow.cycles_per_interval = 3;
    const auto r3 = solve_hw(inst, ucfg, slow);
    EXPECT_EQ(*r3.cycles, 3u * 1000u * 9u);
}

TEST(SolveHw, CycleCountForFortyThreeClauses) {
    // 1000 steps on M = 43 are 44,000 cycles; checked on the unsat padding so
    // the run cannot stop early.
    std::vector<Clause> cls;
    const auto base = dmm::testing::padded_contradiction();
    for (std::size_t k = 0; k < 43; ++k) cls.push_back(base.clause(k % 8));
    const Instance inst(3, std::move(cls));
    auto cfg = SolveConfig::for_instance(inst, 0);
    cfg.max_steps = 1000;
    EXPECT_EQ(*solve_hw(inst, cfg, HwConfig{}).cycles, 44'000u);
}

TEST(SolveHw, DefaultFormatSolvesSmallPlanted) {
    int solved = 0;
    for (const auto& p : batch({10, 4.3, 0.08, 300}, 10)) {
        auto cfg = SolveConfig::for_instance(p.instance, p.seed);
        cfg.max_steps = 100'000;
        const auto rec = solve_hw(p.instance, cfg, HwConfig{});
        if (rec.outcome == Outcome::sat) {
            ++solved;
            EXPECT_TRUE(evaluate(p.instance, *rec.assignment));
            EXPECT_EQ(*rec.cycles, rec.steps * (p.instance.num_clauses() + 1));
        }
    }
    EXPECT_GE(solved, 8);
}

TEST(SolveHw, TracedRowsMatchSteps) {
    const auto p = generate({10, 4.3, 0.08, 8});
    const auto cfg = SolveConfig::for_instance(p.instance, 8);
    std::vector<TraceRow> rows;
    const auto rec = solve_hw(p.instance, cfg, HwConfig{}, 2, [&](const TraceRow& r) { rows.push_back(r); });
    ASSERT_EQ(rec.outcome, Outcome::sat);
    EXPECT_EQ(rows.size(), (rec.steps + 1) / 2);
    if (!rows.empty()) {
        EXPECT_EQ(rows.back().unsatisfied, 0u);
    }
}

TEST(SolveHw, PrecisionThreshold) {
    // Narrow fractions starve the Euler update: dt * dv rounds to zero and
    // the voltages freeze. Find the widest format at which some instance that
    // float64 solves fails within the budget.
    const auto instances = batch({30, 4.3, 0.08, 900}, 6);
    const std::uint64_t budget = 20'000;
    std::vector<SolveConfig> cfgs;
    for (const auto& p : instances) {
        auto cfg = SolveConfig::for_instance(p.instance, p.seed);
        cfg.max_steps = budget;
        ASSERT_EQ(solve(p.instance, cfg).outcome, Outcome::sat);
        cfgs.push_back(cfg);
    }
    int threshold = 0;
    for (int frac = 20; frac >= 2; --frac) {
        bool any_failed = false;
        for (std::size_t i = 0; i < instances.size() && !any_failed; ++i)
            any_failed = solve_hw(instances[i].instance, cfgs[i], HwConfig{{11, frac}, 0, 1}).outcome !=
                         Outcome::sat;
        if (any_failed) {
            threshold = frac;
            break;
        }
    }
    RecordProperty("precision_threshold_frac_bits", threshold);
    std::cout << "[ info ] first fraction width with a failed instance: " << threshold << " bits\n";
    EXPECT_GT(threshold, 1);
    EXPECT_LT(threshold, 20);
}
