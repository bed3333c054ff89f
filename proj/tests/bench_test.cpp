#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dmm/bench.hpp"

using namespace dmm;

TEST(ProjectHwTime, FortyThreeClauses) {
    EXPECT_DOUBLE_EQ(project_hw_time(10'000, 43), 4.4e-3);
    EXPECT_EQ(project_hw_time(0, 43), 0.0);
}

TEST(ProjectHwTime, Linearity) {
    for (std::uint64_t steps : {1u, 17u, 1000u, 123456u})
        for (std::uint64_t m : {1u, 42u, 629u}) {
            const double t = project_hw_time(steps, m);
            EXPECT_EQ(project_hw_time(2 * steps, m), 2 * t);
            EXPECT_EQ(project_hw_time(steps, m, 2e8), t / 2);
            EXPECT_EQ(project_hw_time(steps, m, 1e8, 3), project_hw_time(3 * steps, m));
            // Linear in M + 1.
            EXPECT_DOUBLE_EQ(project_hw_time(steps, 2 * m + 1), 2 * t);
        }
    EXPECT_THROW(project_hw_time(1, 1, 0.0), DomainError);
}

TEST(ResourceModel, SmallBoardFit) {
    EXPECT_EQ(estimate_luts(90), 57'606.0);
    EXPECT_LE(estimate_luts(90), ResourceModel{}.board_capacity("XC7A100T"));
    EXPECT_EQ(max_vars_for_capacity(63'400), 99u);
}

TEST(ResourceModel, Crossover) {
    const ResourceModel m;
    const double nstar = m.crossover();
    EXPECT_NEAR(nstar, 128921.0 / 450.0, 1e-12);
    EXPECT_NEAR(m.small(nstar), m.large(nstar), 1e-9);
    EXPECT_EQ(estimate_luts(286), m.small(286));
    EXPECT_EQ(estimate_luts(287), m.large(287));
}

TEST(ResourceModel, LargeBoardProjection) {
    const ResourceModel m;
    const auto n = max_vars_for_capacity(m.board_capacity("VU9P"));
    EXPECT_EQ(n, 7938u);
    EXPECT_LE(estimate_luts(n), 1'182'000.0);
    EXPECT_GT(estimate_luts(n + 1), 1'182'000.0);
    EXPECT_THROW(m.board_capacity("nope"), ConfigError);
    EXPECT_EQ(max_vars_for_capacity(1000), 0u);
}

TEST(ResourceModel, RejectsZeroVariables) { EXPECT_THROW(estimate_luts(0), DomainError); }

TEST(FitAllometric, ExactPowerLaw) {
    std::vector<std::pair<double, double>> pts;
    for (double n : {10.0, 30.0, 50.0, 70.0, 90.0}) pts.emplace_back(n, 2 * n * n * n);
    const auto f = fit_allometric(pts);
    EXPECT_NEAR(f.exponent, 3.0, 1e-9);
    EXPECT_NEAR(f.prefactor, 2.0, 2.0 * 1e-9);
    EXPECT_NEAR(f.exponent_stderr, 0.0, 1e-9);
}

TEST(FitAllometric, RecoversRandomPowerLaws) {
    Rng rng(1);
    for (int rep = 0; rep < 100; ++rep) {
        const double a = uniform(rng, -1.0, 4.0), c = uniform(rng, 0.01, 100.0);
        std::vector<std::pair<double, double>> pts;
        for (int k = 1; k <= 6; ++k) pts.emplace_back(k * 13.0, c * std::pow(k * 13.0, a));
        const auto f = fit_allometric(pts);
        EXPECT_NEAR(f.exponent, a, 1e-9 * std::max(1.0, std::abs(a)));
        EXPECT_NEAR(f.prefactor / c, 1.0, 1e-9);
    }
}

TEST(FitAllometric, StderrForNoisyData) {
    // ln T = 1 + 2 ln N + e with residuals (+.1, -.1, +.1, -.1) on N = e^1..e^4.
    std::vector<std::pair<double, double>> pts;
    const double e[] = {0.1, -0.1, 0.1, -0.1};
    for (int k = 1; k <= 4; ++k) pts.emplace_back(std::exp(k), std::exp(1 + 2 * k + e[k - 1]));
    const auto f = fit_allometric(pts);
    // Independent closed form: x = 1..4, Sxx = 5, Sxy picks up -0.2 / 5.
    EXPECT_NEAR(f.exponent, 2.0 - 0.04, 1e-12);
    const double intercept = 1.0 + 2.5 * 0.04;
    double sse = 0;
    for (int k = 1; k <= 4; ++k) {
        const double r = (1 + 2 * k + e[k - 1]) - (intercept + (2.0 - 0.04) * k);
        sse += r * r;
    }
    EXPECT_NEAR(f.exponent_stderr, std::sqrt(sse / 2 / 5), 1e-12);
}

TEST(FitAllometric, DomainErrors) {
    const std::vector<std::pair<double, double>> one{{10, 5}};
    EXPECT_THROW(fit_allometric(one), DomainError);
    const std::vector<std::pair<double, double>> two{{10, 5}, {20, 6}};
    EXPECT_THROW(fit_allometric(two), DomainError);
    const std::vector<std::pair<double, double>> zero{{10, 5}, {20, 0}, {30, 1}};
    EXPECT_THROW(fit_allometric(zero), DomainError);
    const std::vector<std::pair<double, double>> neg{{-10, 5}, {20, 1}, {30, 1}};
    EXPECT_THROW(fit_allometric(neg), DomainError);
    const std::vector<std::pair<double, double>> same{{10, 5}, {10, 6}, {10, 7}};
    EXPECT_THROW(fit_allometric(same), DomainError);
}

TEST(Median, OddAndEven) {
    EXPECT_EQ(median({3, 1, 2}), 2.0);
    EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
    EXPECT_THROW(median({}), DomainError);
}

TEST(SweepSpec, Validation) {
    SweepSpec s;
    s.sizes = {30, 10};
    EXPECT_THROW(run_sweep(s), ConfigError);
    s.sizes = {10};
    s.instances = 0;
    EXPECT_THROW(run_sweep(s), ConfigError);
}

TEST(RunSweep, TenRecordsPerPointAndDeterministic) {
    SweepSpec s;
    s.sizes = {10, 20, 30};
    s.ratios = {4.3};
    s.threads = 3;
    const auto a = run_sweep(s);
    ASSERT_EQ(a.size(), 30u);
    for (const auto& r : a) {
        EXPECT_EQ(r.outcome, Outcome::sat);
        EXPECT_EQ(r.num_clauses, static_cast<std::size_t>(std::llround(4.3 * r.num_vars)));
        EXPECT_EQ(r.cycles, r.steps * (r.num_clauses + 1));
        EXPECT_DOUBLE_EQ(r.projected_hw_s, project_hw_time(r.steps, r.num_clauses));
    }
    s.threads = 1;
    const auto b = run_sweep(s);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].seed, b[i].seed);
        EXPECT_EQ(a[i].steps, b[i].steps);
    }
    for (std::size_t i = 1; i < a.size(); ++i)
        EXPECT_LE(std::tie(a[i - 1].num_vars, a[i - 1].seed), std::tie(a[i].num_vars, a[i].seed));
}

TEST(RunSweep, HardwareEngineFillsCycles) {
    SweepSpec s;
    s.sizes = {10};
    s.ratios = {4.3};
    s.instances = 4;
    s.engine = Engine::hw;
    s.max_steps = 100'000;
    for (const auto& r : run_sweep(s)) EXPECT_EQ(r.cycles, r.steps * 44);
}

TEST(RunSweep, MediansAndPoints) {
    std::vector<SweepRecord> t;
    for (std::size_t n : {10u, 20u})
        for (std::uint64_t steps : {5u, 1u, 9u}) t.push_back({n, 43, 4.3, 0, steps * n, 0, 0, 0, Outcome::sat});
    t.push_back({10, 70, 7.0, 0, 1000, 0, 0, 0, Outcome::sat});
    const auto pts = median_points(t, 4.3);
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_EQ(pts[0], std::make_pair(10.0, 50.0));
    EXPECT_EQ(pts[1], std::make_pair(20.0, 100.0));
}

TEST(RunSweep, DenseProjectedTimeGrowsWithN) {
    SweepSpec s;
    s.ratios = {7.0};
    const auto pts = median_points(run_sweep(s), 7.0, Metric::projected_hw_s);
    ASSERT_EQ(pts.size(), 5u);
    for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_LT(pts[i - 1].second, pts[i].second) << pts[i].first;
}

namespace {

std::vector<SweepRecord> sample_table() {
    return {
        {10, 43, 4.3, 12345678901234567ull, 70, 0.000123, 3080, 3.08e-05, Outcome::sat},
        {30, 210, 7.0, 3, 10'000'000, 12.5, 2'110'000'000, 21.1, Outcome::budget_exhausted},
    };
}

} // namespace

TEST(Export, CsvHeaderAndRows) {
    const auto t = sample_table();
    const auto csv = export_csv(std::span(t).first(1));
    EXPECT_EQ(csv,
              "N,ratio,seed,steps,wall_s,cycles,projected_hw_s,outcome\n"
              "10,4.3,12345678901234567,70,0.000123,3080,3.08e-05,SAT\n");
    EXPECT_THROW(export_csv({}), DomainError);
    EXPECT_THROW(export_json({}), DomainError);
}

TEST(Export, CsvJsonRoundTrip) {
    const auto t = sample_table();
    std::istringstream in(export_csv(t));
    const auto from_csv = parse_csv(in);
    EXPECT_EQ(from_csv, t);
    const auto from_json = parse_json(export_json(from_csv));
    EXPECT_EQ(from_json, t);
}

TEST(Export, JsonKeyOrder) {
    const auto t = sample_table();
    const auto j = nlohmann::ordered_json::parse(export_json(t));
    std::vector<std::string> keys;
    for (const auto& [k, v] : j[0].items()) keys.push_back(k);
    EXPECT_EQ(keys, export_columns());
}

TEST(Export, ParseRejectsGarbage) {
    std::istringstream bad_header("a,b\n");
    EXPECT_THROW(parse_csv(bad_header), DomainError);
    std::istringstream bad_row("N,ratio,seed,steps,wall_s,cycles,projected_hw_s,outcome\n1,2,3\n");
    EXPECT_THROW(parse_csv(bad_row), DomainError);
    std::istringstream bad_num("N,ratio,seed,steps,wall_s,cycles,projected_hw_s,outcome\n1,x,3,4,5,6,7,SAT\n");
    EXPECT_THROW(parse_csv(bad_num), DomainError);
}
