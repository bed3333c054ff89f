#pragma once

// Scaling sweeps, allometric fits, hardware-time projection and the LUT model.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dmm/cnf.hpp"
#include "dmm/errors.hpp"
#include "dmm/generator.hpp"
#include "dmm/hwemu.hpp"
#include "dmm/rng.hpp"
#include "dmm/solver.hpp"

namespace dmm {

inline constexpr double kDefaultClockHz = 1e8;

/// Seconds the interval schedule needs for `steps` Euler steps on M clauses.
inline double project_hw_time(std::uint64_t steps, std::uint64_t num_clauses,
                              double clock_hz = kDefaultClockHz,
                              std::uint64_t cycles_per_interval = 1) {
    if (!(clock_hz > 0)) throw DomainError("clock frequency must be positive");
    const double cycles =
        double(steps) * double(num_clauses + 1) * double(cycles_per_interval);
    return cycles / clock_hz;
}

// ---------------------------------------------------------------------------
// LUT resource model

struct LinearLutFit {
    double intercept;
    double slope;
    double operator()(double n) const noexcept { return intercept + slope * n; }
};

struct ResourceModel {
    LinearLutFit small{5226, 582};    // small sizes, both boards
    LinearLutFit large{134147, 132};  // large-board synthesis beyond the knee
    std::map<std::string, double> boards{
        {"XC7A100T", 63'400},
        {"VU9P", 1'182'000},
        {"VU19P", 4'086'000},
        {"GX10M", 10'000'000},
    };

    /// N* where the two linear pieces meet.
    double crossover() const noexcept {
        return (large.intercept - small.intercept) / (small.slope - large.slope);
    }

    double board_capacity(const std::string& name) const {
        auto it = boards.find(name);
        if (it == boards.end()) throw ConfigError("unknown board '" + name + "'");
        return it->second;
    }
};

/// Piecewise-linear LUT estimate: the small-size fit below the crossover,
/// the large-size fit at and above it.
inline double estimate_luts(std::uint64_t num_vars, const ResourceModel& model = {}) {
    if (num_vars < 1) throw DomainError("N must be at least 1");
    const double n = double(num_vars);
    return n < model.crossover() ? model.small(n) : model.large(n);
}

/// Largest N whose LUT estimate fits in `capacity` (0 if even N = 1 does not).
inline std::uint64_t max_vars_for_capacity(double capacity, const ResourceModel& model = {}) {
    const double nstar = model.crossover();
    if (model.large(std::ceil(nstar)) <= capacity)
        return static_cast<std::uint64_t>(
            std::floor((capacity - model.large.intercept) / model.large.slope));
    if (model.small(1) > capacity) return 0;
    const double n = std::floor((capacity - model.small.intercept) / model.small.slope);
    return static_cast<std::uint64_t>(std::min(n, std::ceil(nstar) - 1));
}

// ---------------------------------------------------------------------------
// Statistics

inline double median(std::vector<double> xs) {
    if (xs.empty()) throw DomainError("median of an empty sample");
    std::sort(xs.begin(), xs.end());
    const auto k = xs.size() / 2;
    return xs.size() % 2 ? xs[k] : 0.5 * (xs[k - 1] + xs[k]);
}

struct FitResult {
    double exponent = 0;
    double prefactor = 0;
    double exponent_stderr = 0;
    std::vector<std::pair<double, double>> points;
};

/// Least-squares line through (ln N, ln T); T ~ prefactor * N^exponent.
inline FitResult fit_allometric(std::span<const std::pair<double, double>> points) {
    if (points.size() < 3) throw DomainError("allometric fit needs at least 3 points");
    double sx = 0, sy = 0;
    for (const auto& [n, t] : points) {
        if (!(n > 0) || !(t > 0)) throw DomainError("allometric fit needs positive values");
        sx += std::log(n);
        sy += std::log(t);
    }
    const double k = double(points.size());
    const double mx = sx / k, my = sy / k;
    double sxx = 0, sxy = 0;
    for (const auto& [n, t] : points) {
        const double dx = std::log(n) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(t) - my);
    }
    if (sxx == 0) throw DomainError("allometric fit needs at least two distinct N");
    FitResult r;
    r.exponent = sxy / sxx;
    const double intercept = my - r.exponent * mx;
    r.prefactor = std::exp(intercept);
    double sse = 0;
    for (const auto& [n, t] : points) {
        const double e = std::log(t) - (intercept + r.exponent * std::log(n));
        sse += e * e;
    }
    r.exponent_stderr = std::sqrt(sse / (k - 2) / sxx);
    r.points.assign(points.begin(), points.end());
    return r;
}

// ---------------------------------------------------------------------------
// Sweeps

enum class Engine { float64, hw };

inline const char* to_string(Engine e) { return e == Engine::hw ? "hw" : "float"; }

struct SweepSpec {
    std::vector<std::size_t> sizes{10, 30, 50, 70, 90};
    std::vector<double> ratios{4.3, 7.0};
    std::size_t instances = 10;
    double p0 = 0.08;
    Engine engine = Engine::float64;
    std::uint64_t base_seed = 1;
    std::uint64_t max_steps = 10'000'000;
    double dt = 0x1.0p-5;
    HwConfig hw;
    double clock_hz = kDefaultClockHz;
    unsigned threads = 0;  // 0: hardware concurrency

    void validate() const {
        if (sizes.empty() || ratios.empty()) throw ConfigError("sweep needs sizes and ratios");
        for (std::size_t i = 0; i < sizes.size(); ++i)
            if (sizes[i] < 1 || (i && sizes[i] <= sizes[i - 1]))
                throw ConfigError("sweep sizes must be positive and strictly ascending");
        if (instances < 1) throw ConfigError("sweep needs at least one instance per point");
    }

    /// First generator seed of the (N, ratio) point; instances use seed, seed+1, ...
    std::uint64_t point_seed(std::size_t n, double ratio) const {
        const auto ratio_code = static_cast<std::uint64_t>(std::llround(ratio * 1000));
        return mix_seed(base_seed ^ mix_seed((std::uint64_t(n) << 32) ^ ratio_code));
    }
};

struct SweepRecord {
    std::size_t num_vars = 0;
    std::size_t num_clauses = 0;
    double ratio = 0;
    std::uint64_t seed = 0;  // generator seed; the solve seed is mix_seed(seed)
    std::uint64_t steps = 0;
    double wall_s = 0;
    std::uint64_t cycles = 0;
    double projected_hw_s = 0;
    Outcome outcome = Outcome::budget_exhausted;

    friend bool operator==(const SweepRecord&, const SweepRecord&) = default;
};

inline SweepRecord run_one(const SweepSpec& spec, std::size_t n, double ratio,
                           std::uint64_t seed) {
    GeneratorConfig g{n, ratio, spec.p0, seed};
    const auto planted = generate(g);
    const auto& inst = planted.instance;
    auto config = SolveConfig::for_instance(inst, mix_seed(seed));
    config.params.dt = spec.dt;
    config.max_steps = spec.max_steps;

    const RunRecord rec = spec.engine == Engine::hw ? solve_hw(inst, config, spec.hw)
                                                    : solve(inst, config);
    const std::uint64_t cpi = spec.engine == Engine::hw ? spec.hw.cycles_per_interval : 1;
    SweepRecord r;
    r.num_vars = n;
    r.num_clauses = inst.num_clauses();
    r.ratio = ratio;
    r.seed = seed;
    r.steps = rec.steps;
    r.wall_s = rec.wall_time;
    r.cycles = rec.cycles.value_or(rec.steps * (inst.num_clauses() + 1) * cpi);
    r.projected_hw_s = project_hw_time(rec.steps, inst.num_clauses(), spec.clock_hz, cpi);
    r.outcome = rec.outcome;
    return r;
}

/// Runs every (N, ratio, instance) cell on a worker pool. The result is
/// sorted by (N, ratio, seed), independent of scheduling.
inline std::vector<SweepRecord> run_sweep(const SweepSpec& spec) {
    spec.validate();
    struct Job {
        std::size_t n;
        double ratio;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (double r : spec.ratios)
        for (std::size_t n : spec.sizes) {
            const auto s0 = spec.point_seed(n, r);
            for (std::size_t i = 0; i < spec.instances; ++i) jobs.push_back({n, r, s0 + i});
        }

    std::vector<SweepRecord> out(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
            try {
                out[i] = run_one(spec, jobs[i].n, jobs[i].ratio, jobs[i].seed);
            } catch (...) {
                std::lock_guard lock(err_mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    unsigned nthreads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    nthreads = static_cast<unsigned>(std::min<std::size_t>(nthreads, jobs.size()));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    }
    if (err) std::rethrow_exception(err);

    std::sort(out.begin(), out.end(), [](const SweepRecord& a, const SweepRecord& b) {
        return std::tie(a.num_vars, a.ratio, a.seed) < std::tie(b.num_vars, b.ratio, b.seed);
    });
    return out;
}

enum class Metric { steps, wall_s, projected_hw_s };

inline double metric_of(const SweepRecord& r, Metric m) {
    switch (m) {
        case Metric::wall_s: return r.wall_s;
        case Metric::projected_hw_s: return r.projected_hw_s;
        default: return double(r.steps);
    }
}

/// (N, median metric) for one ratio, ascending in N.
inline std::vector<std::pair<double, double>> median_points(std::span<const SweepRecord> table,
                                                            double ratio,
                                                            Metric metric = Metric::steps) {
    std::map<std::size_t, std::vector<double>> by_n;
    for (const auto& r : table)
        if (std::abs(r.ratio - ratio) < 1e-9) by_n[r.num_vars].push_back(metric_of(r, metric));
    std::vector<std::pair<double, double>> pts;
    for (auto& [n, xs] : by_n) pts.emplace_back(double(n), median(std::move(xs)));
    return pts;
}

// ---------------------------------------------------------------------------
// Export

inline const std::vector<std::string>& export_columns() {
    static const std::vector<std::string> cols{"N",      "ratio",  "seed",           "steps",
                                               "wall_s", "cycles", "projected_hw_s", "outcome"};
    return cols;
}

namespace detail {

inline std::string shortest(double x) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, p);
}

template <typename T>
T parse_number(const std::string& s, std::size_t line) {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw DomainError("results line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

} // namespace detail

inline std::string export_csv(std::span<const SweepRecord> table) {
    if (table.empty()) throw DomainError("nothing to export");
    std::ostringstream out;
    const auto& cols = export_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& r : table)
        out << r.num_vars << ',' << detail::shortest(r.ratio) << ',' << r.seed << ',' << r.steps
            << ',' << detail::shortest(r.wall_s) << ',' << r.cycles << ','
            << detail::shortest(r.projected_hw_s) << ',' << to_string(r.outcome) << '\n';
    return out.str();
}

inline nlohmann::ordered_json to_json(const SweepRecord& r) {
    nlohmann::ordered_json j;
    j["N"] = r.num_vars;
    j["ratio"] = r.ratio;
    j["seed"] = r.seed;
    j["steps"] = r.steps;
    j["wall_s"] = r.wall_s;
    j["cycles"] = r.cycles;
    j["projected_hw_s"] = r.projected_hw_s;
    j["outcome"] = to_string(r.outcome);
    return j;
}

inline std::string export_json(std::span<const SweepRecord> table) {
    if (table.empty()) throw DomainError("nothing to export");
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : table) arr.push_back(to_json(r));
    return arr.dump(2) + "\n";
}

inline Outcome parse_outcome(const std::string& s) {
    if (s == "SAT") return Outcome::sat;
    if (s == "budget_exhausted") return Outcome::budget_exhausted;
    throw DomainError("unknown outcome '" + s + "'");
}

/// Reads a table written by export_csv. M is recovered as round(ratio * N).
inline std::vector<SweepRecord> parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DomainError("empty results file");
    std::string expect;
    for (const auto& c : export_columns()) expect += (expect.empty() ? "" : ",") + c;
    if (line != expect) throw DomainError("unexpected results header: " + line);
    std::vector<SweepRecord> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != export_columns().size())
            throw DomainError("results line " + std::to_string(lineno) + ": wrong column count");
        SweepRecord r;
        r.num_vars = detail::parse_number<std::size_t>(f[0], lineno);
        r.ratio = detail::parse_number<double>(f[1], lineno);
        r.num_clauses = static_cast<std::size_t>(std::llround(r.ratio * double(r.num_vars)));
        r.seed = detail::parse_number<std::uint64_t>(f[2], lineno);
        r.steps = detail::parse_number<std::uint64_t>(f[3], lineno);
        r.wall_s = detail::parse_number<double>(f[4], lineno);
        r.cycles = detail::parse_number<std::uint64_t>(f[5], lineno);
        r.projected_hw_s = detail::parse_number<double>(f[6], lineno);
        r.outcome = parse_outcome(f[7]);
        out.push_back(r);
    }
    return out;
}

inline std::vector<SweepRecord> parse_json(const std::string& text) {
    const auto arr = nlohmann::json::parse(text);
    std::vector<SweepRecord> out;
    for (const auto& j : arr) {
        SweepRecord r;
        r.num_vars = j.at("N").get<std::size_t>();
        r.ratio = j.at("ratio").get<double>();
        r.num_clauses = static_cast<std::size_t>(std::llround(r.ratio * double(r.num_vars)));
        r.seed = j.at("seed").get<std::uint64_t>();
        r.steps = j.at("steps").get<std::uint64_t>();
        r.wall_s = j.at("wall_s").get<double>();
        r.cycles = j.at("cycles").get<std::uint64_t>();
        r.projected_hw_s = j.at("projected_hw_s").get<double>();
        r.outcome = parse_outcome(j.at("outcome").get<std::string>());
        out.push_back(r);
    }
    return out;
}

} // namespace dmm
