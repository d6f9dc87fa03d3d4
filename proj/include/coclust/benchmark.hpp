#pragma once

#include "coclust/bem.hpp"
#include "coclust/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <span>
#include <vector>

namespace coclust {

struct LinearTrend {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Ordinary least squares of ys on xs.
inline LinearTrend linear_trend(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw InvalidArgument("linear trend needs >= 2 paired points");
    const double k = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t a = 0; a < xs.size(); ++a) {
        mx += xs[a];
        my += ys[a];
    }
    mx /= k;
    my /= k;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t a = 0; a < xs.size(); ++a) {
        sxx += (xs[a] - mx) * (xs[a] - mx);
        sxy += (xs[a] - mx) * (ys[a] - my);
        syy += (ys[a] - my) * (ys[a] - my);
    }
    LinearTrend t;
    t.slope = sxy / sxx;
    t.intercept = my - t.slope * mx;
    t.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return t;
}

struct BenchmarkSpec {
    std::vector<Index> ns{2000, 6000, 10000};
    Index m = 100;
    int g = 2;
    std::vector<int> ds{2, 6};
    /// Every timed fit runs exactly this many cycles from one start.
    int iters = 30;
    /// Repetitions per configuration; the median time is reported.
    int reps = 3;
    std::uint64_t seed = 0;
};

struct BenchmarkPoint {
    Index n = 0;
    int d = 0;
    double seconds = 0.0;
};

/// Times Block-EM on data simulated from a separated design, for every
/// (d, n) pair.
inline std::vector<BenchmarkPoint> run_timing(const BenchmarkSpec& spec) {
    std::vector<BenchmarkPoint> out;
    for (int d : spec.ds) {
        const ModelParams design = separated_design(spec.g, d, 1, spec.seed);
        for (Index n : spec.ns) {
            const SimOutput data = generate({n, spec.m, design, spec.seed});
            BemConfig cfg;
            cfg.n_restarts = 1;
            cfg.max_outer_iters = spec.iters;
            cfg.min_outer_iters = spec.iters;
            cfg.seed = spec.seed;
            std::vector<double> times;
            for (int rep = 0; rep < spec.reps; ++rep) {
                const auto t0 = std::chrono::steady_clock::now();
                const FitResult res = fit(data.x, data.y, spec.g, d, cfg);
                const auto t1 = std::chrono::steady_clock::now();
                (void)res;
                times.push_back(std::chrono::duration<double>(t1 - t0).count());
            }
            std::nth_element(times.begin(), times.begin() + static_cast<long>(times.size() / 2),
                             times.end());
            out.push_back({n, d, times[times.size() / 2]});
        }
    }
    return out;
}

/// Per-d linear trend of seconds on n.
inline LinearTrend timing_trend(const std::vector<BenchmarkPoint>& points, int d) {
    std::vector<double> xs, ys;
    for (const auto& pt : points)
        if (pt.d == d) {
            xs.push_back(static_cast<double>(pt.n));
            ys.push_back(pt.seconds);
        }
    return linear_trend(xs, ys);
}

} // namespace coclust
