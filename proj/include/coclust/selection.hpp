#pragma once

#include "coclust/bem.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>

namespace coclust {

/// Number of free parameters of a full-covariance Gaussian mixture's
/// means and covariances: g p + g p (p + 1) / 2.
inline long covariate_param_count(int g, Index p) {
    return static_cast<long>(g) * (p + p * (p + 1) / 2);
}

/// BIC(g, d) with the maximized free energy standing in for the
/// log-likelihood.
inline double bic(double free_energy, Index n, Index m, Index p, int g, int d,
                  long lambda) {
    const double ln = std::log(static_cast<double>(n));
    const double lm = std::log(static_cast<double>(m));
    return -2.0 * free_energy + (g - 1) * ln + static_cast<double>(lambda) * ln +
           (d - 1) * lm +
           static_cast<double>(g) * d * static_cast<double>(p + 1) *
               std::log(static_cast<double>(n) * static_cast<double>(m));
}

inline double bic(const FitResult& fit, Index n, Index m, Index p, int g, int d) {
    return bic(fit.free_energy(), n, m, p, g, d, covariate_param_count(g, p));
}

struct BicEntry {
    double bic = 0.0;
    FitResult fit;
};

struct BicGrid {
    /// Cells whose fit failed on every restart are absent.
    std::map<std::pair<int, int>, BicEntry> entries;
    std::map<std::pair<int, int>, std::string> failures;
    std::pair<int, int> best{0, 0};
};

/// BIC values within this many units of the minimum count as tied.
inline constexpr double bic_tie_window = 2.0;

/// Best cell: the smallest g*d among cells within bic_tie_window of the
/// minimum BIC, then the smallest BIC.
inline std::pair<int, int>
pick_best(const std::map<std::pair<int, int>, BicEntry>& entries) {
    if (entries.empty())
        throw AllRestartsFailed("no grid cell produced a fit");
    double min_bic = std::numeric_limits<double>::infinity();
    for (const auto& [gd, e] : entries)
        min_bic = std::min(min_bic, e.bic);
    std::optional<std::pair<int, int>> best;
    for (const auto& [gd, e] : entries) {
        if (e.bic > min_bic + bic_tie_window)
            continue;
        if (!best) {
            best = gd;
            continue;
        }
        const int size = gd.first * gd.second;
        const int best_size = best->first * best->second;
        if (size < best_size ||
            (size == best_size && e.bic < entries.at(*best).bic))
            best = gd;
    }
    return *best;
}

/// Fits every (g, d) in the inclusive ranges and scores each with BIC.
/// Each cell gets its own seed derived from cfg.seed and (g, d).
inline BicGrid select(const BinaryMatrix& x, const CovariateTable& y,
                      std::pair<int, int> g_range, std::pair<int, int> d_range,
                      const BemConfig& cfg) {
    if (g_range.first < 1 || g_range.first > g_range.second ||
        d_range.first < 1 || d_range.first > d_range.second)
        throw InvalidArgument("invalid (g, d) ranges");
    if (g_range.second > x.rows() || d_range.second > x.cols())
        throw InvalidArgument("cluster counts exceed matrix dimensions");
    BicGrid grid;
    for (int g = g_range.first; g <= g_range.second; ++g)
        for (int d = d_range.first; d <= d_range.second; ++d) {
            BemConfig cell_cfg = cfg;
            cell_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(g) * 1000003ULL +
                                                      static_cast<std::uint64_t>(d));
            try {
                FitResult f = fit(x, y, g, d, cell_cfg);
                const double score = bic(f, x.rows(), x.cols(), y.dim(), g, d);
                grid.entries.emplace(std::pair{g, d}, BicEntry{score, std::move(f)});
            } catch (const AllRestartsFailed& e) {
                grid.failures.emplace(std::pair{g, d}, e.what());
            }
        }
    grid.best = pick_best(grid.entries);
    return grid;
}

} // namespace coclust
