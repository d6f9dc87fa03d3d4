#pragma once

#include "coclust/densities.hpp"
#include "coclust/hungarian.hpp"
#include "coclust/random.hpp"
#include "coclust/types.hpp"

#include <cstdint>
#include <span>

namespace coclust {

struct SimConfig {
    Index n = 0;
    Index m = 0;
    ModelParams params;
    std::uint64_t seed = 0;
};

struct SimOutput {
    BinaryMatrix x;
    CovariateTable y;
    HardLabels truth;
};

// Sub-stream ids. Each generation step draws from its own stream, so e.g.
// changing m leaves the row labels and co-variables untouched.
namespace streams {
inline constexpr std::uint64_t row_labels = 1;
inline constexpr std::uint64_t col_labels = 2;
inline constexpr std::uint64_t covariates = 3;
inline constexpr std::uint64_t cells = 4;
} // namespace streams

/// Draws (x, y, z, w): row labels, column labels, Gaussian co-variables,
/// then Bernoulli cells through the logistic link.
inline SimOutput generate(const SimConfig& config) {
    if (config.n < 1 || config.m < 1)
        throw InvalidArgument("simulation needs n >= 1 and m >= 1");
    const ModelParams& params = config.params;
    params.validate();
    const Index n = config.n, m = config.m, p = params.p();

    HardLabels truth;
    truth.z.resize(static_cast<std::size_t>(n));
    truth.w.resize(static_cast<std::size_t>(m));

    Rng row_rng(config.seed, streams::row_labels);
    for (auto& z : truth.z)
        z = row_rng.categorical(params.pi);

    Rng col_rng(config.seed, streams::col_labels);
    for (auto& w : truth.w)
        w = col_rng.categorical(params.rho);

    Rng y_rng(config.seed, streams::covariates);
    Matrix y(n, p);
    Vector noise(p);
    for (Index i = 0; i < n; ++i) {
        const auto& comp = params.gaussians[static_cast<std::size_t>(truth.z[i])];
        for (Index a = 0; a < p; ++a)
            noise[a] = y_rng.normal();
        y.row(i) = (comp.mean() + comp.cholesky() * noise).transpose();
    }
    CovariateTable table(std::move(y));

    Rng x_rng(config.seed, streams::cells);
    Matrix x(n, m);
    for (Index i = 0; i < n; ++i) {
        const auto y_aug = table.augmented().row(i).transpose();
        for (Index j = 0; j < m; ++j) {
            const double eta = y_aug.dot(params.beta(truth.z[i], truth.w[j]));
            x(i, j) = x_rng.uniform() < logistic(eta) ? 1.0 : 0.0;
        }
    }
    return {BinaryMatrix(std::move(x)), std::move(table), std::move(truth)};
}

/// Misclassification rate after the best one-to-one relabeling of the
/// estimated clusters onto the true ones.
inline double label_error_rate(std::span<const int> estimated,
                               std::span<const int> truth) {
    if (estimated.size() != truth.size())
        throw LengthMismatch("label vectors differ in length");
    if (truth.empty())
        return 0.0;
    int k = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (estimated[i] < 0 || truth[i] < 0)
            throw InvalidArgument("labels must be nonnegative");
        k = std::max({k, estimated[i] + 1, truth[i] + 1});
    }
    std::vector<std::vector<double>> cost(
        static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k), 0.0));
    for (std::size_t i = 0; i < truth.size(); ++i)
        cost[static_cast<std::size_t>(estimated[i])][static_cast<std::size_t>(truth[i])] -= 1.0;
    const auto assignment = solve_assignment(cost);
    double matched = 0.0;
    for (int a = 0; a < k; ++a)
        matched -= cost[static_cast<std::size_t>(a)][static_cast<std::size_t>(assignment[a])];
    return 1.0 - matched / static_cast<double>(truth.size());
}

} // namespace coclust

namespace coclust {

/// How block intercepts are drawn by separated_design.
enum class InterceptScheme {
    /// Independent uniform draws on [-scale, scale].
    Uniform,
    /// Each column cluster gets a distinct +/-scale sign pattern over the
    /// row clusters (requires d <= 2^g).
    DistinctSigns,
};

struct DesignOptions {
    double mean_spread = 5.0;
    double intercept_scale = 3.0;
    double slope_scale = 0.2;
    InterceptScheme scheme = InterceptScheme::Uniform;
};

/// Parameters with well-separated row clusters in y (means spread evenly
/// over [-mean_spread, mean_spread] on the first coordinate, identity
/// covariances), uniform proportions, and random block coefficients.
inline ModelParams separated_design(int g, int d, Index p, std::uint64_t seed,
                                    const DesignOptions& opt = {}) {
    if (g < 1 || d < 1 || p < 0)
        throw InvalidArgument("invalid design dimensions");
    Rng rng(seed, 77);
    ModelParams th;
    th.pi = Vector::Constant(g, 1.0 / g);
    th.rho = Vector::Constant(d, 1.0 / d);
    for (int k = 0; k < g; ++k) {
        Vector mu = Vector::Zero(p);
        if (p > 0 && g > 1)
            mu[0] = -opt.mean_spread + 2.0 * opt.mean_spread * k / (g - 1);
        th.gaussians.emplace_back(std::move(mu), Matrix::Identity(p, p));
    }
    th.beta = BetaBlocks(g, d, p + 1);

    std::vector<unsigned> patterns;
    if (opt.scheme == InterceptScheme::DistinctSigns) {
        if (g >= 31 || d > (1 << g))
            throw InvalidArgument("distinct sign patterns need d <= 2^g");
        // Random subset of the 2^g patterns, without replacement.
        std::vector<unsigned> all(1u << g);
        for (unsigned a = 0; a < all.size(); ++a)
            all[a] = a;
        for (std::size_t a = all.size(); a > 1; --a)
            std::swap(all[a - 1], all[static_cast<std::size_t>(rng.uniform() * static_cast<double>(a))]);
        patterns.assign(all.begin(), all.begin() + d);
    }
    for (int l = 0; l < d; ++l)
        for (int k = 0; k < g; ++k) {
            Vector& b = th.beta(k, l);
            if (opt.scheme == InterceptScheme::DistinctSigns)
                b[0] = (patterns[static_cast<std::size_t>(l)] >> k & 1u) ? opt.intercept_scale
                                                                        : -opt.intercept_scale;
            else
                b[0] = rng.uniform(-opt.intercept_scale, opt.intercept_scale);
            for (Index a = 1; a <= p; ++a)
                b[a] = rng.uniform(-opt.slope_scale, opt.slope_scale);
        }
    th.validate();
    return th;
}

} // namespace coclust
