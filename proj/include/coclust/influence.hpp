#pragma once

#include "coclust/bem.hpp"
#include "coclust/densities.hpp"

#include <algorithm>
#include <numeric>

namespace coclust {

struct InfluenceReport {
    /// I(j) for every column.
    Vector scores;
    /// Column indices, most influential first; ties by ascending index.
    std::vector<int> ranking;
};

namespace detail {

inline void check_labels(const BinaryMatrix& x, const HardLabels& labels,
                         const ModelParams& params) {
    if (static_cast<Index>(labels.z.size()) != x.rows() ||
        static_cast<Index>(labels.w.size()) != x.cols())
        throw LengthMismatch("labels do not match the data dimensions");
    for (int z : labels.z)
        if (z < 0 || z >= params.g())
            throw InvalidArgument("row label out of range");
    for (int w : labels.w)
        if (w < 0 || w >= params.d())
            throw InvalidArgument("column label out of range");
}

inline double row_prior_terms(const CovariateTable& y, const HardLabels& labels,
                              const ModelParams& params) {
    double v = 0.0;
    for (Index i = 0; i < y.rows(); ++i) {
        const int k = labels.z[static_cast<std::size_t>(i)];
        v += std::log(params.pi[k]) +
             params.gaussians[static_cast<std::size_t>(k)].log_pdf(y.raw().row(i).transpose());
    }
    return v;
}

} // namespace detail

/// I(j) = log rho_{w_j} + sum_i (x_ij eta_i - log(1 + e^{eta_i})) with
/// eta_i = y_aug_i^T beta_{z_i w_j}, for fixed labels.
inline double influence_score(Index j, const BinaryMatrix& x,
                              const CovariateTable& y, const HardLabels& labels,
                              const ModelParams& params) {
    detail::check_labels(x, labels, params);
    if (j < 0 || j >= x.cols())
        throw InvalidArgument("column index out of range");
    const int l = labels.w[static_cast<std::size_t>(j)];
    double v = std::log(params.rho[l]);
    for (Index i = 0; i < x.rows(); ++i) {
        const double eta =
            y.augmented().row(i).dot(params.beta(labels.z[static_cast<std::size_t>(i)], l));
        v += bernoulli_link_logpdf(x(i, j), eta);
    }
    return v;
}

/// Unnormalized log posterior of y given fixed (x, z, w), grouped by rows:
/// per row and column cluster, m_il successes out of m_l trials.
inline double log_posterior_y_rowform(const CovariateTable& y,
                                      const BinaryMatrix& x,
                                      const HardLabels& labels,
                                      const ModelParams& params) {
    detail::check_labels(x, labels, params);
    const int d = params.d();
    Vector m_l = Vector::Zero(d);
    Matrix m_il = Matrix::Zero(x.rows(), d);
    for (Index j = 0; j < x.cols(); ++j) {
        const int l = labels.w[static_cast<std::size_t>(j)];
        m_l[l] += 1.0;
        m_il.col(l) += x.dense().col(j);
    }
    double v = 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
        const int k = labels.z[static_cast<std::size_t>(i)];
        for (int l = 0; l < d; ++l) {
            if (m_l[l] == 0.0)
                continue;
            const double eta = y.augmented().row(i).dot(params.beta(k, l));
            v += m_il(i, l) * eta - m_l[l] * softplus(eta);
        }
    }
    for (int l = 0; l < d; ++l)
        v += xlogy(m_l[l], params.rho[l]);
    return v + detail::row_prior_terms(y, labels, params);
}

/// The same quantity grouped by columns: sum_j I(j) plus the row terms.
inline double log_posterior_y_colform(const CovariateTable& y,
                                      const BinaryMatrix& x,
                                      const HardLabels& labels,
                                      const ModelParams& params) {
    double v = 0.0;
    for (Index j = 0; j < x.cols(); ++j)
        v += influence_score(j, x, y, labels, params);
    return v + detail::row_prior_terms(y, labels, params);
}

inline InfluenceReport influence_report(const BinaryMatrix& x,
                                        const CovariateTable& y,
                                        const HardLabels& labels,
                                        const ModelParams& params) {
    InfluenceReport rep;
    rep.scores.resize(x.cols());
    for (Index j = 0; j < x.cols(); ++j)
        rep.scores[j] = influence_score(j, x, y, labels, params);
    rep.ranking.resize(static_cast<std::size_t>(x.cols()));
    std::iota(rep.ranking.begin(), rep.ranking.end(), 0);
    std::stable_sort(rep.ranking.begin(), rep.ranking.end(),
                     [&](int a, int b) { return rep.scores[a] > rep.scores[b]; });
    return rep;
}

/// Scores every column under the fit's MAP labels.
inline InfluenceReport influence_report(const BinaryMatrix& x,
                                        const CovariateTable& y,
                                        const FitResult& fit) {
    return influence_report(x, y, fit.map_labels, fit.params);
}

} // namespace coclust
