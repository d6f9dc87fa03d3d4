#pragma once

#include "coclust/densities.hpp"
#include "coclust/types.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace coclust {

/// Largest number of (z, w) labelings the brute-force routines will visit.
inline constexpr double max_enumerated_labelings = 1e7;

namespace detail {

/// Precomputed per-cell and per-row log terms of the complete-data
/// likelihood, enumerated over every labeling in lexicographic order
/// (z_1 most significant, then w).
class LabelingEnumerator {
  public:
    LabelingEnumerator(const BinaryMatrix& x, const CovariateTable& y,
                       const ModelParams& params, CovWeight weight)
        : n_(x.rows()), m_(x.cols()), g_(params.g()), d_(params.d()) {
        params.validate();
        if (x.rows() != y.rows())
            throw DimensionMismatch("x and y differ in row count");
        const double count = std::pow(static_cast<double>(g_), static_cast<double>(n_)) *
                             std::pow(static_cast<double>(d_), static_cast<double>(m_));
        if (count > max_enumerated_labelings)
            throw InstanceTooLarge("g^n * d^m = " + std::to_string(count) +
                                   " exceeds the enumeration limit");
        const double wphi = covariate_weight(weight, m_);
        row_term_.resize(n_, g_);
        for (Index i = 0; i < n_; ++i)
            for (int k = 0; k < g_; ++k)
                row_term_(i, k) =
                    std::log(params.pi[k]) +
                    wphi * params.gaussians[static_cast<std::size_t>(k)].log_pdf(
                               y.raw().row(i).transpose());
        log_rho_ = params.rho.array().log();
        cell_.assign(static_cast<std::size_t>(g_ * d_), Matrix(n_, m_));
        for (int k = 0; k < g_; ++k)
            for (int l = 0; l < d_; ++l) {
                const Vector eta = y.augmented() * params.beta(k, l);
                Matrix& c = cell_[static_cast<std::size_t>(k * d_ + l)];
                for (Index j = 0; j < m_; ++j)
                    for (Index i = 0; i < n_; ++i)
                        c(i, j) = bernoulli_link_logpdf(x(i, j), eta[i]);
            }
    }

    /// Calls fn(z, w, log_joint) for every labeling.
    template <typename Fn> void for_each(Fn&& fn) const {
        std::vector<int> z(static_cast<std::size_t>(n_), 0);
        std::vector<int> w(static_cast<std::size_t>(m_), 0);
        do {
            do {
                fn(z, w, log_joint(z, w));
            } while (advance(w, d_));
        } while (advance(z, g_));
    }

    double log_joint(const std::vector<int>& z, const std::vector<int>& w) const {
        double v = 0.0;
        for (Index i = 0; i < n_; ++i)
            v += row_term_(i, z[static_cast<std::size_t>(i)]);
        for (Index j = 0; j < m_; ++j) {
            const int l = w[static_cast<std::size_t>(j)];
            v += log_rho_[l];
            for (Index i = 0; i < n_; ++i)
                v += cell_[static_cast<std::size_t>(z[static_cast<std::size_t>(i)] * d_ + l)](i, j);
        }
        return v;
    }

  private:
    // Odometer increment, last position fastest. Returns false on wrap.
    static bool advance(std::vector<int>& digits, int base) {
        for (std::size_t pos = digits.size(); pos-- > 0;) {
            if (++digits[pos] < base)
                return true;
            digits[pos] = 0;
        }
        return false;
    }

    Index n_, m_;
    int g_, d_;
    Matrix row_term_;
    Vector log_rho_;
    std::vector<Matrix> cell_;
};

} // namespace detail

/// Calls fn(z, w, log p(x, y, z, w; theta)) for every labeling.
template <typename Fn>
void for_each_labeling(const BinaryMatrix& x, const CovariateTable& y,
                       const ModelParams& params, CovWeight weight, Fn&& fn) {
    detail::LabelingEnumerator(x, y, params, weight).for_each(std::forward<Fn>(fn));
}

/// log f(x, y; theta) by exhaustive summation over all (z, w), using a
/// single global max shift.
inline double exact_loglik(const BinaryMatrix& x, const CovariateTable& y,
                           const ModelParams& params,
                           CovWeight weight = CovWeight::PerRow) {
    const detail::LabelingEnumerator en(x, y, params, weight);
    double mx = -std::numeric_limits<double>::infinity();
    en.for_each([&](const auto&, const auto&, double v) { mx = std::max(mx, v); });
    if (!std::isfinite(mx))
        return mx;
    double sum = 0.0;
    en.for_each([&](const auto&, const auto&, double v) { sum += std::exp(v - mx); });
    return mx + std::log(sum);
}

/// Labeling maximizing the complete-data likelihood; ties go to the
/// lexicographically smallest (z, w).
inline HardLabels exact_posterior_mode(const BinaryMatrix& x,
                                       const CovariateTable& y,
                                       const ModelParams& params,
                                       CovWeight weight = CovWeight::PerRow) {
    HardLabels best;
    double best_v = -std::numeric_limits<double>::infinity();
    for_each_labeling(x, y, params, weight,
                      [&](const std::vector<int>& z, const std::vector<int>& w, double v) {
                          const bool better = std::isfinite(best_v)
                                                        ? v > best_v + 1e-12 * std::abs(best_v)
                                                        : v > best_v;
                          if (best.z.empty() || better) {
                              best_v = v;
                              best.z = z;
                              best.w = w;
                          }
                      });
    return best;
}

} // namespace coclust
