#pragma once

#include "coclust/types.hpp"

#include <cmath>

namespace coclust {

/// e^u / (1 + e^u), evaluated on the branch that cannot overflow.
inline double logistic(double u) {
    if (u >= 0.0)
        return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

/// log(1 + e^u).
inline double softplus(double u) {
    if (u > 0.0)
        return u + std::log1p(std::exp(-u));
    return std::log1p(std::exp(u));
}

/// log f(x | y; beta) for a linear predictor eta = y_aug^T beta.
inline double bernoulli_link_logpdf(double x, double eta) {
    return x * eta - softplus(eta);
}

inline double bernoulli_link_logpdf(double x,
                                    const Eigen::Ref<const Vector>& y_aug,
                                    const Eigen::Ref<const Vector>& beta) {
    if (y_aug.size() != beta.size())
        throw LengthMismatch("y_aug and beta differ in length");
    return bernoulli_link_logpdf(x, y_aug.dot(beta));
}

/// log phi(y; mu, sigma). Factors sigma on every call; use
/// GaussianComponent::log_pdf on hot paths.
inline double gaussian_logpdf(const Eigen::Ref<const Vector>& y,
                              const Eigen::Ref<const Vector>& mu,
                              const Eigen::Ref<const Matrix>& sigma) {
    return GaussianComponent(mu, sigma).log_pdf(y);
}

/// log sum_k exp(v_k); -inf if every entry is -inf.
inline double log_sum_exp(const Eigen::Ref<const Vector>& v) {
    const double mx = v.maxCoeff();
    if (!std::isfinite(mx))
        return mx;
    return mx + std::log((v.array() - mx).exp().sum());
}

/// x log x with the 0 log 0 = 0 convention.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

/// a log b with the 0 log 0 = 0 convention.
inline double xlogy(double a, double b) {
    return a == 0.0 ? 0.0 : a * std::log(b);
}

} // namespace coclust
