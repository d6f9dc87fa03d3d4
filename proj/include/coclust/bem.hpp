#pragma once

#include "coclust/densities.hpp"
#include "coclust/random.hpp"
#include "coclust/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace coclust {

enum class InitStrategy { RandomSoft, KMeansLike };

struct BemConfig {
    int max_outer_iters = 200;
    /// Cycles run before the stopping rule is consulted (timing runs set
    /// this to max_outer_iters).
    int min_outer_iters = 0;
    double free_energy_rel_tol = 1e-8;
    int nr_max_iters = 25;
    double nr_grad_tol = 1e-8;
    int n_restarts = 10;
    InitStrategy init_strategy = InitStrategy::KMeansLike;
    double ridge = 1e-8;
    double min_cluster_mass = 1e-6;
    std::uint64_t seed = 0;
    CovWeight cov_weight = CovWeight::PerRow;
    /// Bound on |y_aug^T beta| enforced by the Newton-Raphson solver.
    double separation_bound = 30.0;

    void validate() const {
        if (max_outer_iters < 1 || nr_max_iters < 1 || n_restarts < 1)
            throw InvalidArgument("iteration counts must be >= 1");
        if (!(free_energy_rel_tol > 0.0) || !(nr_grad_tol > 0.0))
            throw InvalidArgument("tolerances must be > 0");
        if (!(ridge >= 0.0) || !(min_cluster_mass >= 0.0))
            throw InvalidArgument("ridge and min_cluster_mass must be >= 0");
        if (!(separation_bound > 0.0))
            throw InvalidArgument("separation bound must be > 0");
    }
};

struct FitResult {
    ModelParams params;
    SoftAssignments assignments;
    /// Initial value, then one entry after each of the four sub-steps of
    /// every cycle (row E, row M, column E, column M).
    std::vector<double> free_energy_trace;
    bool converged = false;
    int n_iters = 0;
    HardLabels map_labels;
    /// Some logistic block hit the separation bound in the final M-step.
    bool separation_flagged = false;
    int restart = 0;
    int failed_restarts = 0;

    double free_energy() const { return free_energy_trace.back(); }
};

namespace detail {

/// eta[k](i, l) = y_aug_i^T beta_kl.
inline std::vector<Matrix> linear_predictors(const CovariateTable& y,
                                             const BetaBlocks& beta) {
    const Index q = y.augmented().cols();
    std::vector<Matrix> eta;
    eta.reserve(static_cast<std::size_t>(beta.g()));
    Matrix coef(q, beta.d());
    for (int k = 0; k < beta.g(); ++k) {
        for (int l = 0; l < beta.d(); ++l)
            coef.col(l) = beta(k, l);
        eta.push_back(y.augmented() * coef);
    }
    return eta;
}

inline Matrix softplus(const Matrix& a) {
    return a.unaryExpr([](double u) { return coclust::softplus(u); });
}

/// log phi(y_i; mu_k, Sigma_k) as an n x g matrix.
inline Matrix gaussian_log_densities(const CovariateTable& y,
                                     const std::vector<GaussianComponent>& comps) {
    Matrix out(y.rows(), static_cast<Index>(comps.size()));
    for (std::size_t k = 0; k < comps.size(); ++k)
        for (Index i = 0; i < y.rows(); ++i)
            out(i, static_cast<Index>(k)) =
                comps[k].log_pdf(y.raw().row(i).transpose());
    return out;
}

/// Row-wise softmax of log-weights, in place.
inline void normalize_log_rows(Matrix& logw) {
    for (Index i = 0; i < logw.rows(); ++i) {
        const double lse = log_sum_exp(logw.row(i).transpose());
        if (!std::isfinite(lse))
            throw NonFinite("posterior row " + std::to_string(i + 1) +
                            " has no finite log-weight");
        logw.row(i) = (logw.row(i).array() - lse).exp().matrix();
    }
}

inline void check_shapes(const BinaryMatrix& x, const CovariateTable& y) {
    if (x.rows() != y.rows())
        throw DimensionMismatch("x has " + std::to_string(x.rows()) +
                                " rows but y has " + std::to_string(y.rows()));
}

} // namespace detail

/// Row E-step: t_ik proportional to
///   pi_k * prod_{j,l} (f(x_ij | y_i; beta_kl) phi(y_i; mu_k, Sigma_k))^{r_jl},
/// evaluated in log domain. With CovWeight::PerRow the Gaussian factor
/// enters once per row instead of with total weight m.
inline Matrix row_e_step(const BinaryMatrix& x, const CovariateTable& y,
                         const Matrix& r, const ModelParams& params,
                         CovWeight weight = CovWeight::PerRow) {
    detail::check_shapes(x, y);
    const int g = params.g();
    const Matrix s = x.dense() * r;
    const Vector r_mass = r.colwise().sum().transpose();
    const auto eta = detail::linear_predictors(y, params.beta);
    const Matrix log_phi = detail::gaussian_log_densities(y, params.gaussians);
    const double w = covariate_weight(weight, x.cols());

    Matrix logt(x.rows(), g);
    for (int k = 0; k < g; ++k) {
        const Matrix& e = eta[static_cast<std::size_t>(k)];
        logt.col(k) = s.cwiseProduct(e).rowwise().sum() -
                      detail::softplus(e) * r_mass + w * log_phi.col(k);
        logt.col(k).array() += std::log(params.pi[k]);
    }
    detail::normalize_log_rows(logt);
    return logt;
}

/// Column E-step: r_jl proportional to
///   rho_l * prod_{i,k} f(x_ij | y_i; beta_kl)^{t_ik}.
/// The co-variable density does not depend on (j, l) and cancels.
inline Matrix col_e_step(const BinaryMatrix& x, const CovariateTable& y,
                         const Matrix& t, const ModelParams& params) {
    detail::check_shapes(x, y);
    const int g = params.g(), d = params.d();
    const auto eta = detail::linear_predictors(y, params.beta);
    Matrix a = Matrix::Zero(x.rows(), d);
    Vector b = Vector::Zero(d);
    for (int k = 0; k < g; ++k) {
        const Matrix& e = eta[static_cast<std::size_t>(k)];
        a += t.col(k).asDiagonal() * e;
        b += (detail::softplus(e).transpose() * t.col(k));
    }
    Matrix logr = x.dense().transpose() * a;
    for (int l = 0; l < d; ++l)
        logr.col(l).array() += std::log(params.rho[l]) - b[l];
    detail::normalize_log_rows(logr);
    return logr;
}

/// pi_k = t_.k / n, rho_l = r_.l / m.
inline std::pair<Vector, Vector> m_step_proportions(const Matrix& t,
                                                    const Matrix& r) {
    Vector pi = t.colwise().sum().transpose() / static_cast<double>(t.rows());
    Vector rho = r.colwise().sum().transpose() / static_cast<double>(r.rows());
    return {pi / pi.sum(), rho / rho.sum()};
}

/// Weighted means and covariances (plus ridge * I) of the co-variables.
inline std::vector<GaussianComponent>
m_step_gaussian(const Matrix& t, const CovariateTable& y, double ridge = 1e-8,
                double min_cluster_mass = 1e-6) {
    std::vector<GaussianComponent> out;
    out.reserve(static_cast<std::size_t>(t.cols()));
    for (Index k = 0; k < t.cols(); ++k) {
        const double mass = t.col(k).sum();
        if (!(mass >= min_cluster_mass) || mass <= 0.0)
            throw EmptyCluster(static_cast<int>(k), mass);
        Vector mu = (y.raw().transpose() * t.col(k)) / mass;
        const Matrix centered = y.raw().rowwise() - mu.transpose();
        Matrix sigma = centered.transpose() * t.col(k).asDiagonal() * centered / mass;
        sigma = 0.5 * (sigma + sigma.transpose()).eval();
        sigma.diagonal().array() += ridge;
        out.emplace_back(std::move(mu), std::move(sigma));
    }
    return out;
}

/// The (k, l) logistic sub-problem of the beta M-step,
///   l(beta) = sum_i t_ik (X_i eta_i - r_.l log(1 + e^{eta_i})),
/// with X_i = sum_j r_jl x_ij and eta_i = y_aug_i^T beta.
class LogisticBlockObjective {
  public:
    LogisticBlockObjective(const Matrix& y_aug, Vector row_weights,
                           Vector successes, double trials)
        : y_aug_(&y_aug), weights_(std::move(row_weights)),
          successes_(std::move(successes)), trials_(trials) {}

    Index dim() const { return y_aug_->cols(); }
    const Matrix& design() const { return *y_aug_; }

    double value(const Vector& beta) const {
        const Vector eta = *y_aug_ * beta;
        double v = 0.0;
        for (Index i = 0; i < eta.size(); ++i)
            v += weights_[i] * (successes_[i] * eta[i] - trials_ * softplus(eta[i]));
        return v;
    }

    /// Y^T D (X - mu) with D = diag(t_ik), mu_i = r_.l * logistic(eta_i).
    Vector gradient(const Vector& beta) const {
        const Vector eta = *y_aug_ * beta;
        Vector resid(eta.size());
        for (Index i = 0; i < eta.size(); ++i)
            resid[i] = weights_[i] * (successes_[i] - trials_ * logistic(eta[i]));
        return y_aug_->transpose() * resid;
    }

    /// -Y^T D W Y with W = diag(r_.l * p_i (1 - p_i)).
    Matrix hessian(const Vector& beta) const {
        Vector grad;
        Matrix hess;
        derivatives(beta, grad, hess);
        return hess;
    }

    /// Gradient and Hessian in one pass over the rows.
    void derivatives(const Vector& beta, Vector& grad, Matrix& hess) const {
        const Vector eta = *y_aug_ * beta;
        Vector resid(eta.size()), dw(eta.size());
        for (Index i = 0; i < eta.size(); ++i) {
            const double pr = logistic(eta[i]);
            resid[i] = weights_[i] * (successes_[i] - trials_ * pr);
            dw[i] = weights_[i] * trials_ * pr * (1.0 - pr);
        }
        grad = y_aug_->transpose() * resid;
        hess = -(y_aug_->transpose() * dw.asDiagonal() * *y_aug_);
    }

  private:
    const Matrix* y_aug_;
    Vector weights_;
    Vector successes_;
    double trials_;
};

struct NewtonResult {
    Vector beta;
    int iterations = 0;
    double grad_norm = 0.0;
    /// The step was truncated by the separation bound.
    bool separated = false;
};

/// Damped Newton-Raphson ascent on one logistic block. Steps are truncated
/// so that |eta_i| stays within cfg.separation_bound for every row, then
/// halved until the objective does not decrease.
inline NewtonResult maximize_logistic_block(const LogisticBlockObjective& obj,
                                            Vector beta, const BemConfig& cfg) {
    const Matrix& design = obj.design();
    const double bound = cfg.separation_bound;
    NewtonResult res;

    {
        const Vector eta = design * beta;
        const double worst = eta.size() ? eta.cwiseAbs().maxCoeff() : 0.0;
        if (worst > bound) {
            beta *= bound / worst;
            res.separated = true;
        }
    }

    double value = obj.value(beta);
    for (int it = 0; it < cfg.nr_max_iters; ++it) {
        Vector grad;
        Matrix neg_h;
        obj.derivatives(beta, grad, neg_h);
        neg_h = -neg_h;
        res.grad_norm = grad.lpNorm<Eigen::Infinity>();
        if (!std::isfinite(res.grad_norm))
            break;

        Vector step;
        double jitter = std::max(cfg.ridge, 1e-12) *
                        std::max(1.0, neg_h.diagonal().cwiseAbs().maxCoeff());
        for (int attempt = 0;; ++attempt) {
            Eigen::LLT<Matrix> llt(neg_h);
            if (llt.info() == Eigen::Success) {
                step = llt.solve(grad);
                if (step.allFinite())
                    break;
            }
            if (attempt == 30)
                throw NonFinite("logistic Hessian stays singular after ridge");
            neg_h.diagonal().array() += jitter;
            jitter *= 10.0;
        }
        // A small gradient with a large Newton step means the optimum lies
        // at infinity; keep stepping until the bound binds.
        if (res.grad_norm < cfg.nr_grad_tol &&
            step.lpNorm<Eigen::Infinity>() < std::sqrt(cfg.nr_grad_tol))
            break;
        res.iterations = it + 1;
        // Below this the change in the objective is rounding noise.
        const double noise = 1e-14 * (1.0 + std::abs(value));
        const bool flat = 0.5 * grad.dot(step) <= noise;

        // Largest fraction of the step keeping |eta| <= bound.
        const Vector eta0 = design * beta;
        const Vector deta = design * step;
        double frac = 1.0;
        for (Index i = 0; i < eta0.size(); ++i) {
            if (deta[i] > 0.0)
                frac = std::min(frac, (bound - eta0[i]) / deta[i]);
            else if (deta[i] < 0.0)
                frac = std::min(frac, (-bound - eta0[i]) / deta[i]);
        }
        frac = std::max(frac, 0.0);
        if (frac < 1.0)
            res.separated = true;
        if (frac < 1e-12)
            break;

        bool accepted = false;
        for (int h = 0; h < 40; ++h, frac *= 0.5) {
            Vector candidate = beta + frac * step;
            const double v = obj.value(candidate);
            if (v >= value || (flat && v >= value - noise)) {
                accepted = true;
                beta = std::move(candidate);
                value = v;
                break;
            }
        }
        if (!accepted)
            break;
    }
    res.beta = std::move(beta);
    return res;
}

struct BetaStepResult {
    BetaBlocks beta;
    bool separated = false;
};

/// Beta M-step: independent Newton-Raphson solves for every (k, l) block,
/// each warm-started from beta_init.
inline BetaStepResult m_step_beta(const BinaryMatrix& x, const CovariateTable& y,
                                  const Matrix& t, const Matrix& r,
                                  const BetaBlocks& beta_init,
                                  const BemConfig& cfg) {
    detail::check_shapes(x, y);
    const Matrix s = x.dense() * r;
    const Vector r_mass = r.colwise().sum().transpose();
    BetaStepResult out{beta_init, false};
    for (int k = 0; k < beta_init.g(); ++k)
        for (int l = 0; l < beta_init.d(); ++l) {
            LogisticBlockObjective obj(y.augmented(), t.col(k), s.col(l), r_mass[l]);
            auto nr = maximize_logistic_block(obj, beta_init(k, l), cfg);
            out.beta(k, l) = std::move(nr.beta);
            out.separated = out.separated || nr.separated;
        }
    return out;
}

/// Variational lower bound on the log-likelihood:
///   sum_k t_.k log pi_k + sum_l r_.l log rho_l
///   + sum_{i,j,k,l} t_ik r_jl log f(x_ij, y_i; theta_kl)
///   - sum t log t - sum r log r.
inline double free_energy(const BinaryMatrix& x, const CovariateTable& y,
                          const Matrix& t, const Matrix& r,
                          const ModelParams& params,
                          CovWeight weight = CovWeight::PerRow) {
    detail::check_shapes(x, y);
    const Vector t_mass = t.colwise().sum().transpose();
    const Vector r_mass = r.colwise().sum().transpose();
    double f = 0.0;
    for (Index k = 0; k < t_mass.size(); ++k)
        f += xlogy(t_mass[k], params.pi[k]);
    for (Index l = 0; l < r_mass.size(); ++l)
        f += xlogy(r_mass[l], params.rho[l]);

    const Matrix s = x.dense() * r;
    const auto eta = detail::linear_predictors(y, params.beta);
    const Matrix log_phi = detail::gaussian_log_densities(y, params.gaussians);
    const double w = covariate_weight(weight, x.cols());
    for (int k = 0; k < params.g(); ++k) {
        const Matrix& e = eta[static_cast<std::size_t>(k)];
        const Vector per_row = s.cwiseProduct(e).rowwise().sum() -
                               detail::softplus(e) * r_mass + w * log_phi.col(k);
        f += t.col(k).dot(per_row);
    }
    f -= t.unaryExpr([](double v) { return xlogx(v); }).sum();
    f -= r.unaryExpr([](double v) { return xlogx(v); }).sum();
    return f;
}

/// Argmax of each posterior row; ties go to the smallest index.
inline HardLabels map_labels(const SoftAssignments& a) {
    auto argmax_rows = [](const Matrix& m) {
        std::vector<int> out(static_cast<std::size_t>(m.rows()));
        for (Index i = 0; i < m.rows(); ++i) {
            Index best = 0;
            for (Index c = 1; c < m.cols(); ++c)
                if (m(i, c) > m(i, best))
                    best = c;
            out[static_cast<std::size_t>(i)] = static_cast<int>(best);
        }
        return out;
    };
    return {argmax_rows(a.t), argmax_rows(a.r)};
}

namespace detail {

/// Lloyd iterations with k-means++ seeding; returns hard labels.
inline std::vector<int> lloyd(const Matrix& features, int k, Rng& rng,
                              int iterations = 10) {
    const Index n = features.rows();
    Matrix centers(k, features.cols());
    Vector dist2 = Vector::Constant(n, std::numeric_limits<double>::infinity());
    centers.row(0) = features.row(static_cast<Index>(rng.uniform() * static_cast<double>(n)) % n);
    for (int c = 1; c < k; ++c) {
        for (Index i = 0; i < n; ++i)
            dist2[i] = std::min(dist2[i], (features.row(i) - centers.row(c - 1)).squaredNorm());
        const double total = dist2.sum();
        const Index pick = total > 0.0
                               ? rng.categorical(dist2)
                               : static_cast<Index>(rng.uniform() * static_cast<double>(n)) % n;
        centers.row(c) = features.row(pick);
    }
    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    for (int it = 0; it < iterations; ++it) {
        for (Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double dd = (features.row(i) - centers.row(c)).squaredNorm();
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            labels[static_cast<std::size_t>(i)] = best;
        }
        Matrix sums = Matrix::Zero(k, features.cols());
        Vector counts = Vector::Zero(k);
        for (Index i = 0; i < n; ++i) {
            sums.row(labels[static_cast<std::size_t>(i)]) += features.row(i);
            counts[labels[static_cast<std::size_t>(i)]] += 1.0;
        }
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0.0)
                centers.row(c) = sums.row(c) / counts[c];
    }
    return labels;
}

inline Matrix standardize_columns(Matrix f) {
    for (Index c = 0; c < f.cols(); ++c) {
        const double mean = f.col(c).mean();
        f.col(c).array() -= mean;
        const double sd = std::sqrt(f.col(c).squaredNorm() / static_cast<double>(f.rows()));
        if (sd > 0.0)
            f.col(c) /= sd;
    }
    return f;
}

inline Matrix smoothed_one_hot(const std::vector<int>& labels, int k,
                               double keep = 0.9) {
    Matrix out = Matrix::Constant(static_cast<Index>(labels.size()), k,
                                  (1.0 - keep) / k);
    for (std::size_t i = 0; i < labels.size(); ++i)
        out(static_cast<Index>(i), labels[i]) += keep;
    return out;
}

} // namespace detail

/// Starting posteriors for one restart.
inline SoftAssignments initial_assignments(const BinaryMatrix& x,
                                           const CovariateTable& y, int g,
                                           int d, InitStrategy strategy,
                                           Rng& rng) {
    const Index n = x.rows(), m = x.cols();
    SoftAssignments a{Matrix(n, g), Matrix(m, d)};
    if (strategy == InitStrategy::RandomSoft) {
        for (Index i = 0; i < n; ++i)
            a.t.row(i) = rng.dirichlet(g, 1.5).transpose();
        for (Index j = 0; j < m; ++j)
            a.r.row(j) = rng.dirichlet(d, 1.5).transpose();
        return a;
    }
    Matrix row_features(n, y.dim() + 1);
    row_features.leftCols(y.dim()) = y.raw();
    row_features.col(y.dim()) = x.dense().rowwise().mean();
    a.t = detail::smoothed_one_hot(
        detail::lloyd(detail::standardize_columns(row_features), g, rng), g);

    // Column profile: mean of each column within each provisional row cluster.
    const Vector mass = a.t.colwise().sum().transpose();
    Matrix col_features = x.dense().transpose() * a.t;
    for (int k = 0; k < g; ++k)
        col_features.col(k) /= mass[k];
    a.r = detail::smoothed_one_hot(detail::lloyd(col_features, d, rng), d);
    return a;
}

/// Runs Block-EM from the given starting posteriors.
inline FitResult fit_from(const BinaryMatrix& x, const CovariateTable& y,
                          SoftAssignments start, const BemConfig& cfg) {
    detail::check_shapes(x, y);
    cfg.validate();
    const int g = static_cast<int>(start.t.cols());
    const int d = static_cast<int>(start.r.cols());
    const CovWeight cw = cfg.cov_weight;

    FitResult res;
    Matrix& t = start.t;
    Matrix& r = start.r;
    ModelParams& th = res.params;

    // Initial parameters from the starting posteriors.
    std::tie(th.pi, th.rho) = m_step_proportions(t, r);
    th.gaussians = m_step_gaussian(t, y, cfg.ridge, cfg.min_cluster_mass);
    auto beta_step = m_step_beta(x, y, t, r, BetaBlocks(g, d, y.dim() + 1), cfg);
    th.beta = std::move(beta_step.beta);

    auto& trace = res.free_energy_trace;
    auto record = [&] {
        const double f = free_energy(x, y, t, r, th, cw);
        if (!std::isfinite(f))
            throw NonFinite("free energy is not finite");
        trace.push_back(f);
    };
    record();

    for (int c = 0; c < cfg.max_outer_iters; ++c) {
        const double previous = trace.back();
        // (a) row E-step
        t = row_e_step(x, y, r, th, cw);
        record();
        // (b) row M-step
        th.pi = m_step_proportions(t, r).first;
        th.gaussians = m_step_gaussian(t, y, cfg.ridge, cfg.min_cluster_mass);
        th.beta = m_step_beta(x, y, t, r, th.beta, cfg).beta;
        record();
        // (c) column E-step
        r = col_e_step(x, y, t, th);
        record();
        // (d) column M-step
        th.rho = m_step_proportions(t, r).second;
        beta_step = m_step_beta(x, y, t, r, th.beta, cfg);
        th.beta = std::move(beta_step.beta);
        record();

        res.n_iters = c + 1;
        if (res.n_iters >= cfg.min_outer_iters &&
            trace.back() - previous <= cfg.free_energy_rel_tol * std::abs(previous)) {
            res.converged = true;
            break;
        }
    }
    res.separation_flagged = beta_step.separated;
    res.assignments = std::move(start);
    res.map_labels = map_labels(res.assignments);
    return res;
}

/// Block-EM with cfg.n_restarts independent initializations; keeps the run
/// with the highest final free energy.
inline FitResult fit(const BinaryMatrix& x, const CovariateTable& y, int g,
                     int d, const BemConfig& cfg) {
    detail::check_shapes(x, y);
    cfg.validate();
    if (g < 1 || g > x.rows() || d < 1 || d > x.cols())
        throw InvalidArgument("need 1 <= g <= n and 1 <= d <= m");

    std::optional<FitResult> best;
    int failed = 0;
    std::string last_error;
    for (int restart = 0; restart < cfg.n_restarts; ++restart) {
        Rng rng(cfg.seed, 1000 + static_cast<std::uint64_t>(restart));
        try {
            auto start = initial_assignments(x, y, g, d, cfg.init_strategy, rng);
            FitResult res = fit_from(x, y, std::move(start), cfg);
            res.restart = restart;
            if (!best || res.free_energy() > best->free_energy())
                best = std::move(res);
        } catch (const EmptyCluster& e) {
            ++failed;
            last_error = e.what();
        } catch (const NotPositiveDefinite& e) {
            ++failed;
            last_error = e.what();
        } catch (const NonFinite& e) {
            ++failed;
            last_error = e.what();
        }
    }
    if (!best)
        throw AllRestartsFailed("all " + std::to_string(cfg.n_restarts) +
                                " restarts failed; last error: " + last_error);
    best->failed_restarts = failed;
    return std::move(*best);
}

} // namespace coclust
