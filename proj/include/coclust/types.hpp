#pragma once

#include "coclust/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace coclust {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// How often the co-variable density enters the model per row.
///
/// PerCell attaches phi(y_i) to every cell (i, j), i.e. the row term is
/// weighted by m. PerRow uses phi(y_i) once per individual.
enum class CovWeight { PerCell, PerRow };

inline double covariate_weight(CovWeight w, Index m) {
    return w == CovWeight::PerCell ? static_cast<double>(m) : 1.0;
}

/// n x m matrix of 0/1 observations (rows are individuals).
class BinaryMatrix {
  public:
    BinaryMatrix() = default;

    explicit BinaryMatrix(Matrix values) : values_(std::move(values)) {
        if (values_.rows() < 1 || values_.cols() < 1)
            throw InvalidArgument("binary matrix must have n >= 1 and m >= 1");
        for (Index j = 0; j < values_.cols(); ++j)
            for (Index i = 0; i < values_.rows(); ++i) {
                const double v = values_(i, j);
                if (v != 0.0 && v != 1.0)
                    throw NonBinaryValue(static_cast<std::size_t>(i),
                                         static_cast<std::size_t>(j),
                                         std::to_string(v));
            }
    }

    Index rows() const { return values_.rows(); }
    Index cols() const { return values_.cols(); }
    double operator()(Index i, Index j) const { return values_(i, j); }
    const Matrix& dense() const { return values_; }

    bool operator==(const BinaryMatrix& o) const {
        return values_.rows() == o.values_.rows() &&
               values_.cols() == o.values_.cols() && values_ == o.values_;
    }

  private:
    Matrix values_;
};

/// n x p real co-variables, together with the augmented n x (p+1) design
/// whose column 0 is the constant 1 (so beta[0] is always the intercept).
class CovariateTable {
  public:
    CovariateTable() = default;

    explicit CovariateTable(Matrix raw) : raw_(std::move(raw)) {
        if (raw_.rows() < 1)
            throw InvalidArgument("covariate table must have n >= 1");
        if (!raw_.allFinite())
            throw NonFinite("covariate table contains non-finite values");
        augmented_.resize(raw_.rows(), raw_.cols() + 1);
        augmented_.col(0).setOnes();
        augmented_.rightCols(raw_.cols()) = raw_;
    }

    /// Table with p = 0 (intercept-only models).
    static CovariateTable intercept_only(Index n) {
        return CovariateTable(Matrix(n, 0));
    }

    Index rows() const { return raw_.rows(); }
    Index dim() const { return raw_.cols(); }
    const Matrix& raw() const { return raw_; }
    const Matrix& augmented() const { return augmented_; }

    bool operator==(const CovariateTable& o) const {
        return raw_.rows() == o.raw_.rows() && raw_.cols() == o.raw_.cols() &&
               raw_ == o.raw_;
    }

  private:
    Matrix raw_;
    Matrix augmented_;
};

/// Multivariate normal component with a validated, cached Cholesky factor.
///
/// Instances are immutable; a new component is built (and re-validated)
/// whenever the mean or covariance changes.
class GaussianComponent {
  public:
    GaussianComponent() : GaussianComponent(Vector(0), Matrix(0, 0)) {}

    GaussianComponent(Vector mean, Matrix cov)
        : mean_(std::move(mean)), cov_(std::move(cov)) {
        const Index p = mean_.size();
        if (cov_.rows() != p || cov_.cols() != p)
            throw InvalidArgument("covariance shape does not match mean");
        if (!mean_.allFinite() || !cov_.allFinite())
            throw NonFinite("gaussian parameters must be finite");
        const double scale = p > 0 ? std::max(1.0, cov_.cwiseAbs().maxCoeff()) : 1.0;
        if (p > 0 && (cov_ - cov_.transpose()).cwiseAbs().maxCoeff() >
                         1e-12 * scale)
            throw NotPositiveDefinite("covariance is not symmetric");
        chol_ = Matrix::Zero(p, p);
        log_det_ = 0.0;
        if (p == 0)
            return;
        Eigen::LLT<Matrix> llt(cov_);
        if (llt.info() != Eigen::Success)
            throw NotPositiveDefinite("covariance is not positive definite");
        chol_ = llt.matrixL();
        for (Index a = 0; a < p; ++a) {
            if (!(chol_(a, a) > 0.0))
                throw NotPositiveDefinite(
                    "covariance is not positive definite");
            log_det_ += 2.0 * std::log(chol_(a, a));
        }
    }

    Index dim() const { return mean_.size(); }
    const Vector& mean() const { return mean_; }
    const Matrix& covariance() const { return cov_; }
    /// Lower-triangular L with L L^T = covariance.
    const Matrix& cholesky() const { return chol_; }
    double log_det() const { return log_det_; }

    double log_pdf(const Eigen::Ref<const Vector>& y) const {
        const Index p = dim();
        if (p == 0)
            return 0.0;
        Vector diff = y - mean_;
        chol_.triangularView<Eigen::Lower>().solveInPlace(diff);
        return -0.5 * (static_cast<double>(p) *
                           std::log(2.0 * std::numbers::pi) +
                       log_det_ + diff.squaredNorm());
    }

  private:
    Vector mean_;
    Matrix cov_;
    Matrix chol_;
    double log_det_ = 0.0;
};

/// g x d array of logistic coefficient vectors of length p+1.
class BetaBlocks {
  public:
    BetaBlocks() = default;
    BetaBlocks(int g, int d, Index coef_dim)
        : g_(g), d_(d), blocks_(static_cast<std::size_t>(g * d),
                                Vector::Zero(coef_dim)) {}

    int g() const { return g_; }
    int d() const { return d_; }
    Index coef_dim() const { return blocks_.empty() ? 0 : blocks_[0].size(); }

    Vector& operator()(int k, int l) { return blocks_[index(k, l)]; }
    const Vector& operator()(int k, int l) const { return blocks_[index(k, l)]; }

    bool all_finite() const {
        for (const auto& b : blocks_)
            if (!b.allFinite())
                return false;
        return true;
    }

  private:
    std::size_t index(int k, int l) const {
        return static_cast<std::size_t>(k * d_ + l);
    }
    int g_ = 0;
    int d_ = 0;
    std::vector<Vector> blocks_;
};

/// theta = (pi, rho, beta, mu, Sigma).
struct ModelParams {
    Vector pi;
    Vector rho;
    BetaBlocks beta;
    std::vector<GaussianComponent> gaussians;

    int g() const { return static_cast<int>(pi.size()); }
    int d() const { return static_cast<int>(rho.size()); }
    Index p() const { return gaussians.empty() ? 0 : gaussians[0].dim(); }

    /// Throws ParamValidationError naming the first violated invariant.
    void validate() const {
        auto check_simplex = [](const Vector& v, const char* name) {
            if (v.size() < 1)
                throw ParamValidationError(std::string(name) + " is empty");
            if (!v.allFinite() || v.minCoeff() < 0.0)
                throw ParamValidationError(std::string(name) +
                                           " has negative or non-finite entries");
            if (std::abs(v.sum() - 1.0) > 1e-12)
                throw ParamValidationError(std::string(name) +
                                           " does not sum to 1");
        };
        check_simplex(pi, "pi");
        check_simplex(rho, "rho");
        if (beta.g() != g() || beta.d() != d())
            throw ParamValidationError("beta must have g x d blocks");
        if (static_cast<int>(gaussians.size()) != g())
            throw ParamValidationError("need one gaussian component per row cluster");
        for (const auto& c : gaussians)
            if (c.dim() != p())
                throw ParamValidationError("gaussian components differ in dimension");
        if (beta.coef_dim() != p() + 1)
            throw ParamValidationError("beta blocks must have length p+1");
        if (!beta.all_finite())
            throw ParamValidationError("beta has non-finite entries");
    }
};

/// Row posteriors t (n x g) and column posteriors r (m x d).
struct SoftAssignments {
    Matrix t;
    Matrix r;
};

inline bool is_row_stochastic(const Matrix& a, double tol = 1e-10) {
    for (Index i = 0; i < a.rows(); ++i) {
        if (a.row(i).minCoeff() < 0.0 || a.row(i).maxCoeff() > 1.0)
            return false;
        if (std::abs(a.row(i).sum() - 1.0) > tol)
            return false;
    }
    return true;
}

/// Hard partitions, stored 0-based (z_i in [0, g), w_j in [0, d)).
struct HardLabels {
    std::vector<int> z;
    std::vector<int> w;

    bool operator==(const HardLabels&) const = default;
};

} // namespace coclust
