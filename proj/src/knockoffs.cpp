#include "fdrsel/knockoffs.hpp"

#include "fdrsel/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace fdrsel {

namespace {

void check_square(const Matrix& sigma, Index p)
{
    if (sigma.rows() != p || sigma.cols() != p)
        throw Error(ErrorCode::invalid_argument, "covariance must be " + std::to_string(p) + " x " + std::to_string(p));
}

} // namespace

Vector equicorrelated_s(const Matrix& sigma)
{
    check_square(sigma, sigma.rows());
    const Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (!(lmin > 0.0)) throw Error(ErrorCode::not_positive_definite, "covariance is not positive definite");
    return Vector::Constant(sigma.rows(), std::min(lmin, sigma.diagonal().minCoeff()));
}

Matrix make_knockoffs(const Matrix& X, const Matrix& sigma, const Vector& s, RngStream& rng)
{
    const Index n = X.rows(), p = X.cols();
    check_square(sigma, p);
    if (s.size() != p) throw Error(ErrorCode::invalid_argument, "s must have one entry per column");
    if ((s.array() < 0.0).any() || !s.allFinite()) throw Error(ErrorCode::invalid_argument, "s must be nonnegative");

    const Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::not_positive_definite, "covariance is not positive definite");
    const double scale = sigma.diagonal().maxCoeff();
    {
        Matrix twice = 2.0 * sigma;
        twice.diagonal() -= s;
        const Eigen::SelfAdjointEigenSolver<Matrix> es(twice, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10 * scale)
            throw Error(ErrorCode::not_positive_definite, "2 Sigma - diag(s) is not positive semidefinite");
    }

    // Sigma^-1 D
    const Matrix inv_d = llt.solve(Matrix(s.asDiagonal()));
    Matrix shrink = Matrix::Identity(p, p) - inv_d;
    Matrix cov = -(s.asDiagonal() * inv_d);
    cov.diagonal() += 2.0 * s;
    cov = 0.5 * (cov + cov.transpose()).eval();
    const Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix C = es.eigenvectors() * root.asDiagonal();

    Matrix Z(n, p);
    for (Index j = 0; j < p; ++j)
        for (Index i = 0; i < n; ++i) Z(i, j) = rng.normal();
    Matrix out = X * shrink;
    out.noalias() += Z * C.transpose();
    return out;
}

Vector knockoff_stats(const Dataset& d, const Matrix& knockoffs, const CvSpec& cv)
{
    const Index p = d.p();
    if (knockoffs.rows() != d.n() || knockoffs.cols() != p)
        throw Error(ErrorCode::invalid_argument, "knockoff matrix must match the design's shape");
    Matrix augmented(d.n(), 2 * p);
    augmented << d.X(), knockoffs;
    const Dataset aug(d.y(), std::move(augmented), d.family());
    const CvResult res = cv_select(aug, cv, CvMethod::lasso);
    Vector W(p);
    for (Index j = 0; j < p; ++j) W[j] = std::fabs(res.coefficients[j]) - std::fabs(res.coefficients[j + p]);
    return W;
}

KnockoffThreshold knockoff_threshold(const Vector& W, double q)
{
    if (!(q > 0.0 && q < 1.0) && q != 1.0) throw Error(ErrorCode::invalid_argument, "q must lie in (0, 1]");
    std::vector<double> pos, neg, candidates;
    for (Index j = 0; j < W.size(); ++j) {
        if (W[j] > 0) pos.push_back(W[j]);
        if (W[j] < 0) neg.push_back(-W[j]);
        if (W[j] != 0) candidates.push_back(std::fabs(W[j]));
    }
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    std::sort(candidates.begin(), candidates.end());

    KnockoffThreshold out;
    for (double t : candidates) {
        const auto n_pos = static_cast<double>(pos.end() - std::lower_bound(pos.begin(), pos.end(), t));
        const auto n_neg = static_cast<double>(neg.end() - std::lower_bound(neg.begin(), neg.end(), t));
        if (n_pos > 0 && (1.0 + n_neg) / n_pos <= q) {
            out.threshold = t;
            break;
        }
    }
    for (Index j = 0; j < W.size(); ++j)
        if (W[j] >= out.threshold) out.selected.push_back(j);
    return out;
}

KnockoffResult knockoff_filter(const Dataset& d, const Matrix& sigma, double q, RngStream& rng, const CvSpec& cv,
                               std::optional<Vector> s)
{
    KnockoffResult res;
    res.q = q;
    const Vector sv = s ? *s : equicorrelated_s(sigma);
    res.knockoffs = make_knockoffs(d.X(), sigma, sv, rng);
    res.W = knockoff_stats(d, res.knockoffs, cv);
    auto t = knockoff_threshold(res.W, q);
    res.threshold = t.threshold;
    res.selected = std::move(t.selected);
    return res;
}

} // namespace fdrsel
